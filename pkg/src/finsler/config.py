"""Run configuration: loading, defaults, and effective-config echoing.

Configs are YAML documents (JSON is a YAML subset and loads unchanged). The
seed is mandatory so that identical configs give byte-identical reports; all
defaults are merged into the effective config and echoed into every report.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .errors import ConfigurationError
from .geometry import SamplePlan

DEFAULT_PLAN = {
    "n_points": 10,
    "n_dirs": 5,
    "radial_range": [0.1, 0.7],
}

DEFAULTS = {
    "outputs": {"directory": "finsler_out", "formats": ["json", "csv"]},
    "plans": {"default": DEFAULT_PLAN},
    "metrics": [],
    "maps": [],
    "pairs": [],
    "tolerance": 1e-6,
}


@dataclass
class RunConfig:
    """Validated, fully defaulted run configuration."""

    seed: int
    metrics: list
    maps: list
    pairs: list                   # (map_id, domain_id, target_id) triples for schwarz
    plans: dict
    outputs: dict
    tolerance: float
    raw: dict = field(default_factory=dict)

    def plan(self, name="default", **overrides) -> SamplePlan:
        base = dict(DEFAULT_PLAN)
        base.update(self.plans.get(name, {}))
        base.update(overrides)
        return SamplePlan(seed=self.seed, n_points=int(base["n_points"]),
                          n_dirs=int(base["n_dirs"]),
                          radial_range=tuple(base["radial_range"]))

    def effective(self) -> dict:
        return {
            "seed": self.seed,
            "metrics": self.metrics,
            "maps": self.maps,
            "pairs": self.pairs,
            "plans": {"default": DEFAULT_PLAN, **self.plans},
            "outputs": self.outputs,
            "tolerance": self.tolerance,
        }


def _merge_defaults(doc: dict) -> dict:
    out = dict(DEFAULTS)
    out.update(doc or {})
    merged_out = dict(DEFAULTS["outputs"])
    merged_out.update((doc or {}).get("outputs", {}))
    out["outputs"] = merged_out
    return out


def parse_config(doc: dict) -> RunConfig:
    doc = _merge_defaults(doc)
    if "seed" not in doc:
        raise ConfigurationError("config must declare a seed")
    try:
        seed = int(doc["seed"])
    except (TypeError, ValueError):
        raise ConfigurationError(f"seed must be an integer, got {doc['seed']!r}")
    metrics = doc.get("metrics", [])
    if not isinstance(metrics, list):
        raise ConfigurationError("metrics must be a list of family specs")
    for spec in metrics:
        if "family" not in spec:
            raise ConfigurationError(f"metric spec without family: {spec}")
    return RunConfig(
        seed=seed,
        metrics=metrics,
        maps=doc.get("maps", []),
        pairs=doc.get("pairs", []),
        plans=doc.get("plans", {}),
        outputs=doc["outputs"],
        tolerance=float(doc.get("tolerance", 1e-6)),
        raw=doc)


def load_config(path) -> RunConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"config file {path} does not exist")
    text = path.read_text()
    try:
        if path.suffix == ".json":
            doc = json.loads(text)
        else:
            doc = yaml.safe_load(text)
    except Exception as exc:
        raise ConfigurationError(f"cannot parse config {path}: {exc}")
    if not isinstance(doc, dict):
        raise ConfigurationError("config root must be a mapping")
    return parse_config(doc)


def thread_count() -> int:
    """Worker count from FINSLER_THREADS, default the available parallelism."""
    raw = os.environ.get("FINSLER_THREADS", "")
    if raw.strip():
        try:
            n = int(raw)
            if n >= 1:
                return n
        except ValueError:
            pass
    return os.cpu_count() or 1
