"""Command-line entry point.

    finsler <check|curvature|geodesic|distance|bounds|schwarz|replay>
            --config FILE [--out DIR] [--tolerance X]

Each command writes, per metric or map pair, a versioned JSON report with the
effective configuration embedded, plus CSV tables. Reports separate a
volatile ``metadata`` block (timestamps, versions) from the deterministic
``payload``; replay recomputes the payload from the embedded plan and
compares byte-for-byte, or within a tolerance when one is given.
"""

from __future__ import annotations

import argparse
import csv
import datetime
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import RunConfig, load_config, parse_config, thread_count
from .errors import ConfigurationError, FinslerError
from .geometry import complex_to_real_components, realify_metric, sample_points
from .metrics import build_map, check_metric, instantiate, plan_directions
from .report import canonical_json, _clean

SCHEMA = 1


def _metric_id(spec, idx):
    return spec.get("id", f"{spec.get('family', 'metric')}_{idx}")


def _report_doc(payload, config: RunConfig | None = None):
    return {
        "schema": SCHEMA,
        "metadata": {
            "generated_at": datetime.datetime.now(datetime.timezone.utc).isoformat(),
            "engine_version": __version__,
            "threads": thread_count(),
        },
        "payload": _clean(payload if config is None else
                          {**payload, "effective_config": config.effective()}),
    }


def _write_report(outdir: Path, command, item_id, payload, config):
    d = outdir / command / item_id
    d.mkdir(parents=True, exist_ok=True)
    doc = _report_doc(payload, config)
    with open(d / "report.json", "w") as fp:
        json.dump(doc, fp, indent=2, sort_keys=True)
        fp.write("\n")
    return d


def _write_csv(path: Path, header, rows):
    with open(path, "w", newline="") as fp:
        w = csv.writer(fp)
        w.writerow(header)
        for row in rows:
            w.writerow(row)


def _instantiate_all(config: RunConfig):
    out = []
    for i, spec in enumerate(config.metrics):
        out.append((_metric_id(spec, i), instantiate(spec)))
    return out


def cmd_check(config: RunConfig, outdir: Path) -> int:
    from .kahler import classify, weakly_kahler_pde_residual
    status = 0
    for mid, m in _instantiate_all(config):
        plan = config.plan()
        rep = check_metric(m, plan)
        kah = classify(m, plan)
        expectation = m.spec.get("expect", {})
        expect_class = expectation.get("kahler_class",
                                       m.metadata.get("kahler_class"))
        class_ok = True
        if expect_class not in (None, "unknown"):
            class_ok = kah.classification == expect_class
        payload = {
            "metric": mid,
            "validity": rep.to_dict(),
            "kahler": kah.to_dict(),
            "class_matches_expectation": class_ok,
        }
        if hasattr(m, "profile"):
            pde = weakly_kahler_pde_residual(m.profile)
            payload["weakly_kahler_pde"] = pde.to_dict()
            expect_pde = expectation.get("weakly_kahler_pde")
            if expect_pde is not None and bool(expect_pde) != pde.passed:
                class_ok = False
                payload["class_matches_expectation"] = False
        _write_report(outdir, "check", mid, payload, config)
        if not rep.passed or not class_ok:
            status = 1
        print(f"check {mid}: validity={'PASS' if rep.passed else 'FAIL'} "
              f"class={kah.classification}")
    return status


def cmd_curvature(config: RunConfig, outdir: Path) -> int:
    from .chern import holomorphic_sectional_curvature
    status = 0
    for mid, m in _instantiate_all(config):
        plan = config.plan()
        pts = sample_points(m, plan)
        dirs = plan_directions(m, plan.n_dirs, plan.seed + 3)
        rows = []
        for iz, z in enumerate(pts):
            for iv, v in enumerate(dirs):
                k = holomorphic_sectional_curvature(m, z, v)
                rows.append([iz, iv, repr(float(k))])
        ks = [float(r[2]) for r in rows]
        payload = {"metric": mid, "n_samples": len(rows),
                   "min": min(ks), "max": max(ks)}
        d = _write_report(outdir, "curvature", mid, payload, config)
        _write_csv(d / "holomorphic_curvature.csv",
                   ["point_index", "dir_index", "K_G"], rows)
        expect = m.metadata.get("holomorphic_curvature")
        if expect is not None and max(abs(k - expect) for k in ks) > 1e-5:
            status = 1
        print(f"curvature {mid}: K in [{min(ks):.6g}, {max(ks):.6g}]")
    return status


def cmd_geodesic(config: RunConfig, outdir: Path) -> int:
    from .geodesic import integrate_geodesic
    status = 0
    for mid, m in _instantiate_all(config):
        mr = realify_metric(m) if m.is_complex else m
        plan = config.plan()
        rng = np.random.default_rng(plan.seed)
        x0 = np.zeros(mr.dim)
        w = rng.standard_normal(mr.dim)
        u0 = w / math.sqrt(mr.value(x0, w))
        length = float(plan.radial_range[1])
        path = integrate_geodesic(mr, x0, u0, length)
        d = _write_report(outdir, "geodesic", mid, {
            "metric": mid, "arc_length": path.arc_length,
            "energy_drift": path.energy_drift, "steps": path.n_steps,
            "nfev": path.nfev, "normal": path.normal,
            "truncated": path.truncated}, config)
        with open(d / "path.csv", "w", newline="") as fp:
            path.to_csv(fp)
        if path.energy_drift > 1e-8:
            status = 1
        print(f"geodesic {mid}: drift={path.energy_drift:.2e} steps={path.n_steps}")
    return status


def cmd_distance(config: RunConfig, outdir: Path) -> int:
    from .geodesic import PoleDistance
    from .levi import LeviField
    status = 0
    for mid, m in _instantiate_all(config):
        mr = realify_metric(m) if m.is_complex else m
        plan = config.plan()
        pd = PoleDistance(mr, np.zeros(mr.dim))
        pts = sample_points(m, plan)
        rows = []
        worst = 0.0
        for i, z in enumerate(pts):
            x = complex_to_real_components(z) if m.is_complex else z
            r = pd.rho(x)
            rows.append([i, repr(float(r.value)), repr(float(r.residual))])
            closed = m.metadata.get("distance_from_origin")
            if closed == "norm":
                worst = max(worst, abs(r.value - math.sqrt(m.value(z, z))))
            elif closed == "atanh":
                worst = max(worst, abs(r.value - math.atanh(float(np.linalg.norm(z)))))
        payload = {"metric": mid, "n_samples": len(rows),
                   "max_closed_form_error": worst}
        d = _write_report(outdir, "distance", mid, payload, config)
        _write_csv(d / "distance.csv", ["point_index", "rho", "residual"], rows)
        if m.kind == "complex_strongly_convex":
            levi_rows, min_margin = _levi_table(m, pts[:4], plan)
            _write_csv(d / "levi.csv",
                       ["point_index", "levi_value", "rho", "bound", "margin"],
                       levi_rows)
            payload["levi_min_margin"] = min_margin
            if min_margin < -1e-3:
                status = 1
        if worst > 1e-6:
            status = 1
        print(f"distance {mid}: max closed-form error {worst:.2e}")
    return status


def _levi_table(m, pts, plan):
    from .levi import LeviField
    K = 0.0
    kg = m.metadata.get("holomorphic_curvature")
    if kg is not None and kg < 0:
        K = math.sqrt(-kg)
    field = LeviField(m, np.zeros(m.n, complex), curvature_K=K)
    dirs = plan_directions(m, 2, plan.seed + 5)
    rows = []
    min_margin = math.inf
    for i, z in enumerate(pts):
        for v in dirs:
            try:
                s = field.sample(z, v)
            except FinslerError:
                continue
            rows.append([i, repr(float(s.levi_value)), repr(float(s.rho)),
                         repr(float(s.bound)), repr(float(s.margin))])
            min_margin = min(min_margin, s.margin)
    return rows, min_margin


def cmd_bounds(config: RunConfig, outdir: Path) -> int:
    from .cartan import radial_flag_bounds
    from .schwarz import curvature_bounds
    status = 0
    for mid, m in _instantiate_all(config):
        plan = config.plan()
        dom = curvature_bounds(m, "domain", plan)
        payload = {"metric": mid,
                   "holomorphic_inf": dom.raw_inf, "holomorphic_sup": dom.raw_sup,
                   "K1": dom.value, "clamped": dom.clamped}
        try:
            mr = realify_metric(m) if m.is_complex else m
            rb = radial_flag_bounds(mr, np.zeros(mr.dim),
                                    config.plan(n_points=plan.n_points // 2 or 4))
            payload["radial_flag_inf"] = rb.k_inf
            payload["radial_flag_sup"] = rb.k_sup
            payload["K_constant"] = rb.lower_bound_constant
        except FinslerError as exc:
            payload["radial_flag_error"] = str(exc)
            status = 1
        _write_report(outdir, "bounds", mid, payload, config)
        print(f"bounds {mid}: K1={payload['K1']:.6g} "
              f"radial=[{payload.get('radial_flag_inf', float('nan')):.6g}, "
              f"{payload.get('radial_flag_sup', float('nan')):.6g}]")
    return status


def _build_certificate(config: RunConfig, pair):
    from .schwarz import certify_schwarz
    metrics = {mid: m for mid, m in _instantiate_all(config)}
    maps = {}
    for i, spec in enumerate(config.maps):
        mp = build_map(spec)
        maps[spec.get("id", mp.id)] = mp
    map_id, dom_id, tgt_id = pair["map"], pair["domain"], pair["target"]
    if map_id not in maps:
        raise ConfigurationError(f"unknown map id {map_id!r}")
    if dom_id not in metrics or tgt_id not in metrics:
        raise ConfigurationError(f"unknown metric id in pair {pair}")
    return certify_schwarz(maps[map_id], metrics[dom_id], metrics[tgt_id],
                           config.plan(), tolerance=config.tolerance)


def cmd_schwarz(config: RunConfig, outdir: Path) -> int:
    status = 0
    if not config.pairs:
        raise ConfigurationError("schwarz command needs a pairs list")
    for pair in config.pairs:
        cert = _build_certificate(config, pair)
        pair_id = f"{cert.map_id}__{cert.domain_id}__{cert.target_id}"
        payload = {"certificate": cert.to_payload()}
        d = _write_report(outdir, "schwarz", pair_id, payload, config)
        expect_pass = pair.get("expect_pass")
        if expect_pass is not None and bool(expect_pass) != cert.passed:
            status = 1
        print(f"schwarz {pair_id}: ratio={cert.max_ratio:.8g} "
              f"bound={cert.bound:.8g} {'PASS' if cert.passed else 'FAIL'}")
    return status


def cmd_replay(cert_path: Path, tolerance: float | None) -> int:
    with open(cert_path) as fp:
        doc = json.load(fp)
    payload = doc.get("payload", doc)
    stored = payload.get("certificate", {})
    if stored.get("schema") != SCHEMA:
        raise ConfigurationError(
            f"certificate schema {stored.get('schema')!r} does not match {SCHEMA}")
    config = parse_config(payload["effective_config"])
    pair = {"map": stored["map_id"], "domain": stored["domain_id"],
            "target": stored["target_id"]}
    for p in config.pairs:
        if (p["map"], p["domain"], p["target"]) == \
                (stored["map_id"], stored["domain_id"], stored["target_id"]):
            pair = p
            break
    cert = _build_certificate(config, pair)
    fresh = cert.to_payload()
    if tolerance is None:
        ok = canonical_json(fresh) == canonical_json(stored)
        mode = "bitwise"
    else:
        keys = ("K1", "K2", "bound", "max_ratio")
        ok = all(abs(float(fresh[k]) - float(stored[k])) <= tolerance for k in keys) \
            and fresh["passed"] == stored["passed"]
        mode = f"tolerance {tolerance:g}"
    print(f"replay {cert_path}: {'PASS' if ok else 'FAIL'} ({mode})")
    return 0 if ok else 1


COMMANDS = {
    "check": cmd_check,
    "curvature": cmd_curvature,
    "geodesic": cmd_geodesic,
    "distance": cmd_distance,
    "bounds": cmd_bounds,
    "schwarz": cmd_schwarz,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="finsler",
        description="Numerical Finsler geometry engine: validity checks, "
                    "curvatures, geodesics, distance analytics, and "
                    "Schwarz-ratio certification.")
    parser.add_argument("command", choices=list(COMMANDS) + ["replay"])
    parser.add_argument("--config", help="YAML or JSON run configuration")
    parser.add_argument("--out", default=None, help="output directory")
    parser.add_argument("--tolerance", type=float, default=None,
                        help="numeric tolerance (replay: compare within it)")
    parser.add_argument("--certificate", default=None,
                        help="certificate file for replay")
    args = parser.parse_args(argv)

    try:
        if args.command == "replay":
            cert = args.certificate or args.config
            if not cert:
                parser.error("replay needs --certificate FILE")
            return cmd_replay(Path(cert), args.tolerance)
        if not args.config:
            parser.error(f"{args.command} needs --config FILE")
        config = load_config(args.config)
        if args.tolerance is not None:
            config.tolerance = args.tolerance
        outdir = Path(args.out or config.outputs.get("directory", "finsler_out"))
        return COMMANDS[args.command](config, outdir)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except FinslerError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
