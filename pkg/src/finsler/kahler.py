"""Kaehler-class residuals and the unitary-invariant characterizations.

The three residuals measure symmetry failures of the horizontal connection
coefficients: full index symmetry, symmetry after radial contraction, and
symmetry after radial contraction paired against the vertical gradient of G.
Each pass implies the next by construction, so the classification chain is
monotone. Residuals are normalized by the sampled magnitude of the
coefficients to stay dimensionless across families.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .chern import chern_finsler
from .geometry import MetricDef, SamplePlan, sample_points, sample_vectors
from .jets import JetSpace
from .metrics import UnitaryProfile, instantiate
from .report import VerificationReport

CLASS_ORDER = ["strongly_kahler", "kahler", "weakly_kahler", "none"]


@dataclass
class KahlerReport:
    """Torsion-symmetry residuals and the resulting classification."""

    metric_id: str
    residual_strong: float
    residual_kahler: float
    residual_weak: float
    scale: float
    tolerance: float
    classification: str
    n_samples: int
    errors: list = field(default_factory=list)

    @property
    def passes(self):
        tol = self.tolerance * self.scale
        strong = self.residual_strong < tol
        kahler = strong or self.residual_kahler < tol
        weak = kahler or self.residual_weak < tol
        return {"strongly_kahler": strong, "kahler": kahler, "weakly_kahler": weak}

    def to_dict(self):
        return {
            "metric_id": self.metric_id,
            "residual_strong": self.residual_strong,
            "residual_kahler": self.residual_kahler,
            "residual_weak": self.residual_weak,
            "scale": self.scale,
            "tolerance": self.tolerance,
            "classification": self.classification,
            "n_samples": self.n_samples,
            "errors": list(self.errors),
        }


def classify(m: MetricDef, plan: SamplePlan | None = None, *,
             tolerance=1e-7) -> KahlerReport:
    """Classify the metric by its torsion residuals over a sample plan."""
    plan = plan or SamplePlan(n_points=8, n_dirs=4)
    pts = sample_points(m, plan)
    dirs = sample_vectors(m, plan)
    res_strong = 0.0
    res_kahler = 0.0
    res_weak = 0.0
    scale = 0.0
    errors = []
    count = 0
    for z in pts:
        for v in dirs:
            try:
                data = chern_finsler(m, z, v)
            except Exception as exc:
                errors.append(f"{type(exc).__name__}: {exc}")
                continue
            count += 1
            vn = np.asarray(v) / math.sqrt(data.G)
            tor = data.torsion_h
            res_strong = max(res_strong, float(np.abs(tor).max()))
            contracted = np.einsum("anm,m->an", tor, vn)
            res_kahler = max(res_kahler, float(np.abs(contracted).max()))
            weak = np.einsum("a,an->n", data.G_alpha / math.sqrt(data.G), contracted)
            res_weak = max(res_weak, float(np.abs(weak).max()))
            scale = max(scale, 1.0, float(np.abs(data.gamma_h).max()))
    tol = tolerance * max(scale, 1.0)
    if res_strong < tol:
        cls = "strongly_kahler"
    elif res_kahler < tol:
        cls = "kahler"
    elif res_weak < tol:
        cls = "weakly_kahler"
    else:
        cls = "none"
    return KahlerReport(
        metric_id=m.family_id, residual_strong=res_strong,
        residual_kahler=res_kahler, residual_weak=res_weak,
        scale=max(scale, 1.0), tolerance=tolerance, classification=cls,
        n_samples=count, errors=errors)


def is_at_least(classification: str, level: str) -> bool:
    return CLASS_ORDER.index(classification) <= CLASS_ORDER.index(level)


def un_invariant_kahler_check(profile: UnitaryProfile, *, complex_dim=2,
                              plan: SamplePlan | None = None) -> VerificationReport:
    """Compare the torsion classification with the closed-form profile shape.

    A unitary-invariant metric is Kaehler exactly when its profile has the
    gradient form f(t) + f'(t) s; the check instantiates the metric and runs
    the residual classification against that predicate.
    """
    spec = {"family": "un_invariant", "complex_dim": complex_dim,
            "params": {"profile": {}}}
    m = instantiate(spec)
    m.profile = profile
    m.formula = _profile_formula(profile, complex_dim)
    m.family_id = f"un_{profile.id}_{complex_dim}"
    if math.isfinite(profile.t_max):
        from .geometry import Domain
        m.domain = Domain("ball", math.sqrt(profile.t_max))
    plan = plan or SamplePlan(n_points=6, n_dirs=4, radial_range=(0.1, 0.6))
    rep = classify(m, plan)
    predicted = profile.is_gradient_form
    observed = is_at_least(rep.classification, "kahler")
    return VerificationReport(
        name=f"un_invariant_kahler_check:{profile.id}",
        passed=predicted == observed,
        tolerance=rep.tolerance,
        stats={"predicted_kahler": predicted, "observed_class": rep.classification,
               "residual_strong": rep.residual_strong,
               "residual_kahler": rep.residual_kahler,
               "residual_weak": rep.residual_weak},
        errors=rep.errors)


def _profile_formula(profile, n):
    from .jets import cabs2, cconj

    def formula(z, v):
        r = cabs2(v[0])
        t = cabs2(z[0])
        ip = v[0] * cconj(z[0])
        for a in range(1, n):
            r = r + cabs2(v[a])
            t = t + cabs2(z[a])
            ip = ip + v[a] * cconj(z[a])
        s = cabs2(ip) / r
        return r * profile(t, s)

    return formula


def weakly_kahler_pde_residual(profile: UnitaryProfile, *, grid_t=None,
                               grid_s=None, tolerance=1e-8) -> VerificationReport:
    """Residual of the weakly-Kaehler characterization for profile metrics.

    Evaluates, over a (t, s) grid with 0 <= s <= t,

        (phi - s phi_s)(phi + (t - s) phi_s)(phi_s - phi_t + s(phi_st + phi_ss))
        + s (t - s) phi_ss (phi (phi_s - phi_t) + s phi_s (phi_t + phi_s))

    and reports the maximum absolute value with its grid location.
    """
    t_hi = min(0.9, 0.9 * profile.t_max) if math.isfinite(profile.t_max) else 0.9
    grid_t = grid_t if grid_t is not None else np.linspace(1e-3, t_hi, 20)
    grid_s = grid_s if grid_s is not None else np.linspace(0.0, 1.0, 20)
    sp = JetSpace.get(2, 2, False)
    worst = 0.0
    argmax = (None, None)
    scale_terms = 1.0
    n_eval = 0
    for t in grid_t:
        for sfrac in grid_s:
            s = float(sfrac * t)
            phi_jet = profile(sp.variable(0, float(t)), sp.variable(1, s))
            if not hasattr(phi_jet, "partial"):
                phi, ps = float(phi_jet), 0.0
                pt = pss = pst = 0.0
            else:
                phi = phi_jet.value
                pt = phi_jet.partial([0])
                ps = phi_jet.partial([1])
                pss = phi_jet.partial([1, 1])
                pst = phi_jet.partial([0, 1])
            term1 = (phi - s * ps) * (phi + (t - s) * ps) * (ps - pt + s * (pst + pss))
            term2 = s * (t - s) * pss * (phi * (ps - pt) + s * ps * (pt + ps))
            lhs = term1 + term2
            n_eval += 1
            scale_terms = max(scale_terms,
                              (abs(phi) + abs(pt) + abs(ps) + abs(pss) + abs(pst)) ** 3)
            if abs(lhs) > worst:
                worst = abs(lhs)
                argmax = (float(t), s)
    tol = tolerance * scale_terms
    return VerificationReport(
        name=f"weakly_kahler_pde:{profile.id}",
        passed=worst < tol,
        tolerance=tol,
        stats={"max_residual": worst, "argmax_t": argmax[0], "argmax_s": argmax[1],
               "scale": scale_terms, "n_grid": n_eval})
