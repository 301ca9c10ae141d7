"""Pullback densities, Gaussian curvature of disk metrics, Schwarz certification.

A holomorphic probe phi from the disk and a holomorphic map f between metric
domains induce conformal densities

    lambda^2(zeta) = G(phi(zeta); phi'(zeta)),
    sigma^2(zeta)  = H(f(phi(zeta)); (f o phi)'(zeta)),

composed here through jets over the disk parameter, so their logarithmic
Laplacians are exact. The certified inequality compares the pointwise ratio
sigma^2 / lambda^2 against the curvature-bound quotient K1/K2.

Sign conventions are pinned by the constant-curvature disk density, for which
the comparison d^2 log sigma^2 / dzeta dzetabar >= -(1/2) K2 sigma^2 holds
with equality; the one-half factor ties the comparison to the normalization
K = -(2/g) d^2 log g / dzeta dzetabar of the Gaussian curvature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import HypothesisViolationError
from .geometry import MetricDef, SamplePlan, sample_points
from .jets import CJet, Jet, JetSpace
from .kahler import classify, is_at_least
from .metrics import HoloMap, check_metric, plan_directions
from .report import VerificationReport


def _disk_cjet(zeta, order):
    sp = JetSpace.get(2, order, False)
    zeta = complex(zeta)
    return CJet(sp.variable(0, zeta.real), sp.variable(1, zeta.imag))


def _as_cjet(w, space):
    if isinstance(w, CJet):
        return w
    z = complex(w)
    return CJet(space.constant(z.real), space.constant(z.imag))


def _holo_derivative(w: CJet) -> CJet:
    """d/dzeta of a holomorphic CJet over (Re zeta, Im zeta); drops one order."""
    re_a = w.re.extract(0)
    re_b = w.re.extract(1)
    im_a = w.im.extract(0)
    im_b = w.im.extract(1)
    return CJet((re_a + im_b) * 0.5, (im_a - re_b) * 0.5)


def density_jet(density, zeta, order=2) -> Jet:
    """Jet of a disk density over (Re zeta, Im zeta).

    Seeds one order higher than requested so densities defined through a
    probe derivative still carry the requested order.
    """
    out = density(_disk_cjet(zeta, min(order + 1, 4)))
    out = out.re if isinstance(out, CJet) else out
    return out.truncate(order) if out.order > order else out


def gaussian_curvature(density, zeta) -> float:
    """K = -(2/g) d^2 log g / dzeta dzetabar for a positive disk density."""
    g = density_jet(density, zeta, 2)
    if g.value <= 0:
        raise ValueError(f"density must be positive, got {g.value}")
    lg = g.log()
    lap_quarter = 0.25 * (lg.partial([0, 0]) + lg.partial([1, 1]))
    return -2.0 / g.value * lap_quarter


def pullback_density(m: MetricDef, probe):
    """zeta -> G(phi(zeta); phi'(zeta)) as a CJet-evaluable density."""

    def density(zc: CJet):
        sp = zc.re.space
        pt = [_as_cjet(w, sp) for w in probe(zc)]
        dphi = [_holo_derivative(w) for w in pt]
        return m.formula(pt, dphi)

    return density


def mapped_density(m_target: MetricDef, f: HoloMap, probe):
    """zeta -> H((f o phi)(zeta); (f o phi)'(zeta)) as a CJet density."""

    def density(zc: CJet):
        sp = zc.re.space
        pt = [_as_cjet(w, sp) for w in probe(zc)]
        fz = [_as_cjet(w, sp) for w in f(pt)]
        dcomp = [_holo_derivative(w) for w in fz]
        return m_target.formula(fz, dcomp)

    return density


@dataclass
class PullbackRow:
    zeta: complex
    lam2: float
    sigma2: float
    ratio: float
    flag: str = ""


def _densities_at(f, m_domain, m_target, probe, zeta):
    zc = _disk_cjet(zeta, 1)
    sp = zc.re.space
    pt = [_as_cjet(w, sp) for w in probe(zc)]
    pt_vals = np.array([w.value for w in pt])
    dphi = np.array([_holo_derivative(w).value for w in pt])
    lam2 = m_domain.value(pt_vals, dphi) if float(np.linalg.norm(dphi)) > 0 else 0.0
    fz = f.apply_values(pt_vals)
    dfz = f.jacobian(pt_vals) @ dphi
    sigma2 = m_target.value(fz, dfz) if float(np.linalg.norm(dfz)) > 0 else 0.0
    return float(lam2), float(sigma2)


def pullback(f: HoloMap, m_domain: MetricDef, m_target: MetricDef, probe,
             grid) -> list:
    """Density table over a zeta grid.

    Points where the image derivative vanishes get the ratio as a refined
    limit when both densities vanish and zero when only the image density
    does; per-point evaluation failures are flagged, not raised.
    """
    rows = []
    for zeta in grid:
        zeta = complex(zeta)
        try:
            lam2, sigma2 = _densities_at(f, m_domain, m_target, probe, zeta)
        except Exception as exc:
            rows.append(PullbackRow(zeta, math.nan, math.nan, math.nan,
                                    flag=f"error:{type(exc).__name__}"))
            continue
        eps = 1e-12
        if lam2 > eps:
            rows.append(PullbackRow(zeta, lam2, sigma2, sigma2 / lam2))
        elif sigma2 <= eps:
            vals = []
            for k in range(4):
                zz = zeta + 1e-4 * np.exp(2j * math.pi * k / 4)
                try:
                    l2, s2 = _densities_at(f, m_domain, m_target, probe, zz)
                    if l2 > eps:
                        vals.append(s2 / l2)
                except Exception:
                    pass
            ratio = float(np.mean(vals)) if vals else 0.0
            rows.append(PullbackRow(zeta, lam2, sigma2, ratio, flag="limit"))
        else:
            rows.append(PullbackRow(zeta, lam2, sigma2, math.inf, flag="degenerate"))
    return rows


@dataclass
class CurvatureBound:
    """Holomorphic sectional curvature extreme over a sample grid."""

    role: str
    value: float
    raw_inf: float
    raw_sup: float
    clamped: bool
    n_samples: int


def curvature_bounds(m: MetricDef, role: str,
                     plan: SamplePlan | None = None) -> CurvatureBound:
    """Sampled inf (domain role, clamped to <= 0) or sup (target role) of K_G."""
    from .chern import holomorphic_sectional_curvature
    plan = plan or SamplePlan(n_points=12, n_dirs=6)
    pts = sample_points(m, plan)
    dirs = plan_directions(m, plan.n_dirs, plan.seed + 3)
    lo, hi = math.inf, -math.inf
    count = 0
    for z in pts:
        for v in dirs:
            k = holomorphic_sectional_curvature(m, z, v)
            lo = min(lo, k)
            hi = max(hi, k)
            count += 1
    if role == "domain":
        clamped = lo > 0
        return CurvatureBound("domain", min(lo, 0.0), lo, hi, clamped, count)
    if role == "target":
        if hi >= 0:
            raise HypothesisViolationError(
                f"target curvature supremum {hi:.3e} is not negative")
        return CurvatureBound("target", hi, lo, hi, False, count)
    raise ValueError(f"unknown role {role!r}")


@dataclass
class SchwarzCertificate:
    """Replayable record of one Schwarz-quotient certification."""

    map_id: str
    domain_id: str
    target_id: str
    K1: float
    K2: float
    bound: float
    max_ratio: float
    argmax: dict
    passed: bool
    hypotheses: dict
    plan: dict
    tolerance: float
    schema: int = 1

    def to_payload(self):
        from .report import _clean
        return _clean({
            "schema": self.schema,
            "map_id": self.map_id,
            "domain_id": self.domain_id,
            "target_id": self.target_id,
            "K1": self.K1,
            "K2": self.K2,
            "bound": self.bound,
            "max_ratio": self.max_ratio,
            "argmax": self.argmax,
            "passed": self.passed,
            "hypotheses": self.hypotheses,
            "plan": self.plan,
            "tolerance": self.tolerance,
        })


def certify_schwarz(f: HoloMap, m_domain: MetricDef, m_target: MetricDef,
                    plan: SamplePlan | None = None, *, tolerance=1e-6,
                    check_hypotheses=True) -> SchwarzCertificate:
    """Certify sup H(f(z); df v) / G(z; v) <= K1/K2 over a sample grid.

    Hypothesis failures (domain not weakly Kaehler, validity failures,
    incompleteness) are recorded in the certificate; the comparison is still
    executed and labeled.
    """
    plan = plan or SamplePlan(n_points=14, n_dirs=17)
    hyp = {"checked": bool(check_hypotheses)}
    if check_hypotheses:
        cm = check_metric(m_domain, SamplePlan(seed=plan.seed, n_points=6, n_dirs=4,
                                               radial_range=plan.radial_range))
        kah = classify(m_domain, SamplePlan(seed=plan.seed, n_points=5, n_dirs=4,
                                            radial_range=plan.radial_range))
        hyp["domain_valid_metric"] = bool(cm.passed)
        hyp["domain_kahler_class"] = kah.classification
        hyp["domain_weakly_kahler"] = is_at_least(kah.classification, "weakly_kahler")
        hyp["domain_complete"] = bool(m_domain.metadata.get("complete", False))
        hyp["met"] = all((hyp["domain_valid_metric"], hyp["domain_weakly_kahler"],
                          hyp["domain_complete"]))
    k1 = curvature_bounds(m_domain, "domain", plan)
    k2 = curvature_bounds(m_target, "target", plan)
    bound = k1.value / k2.value

    pts = sample_points(m_domain, plan)
    dirs = plan_directions(m_domain, plan.n_dirs, plan.seed + 17)
    max_ratio = -math.inf
    argmax = {}
    table = []
    for iz, z in enumerate(pts):
        jac = f.jacobian(z)
        fz = f.apply_values(z)
        for iv, v in enumerate(dirs):
            G = m_domain.value(z, v)
            w = jac @ v
            H = m_target.value(fz, w) if float(np.linalg.norm(w)) > 0 else 0.0
            ratio = H / G
            table.append((iz, iv, G, H, ratio))
            if ratio > max_ratio:
                max_ratio = ratio
                argmax = {"point_index": iz, "dir_index": iv,
                          "z": list(z), "ratio": ratio}
    passed = max_ratio <= bound + tolerance
    cert = SchwarzCertificate(
        map_id=f.id, domain_id=m_domain.family_id, target_id=m_target.family_id,
        K1=k1.value, K2=k2.value, bound=bound, max_ratio=max_ratio,
        argmax=argmax, passed=bool(passed), hypotheses=hyp,
        plan=plan.to_dict(), tolerance=tolerance)
    cert.ratio_table = table
    return cert


def log_density_comparison(m_target: MetricDef, f: HoloMap, probe, K2,
                           grid, *, tolerance=1e-6) -> VerificationReport:
    """Check d^2 log sigma^2 / dzeta dzetabar >= -(1/2) K2 sigma^2 on a grid.

    Equality holds for the constant-curvature disk density, which pins the
    one-half convention.
    """
    density = mapped_density(m_target, f, probe)
    worst = math.inf
    rows = []
    for zeta in grid:
        sig_jet = density_jet(density, zeta, 2)
        if sig_jet.value <= 1e-14:
            continue
        lg = sig_jet.log()
        lhs = 0.25 * (lg.partial([0, 0]) + lg.partial([1, 1]))
        rhs = -0.5 * K2 * sig_jet.value
        margin = lhs - rhs
        worst = min(worst, margin)
        rows.append({"zeta": complex(zeta), "lhs": lhs, "rhs": rhs})
    return VerificationReport(
        name=f"log_density_comparison:{f.id}->{m_target.family_id}",
        passed=worst > -tolerance,
        tolerance=tolerance,
        stats={"min_margin": worst, "n_grid": len(rows)},
        samples=rows[:5])
