"""Cartan connection, horizontal frame, and flag curvature of real Finsler metrics.

The geodesic spray is computed from the order-2 vertical/mixed derivatives of
G, the nonlinear connection as its vertical derivative, and the curvature as
the spray's Riemann operator

    R^i_k = 2 dG^i/dx^k - u^j d2G^i/dx^j du^k
            + 2 G^j d2G^i/du^j du^k - dG^i/du^j dG^j/du^k,

which the order-4 jet of G determines exactly. The operator annihilates the
flag pole, g(R u, .) = 0, so the flag-curvature ratio is invariant under
X -> X + c u by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateFlagError, DegenerateMetricError
from .geometry import MetricDef, SamplePlan, unit_directions
from .jets import invert_jet_matrix


@dataclass
class CartanData:
    """Connection and curvature coefficients at a fixed (x, u)."""

    x: np.ndarray
    u: np.ndarray
    G: float
    g: np.ndarray              # fundamental tensor g_ij = (1/2) G_ij
    g_inv: np.ndarray
    spray: np.ndarray          # G^i, geodesic equation xddot + 2 G = 0
    nonlinear: np.ndarray      # N^i_j = dG^i/du^j
    gamma_h: np.ndarray | None  # horizontal coefficients Gamma^j_{i;k}
    gamma_v: np.ndarray | None  # vertical coefficients Gamma^j_{ik}
    riemann: np.ndarray | None  # R^i_k of the spray

    def covariant_coeffs(self):
        """Gamma^i_{j;k} used for covariant derivatives along curves."""
        return self.gamma_h


def _spray_jets(m: MetricDef, x, u, order):
    """Spray coefficients G^i as jets of the given order (<= 2)."""
    jet = m.real_jet(x, u, order + 2)
    d = m.dim
    sp = jet.space
    g_rows = [[jet.extract(d + i).extract(d + j) * 0.5 for j in range(d)]
              for i in range(d)]
    g_inv = invert_jet_matrix(g_rows)
    useed = [sp.sibling(order).variable(d + k, float(u[k])) for k in range(d)]
    b = []
    for l in range(d):
        dG_l = jet.extract(d + l)
        acc = None
        for k in range(d):
            t = dG_l.extract(k) * useed[k]
            acc = t if acc is None else acc + t
        acc = acc - jet.extract(l).truncate(order)
        b.append(acc)
    spray = []
    for i in range(d):
        acc = None
        for l in range(d):
            t = g_inv[i][l] * b[l]
            acc = t if acc is None else acc + t
        spray.append(acc * 0.25)
    return jet, g_rows, g_inv, spray


def spray_coefficients(m: MetricDef, x, u) -> np.ndarray:
    """Values of the geodesic coefficients G^i(x, u) (fast path for ODEs)."""
    jet = m.real_jet(x, u, 2)
    d = m.dim
    g = np.empty((d, d))
    rhs = np.empty(d)
    for i in range(d):
        for j in range(i, d):
            g[i, j] = g[j, i] = 0.5 * jet.partial([d + i, d + j])
    for l in range(d):
        s = 0.0
        for k in range(d):
            s += jet.partial([d + l, k]) * u[k]
        rhs[l] = s - jet.partial([l])
    try:
        y = np.linalg.solve(g, rhs)
    except np.linalg.LinAlgError as exc:
        raise DegenerateMetricError(f"fundamental tensor singular at x={x}") from exc
    return 0.25 * y


def cartan(m: MetricDef, x, u, *, need_curvature=True) -> CartanData:
    """Cartan connection data at (x, u); curvature optional (cheaper without)."""
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    d = m.dim
    order = 2 if need_curvature else 1
    jet, g_rows, g_inv_rows, spray_j = _spray_jets(m, x, u, order)
    g = np.array([[g_rows[i][j].value for j in range(d)] for i in range(d)])
    cond = np.linalg.cond(g)
    if not np.isfinite(cond) or cond > 1e10:
        raise DegenerateMetricError(f"fundamental tensor condition number {cond:.2e}")
    g_inv = np.linalg.inv(g)
    spray = np.array([s.value for s in spray_j])
    N = np.array([[spray_j[i].partial([d + j]) for j in range(d)]
                  for i in range(d)])

    # delta_k f = d_k f - N^m_k dot d_m f on the order-1 jets of g_ij
    def delta(gjet, k):
        s = gjet.partial([k])
        for mm in range(d):
            s -= N[mm][k] * gjet.partial([d + mm])
        return s

    gamma_h = np.empty((d, d, d))
    for j in range(d):
        for i in range(d):
            for k in range(d):
                s = 0.0
                for l in range(d):
                    s += g_inv[j, l] * (delta(g_rows[i][l], k)
                                        + delta(g_rows[l][k], i)
                                        - delta(g_rows[i][k], l))
                gamma_h[j, i, k] = 0.5 * s
    gamma_v = np.empty((d, d, d))
    for j in range(d):
        for i in range(d):
            for k in range(d):
                s = 0.0
                for l in range(d):
                    s += g_inv[j, l] * g_rows[i][k].partial([d + l])
                gamma_v[j, i, k] = 0.5 * s

    riemann = None
    if need_curvature:
        riemann = np.empty((d, d))
        for i in range(d):
            for k in range(d):
                s = 2.0 * spray_j[i].partial([k])
                for j in range(d):
                    s -= u[j] * spray_j[i].partial([j, d + k])
                    s += 2.0 * spray[j] * spray_j[i].partial([d + j, d + k])
                    s -= spray_j[i].partial([d + j]) * spray_j[j].partial([d + k])
                riemann[i, k] = s
    return CartanData(x=x, u=u, G=jet.value, g=g, g_inv=g_inv, spray=spray,
                      nonlinear=N, gamma_h=gamma_h, gamma_v=gamma_v,
                      riemann=riemann)


def flag_curvature(m: MetricDef, x, u, X, *, data: CartanData | None = None) -> float:
    """Flag curvature of the plane span{u, X} with flag pole u."""
    data = data if data is not None else cartan(m, x, u, need_curvature=True)
    X = np.asarray(X, dtype=float)
    g = data.g
    RX = data.riemann @ X
    num = float(X @ g @ RX)
    gu = float(data.u @ g @ data.u)
    gX = float(X @ g @ X)
    guX = float(data.u @ g @ X)
    den = gu * gX - guX ** 2
    if den <= 1e-12 * max(1.0, gu * gX):
        raise DegenerateFlagError("flag plane numerically degenerate")
    return num / den


@dataclass
class RadialFlagBounds:
    """Extremes of the flag curvature over radial planes from a pole."""

    k_inf: float
    k_sup: float
    n_samples: int

    @property
    def lower_bound_constant(self) -> float:
        """K >= 0 with radial flag curvature >= -K^2."""
        return math.sqrt(max(0.0, -self.k_inf))


def radial_flag_bounds(m: MetricDef, pole, plan: SamplePlan | None = None,
                       *, geodesic_module=None) -> RadialFlagBounds:
    """Sample flag curvatures of radial planes along geodesic fans from the pole.

    Radial tangents are transported along geodesics (integrated by the
    geodesic module); flags are completed with deterministic directions.
    """
    from . import geodesic as geo
    plan = plan or SamplePlan()
    pole = np.asarray(pole, dtype=float)
    d = m.dim
    dirs = unit_directions(max(plan.n_dirs, 3), d, plan.seed)
    lo, hi = plan.radial_range
    ts = np.linspace(lo, hi, max(3, plan.n_points // len(dirs) + 1))
    flags = unit_directions(2 * d, d, plan.seed + 1)
    k_inf, k_sup = math.inf, -math.inf
    count = 0
    for w in dirs:
        G0 = m.value(pole, w)
        path = geo.integrate_geodesic(m, pole, w / math.sqrt(G0), hi * 1.05)
        for t in ts:
            xt, ut = path.state_at(min(t, path.arc_length * 0.999))
            data = cartan(m, xt, ut, need_curvature=True)
            for X in flags:
                gu = float(ut @ data.g @ ut)
                gX = float(X @ data.g @ X)
                guX = float(ut @ data.g @ X)
                if gu * gX - guX ** 2 < 1e-8 * gu * gX:
                    continue
                k = flag_curvature(m, xt, ut, X, data=data)
                k_inf = min(k_inf, k)
                k_sup = max(k_sup, k)
                count += 1
    return RadialFlagBounds(k_inf=k_inf, k_sup=k_sup, n_samples=count)
