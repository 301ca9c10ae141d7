"""Geodesic flow, exponential map, shooting distance, Jacobi fields, index form.

Geodesics solve xddot^i + 2 G^i(x, xdot) = 0 in an affine parameter; the energy
G(x, xdot) is a first integral and its drift along the integrated path is the
reported accuracy proxy. Covariant derivatives along a curve use the
connection coefficients evaluated at the reference vector T, the curve's own
velocity, which along geodesics makes the Cartan and Chern-type derivatives
coincide.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .cartan import CartanData, cartan, spray_coefficients
from .errors import ConfigurationError, ShootingError
from .geometry import MetricDef, unit_directions


def _rhs(m):
    d = m.dim

    def fn(t, y):
        x = y[:d]
        u = y[d:]
        return np.concatenate([u, -2.0 * spray_coefficients(m, x, u)])

    return fn


def _domain_events(m, x0):
    if m.domain.kind == "all" or not math.isfinite(m.domain.margin(x0)):
        return None

    def ev(t, y):
        return m.domain.margin(y[:len(y) // 2]) - 1e-9

    ev.terminal = True
    ev.direction = -1
    return [ev]


def _integrate_affine(m, x0, u0, t_end, *, rtol=1e-11, atol=1e-13, dense=True):
    x0 = np.asarray(x0, dtype=float)
    u0 = np.asarray(u0, dtype=float)
    events = _domain_events(m, x0)
    sol = solve_ivp(_rhs(m), (0.0, t_end), np.concatenate([x0, u0]),
                    method="DOP853", rtol=rtol, atol=atol,
                    dense_output=dense, events=events)
    if not sol.success and sol.status != 1:
        raise ShootingError(f"geodesic integration failed: {sol.message}")
    return sol


@dataclass
class GeodesicPath:
    """Discretized geodesic with dense interpolation in an affine parameter."""

    metric: MetricDef
    x0: np.ndarray
    u0: np.ndarray
    speed: float                     # sqrt(G(x0, u0)); arc length = speed * t
    t_end: float
    sol: object
    arc_length: float
    energy0: float
    energy_drift: float
    n_steps: int
    nfev: int
    normal: bool
    truncated: bool

    @property
    def samples(self):
        """(arc_t, x, u) triples at the integrator's accepted steps."""
        out = []
        d = self.metric.dim
        for t, y in zip(self.sol.t if hasattr(self.sol, "t") else [], self._ys.T):
            out.append((t * self.speed, y[:d], y[d:]))
        return out

    def state_at(self, s):
        """(x, u) at arc-length parameter ``s`` (signed, within the path)."""
        d = self.metric.dim
        t = s / self.speed if self.speed > 0 else 0.0
        t = min(max(t, min(0.0, self.t_end)), max(0.0, self.t_end))
        y = self.sol.sol(t)
        return y[:d], y[d:]

    def endpoint(self):
        return self.state_at(self.arc_length if self.t_end >= 0 else -self.arc_length)

    def to_csv(self, fp, n=65):
        """Write t, x, u, G rows over an even arc grid."""
        w = csv.writer(fp)
        d = self.metric.dim
        w.writerow(["t"] + [f"x{i}" for i in range(d)] + [f"u{i}" for i in range(d)] + ["G"])
        lo = 0.0 if self.t_end >= 0 else -self.arc_length
        hi = self.arc_length if self.t_end >= 0 else 0.0
        for s in np.linspace(lo, hi, n):
            x, u = self.state_at(s)
            w.writerow([repr(float(s))] + [repr(float(c)) for c in x]
                       + [repr(float(c)) for c in u]
                       + [repr(self.metric.value(x, u))])


def integrate_geodesic(m: MetricDef, x0, u0, length, *, rtol=1e-11,
                       atol=1e-13) -> GeodesicPath:
    """Geodesic of arc length ``length`` (may be negative to extend backwards)."""
    if length == 0:
        raise ConfigurationError("geodesic length must be nonzero")
    x0 = np.asarray(x0, dtype=float)
    u0 = np.asarray(u0, dtype=float)
    G0 = m.value(x0, u0)
    if G0 <= 0:
        raise ConfigurationError("initial velocity must be nonzero")
    speed = math.sqrt(G0)
    t_end = length / speed
    sol = _integrate_affine(m, x0, u0, t_end, rtol=rtol, atol=atol)
    truncated = sol.status == 1
    t_reached = sol.t[-1]
    d = m.dim
    drift = 0.0
    for t, y in zip(sol.t, sol.y.T):
        drift = max(drift, abs(m.value(y[:d], y[d:]) - G0))
    path = GeodesicPath(
        metric=m, x0=x0, u0=u0, speed=speed, t_end=t_reached, sol=sol,
        arc_length=abs(t_reached) * speed, energy0=G0, energy_drift=drift,
        n_steps=len(sol.t) - 1, nfev=sol.nfev,
        normal=abs(G0 - 1.0) < 1e-9, truncated=truncated)
    path._ys = sol.y
    return path


def exp_map(m: MetricDef, p, v):
    """Endpoint of the geodesic with initial velocity v after unit affine time."""
    p = np.asarray(p, dtype=float)
    v = np.asarray(v, dtype=float)
    if float(np.linalg.norm(v)) == 0.0:
        return p.copy()
    sol = _integrate_affine(m, p, v, 1.0, dense=False)
    return sol.y[:m.dim, -1]


# -- boundary-value geodesics (shooting) -----------------------------------------


@dataclass
class RhoResult:
    """Distance from the pole plus the arriving unit tangent."""

    value: float
    T: np.ndarray
    w: np.ndarray                 # initial velocity reaching the target at t=1
    residual: float
    n_integrations: int
    upper_bound: bool = False     # set when the polyline fallback produced it


def polyline_upper_bound(m: MetricDef, p, q, *, n_segments=16, max_iter=300):
    """Length of an energy-minimized discrete path, an upper bound on d(p, q).

    Gradient descent (L-BFGS) over the interior nodes of a uniform polyline;
    total by construction, used as a certificate when shooting stalls.
    """
    from scipy.optimize import minimize
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    d = m.dim
    ts = np.linspace(0.0, 1.0, n_segments + 1)[1:-1]
    x0 = p + np.outer(ts, q - p)

    def energy(flat):
        pts = [p, *flat.reshape(-1, d), q]
        total = 0.0
        for a, b in zip(pts, pts[1:]):
            mid = 0.5 * (a + b)
            try:
                total += m.value(mid, (b - a) * n_segments) / n_segments
            except Exception:
                return 1e12
        return total

    res = minimize(energy, x0.ravel(), method="L-BFGS-B",
                   options={"maxiter": max_iter})
    pts = [p, *res.x.reshape(-1, d), q]
    length = 0.0
    for a, b in zip(pts, pts[1:]):
        mid = 0.5 * (a + b)
        length += math.sqrt(m.value(mid, b - a))
    return length, np.asarray(pts)


class PoleDistance:
    """Shooting-based distance field from a fixed pole, with warm starts.

    Gauss-Newton on the endpoint mismatch with Broyden rank-one updates and a
    cache of converged (target, velocity, jacobian) triples, so stencil
    queries around a point cost only a couple of extra integrations. Falls
    back to a deterministic direction grid when the local solve stalls.
    """

    def __init__(self, m: MetricDef, pole, *, rtol=1e-12, atol=1e-14,
                 cache_size=48):
        self.m = m
        self.pole = np.asarray(pole, dtype=float)
        self.rtol = rtol
        self.atol = atol
        self._cache = []
        self._cache_size = cache_size
        self.total_integrations = 0

    def _endpoint_full(self, w):
        self.total_integrations += 1
        sol = _integrate_affine(self.m, self.pole, w, 1.0,
                                rtol=self.rtol, atol=self.atol, dense=False)
        return sol.y[:, -1]

    def _endpoint(self, w):
        return self._endpoint_full(w)[:self.m.dim]

    def _fd_jacobian(self, w, F0):
        d = self.m.dim
        J = np.empty((d, d))
        h = 1e-6 * (1.0 + float(np.linalg.norm(w)))
        for j in range(d):
            wp = w.copy()
            wp[j] += h
            J[:, j] = (self._endpoint(wp) - F0) / h
        return J

    def _nearest(self, q):
        best, bd = None, math.inf
        for entry in self._cache:
            dist = float(np.linalg.norm(entry[0] - q))
            if dist < bd:
                best, bd = entry, dist
        return best

    def _remember(self, q, w, J):
        self._cache.append((q.copy(), w.copy(), J.copy()))
        if len(self._cache) > self._cache_size:
            self._cache.pop(0)

    def rho(self, q, *, guess=None) -> RhoResult:
        q = np.asarray(q, dtype=float)
        if float(np.linalg.norm(q - self.pole)) < 1e-14:
            return RhoResult(0.0, np.zeros_like(q), np.zeros_like(q), 0.0, 0)
        scale = 1.0 + float(np.linalg.norm(q - self.pole))
        # iterate toward the tight target; accept the documented tolerance
        tol = 3e-12 * scale
        tol_accept = 1e-9 * scale
        start = self.total_integrations

        near = self._nearest(q)
        if guess is not None:
            w0, J = np.asarray(guess, dtype=float), near[2] if near is not None else None
        elif near is not None:
            w0 = near[1] + (q - near[0])
            J = near[2]
        else:
            w0, J = q - self.pole, None

        best_res = math.inf
        for winit in self._starts(q, w0):
            w, J_fin, resid = self._gauss_newton(winit, q, J, tol)
            J = None
            if resid is not None:
                best_res = min(best_res, resid)
            if resid is not None and resid < tol_accept:
                y = self._endpoint_full(w)
                u_end = y[self.m.dim:]
                rho = math.sqrt(self.m.value(self.pole, w))
                self._remember(q, w, J_fin)
                return RhoResult(rho, u_end / rho, w, resid,
                                 self.total_integrations - start)
        raise ShootingError(f"shooting to {q} did not converge",
                            best_residual=best_res)

    def _gauss_newton(self, w, q, J, tol, max_iter=40):
        w = np.asarray(w, dtype=float).copy()
        try:
            F = self._endpoint(w) - q
        except Exception:
            return w, None, None
        refreshed = J is None
        if J is None:
            if float(np.linalg.norm(F)) < tol:
                J = np.eye(self.m.dim)
                return w, J, float(np.linalg.norm(F))
            J = self._fd_jacobian(w, F + q)
        for _ in range(max_iter):
            res = float(np.linalg.norm(F))
            if res < tol:
                return w, J, res
            try:
                step = np.linalg.solve(J, F)
            except np.linalg.LinAlgError:
                if refreshed:
                    return w, J, res
                J = self._fd_jacobian(w, F + q)
                refreshed = True
                continue
            lam = 1.0
            improved = False
            while lam >= 0.25:
                w_new = w - lam * step
                try:
                    F_new = self._endpoint(w_new) - q
                except Exception:
                    lam *= 0.5
                    continue
                if float(np.linalg.norm(F_new)) < res:
                    improved = True
                    break
                lam *= 0.5
            if not improved:
                if refreshed:
                    return w, J, res
                J = self._fd_jacobian(w, F + q)
                refreshed = True
                continue
            dw = w_new - w
            dF = F_new - F
            denom = float(dw @ dw)
            if denom > 0:
                J = J + np.outer(dF - J @ dw, dw) / denom
            w, F = w_new, F_new
        return w, J, float(np.linalg.norm(F))

    def _starts(self, q, w0):
        yield w0
        base = q - self.pole
        if float(np.linalg.norm(w0 - base)) > 1e-12:
            yield base
        r = float(np.linalg.norm(base))
        for dvec in unit_directions(2 * self.m.dim + 1, self.m.dim, seed=5):
            yield r * dvec


def distance(m: MetricDef, p, q, *, fallback=False, **kw) -> float:
    """Arc length of the connecting geodesic found by shooting from p.

    With ``fallback=True`` a stalled shoot degrades to the polyline
    upper-bound certificate instead of raising.
    """
    try:
        return PoleDistance(m, p, **kw).rho(q).value
    except ShootingError:
        if not fallback:
            raise
        value, _ = polyline_upper_bound(m, p, q)
        return value


# -- fields along geodesics --------------------------------------------------------


class _ConnectionCache:
    """Memoized Cartan data along a path, keyed by parameter value."""

    def __init__(self, path, need_curvature=True):
        self.path = path
        self.need_curvature = need_curvature
        self._memo = {}

    def at(self, s) -> CartanData:
        key = round(float(s), 12)
        data = self._memo.get(key)
        if data is None:
            x, u = self.path.state_at(s)
            data = cartan(self.path.metric, x, u,
                          need_curvature=self.need_curvature)
            self._memo[key] = data
        return data


@dataclass
class JacobiField:
    """Dense Jacobi field J with covariant derivative W along a normal geodesic."""

    path: GeodesicPath
    sol: object
    r: float

    def at(self, s):
        d = self.path.metric.dim
        y = self.sol.sol(min(max(s, 0.0), self.r))
        return y[:d], y[d:]

    def value(self, s):
        return self.at(s)[0]

    def cov_deriv(self, s):
        return self.at(s)[1]


def jacobi_field(path: GeodesicPath, J0, dJ0, *, rtol=1e-10) -> JacobiField:
    """Integrate the Jacobi equation along a normal geodesic path."""
    if not path.normal:
        raise ConfigurationError("Jacobi fields are integrated along normal paths")
    d = path.metric.dim
    conn = _ConnectionCache(path)

    def rhs(t, y):
        data = conn.at(t)
        J = y[:d]
        W = y[d:]
        T = data.u
        GJ = np.einsum("ijk,j,k->i", data.gamma_h, J, T)
        GW = np.einsum("ijk,j,k->i", data.gamma_h, W, T)
        return np.concatenate([W - GJ, -data.riemann @ J - GW])

    r = path.arc_length
    sol = solve_ivp(rhs, (0.0, r), np.concatenate([J0, dJ0]), method="DOP853",
                    rtol=rtol, atol=1e-12, dense_output=True)
    if not sol.success:
        raise ShootingError(f"Jacobi integration failed: {sol.message}")
    return JacobiField(path=path, sol=sol, r=r)


def jacobi_boundary_field(path: GeodesicPath, u_target, *, rtol=1e-10):
    """Jacobi field with J(0) = 0 and J(r) = perpendicular part of u_target.

    Built from a fundamental system of Jacobi fields; also reports sign
    changes of the boundary determinant (conjugate-point monitor).
    """
    d = path.metric.dim
    conn = _ConnectionCache(path)

    def rhs(t, y):
        data = conn.at(t)
        T = data.u
        Y = y.reshape(2 * d, d)
        J = Y[:d]
        W = Y[d:]
        GJ = np.einsum("ijk,jc,k->ic", data.gamma_h, J, T)
        GW = np.einsum("ijk,jc,k->ic", data.gamma_h, W, T)
        return np.concatenate([W - GJ, -np.einsum("ik,kc->ic", data.riemann, J) - GW]).ravel()

    r = path.arc_length
    y0 = np.concatenate([np.zeros((d, d)), np.eye(d)]).ravel()
    sol = solve_ivp(rhs, (0.0, r), y0, method="DOP853", rtol=rtol, atol=1e-12,
                    dense_output=True)
    if not sol.success:
        raise ShootingError(f"Jacobi fundamental system failed: {sol.message}")
    dets = [np.linalg.det(sol.sol(t).reshape(2 * d, d)[:d]) for t in
            np.linspace(r * 1e-3, r, 33)]
    zero_crossings = sum(1 for a, b in zip(dets, dets[1:]) if a * b < 0)

    data_r = conn.at(r)
    T_r = data_r.u
    gT = data_r.g
    u_target = np.asarray(u_target, dtype=float)
    u_perp = u_target - (float(u_target @ gT @ T_r) / float(T_r @ gT @ T_r)) * T_r
    M = sol.sol(r).reshape(2 * d, d)[:d]
    c = np.linalg.solve(M, u_perp)

    class _BVP:
        def at(self, s):
            Y = sol.sol(min(max(s, 0.0), r)).reshape(2 * d, d)
            return Y[:d] @ c, Y[d:] @ c

        def value(self, s):
            return self.at(s)[0]

        def cov_deriv(self, s):
            return self.at(s)[1]

    out = _BVP()
    out.zero_crossings = zero_crossings
    out.u_perp = u_perp
    return out


@dataclass
class IndexFormResult:
    value: float
    quadrature_error: float


def index_form(path: GeodesicPath, xi, eta, *, panels=12,
               xi_cov=None, eta_cov=None) -> IndexFormResult:
    """Morse index form I(xi, eta) along a normal geodesic.

    Fields are callables of the arc parameter; their component along T is
    projected out pointwise. Covariant derivatives are taken from the
    optional ``*_cov`` callables, else by high-order differencing of the
    projected field. Quadrature is composite Gauss-Legendre with the error
    estimated from one coarsening step.
    """
    if not path.normal:
        raise ConfigurationError("the index form is defined along normal paths")
    r = path.arc_length
    conn = _ConnectionCache(path)

    def projected(f):
        def g(s):
            data = conn.at(s)
            T = data.u
            val = np.asarray(f(s), dtype=float)
            return val - (float(val @ data.g @ T) / float(T @ data.g @ T)) * T
        return g

    xi_p = projected(xi)
    eta_p = projected(eta)

    def cov(fp, s, given):
        if given is not None:
            # caller supplies the covariant derivative of the (already
            # perpendicular) field directly
            return np.asarray(given(s), dtype=float)
        data = conn.at(s)
        h = max(r * 1e-5, 1e-8)
        raw = (-fp(s + 2 * h) + 8 * fp(s + h) - 8 * fp(s - h) + fp(s - 2 * h)) / (12 * h)
        return raw + np.einsum("ijk,j,k->i", data.gamma_h, fp(s), data.u)

    def integrand(s):
        data = conn.at(s)
        xv = xi_p(s)
        ev_ = eta_p(s)
        dx = cov(xi_p, s, xi_cov)
        de = cov(eta_p, s, eta_cov)
        return float(dx @ data.g @ de) - float((data.riemann @ xv) @ data.g @ ev_)

    nodes, weights = np.polynomial.legendre.leggauss(4)

    def quad(n_panels):
        total = 0.0
        edges = np.linspace(0.0, r, n_panels + 1)
        for a, b in zip(edges, edges[1:]):
            mid = 0.5 * (a + b)
            half = 0.5 * (b - a)
            for t, w in zip(nodes, weights):
                total += w * half * integrand(mid + half * t)
        return total

    fine = quad(panels)
    coarse = quad(max(2, panels // 2))
    return IndexFormResult(value=fine, quadrature_error=abs(fine - coarse))


# -- Legendre transform and gradients -----------------------------------------------


def legendre_gradient(m: MetricDef, df, x, *, tol=1e-10, max_iter=60):
    """Solve g_ij(x, Y) Y^j = df_i for Y (the metric gradient of f at x).

    ``df`` is the differential as a covector array, or a callable point
    function differentiated exactly through jets.
    """
    x = np.asarray(x, dtype=float)
    d = m.dim
    if callable(df):
        from .jets import JetSpace
        sp = JetSpace.get(d, 1, False)
        fj = df([sp.variable(i, x[i]) for i in range(d)])
        df = np.array([fj.partial([i]) for i in range(d)])
    df = np.asarray(df, dtype=float)
    if float(np.linalg.norm(df)) == 0.0:
        raise ConfigurationError("gradient undefined where df = 0")
    scale = float(np.linalg.norm(df))

    best_res = math.inf
    seeds = [df, np.ones(d)]
    seeds.extend(unit_directions(3, d, seed=2) * scale)
    for Y in seeds:
        Y = np.asarray(Y, dtype=float).copy()
        if float(np.linalg.norm(Y)) < 1e-12:
            continue
        for _ in range(max_iter):
            jet = m.real_jet(x, Y, 2)
            F = np.array([0.5 * jet.partial([d + i]) for i in range(d)]) - df
            res = float(np.linalg.norm(F))
            best_res = min(best_res, res)
            if res < tol * scale:
                return Y
            g = np.empty((d, d))
            for i in range(d):
                for j in range(i, d):
                    g[i, j] = g[j, i] = 0.5 * jet.partial([d + i, d + j])
            try:
                step = np.linalg.solve(g, F)
            except np.linalg.LinAlgError:
                break
            # damped Newton keeps iterates on the slit bundle
            lam = 1.0
            while lam > 1e-4 and float(np.linalg.norm(Y - lam * step)) < 1e-10 * scale:
                lam *= 0.5
            Y = Y - lam * step
    raise ShootingError("Legendre gradient Newton iteration did not converge",
                        best_residual=best_res)


# -- distance Hessian ---------------------------------------------------------------


@dataclass
class HessianRhoResult:
    """Distance Hessian H(rho)(u,u) computed along two independent routes."""

    value: float                 # geodesic second-difference route
    value_index_form: float      # I(J, J) with the boundary Jacobi field
    discrepancy: float
    rho: float
    agreed: bool
    zero_crossings: int = 0


def _second_difference(fvals, h):
    """Richardson-extrapolated central second difference from samples at
    [-h, -h/2, 0, h/2, h]."""
    fm, fm2, f0, fp2, fp = fvals
    d_h = (fp - 2 * f0 + fm) / h ** 2
    d_h2 = (fp2 - 2 * f0 + fm2) / (0.5 * h) ** 2
    return (4.0 * d_h2 - d_h) / 3.0


def hessian_rho(m: MetricDef, pole, x, u, *, pd: PoleDistance | None = None,
                h=None, agreement_tol=1e-4, both_routes=True) -> HessianRhoResult:
    """H(rho)(u,u) at x for the distance function rho from the pole.

    Route one differentiates rho twice along the geodesic through (x, u) and
    subtracts the connection correction relating the curve's own reference
    vector to the radial one. Route two evaluates the index form on the
    Jacobi field matching u at the endpoint. Disagreement beyond
    ``agreement_tol`` is reported, not hidden. ``both_routes=False`` skips
    the index-form route for bulk scans.
    """
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    if float(np.linalg.norm(x - np.asarray(pole, dtype=float))) < 1e-6:
        raise ConfigurationError("distance Hessian undefined at the pole")
    pd = pd or PoleDistance(m, pole)
    base = pd.rho(x)
    rho0, T = base.value, base.T

    conn_T = cartan(m, x, T, need_curvature=False)
    gT = conn_T.g
    u = u / math.sqrt(float(u @ gT @ u))

    if h is None:
        margin = m.domain.margin(x)
        # stencil wide enough that the shooting tolerance does not dominate
        # the second difference, narrow enough to stay in the domain
        h = min(0.04, 0.3 * (margin if math.isfinite(margin) else 1.0),
                0.45 * rho0)

    fwd = _integrate_affine(m, x, u, h, rtol=1e-12, atol=1e-14)
    bwd = _integrate_affine(m, x, u, -h, rtol=1e-12, atol=1e-14)

    def rho_at(sol, t):
        q = sol.sol(t)[:m.dim]
        return pd.rho(q, guess=base.w + (q - x)).value

    samples = [rho_at(bwd, -h), rho_at(bwd, -h / 2), rho0,
               rho_at(fwd, h / 2), rho_at(fwd, h)]
    d2 = _second_difference(samples, h)

    drho = gT @ T
    correction = float(drho @ (2.0 * spray_coefficients(m, x, u)
                               - np.einsum("ijk,j,k->i", conn_T.gamma_h, u, u)))
    value_a = d2 + correction

    if not both_routes:
        return HessianRhoResult(value=value_a, value_index_form=math.nan,
                                discrepancy=math.nan, rho=rho0, agreed=True)

    # index-form route along the radial geodesic from the pole
    radial = integrate_geodesic(m, pole, base.w / rho0, rho0, rtol=1e-12)
    bvp = jacobi_boundary_field(radial, u)
    iform = index_form(radial, bvp.value, bvp.value,
                       xi_cov=bvp.cov_deriv, eta_cov=bvp.cov_deriv)
    value_b = iform.value

    disc = abs(value_a - value_b)
    return HessianRhoResult(value=value_a, value_index_form=value_b,
                            discrepancy=disc, rho=rho0,
                            agreed=disc <= agreement_tol * max(1.0, abs(value_a)),
                            zero_crossings=bvp.zero_crossings)
