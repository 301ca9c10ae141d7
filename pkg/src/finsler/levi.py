"""Complex-side distance analytics: Levi forms of rho^2 and gradient identities.

The Levi form of the squared distance contracted against a unit (1,0) vector
is computed through the realification identity

    4 d^2 rho^2 / dz dzbar (v, vbar) = D^2 rho^2(u, u) + D^2 rho^2(Ju, Ju),

with u the realification of v and D^2 the covariant Hessian at reference
vector T. Each covariant Hessian is a geodesic second difference plus the
connection correction, exactly as in the real Hessian route. The distance
function is kept away from the pole, where it is not smooth.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cartan import cartan, spray_coefficients
from .errors import ConfigurationError
from .geodesic import (PoleDistance, _integrate_affine, _second_difference,
                       legendre_gradient)
from .geometry import (MetricDef, apply_J, complex_to_real_components,
                       realify_metric)
from .jets import JetSpace, wirtinger
from .report import VerificationReport


@dataclass
class LeviSample:
    """One Levi-form sample of rho^2 with its comparison bound."""

    z: np.ndarray
    v: np.ndarray
    levi_value: float
    rho: float
    bound: float                 # 2 + rho K
    margin: float
    fd_cross_check: float | None
    routes_gap: float | None


class LeviField:
    """Levi-form evaluator of rho^2 for a strongly convex complex metric."""

    def __init__(self, m: MetricDef, pole, *, curvature_K=0.0):
        if not m.is_complex:
            raise ConfigurationError("Levi analytics need a complex metric")
        self.m = m
        self.mr = realify_metric(m)
        self.pole_z = np.asarray(pole, dtype=complex)
        self.pole = complex_to_real_components(self.pole_z)
        self.pd = PoleDistance(self.mr, self.pole)
        self.K = float(curvature_K)

    def _covariant_d2_rho2(self, x, w, base, h):
        """D^2 rho^2 (w, w) by geodesic differencing plus connection correction."""
        fwd = _integrate_affine(self.mr, x, w, h, rtol=1e-12, atol=1e-14)
        bwd = _integrate_affine(self.mr, x, w, -h, rtol=1e-12, atol=1e-14)

        def rho2_at(sol, t):
            q = sol.sol(t)[:self.mr.dim]
            return self.pd.rho(q, guess=base.w + (q - x)).value ** 2

        samples = [rho2_at(bwd, -h), rho2_at(bwd, -h / 2), base.value ** 2,
                   rho2_at(fwd, h / 2), rho2_at(fwd, h)]
        d2 = _second_difference(samples, h)
        conn_T = cartan(self.mr, x, base.T, need_curvature=False)
        # d(rho^2) = 2 rho g_T(T, .) and the reference vector is scale free
        drho2 = 2.0 * base.value * (conn_T.g @ base.T)
        corr = float(drho2 @ (2.0 * spray_coefficients(self.mr, x, w)
                              - np.einsum("ijk,j,k->i", conn_T.gamma_h, w, w)))
        return d2 + corr

    def _straight_d2_rho2(self, x, w, base, h):
        """Coordinate second difference of rho^2 along a straight segment."""

        def rho2(q):
            return self.pd.rho(q, guess=base.w + (q - x)).value ** 2

        samples = [rho2(x - h * w), rho2(x - 0.5 * h * w), base.value ** 2,
                   rho2(x + 0.5 * h * w), rho2(x + h * w)]
        return _second_difference(samples, h)

    def sample(self, z, v, *, h=None, fd_check=False) -> LeviSample:
        """Levi value of rho^2 at (z, v) with the bound 2 + rho K."""
        z = np.asarray(z, dtype=complex)
        v = np.asarray(v, dtype=complex)
        x = complex_to_real_components(z)
        if float(np.linalg.norm(x - self.pole)) < 1e-3:
            raise ConfigurationError("Levi sampling excludes a neighborhood of the pole")
        # normalize to a metric-unit vector
        v = v / math.sqrt(self.m.value(z, v))
        u = complex_to_real_components(v)
        Ju = apply_J(u)
        base = self.pd.rho(x)
        if h is None:
            margin = self.mr.domain.margin(x)
            h = min(0.04, 0.3 * (margin if math.isfinite(margin) else 1.0),
                    0.45 * base.value)
        d2_u = self._covariant_d2_rho2(x, u, base, h)
        d2_Ju = self._covariant_d2_rho2(x, Ju, base, h)
        levi_value = 0.25 * (d2_u + d2_Ju)
        fd_value = None
        gap = None
        if fd_check:
            s_u = self._straight_d2_rho2(x, u, base, h)
            s_Ju = self._straight_d2_rho2(x, Ju, base, h)
            fd_value = 0.25 * (s_u + s_Ju)
            gap = abs(fd_value - levi_value)
        bound = 2.0 + base.value * self.K
        return LeviSample(z=z, v=v, levi_value=levi_value, rho=base.value,
                          bound=bound, margin=bound - levi_value,
                          fd_cross_check=fd_value, routes_gap=gap)


def levi_rho2(m: MetricDef, pole, z, v, *, curvature_K=0.0, fd_check=False,
              field: LeviField | None = None) -> LeviSample:
    field = field or LeviField(m, pole, curvature_K=curvature_K)
    return field.sample(z, v, fd_check=fd_check)


# -- Hessian/Levi identity for smooth test functions ---------------------------------


def levi_identity_residual(m: MetricDef, f, z, X, *, mr=None) -> dict:
    """Residual of 4 f_{;a bbar} Xo Xobar = D^2 f(X, X) + D^2 f(JX, JX).

    ``f`` is a smooth closed-form function of the real point coordinates,
    evaluable on jets. The left side uses Wirtinger derivatives of f, the
    right side the covariant Hessian at reference vector grad f; both sides
    are assembled through unrelated code paths.
    """
    mr = mr or realify_metric(m)
    z = np.asarray(z, dtype=complex)
    x = complex_to_real_components(z)
    X = np.asarray(X, dtype=float)
    d = mr.dim
    n = m.n

    sp = JetSpace.get(d, 2, False)
    fj = f([sp.variable(i, x[i]) for i in range(d)])
    grad = np.array([fj.partial([i]) for i in range(d)])
    hess = np.array([[fj.partial([i, j]) for j in range(d)] for i in range(d)])

    w = wirtinger(fj, [(a, n + a) for a in range(n)])
    Xo = X[:n] + 1j * X[n:]       # (1,0)-part of X in the d/dz frame
    lhs = 0.0 + 0.0j
    for a in range(n):
        for b in range(n):
            lhs += w.partial([a, n + b]) * Xo[a] * np.conj(Xo[b])
    lhs = 4.0 * lhs

    Y = legendre_gradient(mr, grad, x)
    conn = cartan(mr, x, Y, need_curvature=False)

    def d2(wv):
        quad = float(wv @ hess @ wv)
        corr = float(np.einsum("kij,i,j->k", conn.gamma_h, wv, wv) @ grad)
        return quad - corr

    rhs = d2(X) + d2(apply_J(X))
    scale = max(1.0, abs(lhs), abs(rhs))
    return {"lhs": complex(lhs), "rhs": float(rhs),
            "residual": abs(lhs.real - rhs) + abs(lhs.imag),
            "relative_residual": (abs(lhs.real - rhs) + abs(lhs.imag)) / scale}


# -- gradient identities ---------------------------------------------------------------


def gradient_identity(m: MetricDef, pole, z, *, pd: PoleDistance | None = None,
                      tol=1e-6) -> VerificationReport:
    """Radial pairing identities of the distance gradient.

    Checks that the real pairing of grad(rho^2) with the arriving unit tangent
    is 2 rho, and that half of the complex pairing against the (1,0) part of
    the tangent is rho. The gradient is recovered from numerically
    differentiated rho^2 through the Legendre transform, independently of the
    shooting tangent.
    """
    mr = realify_metric(m)
    pole_x = complex_to_real_components(np.asarray(pole, dtype=complex))
    pd = pd or PoleDistance(mr, pole_x)
    z = np.asarray(z, dtype=complex)
    x = complex_to_real_components(z)
    base = pd.rho(x)
    d = mr.dim

    h = 1e-4 * (1.0 + float(np.linalg.norm(x)))
    df = np.empty(d)
    for i in range(d):
        e = np.zeros(d)
        e[i] = h
        fp = pd.rho(x + e, guess=base.w + e).value ** 2
        fm = pd.rho(x - e, guess=base.w - e).value ** 2
        fp2 = pd.rho(x + 0.5 * e, guess=base.w + 0.5 * e).value ** 2
        fm2 = pd.rho(x - 0.5 * e, guess=base.w - 0.5 * e).value ** 2
        d_h = (fp - fm) / (2 * h)
        d_h2 = (fp2 - fm2) / h
        df[i] = (4.0 * d_h2 - d_h) / 3.0

    Y = legendre_gradient(mr, df, x)
    conn_T = cartan(mr, x, base.T, need_curvature=False)
    real_pairing = float(Y @ conn_T.g @ base.T)

    T_c = base.T[:m.n] + 1j * base.T[m.n:]
    Y_c = Y[:m.n] + 1j * Y[m.n:]
    cj = m.complex_jet(z, T_c, 2)
    n = m.n
    levi_T = np.array([[cj.partial([n + a, 3 * n + b]) for b in range(n)]
                       for a in range(n)])
    complex_pairing = 0.5 * np.einsum("ab,a,b->", levi_T, Y_c, T_c.conj())

    rho = base.value
    err_real = abs(real_pairing - 2.0 * rho) / max(1.0, 2.0 * rho)
    err_complex = abs(complex_pairing - rho) / max(1.0, rho)
    return VerificationReport(
        name=f"gradient_identity:{m.family_id}",
        passed=err_real < tol and err_complex < tol,
        tolerance=tol,
        stats={"rho": rho, "real_pairing": real_pairing,
               "complex_pairing_re": float(complex_pairing.real),
               "complex_pairing_im": float(complex_pairing.imag),
               "relative_error_real": err_real,
               "relative_error_complex": err_complex})
