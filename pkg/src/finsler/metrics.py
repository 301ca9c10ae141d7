"""Built-in metric families, holomorphic map catalog, and metric validation.

Families are written against the generic scalar protocol of :mod:`finsler.jets`
so the same formula evaluates on plain complex numbers (fast values), on CJets
over real coordinates (full jets), and on CJets over disk parameters (pullback
densities). Pure p-norm metrics are not smooth where a component vanishes, so
the point-independent norm family is built from p-th-root combinations of
Hermitian quadratics with a full-rank base term, which keeps it smooth on the
slit bundle.
"""

from __future__ import annotations

import math
import numbers

import numpy as np

from .errors import ConfigurationError
from .geometry import (Domain, MetricDef, SamplePlan, product_domain,
                       sample_points, sample_vectors, unit_directions)
from .jets import CJet, Jet, cabs2, cconj, creal, sexp, spow
from .report import VerificationReport


def _as_matrix(m, n, what):
    """Parse an n x n complex matrix given as nested lists (entries may be
    [re, im] pairs) and check Hermitian positive definiteness."""
    arr = np.empty((n, n), dtype=complex)
    for i in range(n):
        for j in range(n):
            e = m[i][j]
            arr[i, j] = complex(e[0], e[1]) if isinstance(e, (list, tuple)) else complex(e)
    if not np.allclose(arr, arr.conj().T, atol=1e-12):
        raise ConfigurationError(f"{what}: matrix must be Hermitian")
    if np.linalg.eigvalsh(arr).min() <= 0:
        raise ConfigurationError(f"{what}: matrix must be positive definite")
    return arr


def _hermitian_form(H, v, vbar_of=None):
    """sum_ab H[a,b] v_a conj(v_b) as a real scalar (H entries scalars)."""
    w = vbar_of if vbar_of is not None else [cconj(x) for x in v]
    s = None
    n = len(v)
    for a in range(n):
        for b in range(n):
            h = H[a][b] if not isinstance(H, np.ndarray) else H[a, b]
            if isinstance(h, numbers.Number) and h == 0:
                continue
            term = (v[a] * w[b]) * h
            s = term if s is None else s + term
    return creal(s)


# -- Hermitian catalog -----------------------------------------------------------


def _make_hermitian(spec):
    n = int(spec.get("complex_dim", 1))
    params = spec.get("params", {})
    catalog = params.get("catalog", "euclidean")
    scale = float(params.get("scale", 1.0))
    if scale <= 0:
        raise ConfigurationError("hermitian: scale must be positive")

    meta = {"kind_hint": "hermitian", "quadratic": True, "complete": True}
    domain = Domain()

    if catalog == "euclidean":
        H = np.eye(n, dtype=complex)

        def matrix_fn(z):
            return H

        meta.update(holomorphic_curvature=0.0, flat=True,
                    kahler_class="strongly_kahler")
    elif catalog == "constant":
        H = _as_matrix(params["matrix"], n, "hermitian constant")

        def matrix_fn(z):
            return H

        meta.update(holomorphic_curvature=0.0, flat=True,
                    kahler_class="strongly_kahler")
    elif catalog == "poincare_disk":
        if n != 1:
            raise ConfigurationError("poincare_disk is one-dimensional")
        domain = Domain("ball", 1.0)

        def matrix_fn(z):
            w = 1.0 - cabs2(z[0])
            return [[spow(w, -2)]]

        meta.update(holomorphic_curvature=-4.0 / scale,
                    kahler_class="strongly_kahler",
                    distance_from_origin="atanh", complete=True)
    elif catalog == "poincare_ball":
        domain = Domain("ball", 1.0)

        def matrix_fn(z):
            t = cabs2(z[0])
            for a in range(1, n):
                t = t + cabs2(z[a])
            w = spow(1.0 - t, -2)
            mat = [[None] * n for _ in range(n)]
            for a in range(n):
                for b in range(n):
                    entry = cconj(z[a]) * z[b] if a != b else cabs2(z[a])
                    if a == b:
                        entry = entry + (1.0 - t)
                    mat[a][b] = entry * w
            return mat

        meta.update(holomorphic_curvature=-4.0 / scale,
                    kahler_class="strongly_kahler",
                    distance_from_origin="atanh", complete=True)
    elif catalog == "product_disks":
        if n < 2:
            raise ConfigurationError("product_disks needs complex_dim >= 2")
        domain = Domain("polydisk", blocks=tuple((1, 1.0) for _ in range(n)))

        def matrix_fn(z):
            mat = [[0.0] * n for _ in range(n)]
            for a in range(n):
                mat[a][a] = spow(1.0 - cabs2(z[a]), -2)
            return mat

        meta.update(kahler_class="strongly_kahler", complete=True)
    elif catalog == "nonkahler":
        if n < 2:
            raise ConfigurationError("nonkahler catalog needs complex_dim >= 2")

        def matrix_fn(z):
            mat = [[0.0] * n for _ in range(n)]
            mat[0][0] = 1.0
            for a in range(1, n):
                mat[a][a] = 1.0 + cabs2(z[0])
            return mat

        meta.update(kahler_class="none")
    else:
        raise ConfigurationError(f"unknown hermitian catalog entry {catalog!r}")

    def formula(z, v):
        mat = matrix_fn(z)
        g = _hermitian_form(mat, v)
        return g * scale if scale != 1.0 else g

    fam_id = spec.get("id", f"hermitian_{catalog}_{n}")
    md = MetricDef("complex_strongly_convex", formula, n_complex=n,
                   domain=domain, metadata=meta, family_id=fam_id, spec=spec)
    md.hermitian_matrix = matrix_fn
    md.hermitian_scale = scale
    return md


# -- point-independent complex norms ----------------------------------------------


def _make_minkowski(spec):
    n = int(spec.get("complex_dim", 1))
    params = spec.get("params", {})
    eps = float(params.get("eps", 1.0))
    k = params.get("k", 2)
    if eps < 0:
        raise ConfigurationError("minkowski: eps must be >= 0")
    if eps > 0 and (int(k) != k or k < 2):
        raise ConfigurationError("minkowski: k must be an integer >= 2")
    k = int(k)
    base = params.get("base")
    B = np.eye(n, dtype=complex) if base is None else _as_matrix(base, n, "minkowski base")
    factors = params.get("factors")
    if factors is None:
        Hs = [np.diag(np.eye(n)[a]).astype(complex) for a in range(n)]
    else:
        Hs = []
        for f in factors:
            arr = np.empty((n, n), dtype=complex)
            for i in range(n):
                for j in range(n):
                    e = f[i][j]
                    arr[i, j] = complex(e[0], e[1]) if isinstance(e, (list, tuple)) else complex(e)
            if not np.allclose(arr, arr.conj().T, atol=1e-12):
                raise ConfigurationError("minkowski: factors must be Hermitian")
            if np.linalg.eigvalsh(arr).min() < -1e-12:
                raise ConfigurationError("minkowski: factors must be positive semidefinite")
            Hs.append(arr)

    def formula(z, v):
        vbar = [cconj(x) for x in v]
        g = _hermitian_form(B, v, vbar)
        if eps > 0:
            q = None
            for H in Hs:
                term = spow(_hermitian_form(H, v, vbar), k)
                q = term if q is None else q + term
            g = g + eps * spow(q, 1.0 / k)
        return g

    meta = {"flat": True, "kahler_class": "strongly_kahler",
            "holomorphic_curvature": 0.0, "complete": True,
            "quadratic": eps == 0.0, "point_independent": True,
            "distance_from_origin": "norm"}
    fam_id = spec.get("id", f"minkowski_{n}_k{k}")
    return MetricDef("complex_strongly_convex", formula, n_complex=n,
                     domain=Domain(), metadata=meta, family_id=fam_id, spec=spec)


# -- two-factor product norms -----------------------------------------------------


def _make_szabo(spec):
    params = spec.get("params", {})
    k = params.get("k", 2)
    eps = float(params.get("eps", 1.0))
    if eps <= 0:
        raise ConfigurationError("szabo: eps must be positive")
    if int(k) != k or k < 2:
        raise ConfigurationError("szabo: k must be an integer >= 2")
    k = int(k)
    if "factors" in params:
        # shorthand: two constant Hermitian matrices
        if len(params["factors"]) != 2:
            raise ConfigurationError("szabo: factors must list two matrices")
        f1_spec, f2_spec = ({
            "complex_dim": len(mat),
            "params": {"catalog": "constant", "matrix": mat},
        } for mat in params["factors"])
    else:
        f1_spec = params.get("factor1", {"complex_dim": 1})
        f2_spec = params.get("factor2", {"complex_dim": 1})
    f1 = _make_hermitian(f1_spec)
    f2 = _make_hermitian(f2_spec)
    n1, n2 = f1.n, f2.n
    n = n1 + n2

    def formula(z, v):
        a2 = f1.formula(z[:n1], v[:n1])
        b2 = f2.formula(z[n1:], v[n1:])
        return a2 + b2 + eps * spow(spow(a2, k) + spow(b2, k), 1.0 / k)

    factors_kahler = all(
        f.metadata.get("kahler_class", "none") in ("strongly_kahler", "kahler")
        for f in (f1, f2))
    meta = {"berwald": True, "quadratic": False,
            "kahler_class": "kahler" if factors_kahler else "none",
            "point_independent": f1.metadata.get("flat", False) and f2.metadata.get("flat", False)}
    fam_id = spec.get("id", f"szabo_k{k}_{f1.family_id}_{f2.family_id}")
    md = MetricDef("complex_strongly_convex", formula, n_complex=n,
                   domain=product_domain(f1.domain, n1, f2.domain, n2),
                   metadata=meta, family_id=fam_id, spec=spec)
    md.factors = (f1, f2)
    return md


# -- unitary-invariant metrics G = r * phi(t, s) -----------------------------------


class UnitaryProfile:
    """Profile phi(t, s) with t = |z|^2, s = |<z,v>|^2 / |v|^2.

    ``is_gradient_form`` marks profiles known to be of the shape
    f(t) + f'(t) s, the closed-form characterization of the Kaehler class
    for this family.
    """

    def __init__(self, profile_id, fn, *, is_gradient_form, t_max=math.inf, meta=None):
        self.id = profile_id
        self._fn = fn
        self.is_gradient_form = is_gradient_form
        self.t_max = t_max
        self.meta = meta or {}

    def __call__(self, t, s):
        return self._fn(t, s)

    def jets(self, t, s, order=2):
        """Jets of phi over the two profile variables."""
        from .jets import JetSpace
        sp = JetSpace.get(2, order, False)
        return self._fn(sp.variable(0, float(t)), sp.variable(1, float(s)))


def build_profile(params) -> UnitaryProfile:
    form = params.get("form", "gradient")
    if form == "gradient":
        fname = params.get("f", "one")
        c = float(params.get("c", 1.0))
        if fname == "one":
            return UnitaryProfile("phi_f_one", lambda t, s: 1.0 + 0.0 * creal(t),
                                  is_gradient_form=True)
        if fname == "exp":
            def fn(t, s):
                return sexp(t * c) * (1.0 + c * s)
            return UnitaryProfile(f"phi_f_exp_c{c:g}", fn, is_gradient_form=True,
                                  meta={"c": c})
        if fname == "inv_one_minus_t":
            def fn(t, s):
                w = 1.0 - t
                return spow(w, -1) + s * spow(w, -2)
            return UnitaryProfile("phi_f_inv", fn, is_gradient_form=True, t_max=1.0)
        raise ConfigurationError(f"unknown gradient profile f {fname!r}")
    if form == "free":
        expr = params.get("expr", "one_plus_s2")
        if expr == "one_plus_s2":
            return UnitaryProfile("phi_one_plus_s2", lambda t, s: 1.0 + s * s,
                                  is_gradient_form=False)
        if expr == "one_plus_ts2":
            return UnitaryProfile("phi_one_plus_ts2", lambda t, s: 1.0 + t * (s * s),
                                  is_gradient_form=False)
        raise ConfigurationError(f"unknown free profile {expr!r}")
    raise ConfigurationError(f"unknown profile form {form!r}")


def _make_un_invariant(spec):
    n = int(spec.get("complex_dim", 2))
    params = spec.get("params", {})
    profile = build_profile(params.get("profile", {}))
    radius = math.sqrt(profile.t_max) if math.isfinite(profile.t_max) else math.inf
    domain = Domain("ball", radius) if math.isfinite(radius) else Domain()

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

    meta = {"unitary_invariant": True, "profile": profile.id,
            "kahler_class": "kahler" if profile.is_gradient_form else "unknown"}
    fam_id = spec.get("id", f"un_{profile.id}_{n}")
    md = MetricDef("complex", formula, n_complex=n, domain=domain,
                   metadata=meta, family_id=fam_id, spec=spec)
    md.profile = profile
    return md


_FAMILIES = {
    "hermitian": _make_hermitian,
    "minkowski": _make_minkowski,
    "szabo": _make_szabo,
    "un_invariant": _make_un_invariant,
}


def instantiate(spec) -> MetricDef:
    """Build a metric from a family spec document."""
    family = spec.get("family")
    if family not in _FAMILIES:
        raise ConfigurationError(
            f"unknown metric family {family!r}; expected one of {sorted(_FAMILIES)}")
    return _FAMILIES[family](spec)


# -- metric validation -------------------------------------------------------------


def check_metric(m: MetricDef, plan: SamplePlan | None = None) -> VerificationReport:
    """Positivity, homogeneity, strong pseudoconvexity and strong convexity.

    Reports the minimum eigenvalues of the Levi matrix and of the real
    fundamental tensor over the sample grid, plus homogeneity residuals.
    Per-sample evaluation failures are recorded, not raised.
    """
    plan = plan or SamplePlan()
    rng = np.random.default_rng(plan.seed + 7)
    pts = sample_points(m, plan)
    dirs = sample_vectors(m, plan)
    min_levi = math.inf
    min_real = math.inf
    min_value = math.inf
    hom_res = 0.0
    errors = []
    samples = []
    for i, z in enumerate(pts):
        for j, v in enumerate(dirs):
            try:
                if m.is_complex:
                    G = m.value(z, v)
                    L = m.levi_matrix(z, v)
                    ev = float(np.linalg.eigvalsh(L).min())
                    min_levi = min(min_levi, ev)
                    from .geometry import complex_to_real_components
                    x = complex_to_real_components(z)
                    u = complex_to_real_components(v)
                    g = m.fundamental_real(x, u)
                    evr = float(np.linalg.eigvalsh(g).min())
                    min_real = min(min_real, evr)
                    zeta = complex(rng.standard_normal(), rng.standard_normal())
                    ref = m.value(z, zeta * v)
                    hom = abs(ref - abs(zeta) ** 2 * G) / max(1.0, abs(ref))
                else:
                    G = m.value(z, v)
                    g = m.fundamental_real(z, v)
                    evr = float(np.linalg.eigvalsh(g).min())
                    min_real = min(min_real, evr)
                    lam = float(rng.standard_normal())
                    if abs(lam) < 0.1:
                        lam = 0.5
                    ref = m.value(z, lam * v)
                    hom = abs(ref - lam ** 2 * G) / max(1.0, abs(ref))
                min_value = min(min_value, G)
                hom_res = max(hom_res, hom)
                if len(samples) < 4:
                    samples.append({"point_index": i, "dir_index": j, "G": G})
            except Exception as exc:  # per-sample failures belong in the report
                errors.append(f"sample ({i},{j}): {type(exc).__name__}: {exc}")
    tol = 1e-10
    passed = (min_value > 0 and min_real > 0 and hom_res < tol
              and (not m.is_complex or min_levi > 0) and not errors)
    return VerificationReport(
        name=f"check_metric:{m.family_id}",
        passed=bool(passed),
        tolerance=tol,
        stats={
            "min_levi_eigenvalue": None if min_levi is math.inf else min_levi,
            "min_real_hessian_eigenvalue": None if min_real is math.inf else min_real,
            "min_value": min_value,
            "homogeneity_residual": hom_res,
            "n_samples": len(pts) * len(dirs),
        },
        samples=samples,
        errors=errors,
    )


# -- holomorphic map catalog ---------------------------------------------------------


class HoloMap:
    """Holomorphic map from the catalog, evaluable on complex scalars or CJets."""

    def __init__(self, map_id, n_in, n_out, fn):
        self.id = map_id
        self.n_in = n_in
        self.n_out = n_out
        self._fn = fn

    def __call__(self, z):
        return self._fn(list(z))

    def apply_values(self, z):
        return np.array([complex(w) for w in self._fn([complex(c) for c in z])])

    def jacobian(self, z):
        """Exact complex Jacobian dF/dz at a point, via first-order jets."""
        z = np.asarray(z, dtype=complex)
        from .jets import JetSpace
        sp = JetSpace.get(2 * self.n_in, 1, False)
        zj = [CJet(sp.variable(a, z[a].real), sp.variable(self.n_in + a, z[a].imag))
              for a in range(self.n_in)]
        out = self._fn(zj)
        Jm = np.empty((self.n_out, self.n_in), dtype=complex)
        for i, w in enumerate(out):
            for a in range(self.n_in):
                dre = w.re.partial([a]) + 1j * w.im.partial([a])
                Jm[i, a] = dre
        return Jm

    def push_vector(self, z, v):
        return self.jacobian(z) @ np.asarray(v, dtype=complex)


def build_map(spec) -> HoloMap:
    kind = spec.get("map")
    params = spec.get("params", {})
    if kind == "identity":
        n = int(params.get("n", 1))
        return HoloMap(spec.get("id", f"identity_{n}"), n, n, lambda z: z)
    if kind == "power":
        mdeg = int(params.get("m", 2))
        if mdeg < 1:
            raise ConfigurationError("power map needs m >= 1")

        def fn(z):
            w = z[0]
            out = w
            for _ in range(mdeg - 1):
                out = out * w
            return [out]
        return HoloMap(spec.get("id", f"power_{mdeg}"), 1, 1, fn)
    if kind == "mobius":
        a = params.get("a", 0.3)
        a = complex(a[0], a[1]) if isinstance(a, (list, tuple)) else complex(a)
        if abs(a) >= 1:
            raise ConfigurationError("mobius parameter must satisfy |a| < 1")

        def fn(z):
            w = z[0]
            return [(a - w) / (1.0 - w * a.conjugate())]
        return HoloMap(spec.get("id", f"mobius_{a.real:g}_{a.imag:g}"), 1, 1, fn)
    if kind == "linear":
        A = np.asarray([[complex(e[0], e[1]) if isinstance(e, (list, tuple)) else complex(e)
                         for e in row] for row in params["matrix"]], dtype=complex)
        n_out, n_in = A.shape

        def fn(z):
            out = []
            for i in range(n_out):
                acc = None
                for j in range(n_in):
                    if A[i, j] == 0:
                        continue
                    term = z[j] * A[i, j]
                    acc = term if acc is None else acc + term
                if acc is None:
                    acc = z[0] * 0.0
                out.append(acc)
            return out
        return HoloMap(spec.get("id", "linear"), n_in, n_out, fn)
    if kind == "constant":
        c = [complex(e[0], e[1]) if isinstance(e, (list, tuple)) else complex(e)
             for e in params.get("value", [0.0])]
        n_in = int(params.get("n_in", 1))

        def fn(z):
            zero = z[0] * 0.0
            return [zero + ci for ci in c]
        return HoloMap(spec.get("id", "constant"), n_in, len(c), fn)
    raise ConfigurationError(f"unknown holomorphic map {kind!r}")


# -- holomorphic disk probes -----------------------------------------------------------


def ball_automorphism(center):
    """Automorphism of the unit ball sending 0 to ``center`` (generic scalars)."""
    a = np.asarray(center, dtype=complex)
    na2 = float(np.vdot(a, a).real)
    if na2 >= 1.0:
        raise ConfigurationError("automorphism center must lie inside the unit ball")
    s = math.sqrt(1.0 - na2)

    def fn(x):
        if na2 == 0.0:
            return [-xi for xi in x]
        ip = None
        for xi, ai in zip(x, a):
            term = xi * ai.conjugate()
            ip = term if ip is None else ip + term
        denom = 1.0 - ip
        out = []
        for xi, ai in zip(x, a):
            proj = ip * (ai / na2)
            num = ai - proj - (xi - proj) * s
            out.append(num / denom)
        return out

    return fn


class DiskProbe:
    """Holomorphic disk through an anchor point, tangent to a given direction."""

    def __init__(self, probe_id, fn, radius=1.0):
        self.id = probe_id
        self._fn = fn
        self.radius = radius

    def __call__(self, zeta):
        return self._fn(zeta)


def probe_catalog(m: MetricDef, z, v, *, quadratic_coeff=None):
    """Disk probes through (z, v) staying in the metric domain near 0.

    Always contains the affine disk; for unit-ball domains also the
    totally geodesic disk obtained from a ball automorphism.
    """
    z = np.asarray(z, dtype=complex)
    v = np.asarray(v, dtype=complex)
    margin = m.domain.margin(z)
    vnorm = float(np.linalg.norm(v))
    safe = 0.45 * margin / max(vnorm, 1e-12) if math.isfinite(margin) else 1.0
    probes = []

    def affine(zeta):
        return [zeta * v[a] + z[a] for a in range(z.size)]

    probes.append(DiskProbe("affine", affine, radius=safe))

    if quadratic_coeff is not None:
        b = np.asarray(quadratic_coeff, dtype=complex)

        def quad(zeta):
            z2 = zeta * zeta
            return [zeta * v[a] + z2 * b[a] + z[a] for a in range(z.size)]

        qr = min(safe, 0.45 * margin / max(float(np.linalg.norm(b)), 1e-12)) \
            if math.isfinite(margin) else safe
        probes.append(DiskProbe("quadratic", quad, radius=qr))

    if m.domain.kind == "ball" and m.domain.radius == 1.0:
        psi = ball_automorphism(z)
        # direction e with d(psi)(0) e parallel to v
        from .jets import JetSpace
        n = z.size
        sp = JetSpace.get(2 * n, 1, False)
        zj = [CJet(sp.variable(a, 0.0), sp.variable(n + a, 0.0)) for a in range(n)]
        out = psi(zj)
        Jm = np.empty((n, n), dtype=complex)
        for i, w in enumerate(out):
            for a_ in range(n):
                Jm[i, a_] = w.re.partial([a_]) + 1j * w.im.partial([a_])
        e = np.linalg.solve(Jm, v)
        en = float(np.linalg.norm(e))

        def geo(zeta):
            return psi([zeta * (ei / en) for ei in e])

        probes.append(DiskProbe("geodesic", geo, radius=0.95))
    return probes


def plan_directions(m: MetricDef, k: int, seed=0):
    """k deterministic complex unit directions for curvature/ratio fans."""
    dirs = unit_directions(k, 2 * m.n, seed)
    return [d[:m.n] + 1j * d[m.n:] for d in dirs]
