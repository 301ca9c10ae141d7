"""Dense truncated Taylor arithmetic (forward-mode jets) up to total order 4.

A ``Jet`` stores the Taylor coefficients ``D^a f / a!`` of a scalar function
over the monomial basis of total degree <= order, sorted by (degree, lex).
Arithmetic (+, *, /, powers, exp, log, sqrt) propagates all mixed partial
derivatives exactly through the chain and Leibniz rules; multiplication is a
truncated polynomial convolution driven by precomputed index tables.

Because the basis is sorted by total degree first, the basis of order k is a
prefix of the basis of any higher order over the same variables, so order
truncation is a slice and binary operations align jets of mixed order by
truncating to the lower one.

Complex-analytic derivative tables are produced by :func:`wirtinger`, which
rewrites a jet over paired real coordinates (x, y) as a complex-coefficient
jet over formally independent holomorphic/antiholomorphic variables
(z, zbar) with z = x + iy.
"""

from __future__ import annotations

import math
import numbers

import numpy as np

from .errors import ConfigurationError, DegenerateMetricError, StructuralError

MAX_ORDER = 4

_SPACE_CACHE: dict = {}


def _monomials(nvars: int, order: int):
    """All exponent tuples with total degree <= order, sorted by (degree, lex)."""
    levels = [[(0,) * nvars]]
    for _ in range(order):
        prev = levels[-1]
        seen = set()
        nxt = []
        for mono in prev:
            for i in range(nvars):
                m = mono[:i] + (mono[i] + 1,) + mono[i + 1:]
                if m not in seen:
                    seen.add(m)
                    nxt.append(m)
        nxt.sort()
        levels.append(nxt)
    out = []
    for lv in levels:
        out.extend(lv)
    return out


class JetSpace:
    """Monomial basis and cached index tables for jets over ``nvars`` variables."""

    __slots__ = (
        "nvars", "order", "is_complex", "pair_split", "monomials", "index",
        "degrees", "size_at_order", "_mult_table", "_extract_tables",
        "_conj_perm", "dtype",
    )

    def __init__(self, nvars, order, is_complex=False, pair_split=None):
        if order < 0 or order > MAX_ORDER:
            raise ConfigurationError(f"jet order must be in [0, {MAX_ORDER}], got {order}")
        if nvars < 1:
            raise ConfigurationError("jet space needs at least one variable")
        self.nvars = nvars
        self.order = order
        self.is_complex = is_complex
        # pair_split = P means variables [0, P) are holomorphic and [P, 2P)
        # their conjugates; enables conj().
        self.pair_split = pair_split
        self.monomials = _monomials(nvars, order)
        self.index = {m: i for i, m in enumerate(self.monomials)}
        self.degrees = np.array([sum(m) for m in self.monomials], dtype=np.int64)
        self.size_at_order = [0] * (order + 1)
        for d in self.degrees:
            for o in range(order + 1):
                if d <= o:
                    self.size_at_order[o] += 1
        self.dtype = np.complex128 if is_complex else np.float64
        self._mult_table = None
        self._extract_tables = {}
        self._conj_perm = None

    @property
    def n(self):
        return len(self.monomials)

    @staticmethod
    def get(nvars, order, is_complex=False, pair_split=None) -> "JetSpace":
        key = (nvars, order, is_complex, pair_split)
        sp = _SPACE_CACHE.get(key)
        if sp is None:
            sp = JetSpace(nvars, order, is_complex, pair_split)
            _SPACE_CACHE[key] = sp
        return sp

    def sibling(self, order) -> "JetSpace":
        return JetSpace.get(self.nvars, order, self.is_complex, self.pair_split)

    def mult_table(self):
        if self._mult_table is None:
            ia, ib, iout = [], [], []
            for p, mp in enumerate(self.monomials):
                dp = int(self.degrees[p])
                for q, mq in enumerate(self.monomials):
                    if dp + int(self.degrees[q]) > self.order:
                        continue
                    prod = tuple(a + b for a, b in zip(mp, mq))
                    ia.append(p)
                    ib.append(q)
                    iout.append(self.index[prod])
            self._mult_table = (
                np.array(ia, dtype=np.int64),
                np.array(ib, dtype=np.int64),
                np.array(iout, dtype=np.int64),
            )
        return self._mult_table

    def extract_table(self, var):
        tab = self._extract_tables.get(var)
        if tab is None:
            lower = self.sibling(self.order - 1)
            src = np.empty(lower.n, dtype=np.int64)
            fac = np.empty(lower.n, dtype=np.float64)
            for j, mono in enumerate(lower.monomials):
                up = mono[:var] + (mono[var] + 1,) + mono[var + 1:]
                src[j] = self.index[up]
                fac[j] = mono[var] + 1
            tab = (src, fac)
            self._extract_tables[var] = tab
        return tab

    def conj_perm(self):
        if self.pair_split is None:
            raise StructuralError("conjugation needs a paired holomorphic layout")
        if self._conj_perm is None:
            p = self.pair_split
            perm = np.empty(self.n, dtype=np.int64)
            for i, mono in enumerate(self.monomials):
                swapped = mono[p:2 * p] + mono[:p] + mono[2 * p:]
                perm[i] = self.index[swapped]
            self._conj_perm = perm
        return self._conj_perm

    def constant(self, value) -> "Jet":
        c = np.zeros(self.n, dtype=self.dtype)
        c[0] = value
        return Jet(self, c)

    def variable(self, var, value) -> "Jet":
        """Seed jet for coordinate ``var`` with base value ``value``."""
        c = np.zeros(self.n, dtype=self.dtype)
        c[0] = value
        if self.order >= 1:
            e = (0,) * var + (1,) + (0,) * (self.nvars - var - 1)
            c[self.index[e]] = 1.0
        return Jet(self, c)


def _bincount(idx, w, n):
    if np.iscomplexobj(w):
        return np.bincount(idx, weights=w.real, minlength=n) + 1j * np.bincount(
            idx, weights=w.imag, minlength=n)
    return np.bincount(idx, weights=w, minlength=n)


class Jet:
    """Truncated Taylor expansion of a scalar function."""

    __slots__ = ("space", "coeffs")

    def __init__(self, space, coeffs):
        self.space = space
        self.coeffs = coeffs

    @property
    def value(self):
        v = self.coeffs[0]
        return complex(v) if self.space.is_complex else float(v)

    @property
    def order(self):
        return self.space.order

    def truncate(self, order) -> "Jet":
        if order == self.order:
            return self
        if order > self.order:
            raise StructuralError("cannot extend a jet to higher order")
        sp = self.space.sibling(order)
        return Jet(sp, self.coeffs[:sp.n].copy())

    def _align(self, other):
        """Bring two jets over the same variables to a common (lower) order."""
        a, b = self, other
        if a.space is b.space:
            return a, b, a.space
        if a.space.nvars != b.space.nvars:
            raise StructuralError("jets live over different variable sets")
        o = min(a.order, b.order)
        cx = a.space.is_complex or b.space.is_complex
        ps = a.space.pair_split or b.space.pair_split
        sp = JetSpace.get(a.space.nvars, o, cx, ps)
        ca = a.coeffs[:sp.n].astype(sp.dtype, copy=False)
        cb = b.coeffs[:sp.n].astype(sp.dtype, copy=False)
        return Jet(sp, ca), Jet(sp, cb), sp

    # -- ring operations ---------------------------------------------------

    def __add__(self, other):
        if isinstance(other, Jet):
            a, b, sp = self._align(other)
            return Jet(sp, a.coeffs + b.coeffs)
        if isinstance(other, numbers.Number):
            c = self.coeffs.copy()
            if isinstance(other, complex) and not self.space.is_complex:
                return self._to_complex() + other
            c[0] += other
            return Jet(self.space, c)
        return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        return Jet(self.space, -self.coeffs)

    def __sub__(self, other):
        if isinstance(other, (Jet, numbers.Number)):
            return self + (-other if isinstance(other, Jet) else -other)
        return NotImplemented

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Jet):
            a, b, sp = self._align(other)
            ia, ib, iout = sp.mult_table()
            w = a.coeffs[ia] * b.coeffs[ib]
            return Jet(sp, _bincount(iout, w, sp.n))
        if isinstance(other, numbers.Number):
            if isinstance(other, complex) and not self.space.is_complex:
                return self._to_complex() * other
            return Jet(self.space, self.coeffs * other)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * other.reciprocal()
        if isinstance(other, numbers.Number):
            return self * (1.0 / other)
        return NotImplemented

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def _to_complex(self):
        sp = JetSpace.get(self.space.nvars, self.order, True, self.space.pair_split)
        return Jet(sp, self.coeffs.astype(np.complex128))

    # -- analytic functions via univariate composition ----------------------

    def _compose(self, taylor):
        """Evaluate g(self) where ``taylor[k]`` = g^(k)(value)/k!."""
        h = self.coeffs.copy()
        h[0] = 0.0
        hj = Jet(self.space, h)
        out = self.space.constant(taylor[-1])
        for k in range(len(taylor) - 2, -1, -1):
            out = out * hj + taylor[k]
        return out

    def reciprocal(self):
        f0 = self.value
        if abs(f0) < 1e-300:
            raise ZeroDivisionError("division by a jet with zero constant term")
        inv = 1.0 / f0
        taylor = [inv * (-inv) ** k for k in range(self.order + 1)]
        return self._compose(taylor)

    def exp(self):
        if self.space.is_complex:
            raise StructuralError("exp is only defined for real-coefficient jets")
        e = math.exp(self.value)
        taylor = [e / math.factorial(k) for k in range(self.order + 1)]
        return self._compose(taylor)

    def log(self):
        f0 = self.value
        if self.space.is_complex or f0 <= 0.0:
            raise ValueError(f"log of a jet needs a positive real constant term, got {f0}")
        taylor = [math.log(f0)]
        for k in range(1, self.order + 1):
            taylor.append(((-1.0) ** (k + 1)) / (k * f0 ** k))
        return self._compose(taylor)

    def sqrt(self):
        return self.__pow__(0.5)

    def __pow__(self, p):
        if isinstance(p, numbers.Integral):
            p = int(p)
            if p < 0:
                return self.reciprocal() ** (-p)
            out = self.space.constant(1.0)
            base = self
            while p:
                if p & 1:
                    out = out * base
                base = base * base
                p >>= 1
            return out
        f0 = self.value
        if self.space.is_complex or f0 <= 0.0:
            raise ValueError(f"fractional power of a jet needs a positive base, got {f0}")
        taylor = []
        c = f0 ** p
        for k in range(self.order + 1):
            taylor.append(c / math.factorial(k))
            c = c * (p - k) / f0
        return self._compose(taylor)

    # -- derivative access ---------------------------------------------------

    def extract(self, var) -> "Jet":
        """Partial derivative with respect to variable ``var`` (one order lower)."""
        if self.order == 0:
            raise StructuralError("cannot differentiate an order-0 jet")
        src, fac = self.space.extract_table(var)
        lower = self.space.sibling(self.order - 1)
        return Jet(lower, self.coeffs[src] * fac)

    def partial(self, variables):
        """Exact mixed partial derivative for a sequence of variable indices."""
        expo = [0] * self.space.nvars
        for v in variables:
            expo[v] += 1
        expo = tuple(expo)
        if sum(expo) > self.order:
            raise StructuralError("requested derivative exceeds jet order")
        scale = 1.0
        for e in expo:
            scale *= math.factorial(e)
        val = self.coeffs[self.space.index[expo]] * scale
        return complex(val) if self.space.is_complex else float(val)

    def conj(self) -> "Jet":
        perm = self.space.conj_perm()
        out = np.empty_like(self.coeffs)
        out[perm] = np.conj(self.coeffs)
        return Jet(self.space, out)

    def __repr__(self):
        return f"Jet(nvars={self.space.nvars}, order={self.order}, value={self.value})"


def lift(values, active, order):
    """Seed jets for the coordinates ``values`` with identity derivatives on ``active``.

    Returns one jet per entry of ``values``; jets of inactive coordinates are
    constants. Raises ``ConfigurationError`` for an empty active set or an
    unsupported order.
    """
    if order < 1 or order > MAX_ORDER:
        raise ConfigurationError(f"lift order must be in [1, {MAX_ORDER}], got {order}")
    active = set(active)
    if not active:
        raise ConfigurationError("lift needs a non-empty active variable set")
    n = len(values)
    if any(a < 0 or a >= n for a in active):
        raise ConfigurationError("active indices out of range")
    sp = JetSpace.get(n, order, False)
    out = []
    for i, v in enumerate(values):
        out.append(sp.variable(i, float(v)) if i in active else sp.constant(float(v)))
    return out


# -- Wirtinger transform ------------------------------------------------------

_WIRTINGER_CACHE: dict = {}


def _wirtinger_rows(nvars, order, pairs):
    """Sparse rows (dst, src, val) of the real->complex basis change.

    Real increments substitute as hx = (hz + hzbar)/2, hy = -i(hz - hzbar)/2.
    Output variables are ordered [w_0..w_{P-1}, conj(w_0)..conj(w_{P-1})].
    """
    key = (nvars, order, pairs)
    rows = _WIRTINGER_CACHE.get(key)
    if rows is not None:
        return rows
    P = len(pairs)
    subs = {}
    for j, (re_i, im_i) in enumerate(pairs):
        subs[re_i] = ((j, 0.5), (P + j, 0.5))
        subs[im_i] = ((j, -0.5j), (P + j, 0.5j))
    real_sp = JetSpace.get(nvars, order, False)
    cx_sp = JetSpace.get(2 * P, order, True, P)
    dst, src, val = [], [], []
    for p, mono in enumerate(real_sp.monomials):
        expansion = {(0,) * (2 * P): 1.0 + 0.0j}
        for var, e in enumerate(mono):
            if e == 0:
                continue
            if var not in subs:
                raise StructuralError("every active variable must belong to a pair")
            for _ in range(e):
                nxt = {}
                for cm, cv in expansion.items():
                    for cvar, w in subs[var]:
                        m2 = cm[:cvar] + (cm[cvar] + 1,) + cm[cvar + 1:]
                        nxt[m2] = nxt.get(m2, 0.0 + 0.0j) + cv * w
                expansion = nxt
        for cm, cv in expansion.items():
            if cv != 0.0:
                dst.append(cx_sp.index[cm])
                src.append(p)
                val.append(cv)
    rows = (np.array(dst, dtype=np.int64), np.array(src, dtype=np.int64),
            np.array(val, dtype=np.complex128), cx_sp)
    _WIRTINGER_CACHE[key] = rows
    return rows


def wirtinger(jet: Jet, pairs) -> Jet:
    """Rewrite a real-coordinate jet as a complex Wirtinger jet.

    ``pairs`` lists (real_index, imag_index) couples defining w = x + iy for
    each complex variable. The result is a complex-coefficient jet over
    [w_0..w_{P-1}, conj(w_0)..conj(w_{P-1})]; mixed holomorphic partials are
    read off with :meth:`Jet.partial`.
    """
    pairs = tuple((int(a), int(b)) for a, b in pairs)
    seen = [i for p in pairs for i in p]
    if len(set(seen)) != len(seen):
        raise StructuralError("coordinate pairs must be disjoint")
    if len(seen) != jet.space.nvars:
        raise StructuralError(
            f"pairing covers {len(seen)} of {jet.space.nvars} variables; "
            "odd or partial layouts are not supported")
    dst, src, val, cx_sp = _wirtinger_rows(jet.space.nvars, jet.order, pairs)
    out = np.zeros(cx_sp.n, dtype=np.complex128)
    np.add.at(out, dst, val * jet.coeffs[src])
    return Jet(cx_sp, out)


# -- complex-valued jets as (re, im) pairs ------------------------------------

class CJet:
    """Complex scalar whose real and imaginary parts are real-coefficient jets.

    Used to evaluate holomorphic formulas over real coordinates; supports the
    field operations plus conj/abs2 needed by the metric families.
    """

    __slots__ = ("re", "im")

    def __init__(self, re, im=None):
        self.re = re
        self.im = re.space.constant(0.0) if im is None else im

    @staticmethod
    def _coerce(x, like):
        if isinstance(x, CJet):
            return x
        if isinstance(x, Jet):
            return CJet(x)
        if isinstance(x, numbers.Number):
            z = complex(x)
            sp = like.re.space
            return CJet(sp.constant(z.real), sp.constant(z.imag))
        return None

    @property
    def value(self):
        return complex(self.re.value, self.im.value)

    def __add__(self, other):
        o = CJet._coerce(other, self)
        if o is None:
            return NotImplemented
        return CJet(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __neg__(self):
        return CJet(-self.re, -self.im)

    def __sub__(self, other):
        o = CJet._coerce(other, self)
        if o is None:
            return NotImplemented
        return CJet(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Jet):
            return CJet(self.re * other, self.im * other)
        if isinstance(other, numbers.Number) and not isinstance(other, complex):
            return CJet(self.re * other, self.im * other)
        o = CJet._coerce(other, self)
        if o is None:
            return NotImplemented
        return CJet(self.re * o.re - self.im * o.im,
                    self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return CJet(self.re / other, self.im / other)
        if isinstance(other, numbers.Number) and not isinstance(other, complex):
            return CJet(self.re / other, self.im / other)
        o = CJet._coerce(other, self)
        if o is None:
            return NotImplemented
        d = o.abs2()
        num = self * o.conj()
        return CJet(num.re / d, num.im / d)

    def __rtruediv__(self, other):
        o = CJet._coerce(other, self)
        return o.__truediv__(self)

    def conj(self):
        return CJet(self.re, -self.im)

    conjugate = conj

    def abs2(self) -> Jet:
        return self.re * self.re + self.im * self.im


# -- generic scalar helpers (dispatch float/complex vs Jet/CJet) ---------------

def cconj(w):
    if isinstance(w, CJet):
        return w.conj()
    return np.conj(w) if isinstance(w, complex) else w


def cabs2(w):
    if isinstance(w, CJet):
        return w.abs2()
    if isinstance(w, Jet):
        return w * w
    return (w * w.conjugate()).real if isinstance(w, complex) else w * w


def creal(w):
    if isinstance(w, CJet):
        return w.re
    return w.real if isinstance(w, complex) else w


def spow(x, p):
    """x**p for real scalars or real jets."""
    if isinstance(x, Jet):
        return x ** p
    return float(x) ** p


def ssqrt(x):
    return x.sqrt() if isinstance(x, Jet) else math.sqrt(x)


def sexp(x):
    return x.exp() if isinstance(x, Jet) else math.exp(x)


def slog(x):
    return x.log() if isinstance(x, Jet) else math.log(x)


# -- small dense linear algebra over jets --------------------------------------

def invert_jet_matrix(mat):
    """Gauss-Jordan inverse of a square matrix with Jet entries.

    Pivots on the largest constant term; raises ``DegenerateMetricError`` if a
    pivot column is numerically singular.
    """
    m = len(mat)
    aug = [[mat[i][j] for j in range(m)] for i in range(m)]
    sp = aug[0][0].space
    iden = [[sp.constant(1.0 if i == j else 0.0) for j in range(m)] for i in range(m)]
    scale = max(abs(aug[i][j].value) for i in range(m) for j in range(m)) or 1.0
    for col in range(m):
        piv = max(range(col, m), key=lambda r: abs(aug[r][col].value))
        if abs(aug[piv][col].value) < 1e-13 * scale:
            raise DegenerateMetricError("jet matrix numerically singular")
        if piv != col:
            aug[col], aug[piv] = aug[piv], aug[col]
            iden[col], iden[piv] = iden[piv], iden[col]
        inv_piv = aug[col][col].reciprocal()
        aug[col] = [a * inv_piv for a in aug[col]]
        iden[col] = [a * inv_piv for a in iden[col]]
        for r in range(m):
            if r == col:
                continue
            f = aug[r][col]
            if abs(f.value) == 0.0 and not np.any(f.coeffs):
                continue
            aug[r] = [a - f * b for a, b in zip(aug[r], aug[col])]
            iden[r] = [a - f * b for a, b in zip(iden[r], iden[col])]
    return iden
