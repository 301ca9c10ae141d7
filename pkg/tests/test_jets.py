"""Jet arithmetic: seed semantics, chain/Leibniz exactness, Wirtinger tables."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from finsler.errors import ConfigurationError, StructuralError
from finsler.jets import CJet, Jet, JetSpace, invert_jet_matrix, lift, wirtinger

from oracles import dict_poly_mult, random_expression, richardson_partial


def test_lift_seed_semantics():
    (j,) = lift([2.0], {0}, 2)
    assert j.value == 2.0
    assert j.partial([0]) == 1.0
    assert j.partial([0, 0]) == 0.0


def test_lift_bilinear_mixed_partial():
    x, y = lift([1.0, 3.0], {0, 1}, 2)
    assert (x * y).partial([0, 1]) == 1.0


def test_lift_monomial_factorial():
    (x,) = lift([1.0], {0}, 4)
    assert (x ** 4).partial([0, 0, 0, 0]) == pytest.approx(24.0)


def test_lift_rejects_bad_requests():
    with pytest.raises(ConfigurationError):
        lift([1.0], {0}, 5)
    with pytest.raises(ConfigurationError):
        lift([1.0], set(), 2)
    with pytest.raises(ConfigurationError):
        lift([1.0], {3}, 2)


@st.composite
def integer_polys(draw, nvars=2, order=4):
    sp = JetSpace.get(nvars, order, False)
    coeffs = draw(st.lists(st.integers(-9, 9), min_size=sp.n, max_size=sp.n))
    return {m: float(c) for m, c in zip(sp.monomials, coeffs) if c}


@settings(max_examples=60, deadline=None)
@given(integer_polys(), integer_polys())
def test_product_rule_is_exact_convolution(pa, pb):
    # integer coefficients keep float arithmetic exact regardless of order
    sp = JetSpace.get(2, 4, False)
    ja = np.zeros(sp.n)
    jb = np.zeros(sp.n)
    for m, c in pa.items():
        ja[sp.index[m]] = c
    for m, c in pb.items():
        jb[sp.index[m]] = c
    prod = Jet(sp, ja) * Jet(sp, jb)
    ref = dict_poly_mult(pa or {(0, 0): 0.0}, pb or {(0, 0): 0.0}, 4)
    expect = np.zeros(sp.n)
    for m, c in ref.items():
        expect[sp.index[m]] = c
    assert np.array_equal(prod.coeffs, expect)


@pytest.mark.parametrize("seed", range(12))
def test_composites_match_richardson_fd(seed):
    rng = np.random.default_rng(seed)
    nvars = int(rng.integers(1, 4))
    expr = random_expression(rng, nvars)
    x0 = rng.uniform(0.6, 1.4, size=nvars)
    jets = lift(x0, set(range(nvars)), 4)
    jf = expr(jets)
    if not isinstance(jf, Jet):  # the random tree may degenerate to a constant
        return

    def plain(y):
        return expr(list(y))

    sp = jf.space
    for mono in sp.monomials:
        k = sum(mono)
        if k == 0:
            assert plain(x0) == pytest.approx(jf.value, rel=1e-12)
            continue
        multi = [i for i, e in enumerate(mono) for _ in range(e)]
        fd = richardson_partial(plain, x0, multi)
        exact = jf.partial(multi)
        scale = max(1.0, abs(fd), abs(exact))
        assert abs(exact - fd) / scale < 1e-6, (mono, exact, fd)


def test_division_and_roots_invert():
    x, y = lift([0.8, 1.7], {0, 1}, 4)
    f = (x * x * y + 2.0)
    g = f / (y + 0.5)
    back = g * (y + 0.5)
    assert np.allclose(back.coeffs, f.coeffs, atol=1e-13)
    h = f.sqrt()
    assert np.allclose((h * h).coeffs, f.coeffs, atol=1e-13)
    assert np.allclose(f.log().exp().coeffs, f.coeffs, atol=1e-12)


def test_mixed_order_alignment_truncates():
    x, y = lift([0.5, 0.25], {0, 1}, 4)
    f4 = x * x * y
    f2 = f4.truncate(2)
    out = f4 + f2
    assert out.order == 2
    assert out.value == pytest.approx(2 * f4.value)


def test_extract_consistency():
    x, y = lift([0.8, -0.4], {0, 1}, 4)
    f = (x * y + y * y) ** 2
    fx = f.extract(0)
    assert fx.order == 3
    assert fx.value == pytest.approx(f.partial([0]))
    assert fx.partial([1]) == pytest.approx(f.partial([0, 1]))


# -- Wirtinger tables ---------------------------------------------------------


def test_wirtinger_mod_square():
    x, y = lift([0.3, -0.7], {0, 1}, 2)
    w = wirtinger(x * x + y * y, [(0, 1)])
    assert w.partial([0, 1]) == pytest.approx(1.0)
    assert abs(w.partial([0, 0])) < 1e-14


def test_wirtinger_real_part():
    x, y = lift([0.3, -0.7], {0, 1}, 1)
    w = wirtinger(x, [(0, 1)])
    assert w.partial([0]) == pytest.approx(0.5)


def test_wirtinger_mod_fourth_at_one():
    x, y = lift([1.0, 0.0], {0, 1}, 2)
    w = wirtinger((x * x + y * y) ** 2, [(0, 1)])
    assert w.partial([0, 1]) == pytest.approx(4.0)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-2, 2, allow_nan=False), min_size=15, max_size=15))
def test_wirtinger_hermitian_symmetry(coeffs):
    # jets of real-valued functions have conjugate-symmetric Wirtinger tables
    sp = JetSpace.get(2, 4, False)
    c = np.zeros(sp.n)
    c[:15] = coeffs
    w = wirtinger(Jet(sp, c), [(0, 1)])
    perm = w.space.conj_perm()
    sym = np.conj(w.coeffs)[perm] - w.coeffs
    assert np.abs(sym).max() < 1e-12


def test_wirtinger_rejects_partial_pairings():
    x, y, z = lift([1.0, 2.0, 3.0], {0, 1, 2}, 2)
    with pytest.raises(StructuralError):
        wirtinger(x + y + z, [(0, 1)])


def test_conj_swaps_blocks():
    x, y = lift([0.4, 0.9], {0, 1}, 3)
    w = wirtinger(x * y + x, [(0, 1)])
    wc = w.conj()
    assert wc.partial([0]) == pytest.approx(np.conj(w.partial([1])))


# -- jet matrices --------------------------------------------------------------


def test_invert_jet_matrix_roundtrip():
    x, y = lift([0.2, -0.1], {0, 1}, 2)
    M = [[x + 3.0, x * y], [y, y * y + 2.0]]
    Minv = invert_jet_matrix(M)
    for i in range(2):
        for j in range(2):
            acc = None
            for k in range(2):
                t = M[i][k] * Minv[k][j]
                acc = t if acc is None else acc + t
            expect = 1.0 if i == j else 0.0
            assert abs(acc.value - expect) < 1e-13
            assert np.abs(acc.coeffs[1:]).max() < 1e-12


def test_cjet_field_operations():
    x, y = lift([0.6, -0.3], {0, 1}, 3)
    z = CJet(x, y)
    w = CJet(y + 1.0, x * y)
    q = (z * w) / w
    assert np.allclose(q.re.coeffs, z.re.coeffs, atol=1e-13)
    assert np.allclose(q.im.coeffs, z.im.coeffs, atol=1e-13)
    assert np.allclose((z * z.conj()).re.coeffs, (x * x + y * y).coeffs, atol=1e-14)
