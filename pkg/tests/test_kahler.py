"""Kaehler classification chain and the unitary-invariant characterizations."""

from finsler.geometry import SamplePlan
from finsler.kahler import (classify, is_at_least, un_invariant_kahler_check,
                            weakly_kahler_pde_residual)
from finsler.metrics import build_profile, instantiate

PLAN = SamplePlan(seed=0, n_points=6, n_dirs=4, radial_range=(0.1, 0.55))


def test_poincare_ball_is_strongly_kahler():
    m = instantiate({"family": "hermitian", "complex_dim": 2,
                     "params": {"catalog": "poincare_ball"}})
    rep = classify(m, PLAN)
    assert rep.classification == "strongly_kahler"
    assert rep.residual_strong < 1e-9
    assert not rep.errors


def test_minkowski_is_strongly_kahler():
    m = instantiate({"family": "minkowski", "complex_dim": 2,
                     "params": {"k": 2, "eps": 1.0}})
    rep = classify(m, PLAN)
    assert rep.classification == "strongly_kahler"
    assert rep.residual_strong < 1e-10


def test_szabo_disk_factors_kahler():
    m = instantiate({"family": "szabo", "params": {
        "k": 2, "eps": 0.5,
        "factor1": {"complex_dim": 1, "params": {"catalog": "poincare_disk"}},
        "factor2": {"complex_dim": 1, "params": {"catalog": "poincare_disk"}}}})
    rep = classify(m, SamplePlan(seed=1, n_points=5, n_dirs=4, radial_range=(0.1, 0.45)))
    assert is_at_least(rep.classification, "kahler"), rep.to_dict()


def test_nonkahler_hermitian_detected():
    m = instantiate({"family": "hermitian", "complex_dim": 2,
                     "params": {"catalog": "nonkahler"}})
    rep = classify(m, PLAN)
    assert rep.classification == "none"
    assert rep.residual_weak > rep.tolerance * rep.scale


def test_pass_chain_is_monotone():
    for spec in (
        {"family": "hermitian", "complex_dim": 2, "params": {"catalog": "poincare_ball"}},
        {"family": "hermitian", "complex_dim": 2, "params": {"catalog": "nonkahler"}},
        {"family": "minkowski", "complex_dim": 2, "params": {"k": 2, "eps": 1.0}},
    ):
        rep = classify(instantiate(spec), PLAN)
        p = rep.passes
        assert (not p["strongly_kahler"]) or p["kahler"]
        assert (not p["kahler"]) or p["weakly_kahler"]


def test_un_invariant_check_euclidean_profile():
    rep = un_invariant_kahler_check(build_profile({"form": "gradient", "f": "one"}))
    assert rep.passed
    assert rep.stats["observed_class"] == "strongly_kahler"


def test_un_invariant_check_exponential_profile():
    rep = un_invariant_kahler_check(
        build_profile({"form": "gradient", "f": "exp", "c": 1.0}))
    assert rep.passed, rep.stats
    assert is_at_least(rep.stats["observed_class"], "kahler")


def test_un_invariant_check_free_profile_not_kahler():
    rep = un_invariant_kahler_check(
        build_profile({"form": "free", "expr": "one_plus_ts2"}))
    assert rep.passed, rep.stats
    assert rep.stats["observed_class"] in ("weakly_kahler", "none")


def test_pde_residual_constant_profile():
    rep = weakly_kahler_pde_residual(build_profile({"form": "gradient", "f": "one"}))
    assert rep.passed
    assert rep.stats["max_residual"] == 0.0


def test_pde_residual_gradient_profile_disk():
    rep = weakly_kahler_pde_residual(
        build_profile({"form": "gradient", "f": "inv_one_minus_t"}))
    assert rep.passed
    assert rep.stats["max_residual"] < 1e-10 * rep.stats["scale"]


def test_pde_residual_gradient_profile_exp():
    rep = weakly_kahler_pde_residual(
        build_profile({"form": "gradient", "f": "exp", "c": 0.8}))
    assert rep.passed, rep.stats


def test_pde_residual_violated_profile():
    rep = weakly_kahler_pde_residual(build_profile({"form": "free", "expr": "one_plus_s2"}))
    assert not rep.passed
    assert rep.stats["max_residual"] > 1e-3
    assert rep.stats["argmax_t"] is not None


def test_cross_validation_pde_vs_classify():
    # the residual route and the connection route agree on the catalog
    for params, expect in (
        ({"form": "gradient", "f": "exp", "c": 0.5}, True),
        ({"form": "free", "expr": "one_plus_s2"}, False),
    ):
        profile = build_profile(params)
        pde = weakly_kahler_pde_residual(profile)
        cls = un_invariant_kahler_check(profile)
        observed_weak = pde.passed
        assert observed_weak == expect
        assert cls.passed
