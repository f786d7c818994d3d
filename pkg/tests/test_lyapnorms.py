import numpy as np
import pytest

from hkdicho import (base_norm_sequence, build_dichotomy_norm,
                     build_growth_norm, check_compatibility, check_hd3_kd3,
                     check_hd4_kd4, condition_trend, estimate_hd5_kd5,
                     sample_unit_vectors, truncation_tail_nonincreasing,
                     vector_norms)


def dnorm(prep, window=None):
    return build_dichotomy_norm(prep.E, prep.P, prep.B, prep.h, prep.k, window)


def gnorm(prep, window=None):
    return build_growth_norm(prep.E, prep.P, prep.B, prep.h, prep.k, window)


def test_uniform_norm_value_is_seven(uniform):
    seq = dnorm(uniform)
    x = np.array([3.0, 4.0])
    for n in range(33):
        assert seq.value(n, x) == pytest.approx(7.0, abs=1e-12)
    seq_g = gnorm(uniform)
    for n in (0, 7, 32):
        assert seq_g.value(n, x) == pytest.approx(7.0, abs=1e-12)


def test_zero_vector_and_homogeneity(uniform, shear_d):
    for prep in (uniform, shear_d):
        seq = dnorm(prep)
        assert seq.value(5, np.zeros(2)) == 0.0
        x = np.array([0.3, -1.7])
        assert seq.value(5, 2.0 * x) == pytest.approx(2.0 * seq.value(5, x),
                                                      rel=1e-12)


def test_triangle_inequality_on_samples(shear_d):
    seq = dnorm(shear_d)
    X = shear_d.samples
    rng = np.random.default_rng(1)
    idx = rng.integers(0, len(X), size=(40, 2))
    for n in (0, 3, 17):
        for i, j in idx:
            lhs = seq.value(n, X[i] + X[j])
            rhs = seq.value(n, X[i]) + seq.value(n, X[j])
            assert lhs <= rhs * (1.0 + 1e-9)


def test_sandwich_lower_bound(uniform, shear_d, perturbed):
    for prep in (uniform, shear_d, perturbed):
        for seq in (dnorm(prep), gnorm(prep)):
            comp = check_compatibility(seq, prep.P, prep.samples)
            assert comp.lower_margin >= -1e-9
            assert np.all(np.diff(comp.c1) >= 0)
            assert comp.ok


def test_uniform_compat_constant_two(uniform):
    comp = check_compatibility(dnorm(uniform), uniform.P, uniform.samples)
    assert np.all(comp.c1 <= 2.0 + 1e-9)
    assert comp.c1[-1] == pytest.approx(2.0, rel=1e-12)


def test_base_norm_compat_is_one(uniform):
    seq = base_norm_sequence(2, "max", 32)
    comp = check_compatibility(seq, uniform.P, uniform.samples)
    assert np.allclose(comp.c1, 1.0)


def test_projected_bounds_factor_one(uniform, shear_d, perturbed):
    for prep in (uniform, shear_d, perturbed):
        hd3, kd3 = check_hd3_kd3(dnorm(prep), prep.E, prep.P, prep.B,
                                 prep.h, prep.k, prep.samples)
        assert hd3.uniform_constant <= 1.0 + 1e-9
        assert kd3.uniform_constant <= 1.0 + 1e-9
        assert hd3.base_verdict() == "HOLDS-ON-WINDOW"


def test_full_bounds_factor_one_and_monotone(uniform, shear_d):
    for prep in (uniform, shear_d):
        hd4, kd4, mono = check_hd4_kd4(dnorm(prep), prep.E, prep.P, prep.B,
                                       prep.h, prep.k, prep.samples)
        assert hd4.uniform_constant <= 1.0 + 1e-9
        assert kd4.uniform_constant <= 1.0 + 1e-9
        assert mono <= 1e-9


def test_projected_input_reduces_full_to_projected(uniform):
    # for x = P_n x the two bound families coincide
    seq = dnorm(uniform)
    X = np.array([[1.0, 0.0], [-0.5, 0.0]])
    hd3, _ = check_hd3_kd3(seq, uniform.E, uniform.P, uniform.B, uniform.h,
                           uniform.k, X)
    hd4, _, _ = check_hd4_kd4(seq, uniform.E, uniform.P, uniform.B, uniform.h,
                              uniform.k, X)
    assert np.allclose(hd3.raw, hd4.raw, rtol=1e-12)


def test_minimal_uniformity_coefficients_are_one(uniform, poly, shear_d,
                                                 perturbed):
    for prep in (uniform, poly, shear_d, perturbed):
        hd5, kd5 = estimate_hd5_kd5(dnorm(prep), prep.E, prep.P, prep.B,
                                    prep.h, prep.k, prep.samples)
        assert np.allclose(hd5.admissible, 1.0, atol=1e-9)
        assert np.allclose(kd5.admissible, 1.0, atol=1e-9)


def test_base_norm_coefficients_refute_growth_only(shear_g):
    # with the plain base norm the uniformity coefficients diverge
    seq = {W: base_norm_sequence(2, "max", W) for W in (8, 16, 32)}
    ests = [estimate_hd5_kd5(seq[W], shear_g.E, shear_g.P, shear_g.B,
                             shear_g.h, shear_g.k, shear_g.samples)[0]
            for W in (8, 16, 32)]
    assert condition_trend(ests).verdict == "diverging"


def test_base_norm_coefficients_stable_on_uniform(uniform):
    seq = {W: base_norm_sequence(2, "max", W) for W in (8, 16, 32)}
    ests = [estimate_hd5_kd5(seq[W], uniform.E, uniform.P, uniform.B,
                             uniform.h, uniform.k, uniform.samples)[0]
            for W in (8, 16, 32)]
    trend = condition_trend(ests)
    assert trend.verdict == "stable"
    assert np.allclose(trend.values, 1.0, atol=1e-9)


def test_truncation_tail_flag(uniform, shear_d, shear_g):
    for prep in (uniform, shear_d, shear_g):
        assert truncation_tail_nonincreasing(dnorm(prep), prep.samples) is \
            (prep is not shear_g)


def test_corollary_forms_match_pipeline(uniform, poly):
    """Exponential / polynomial instantiations: checking the rate-weighted
    bounds directly is the same computation as the generic factor check."""
    for prep in (uniform, poly):
        seq = dnorm(prep)
        X = prep.samples
        hd3, _ = check_hd3_kd3(seq, prep.E, prep.P, prep.B, prep.h, prep.k, X)
        hv = prep.h.values
        from hkdicho.projectors import projected_transitions
        SP = projected_transitions(prep.E, prep.P, "range")
        worst = np.zeros(33)
        for n in range(33):
            XP = X @ prep.P.p(n).T
            denom = seq.values(n, XP)
            ok = denom > 1e-250
            if not np.any(ok):
                continue
            for m in range(n, 33):
                lhs = seq.values(m, X @ SP[m, n].T)
                # direct weight form: |..|_m <= (h_n / h_m) |..|_n
                ratio = (lhs[ok] * hv[m] / hv[n]) / denom[ok]
                worst[n] = max(worst[n], float(np.max(ratio)))
        assert np.allclose(worst, hd3.raw, rtol=1e-12, atol=1e-12)


def test_growth_norm_separate_family(uniform):
    # inverse weighting also sandwiches the base norm from above by c1
    seq = gnorm(uniform)
    comp = check_compatibility(seq, uniform.P, uniform.samples)
    assert comp.ok and np.all(comp.c1 <= 2.0 + 1e-9)
