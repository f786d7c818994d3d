import numpy as np
import pytest

from hkdicho import (LinearSystem, MalformedCandidateError, ProjectorSequence,
                     WindowTooSmallError, build_evolution,
                     build_skew_evolution, check_candidate, compute_gain_tables,
                     condition_trend, cross_candidate, divergence_diagnostic,
                     estimate_core_conditions, estimate_hd1, estimate_hd2,
                     estimate_hg1, estimate_kd1, estimate_kg1, make_example)


def core(prep, window=None):
    return estimate_core_conditions(prep.E, prep.P, prep.B, prep.h, prep.k,
                                    window=window, tables=prep.tables)


def test_uniform_envelopes_are_one(uniform):
    ests = core(uniform)
    for cid in ("hd1", "kd1", "hg1", "kg1", "kd2", "hg2"):
        assert np.allclose(ests[cid].envelope, 1.0, atol=1e-12), cid
        assert ests[cid].method == "exact"


def test_shear_projected_conditions_are_uniform(shear_d):
    ests = core(shear_d)
    for cid in ("hd1", "kd1", "hg1", "kg1"):
        assert np.allclose(ests[cid].envelope, 1.0, atol=1e-9), cid


def test_shear_full_space_condition_values(shear_d):
    # sup over the unit sphere picks up the projector norm 1 + a_n at m = n
    a = shear_d.bundle.rates["a"].values
    est = estimate_hd2(shear_d.E, shear_d.P, shear_d.B, shear_d.h,
                       tables=shear_d.tables)
    assert np.allclose(est.raw, 1.0 + a, rtol=1e-9)


def test_growth_only_example_values(shear_g):
    ests = core(shear_g)
    N = shear_g.bundle.window
    n = np.arange(N + 1.0)
    assert np.allclose(ests["hd1"].raw, (N + 1.0) / (n + 1.0), rtol=1e-9)
    assert np.allclose(ests["hg1"].envelope, 1.0, atol=1e-9)
    assert np.allclose(ests["kg1"].envelope, 1.0, atol=1e-9)


def test_injectivity_failure_reported():
    A = np.repeat(np.diag([0.5, 0.0])[None], 3, axis=0)
    E = build_evolution(LinearSystem(A, "max"))
    P = ProjectorSequence.constant(np.diag([1.0, 0.0]), 3)
    tables = compute_gain_tables(E, P)
    est = estimate_kd1(E, P, make_example("uniform-exponential", window=3).k,
                       tables=tables)
    assert not est.finite
    assert est.failures
    assert est.base_verdict() == "FAILS"


def test_candidate_checks(shear_d, shear_g):
    n = np.arange(33)
    one_log = 1.0 + n        # 1 + log a_n for a = e^n
    for cid in ("hd1", "kd1"):
        est = core(shear_d)[cid]
        assert check_candidate(est, one_log).ok
    hd1_g = core(shear_g)["hd1"]
    report = check_candidate(hd1_g, np.ones(33))
    assert not report.ok and report.margin < 0
    # the envelope itself always passes with zero margin
    self_report = check_candidate(hd1_g, hd1_g.envelope)
    assert self_report.ok and self_report.margin == pytest.approx(0.0, abs=1e-12)


def test_candidate_validation_errors(uniform):
    est = core(uniform)["hd1"]
    with pytest.raises(MalformedCandidateError):
        check_candidate(est, np.linspace(5.0, 1.0, 33))   # decreasing
    with pytest.raises(MalformedCandidateError):
        check_candidate(est, np.full(33, 0.5))            # below one
    with pytest.raises(MalformedCandidateError):
        check_candidate(est, np.ones(4))                  # too short


def test_uniform_implies_nondecreasing_candidates(uniform):
    # passing with a constant implies passing with anything nondecreasing
    # bounded below by it
    est = core(uniform)["hd1"]
    const = np.full(33, 1.5)
    assert check_candidate(est, const).ok
    growing = const + 0.01 * np.arange(33)
    assert check_candidate(est, growing).ok


def test_dichotomy_bounds_dominate_growth_bounds(uniform, shear_d, shear_g):
    for prep in (uniform, shear_d, shear_g):
        ests = core(prep)
        assert np.all(ests["hg1"].raw <= ests["hd1"].raw + 1e-12)
        assert np.all(ests["kg1"].raw <= ests["kd1"].raw + 1e-12)


def test_window_monotonicity(shear_g):
    # enlarging the window never decreases a raw minimum at a common index
    small = estimate_hd1(shear_g.E, shear_g.P, shear_g.h, window=16,
                         tables=shear_g.tables)
    large = estimate_hd1(shear_g.E, shear_g.P, shear_g.h, window=32,
                         tables=shear_g.tables)
    assert np.all(large.raw[:17] >= small.raw - 1e-12)


def test_scaling_multiplies_gains():
    base = make_example("uniform-exponential", window=8)
    scaled = LinearSystem(2.0 * base.system.matrices, "max")
    E0 = build_evolution(base.system)
    E1 = build_evolution(scaled)
    P = base.projectors
    t0 = compute_gain_tables(E0, P)
    t1 = compute_gain_tables(E1, P)
    for n in range(9):
        for m in range(n, 9):
            assert t1.sup_p[m, n] == pytest.approx(
                2.0 ** (m - n) * t0.sup_p[m, n], rel=1e-12)


def test_divergence_diagnostic_values():
    diag = divergence_diagnostic([8, 16, 32], [9.0, 17.0, 33.0])
    assert diag.verdict == "diverging"
    assert diag.slope == pytest.approx(1.0, abs=1e-12)
    stable = divergence_diagnostic([8, 16, 32], [1.0, 1.0, 1.0])
    assert stable.verdict == "stable" and stable.slope == pytest.approx(0.0)


def test_divergence_window_too_small():
    with pytest.raises(WindowTooSmallError):
        divergence_diagnostic([2, 4], [1.0, 2.0])


def test_condition_trend_shear_growth(shear_g):
    ests = [estimate_hd1(shear_g.E, shear_g.P, shear_g.h, window=W,
                         tables=shear_g.tables) for W in (8, 16, 32)]
    trend = condition_trend(ests)
    assert trend.verdict == "diverging"
    assert trend.values == (9.0, pytest.approx(17.0), pytest.approx(33.0))
    assert trend.slope == pytest.approx(1.0, abs=0.05)


def test_condition_trend_ignores_index_growth(shear_d):
    # hd2 minima grow like 1 + a_n in the index but are window-stable
    ests = [estimate_hd2(shear_d.E, shear_d.P, shear_d.B, shear_d.h, window=W,
                         tables=shear_d.tables) for W in (8, 16, 32)]
    trend = condition_trend(ests)
    assert trend.verdict == "stable"


def test_full_bound_equivalence_via_cross_candidate(uniform, shear_d):
    # witness transfer d -> s_n = max_{j<=n} d_j (|P_j| + |Q_j|)
    for prep in (uniform, shear_d):
        ests = core(prep)
        d = np.maximum(ests["hd1"].admissible, ests["kd1"].admissible)
        s = cross_candidate(d, prep.P, prep.bundle.system.norm)
        assert check_candidate(ests["hd2"], s).ok
        assert check_candidate(ests["kd2"], s).ok


def test_both_routes_diverge_together(shear_g):
    hd1 = [estimate_hd1(shear_g.E, shear_g.P, shear_g.h, window=W,
                        tables=shear_g.tables) for W in (8, 16, 32)]
    hd2 = [estimate_hd2(shear_g.E, shear_g.P, shear_g.B, shear_g.h, window=W,
                        tables=shear_g.tables) for W in (8, 16, 32)]
    assert condition_trend(hd1).verdict == "diverging"
    assert condition_trend(hd2).verdict == "diverging"
