import numpy as np
import pytest

import oracles as orc
from dyadreg import (AgentTable, BracketFailure, ConditioningPoint, FeSlice, FixedPoint,
                     GSliceInE, GSliceInX, Homogeneous, Independence, Partition, Regime,
                     SignMismatch, build_panel, conditional_cdf, estimate_curves,
                     estimate_error_cdf, estimate_g, error_cdf_reference)
from dyadreg.montecarlo import simulate_dgp, true_g

FULL = Regime()
ONE = Partition.all_x1(1)
STUDY_NORM = Homogeneous(ONE, [6.0], [6.0], -6.0, 1.8)


def test_reference_point_follows_lambda(small_sim):
    panel, _ = small_sim
    ref, y = error_cdf_reference(panel, -4.0, FULL, STUDY_NORM)
    assert ref.w1.tolist() == pytest.approx([4.0]) and ref.w2.tolist() == pytest.approx([4.0])
    assert y == pytest.approx(1.2)
    ref, y = error_cdf_reference(panel, -6.0, FULL, STUDY_NORM)
    assert (ref.w1[0], ref.w2[0], y) == (6.0, 6.0, 1.8)


def test_sign_mismatch(small_sim):
    panel, bw = small_sim
    with pytest.raises(SignMismatch):
        estimate_error_cdf(panel, 1.0, FULL, STUDY_NORM, bw=bw)
    with pytest.raises(SignMismatch):
        estimate_g(panel, [5.0], [5.0], 0.0, FULL, STUDY_NORM, bw)


def test_self_inversion(small_sim):
    panel, bw = small_sim
    est = estimate_g(panel, [6.0], [6.0], -6.0, FULL, STUDY_NORM, bw)
    assert abs(est.value - 1.8) <= 1e-6
    fp = FixedPoint(ONE, [6.0], [6.0])
    for e in (-1.0, 0.7, 2.5):
        assert abs(estimate_g(panel, [6.0], [6.0], e, FULL, fp, bw).value - e) <= 1e-6


def test_error_cdf_is_conditional_cdf(small_sim):
    panel, bw = small_sim
    v = estimate_error_cdf(panel, -5.0, FULL, STUDY_NORM, bw=bw)
    lam = 5 / 6
    direct = conditional_cdf(panel, ConditioningPoint.full([6 * lam], [6 * lam]), 1.8 * lam, bw)
    assert abs(v - direct) < 1e-12


def test_fixed_point_g_matches_oracle(toy_panel):
    fp = FixedPoint(ONE, [1.0], [1.0])
    est = estimate_g(toy_panel, [2.0], [1.0], 0.3, FULL, fp, 1.0, tol=1e-13)
    assert abs(est.value - -0.031728207915442156613) < 1e-10
    g, _ = orc.sigma_g_fixed_point(orc.TOY_X, orc.TOY_Y, 2.0, 1.0, 0.3, 1.0, 1.0, 1.0, 1.0)
    assert abs(est.value - float(g)) < 1e-10


def test_g_monotone_in_e_with_fixed_reference(small_sim):
    # with a fixed reference point the map e -> g-hat composes two monotone
    # maps; under the homogeneous normalization the reference moves with e
    # and finite-sample monotonicity is not guaranteed
    panel, bw = small_sim
    fp = FixedPoint(ONE, [6.0], [6.0])
    grid = np.linspace(0.5, 3.5, 15)
    table = estimate_curves(panel, GSliceInE((4.0,), (5.0,)), grid, FULL, fp, bw)
    assert table.missing == 0
    assert np.all(np.diff(table.estimate) >= -1e-9)


def test_curves_shapes_and_fe_range(small_sim):
    panel, bw = small_sim
    grid = np.linspace(-8, -4, 9)
    fe = estimate_curves(panel, FeSlice(), grid, FULL, STUDY_NORM, bw)
    assert np.all((fe.estimate >= 0) & (fe.estimate <= 1))
    gx = estimate_curves(panel, GSliceInX((5.0,), -6.0), np.linspace(4, 8, 5), FULL,
                         STUDY_NORM, bw)
    assert gx.estimate.shape == (5,) and np.all(gx.local_mass > 0)


def test_curve_failures_are_recorded(small_sim):
    panel, bw = small_sim
    table = estimate_curves(panel, FeSlice(), [-6.0, 2.0], FULL, STUDY_NORM, bw)
    assert table.missing == 1 and table.reason[1] == "SignMismatch" and table.reason[0] == ""


def test_saturated_reference_is_bracket_failure(toy_panel):
    fp = FixedPoint(ONE, [1.0], [1.0])
    with pytest.raises(BracketFailure):
        estimate_g(toy_panel, [1.0], [1.0], 1e4, FULL, fp, (1.0, 0.01))


def test_true_g_homogeneous_of_degree_one():
    for lam in (0.5, 2.0, 3.7):
        assert true_g(4 * lam, 5 * lam, -6 * lam) == pytest.approx(lam * true_g(4, 5, -6),
                                                                   rel=1e-14)
    assert true_g(4, 5, -6) == pytest.approx(120 / 216, rel=1e-15)
    assert true_g(6, 6, -6) == pytest.approx(1.8, rel=1e-15)


def _two_block_panel(seed=3, N=30):
    rng = np.random.default_rng(seed)
    X = np.column_stack([rng.integers(0, 2, N).astype(float), rng.normal(6, 1, N)])
    recs = []
    for a in range(N):
        for b in range(N):
            if a != b:
                e = rng.normal(-6, 1)
                recs.append((a + 1, b + 1, -0.3 * (1 + X[a, 0]) * X[a, 1] ** 2 * X[b, 1] ** 2 / e ** 3))
    return build_panel(AgentTable.from_array(X), recs)


def test_regimes_coincide_when_x0_is_ignored():
    panel = _two_block_panel()
    part = Partition((0,), (1,))
    norm = Homogeneous(part, [6.0], [6.0], -6.0, 1.8)
    bw = (0.6, 0.5)
    a = estimate_g(panel, [0.0, 5.0], [1.0, 6.0], -6.0, Regime(Independence.FULL, False), norm, bw)
    b = estimate_g(panel, [0.0, 5.0], [1.0, 6.0], -6.0, Regime(Independence.COND_X0, False), norm, bw)
    assert a.value == b.value


def test_x0_dependence_uses_query_or_reference_x0():
    panel = _two_block_panel()
    part = Partition((0,), (1,))
    norm = Homogeneous(part, [6.0], [6.0], -6.0, 1.8)
    bw = (0.6, 0.5)
    cond_reg = Regime(Independence.COND_X0, True)
    full_reg = Regime(Independence.FULL, True)
    est = estimate_g(panel, [1.0, 6.0], [0.0, 6.0], -6.0, cond_reg, norm, bw)
    # the query's x0 block is the reference x0 block; self-inversion holds
    assert abs(est.value - 1.8) <= 1e-6
    assert est.reference.w1.tolist() == [1.0, 6.0] and est.reference.dim == 2
    est = estimate_g(panel, [1.0, 6.0], [0.0, 6.0], -6.0, full_reg, norm, bw, xbar0=([1.0], [0.0]))
    assert abs(est.value - 1.8) <= 1e-6
    est = estimate_g(panel, [1.0, 6.0], [0.0, 6.0], -6.0, full_reg, norm, bw)
    m = panel.X[:, 0].mean()
    assert est.reference.w1[0] == m
    with pytest.raises(ValueError):
        estimate_error_cdf(panel, -6.0, cond_reg, norm, bw=bw)


def test_partition_must_match_panel(small_sim):
    panel, bw = small_sim
    norm = Homogeneous(Partition((0,), (1,)), [6.0], [6.0], -6.0, 1.8)
    with pytest.raises(ValueError):
        estimate_g(panel, [5.0], [5.0], -6.0, FULL, norm, bw)


def test_bandwidth_required(small_sim):
    panel, _ = small_sim
    with pytest.raises(ValueError):
        estimate_g(panel, [5.0], [5.0], -6.0, FULL, STUDY_NORM)


def test_estimates_track_truth_at_moderate_n():
    panel = simulate_dgp(60, 11)
    from dyadreg import Bandwidths
    est = estimate_g(panel, [5.0], [5.5], -6.0, FULL, STUDY_NORM, Bandwidths.rule_of_thumb(60))
    assert abs(est.value - true_g(5.0, 5.5, -6.0)) < 0.3
