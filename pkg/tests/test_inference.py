import math

import numpy as np
import pytest

import oracles as orc
from dyadreg import (AsymptoticVariance, ConditioningPoint, DegenerateDensity, FixedPoint,
                     Homogeneous, NoLocalMass, Partition, Regime, confidence_interval,
                     conditional_cdf, rate_diagnostics, rule_of_thumb, sigma_F, sigma_g)
from dyadreg.conditional import dyad_density
from dyadreg.kernels import EPANECHNIKOV, roughness_constant

ONE = Partition.all_x1(1)


def test_sigma_F_golden(toy_panel):
    av = sigma_F(toy_panel, ConditioningPoint.full([1.0], [1.0]), 0.0, 1.0)
    assert abs(av.sigma - 0.23720053865804577253) < 1e-12
    assert av.d == 1 and av.scale == 6.0 and av.estimate == 0.5


@pytest.mark.parametrize("w1, w2, y, hx, hy", [(0.5, 1.7, 0.3, 1.0, 1.0),
                                               (0.2, 2.4, -0.6, 0.7, 0.4)])
def test_sigma_F_matches_oracle(toy_panel, w1, w2, y, hx, hy):
    av = sigma_F(toy_panel, ConditioningPoint.full([w1], [w2]), y, (hx, hy))
    assert abs(av.sigma - float(orc.sigma_F(orc.TOY_X, orc.TOY_Y, w1, w2, y, hx, hy))) < 1e-12
    assert av.scale == pytest.approx(6 * hx ** 2, rel=1e-15)


def test_sigma_g_golden(toy_panel):
    fp = FixedPoint(ONE, [1.0], [1.0])
    av = sigma_g(toy_panel, [2.0], [1.0], 0.3, Regime(), fp, 1.0, tol=1e-13)
    assert abs(av.sigma - 4.3069347543718459584) < 1e-9
    assert abs(av.estimate - -0.031728207915442156613) < 1e-10
    _, oracle = orc.sigma_g_fixed_point(orc.TOY_X, orc.TOY_Y, 2.0, 1.0, 0.3, 1.0, 1.0, 1.0, 1.0)
    assert abs(av.sigma - float(oracle)) < 1e-9


def test_sigma_g_at_normalization_point(toy_panel):
    fp = FixedPoint(ONE, [1.0], [1.0])
    av = sigma_g(toy_panel, [1.0], [1.0], 0.0, Regime(), fp, 1.0, tol=1e-13)
    c = ConditioningPoint.full([1.0], [1.0])
    from dyadreg import conditional_pdf
    # identical conditioning points: bracket = 2 / f(w), and F = 0.5 at the median
    f = dyad_density(toy_panel, c, 1.0)
    dens = conditional_pdf(toy_panel, c, 0.0, 1.0)
    expected = 0.25 / dens ** 2 * 2 / f * roughness_constant(2)
    assert av.sigma == pytest.approx(expected, rel=1e-9)


def test_sigma_g_degenerate_density(toy_panel):
    fp = FixedPoint(ONE, [1.0], [1.0])
    # compact kernel with a gap between outcomes: the median falls where f = 0
    from dyadreg import AgentTable, build_panel
    panel = build_panel(AgentTable.from_array([0.0, 0.0, 0.0]), [(1, 2, 0.0), (2, 1, 10.0)])
    fp = FixedPoint(ONE, [0.0], [0.0])
    with pytest.raises(DegenerateDensity):
        sigma_g(panel, [0.0], [0.0], 5.0, Regime(), fp, 1.0, kernel=EPANECHNIKOV)


def test_sigma_F_no_mass(toy_panel):
    with pytest.raises(NoLocalMass):
        sigma_F(toy_panel, ConditioningPoint.full([40.0], [1.0]), 0.0, 1.0, kernel=EPANECHNIKOV)


def test_sigma_F_peaks_near_median(small_sim):
    panel, bw = small_sim
    c = ConditioningPoint.full([6.0], [6.0])
    grid = np.linspace(-1, 6, 40)
    sig = np.array([sigma_F(panel, c, y, bw).sigma for y in grid])
    F = np.array([conditional_cdf(panel, c, y, bw) for y in grid])
    assert np.argmax(sig) == np.argmin(np.abs(F - 0.5))
    assert np.all(sig >= 0)


def test_sigma_g_nonnegative_sim(small_sim):
    panel, bw = small_sim
    norm = Homogeneous(ONE, [6.0], [6.0], -6.0, 1.8)
    for x in (4.5, 6.0, 7.0):
        assert sigma_g(panel, [x], [5.0], -6.0, Regime(), norm, bw).sigma >= 0


def test_confidence_interval():
    av = AsymptoticVariance(1.0, 1, 1.0)
    lo, hi = confidence_interval(0.0, av, 0.95)
    assert hi == pytest.approx(1.959963984540054, abs=1e-12)
    assert lo == -hi
    assert round(hi, 5) == 1.95996
    assert confidence_interval(0.3, AsymptoticVariance(0.0, 1, 5.0)) == (0.3, 0.3)
    a90, a95, a99 = (confidence_interval(2.0, AsymptoticVariance(0.7, 1, 3.0), lv)
                     for lv in (0.90, 0.95, 0.99))
    assert a99[0] < a95[0] < a90[0] and a90[1] < a95[1] < a99[1]
    assert av.half_width == pytest.approx(hi)
    for bad in (0.0, 1.0, 1.5):
        with pytest.raises(ValueError):
            confidence_interval(0.0, av, bad)


def test_rate_diagnostics_arithmetic():
    r = rate_diagnostics(10, 1, 1, 2, 1.0)
    assert r.log_rate == pytest.approx(math.log(90) / 90, rel=1e-15)
    assert round(r.log_rate, 2) == 0.05
    assert r.ok and r.window_lower == 10 and r.window_upper == 10


def test_rate_diagnostics_study_configuration():
    h = rule_of_thumb(9900)
    r = rate_diagnostics(100, 1, 1, 2, h)
    assert all(math.isfinite(v) for k, v in r.rows() if k != "status")
    assert r.n == 9900
    tiny = rate_diagnostics(2, 1, 1, 2, 0.05)
    assert all(math.isfinite(v) for k, v in tiny.rows() if k != "status")
    assert not tiny.ok and tiny.rows()[-1] == ("status", "warn")
    with pytest.raises(ValueError):
        rate_diagnostics(1, 1, 1, 2, 1.0)
