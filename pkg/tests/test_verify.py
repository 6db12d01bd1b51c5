"""Inequality suites, divergence demo and threshold scan."""

import math

import numpy as np
import pytest

from phasequant.verify import (
    ALL_INEQUALITY_SUITES,
    check_geometric_mean_decay,
    check_peetre_type,
    check_product_split,
    check_subadditive_bracket,
    divergence_demo,
    plateau_bump,
    threshold_scan,
)


class TestInequalitySuites:
    @pytest.mark.parametrize("suite", ALL_INEQUALITY_SUITES)
    def test_full_sample_passes(self, suite):
        rep = suite(10_000, seed=2024)
        assert rep.verdict
        assert rep.max_violation <= 1e-12

    @pytest.mark.parametrize("suite", ALL_INEQUALITY_SUITES)
    def test_reproducible_under_seed(self, suite):
        a = suite(2000, seed=7)
        b = suite(2000, seed=7)
        assert a == b

    def test_product_split_spot_value(self):
        # x = y = 1, k1 = k2 = 1: 1 <= 4 ((1/2)^2 + (3/2)^2) = 10
        assert 1.0 <= 4.0 * ((0.5) ** 2 + (1.5) ** 2)
        rep = check_product_split(500, seed=1)
        assert rep.verdict

    def test_geometric_mean_spot_value(self):
        # q = 1, r = 1, x = 0, y = 2: e^{-2 sqrt2} <= e^{-2}
        l = -(math.sqrt(2.0) + math.sqrt(2.0))
        assert l <= -2.0
        assert check_geometric_mean_decay(500, seed=1).verdict

    def test_peetre_spot_value(self):
        # s = 1, q = 1, x = 0, y = 1: sqrt2 <= 1 + 1 + sqrt2
        assert math.sqrt(2.0) <= 2.0 + math.sqrt(2.0)
        assert check_peetre_type(500, seed=1).verdict

    def test_subadditive_spot_values(self):
        # q = 0: 1 <= 2; q = 1, x = y: 1 <= 2<x>
        assert check_subadditive_bracket(500, seed=1).verdict

    def test_report_json_shape(self):
        rep = check_product_split(100, seed=3)
        data = rep.to_json()
        assert data["verdict"] == "pass"
        assert data["params"]["seed"] == 3


class TestPlateau:
    def test_plateau_and_support(self):
        assert np.allclose(plateau_bump(np.linspace(-1, 1, 11)), 1.0)
        assert np.all(plateau_bump(np.array([-2.0, 2.0, 3.0])) == 0.0)
        mid = plateau_bump(np.array([1.5]))[0]
        assert 0.0 < mid < 1.0

    def test_monotone_decreasing_in_abs(self):
        xs = np.linspace(0.0, 2.0, 400)
        vals = plateau_bump(xs)
        assert np.all(np.diff(vals) <= 1e-12)


class TestDivergenceDemo:
    def test_strictly_increasing(self):
        log_i = divergence_demo(1.0, 1.0, 8)
        assert np.all(np.diff(log_i) > 0)

    def test_superlinear_growth(self):
        log_i = divergence_demo(1.0, 1.0, 8)
        # doubling the cutoff doubles log I_n in the limit
        assert (log_i[-1] - log_i[-2]) >= 1.5 * (log_i[-2] - log_i[-3])

    def test_small_exponent_limit(self):
        # l -> 0: I_n ~ 2^n * int chi within 1%
        log_i = divergence_demo(1e-6, 1.0, 5)
        g = np.linspace(-2.2, 2.2, 20001)
        int_chi = np.trapezoid(plateau_bump(g), g)
        for n in range(1, 6):
            assert math.exp(log_i[n - 1]) == pytest.approx(
                2.0**n * int_chi, rel=0.01
            )

    def test_parameter_domain(self):
        from phasequant.errors import InvalidParameterError

        with pytest.raises(InvalidParameterError):
            divergence_demo(-1.0, 1.0)


class TestThresholdScan:
    def test_brackets_twice_the_rate(self):
        scan = threshold_scan(
            1.0, 1.0, [1.0, 1.3, 1.6, 1.8, 1.9, 2.0, 2.1, 2.3, 2.5]
        )
        assert scan.last_finite is not None and scan.first_divergent is not None
        assert 2.0 - 0.2 <= scan.last_finite < scan.first_divergent <= 2.0 + 0.2

    def test_interior_rate_is_finite(self):
        scan = threshold_scan(1.0, 1.0, [1.0])
        assert scan.divergent == (False,)

    def test_far_above_threshold_diverges(self):
        scan = threshold_scan(1.0, 1.0, [2.5])
        assert scan.divergent == (True,)

    def test_scales_with_rate(self):
        scan = threshold_scan(0.5, 1.0, [0.8, 0.9, 1.0, 1.1, 1.2])
        assert scan.last_finite <= 1.0 <= scan.first_divergent + 0.2
