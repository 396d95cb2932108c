import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from plap.errors import Divergent, DomainError, OutOfRange
from plap.nonlinearity import build_nonlinearity
from plap.timemap import (
    Problem,
    alpha,
    endpoint_levels,
    flat_core_half_widths,
    integral_I,
    integral_J,
    s_of_r,
    slope_bounds,
    theta,
    theta_alpha_grids,
    z_of_r,
)

from oracles import brute_force_I, brute_force_J, sine_integral_closed_form


@pytest.fixture(scope="module")
def ci_problem(cubic_odd):
    return Problem(p=2.0, nl=cubic_odd, lam=1.0)


class TestSlopeBounds:
    def test_closed_form(self, ci_problem):
        b = slope_bounds(ci_problem)
        assert b.r_pos == pytest.approx((2 * 0.25) ** 0.5, rel=1e-13)
        assert b.r_neg == pytest.approx(b.r_pos, rel=1e-13)
        assert b.r_star == b.r_pos

    def test_lambda_scaling(self, cubic_odd):
        b1 = slope_bounds(Problem(p=2.0, nl=cubic_odd, lam=1.0))
        b2 = slope_bounds(Problem(p=2.0, nl=cubic_odd, lam=2.0))
        assert b2.r_pos == pytest.approx(2 ** (1 / 2.0) * b1.r_pos, rel=1e-13)

    def test_asym_min(self, asym):
        b = slope_bounds(Problem(p=3.0, nl=asym, lam=1.0))
        assert b.r_pos < b.r_neg
        assert b.r_star == b.r_pos


class TestLevelFunctions:
    def test_closed_form_quadratic(self, ci_problem):
        # 0.25 = z^2 - z^4/2 has the admissible root z^2 = 1 - sqrt(1/2)
        z = z_of_r(ci_problem, 0.5)
        assert z == pytest.approx(np.sqrt(1 - np.sqrt(0.5)), rel=1e-12)
        s = s_of_r(ci_problem, 0.5)
        assert s == pytest.approx(-z, rel=1e-12)

    def test_limits(self, ci_problem):
        b = slope_bounds(ci_problem)
        assert z_of_r(ci_problem, 1e-8) < 1e-3
        assert z_of_r(ci_problem, b.r_pos * (1 - 1e-12)) == pytest.approx(1.0, abs=1e-5)

    def test_out_of_range(self, ci_problem):
        b = slope_bounds(ci_problem)
        for bad in (0.0, -1.0, b.r_pos, 2 * b.r_pos):
            with pytest.raises(OutOfRange):
                z_of_r(ci_problem, bad)
        with pytest.raises(OutOfRange):
            s_of_r(ci_problem, b.r_neg)

    def test_monotone_in_r(self, ci_problem):
        b = slope_bounds(ci_problem)
        r = np.linspace(0.01, 0.99, 64) * b.r_pos
        z = np.array([z_of_r(ci_problem, float(v)) for v in r])
        assert np.all(np.diff(z) > 0)

    @given(
        lam=st.floats(0.5, 50.0),
        frac=st.floats(0.05, 0.95),
        p=st.floats(1.6, 4.0),
    )
    @settings(max_examples=40, deadline=None)
    def test_scale_invariance(self, cubic_odd, lam, frac, p):
        # z depends on (r, lambda) only through r^p / lambda
        prob1 = Problem(p=p, nl=cubic_odd, lam=lam)
        prob2 = Problem(p=p, nl=cubic_odd, lam=2 * lam)
        r = frac * slope_bounds(prob1).r_pos
        z1 = z_of_r(prob1, r)
        z2 = z_of_r(prob2, 2 ** (1.0 / p) * r)
        assert z1 == pytest.approx(z2, rel=1e-12)


class TestIntegralI:
    def test_small_level_limit_q_equals_p(self, cubic_odd):
        expected = 2.0**0.5 * sine_integral_closed_form(2.0)
        assert integral_I(cubic_odd, 2.0, 1e-4) == pytest.approx(expected, rel=1e-6)

    def test_small_level_vanishes_q_below_p(self, cubic_odd):
        # q < p: I(a) ~ a^{(p-q)/p} -> 0
        v1 = integral_I(cubic_odd, 3.0, 1e-3)
        v2 = integral_I(cubic_odd, 3.0, 1e-6)
        assert v2 < v1 / 5
        slope = np.log(v1 / v2) / np.log(1e3)
        assert slope == pytest.approx((3.0 - 2.0) / 3.0, rel=2e-2)

    def test_against_oracle(self, cubic_odd):
        val = integral_I(cubic_odd, 2.0, 0.5, tol=1e-12)
        assert val == pytest.approx(brute_force_I(cubic_odd, 2.0, 0.5), rel=1e-8)

    def test_divergent_endpoint(self, cubic_odd):
        with pytest.raises(Divergent):
            integral_I(cubic_odd, 2.0, cubic_odd.z_plus)
        with pytest.raises(Divergent):
            integral_J(cubic_odd, 1.5, cubic_odd.z_minus)

    def test_domain(self, cubic_odd):
        with pytest.raises(DomainError):
            integral_I(cubic_odd, 2.0, 1.5)
        with pytest.raises(DomainError):
            integral_I(cubic_odd, 2.0, 0.0)
        with pytest.raises(DomainError):
            integral_J(cubic_odd, 2.0, 0.5)

    def test_endpoint_finite_above_two(self, quintic_q3):
        val = integral_I(quintic_q3, 3.0, quintic_q3.z_plus)
        assert np.isfinite(val) and val > 0

    def test_oracle_random_levels(self, asym):
        rng = np.random.default_rng(42)
        for a in rng.uniform(0.05, 0.95, 6) * asym.z_plus:
            mine = integral_I(asym, 3.0, float(a), tol=1e-12)
            ref = brute_force_I(asym, 3.0, float(a))
            assert mine == pytest.approx(ref, rel=1e-8)


class TestIntegralJ:
    def test_mirror_of_I_odd(self, cubic_odd):
        for a in (0.2, 0.5, 0.8, 0.99):
            assert integral_J(cubic_odd, 2.0, -a, tol=1e-12) == pytest.approx(
                integral_I(cubic_odd, 2.0, a, tol=1e-12), rel=1e-11
            )

    def test_small_level_limit(self, cubic_odd):
        expected = 2.0**0.5 * sine_integral_closed_form(2.0)
        assert integral_J(cubic_odd, 2.0, -1e-4) == pytest.approx(expected, rel=1e-6)

    def test_against_oracle(self, asym):
        val = integral_J(asym, 3.0, -0.5, tol=1e-12)
        assert val == pytest.approx(brute_force_J(asym, 3.0, -0.5), rel=1e-8)


class TestTimeMaps:
    def test_theta_limit_q_equals_p(self, cubic_odd):
        lam1 = np.pi**2
        for lam in (1.0, 7.3):
            prob = Problem(p=2.0, nl=cubic_odd, lam=lam)
            assert 2 * theta(prob, 1e-7) == pytest.approx((lam1 / lam) ** 0.5, rel=1e-9)

    def test_theta_increasing(self, ci_problem):
        b = slope_bounds(ci_problem)
        r = np.linspace(0.05, 0.95, 32) * b.r_pos
        th = np.array([theta(ci_problem, float(v)) for v in r])
        assert np.all(np.diff(th) > 0)

    def test_alpha_equals_theta_odd(self, ci_problem):
        for frac in (0.1, 0.5, 0.9):
            r = frac * slope_bounds(ci_problem).r_pos
            assert alpha(ci_problem, r) == pytest.approx(theta(ci_problem, r), rel=1e-11)

    def test_lambda_scaled_theta_invariant(self, cubic_odd):
        # lambda^(1/p) * theta at matched slopes is lambda-free
        p = 2.0
        prob1 = Problem(p=p, nl=cubic_odd, lam=3.0)
        prob2 = Problem(p=p, nl=cubic_odd, lam=6.0)
        r = 0.4 * slope_bounds(prob1).r_pos
        t1 = theta(prob1, r, tol=1e-12)
        t2 = theta(prob2, 2 ** (1 / p) * r, tol=1e-12)
        assert t1 == pytest.approx(2 ** (1 / p) * t2, rel=1e-11)

    def test_grid_matches_scalars(self, ci_problem):
        b = slope_bounds(ci_problem)
        r = np.linspace(0.1, 0.9, 7) * b.r_pos
        th, al = theta_alpha_grids(ci_problem, r, tol=1e-10)
        for i, v in enumerate(r):
            assert th[i] == pytest.approx(theta(ci_problem, float(v)), rel=1e-9)
            assert al[i] == pytest.approx(alpha(ci_problem, float(v)), rel=1e-9)


class TestFlatCoreWidths:
    def test_threshold_identity(self, quintic_q3):
        # 2 x(lambda) = 1 exactly at lambda = (p-1)/p (2 I(z+))^p
        p = 3.0
        i_zp = integral_I(quintic_q3, p, quintic_q3.z_plus, tol=1e-12)
        lam_crit = (p - 1) / p * (2 * i_zp) ** p
        x, y = flat_core_half_widths(Problem(p=p, nl=quintic_q3, lam=lam_crit))
        assert 2 * x == pytest.approx(1.0, rel=1e-11)
        assert y == pytest.approx(x, rel=1e-11)

    def test_lambda_scaling(self, quintic_q3):
        x1, _ = flat_core_half_widths(Problem(p=3.0, nl=quintic_q3, lam=10.0))
        x2, _ = flat_core_half_widths(Problem(p=3.0, nl=quintic_q3, lam=20.0))
        assert x2 == pytest.approx(x1 / 2 ** (1 / 3.0), rel=1e-11)

    def test_divergent_at_low_p(self, cubic_odd):
        with pytest.raises(Divergent):
            flat_core_half_widths(Problem(p=2.0, nl=cubic_odd, lam=1.0))


class TestEndpointLevels:
    def test_odd(self, cubic_odd):
        lv = endpoint_levels(cubic_odd, 3.0)
        assert lv.z_hat == cubic_odd.z_plus
        assert lv.s_hat == cubic_odd.z_minus

    def test_asymmetric_closed_form(self, asym):
        # A+ = 1/8 < A- = 1/4: s_hat solves S^2/2 - S^4/4 = 1/8
        lv = endpoint_levels(asym, 3.0)
        assert lv.z_hat == asym.z_plus
        assert lv.s_hat == pytest.approx(-np.sqrt(1 - np.sqrt(0.5)), rel=1e-12)

    def test_mirror_case(self):
        nl = build_nonlinearity("power_asym", 2.0, {"b_plus": 1.0, "b_minus": 2.0, "r_exp": 4.0})
        lv = endpoint_levels(nl, 3.0)
        assert lv.s_hat == nl.z_minus
        assert lv.z_hat == pytest.approx(np.sqrt(1 - np.sqrt(0.5)), rel=1e-12)


class TestIMonotonicity:
    def test_increasing_for_q_le_p(self, cubic_odd):
        a = np.linspace(0.05, 0.999, 64)
        vals = [integral_I(cubic_odd, 2.0, float(v)) for v in a]
        assert np.all(np.diff(vals) > 0)

    def test_J_decreasing_for_q_le_p(self, asym):
        a = np.linspace(-0.97, -0.05, 64) * abs(asym.z_minus)
        vals = [integral_J(asym, 3.0, float(v)) for v in a]
        assert np.all(np.diff(vals) < 0)

    def test_bounded_below_for_q_gt_p(self, qgtp):
        # q = 3 > p = 2: I dips to an interior minimum and stays positive
        a = np.linspace(0.02, 0.98, 64) * qgtp.z_plus
        vals = np.array([integral_I(qgtp, 2.0, float(v)) for v in a])
        interior_min = vals.min()
        assert interior_min > 0
        assert vals[0] > interior_min and vals[-1] > interior_min
