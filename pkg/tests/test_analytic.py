import math

import numpy as np
import pytest
from scipy import integrate

from hyperc.analytic import (
    Quadrature,
    SolverError,
    alpha_occupied,
    alpha_vacant,
    area_crescent,
    area_crescent_closed_form,
    f_grassmann,
    f_vacant,
    hitting_H,
    hitting_cdf,
    hitting_density,
    lambda_gc,
    lambda_gv,
    lrp_edge_measure,
    lrp_edge_prob,
)
from hyperc.geometry import ball_area
from hyperc.sampling import ModelParams

RNG = np.random.default_rng(77)


class TestVacantClosedForms:
    def test_zero_intensity(self):
        for r in (0.0, 1.0, 5.0):
            assert f_vacant(r, ModelParams(0.0, 1.0)) == 1.0

    def test_point_vacancy(self):
        # r = 0 is the probability that a fixed point is uncovered
        val = f_vacant(0.0, ModelParams(1.0, 1.0))
        assert val == pytest.approx(0.03296607537315531, abs=1e-12)

    def test_log_slope_is_alpha(self):
        p = ModelParams(0.7, 1.3)
        a = alpha_vacant(p)
        for r1, r2 in ((1.0, 2.0), (2.5, 7.0)):
            slope = (math.log(f_vacant(r1, p)) - math.log(f_vacant(r2, p))) / (r2 - r1)
            assert slope == pytest.approx(a, rel=1e-12)

    def test_alpha_examples(self):
        assert alpha_vacant(ModelParams(0.0, 1.0)) == 0.0
        assert alpha_vacant(ModelParams(0.5, 1.0)) == pytest.approx(math.sinh(1.0), rel=1e-15)
        for R in (0.5, 1.0, 2.0):
            assert alpha_vacant(ModelParams(lambda_gv(R), R)) == pytest.approx(1.0, rel=1e-14)

    def test_lambda_gv(self):
        assert lambda_gv(1.0) == pytest.approx(0.4254590641196608, abs=1e-15)
        vals = [lambda_gv(R) for R in (0.5, 1.0, 2.0, 4.0)]
        assert all(a > b for a, b in zip(vals, vals[1:]))
        with pytest.raises(ValueError):
            lambda_gv(0.0)

    def test_supermultiplicative(self):
        # equality of exponents makes f(r1 + r2) >= f(r1) f(r2) exact,
        # with slack from the duplicated end caps
        p = ModelParams(0.4, 0.8)
        for _ in range(100):
            r1, r2 = RNG.uniform(0.0, 10.0, 2)
            assert f_vacant(r1 + r2, p) >= f_vacant(r1, p) * f_vacant(r2, p)

    def test_exponential_sandwich_prefactor(self):
        # f(r) e^{alpha r} is the r-independent cap factor, at most one
        p = ModelParams(0.6, 1.1)
        a = alpha_vacant(p)
        cap = math.exp(-p.intensity * ball_area(p.radius))
        for r in (0.0, 1.0, 3.7, 9.0):
            val = f_vacant(r, p) * math.exp(a * r)
            assert val == pytest.approx(cap, rel=1e-12)
        assert cap <= 1.0


class TestCrescentArea:
    def test_degenerate(self):
        assert area_crescent(0.0, 1.0) == 0.0

    def test_full_ball_beyond_2R(self):
        for R in (0.5, 1.0, 2.0):
            assert area_crescent(2 * R, R) == pytest.approx(ball_area(R), abs=1e-12)
            assert area_crescent(2 * R + 1.0, R) == ball_area(R)

    def test_quadrature_matches_antiderivative(self):
        # closed-form oracle from the antiderivative of
        # sqrt(cosh^2 R - cosh^2 s)/cosh s
        for R in (0.5, 1.0, 2.0):
            for t in np.linspace(0.01, 2 * R - 1e-6, 23):
                assert area_crescent(t, R) == pytest.approx(
                    area_crescent_closed_form(t, R), abs=1e-10
                )

    def test_quadrature_at_closure(self):
        for R in (0.5, 1.0, 2.0):
            val, _ = integrate.quad(
                lambda s: 2.0 * math.sqrt(max(math.cosh(R) ** 2 / math.cosh(s) ** 2 - 1, 0.0)),
                -R,
                R,
                limit=200,
            )
            assert val == pytest.approx(ball_area(R), abs=1e-8)

    def test_small_t_expansion(self):
        # the band integrand at s = 0 is 2 sinh R
        for R in (0.5, 1.0, 2.0):
            t = 1e-4
            assert area_crescent(t, R) == pytest.approx(2.0 * t * math.sinh(R), rel=1e-6)

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            area_crescent(-0.1, 1.0)


class TestHittingLaw:
    def test_boundaries(self):
        p = ModelParams(1.0, 1.0)
        assert hitting_cdf(0.0, p) == 0.0
        g2r = hitting_cdf(2.0, p)
        assert g2r == pytest.approx(0.9670339246268447, abs=1e-12)
        assert g2r < 1.0

    def test_nondecreasing(self):
        p = ModelParams(0.8, 1.0)
        ts = np.linspace(0.0, 2.2, 45)
        vals = [hitting_cdf(t, p) for t in ts]
        assert all(b >= a for a, b in zip(vals, vals[1:]))

    def test_H_plus_one_is_G(self):
        # the half-range 4-lambda form and the full crescent area agree
        p = ModelParams(1.0, 1.0)
        for t in np.linspace(0.0, 2.0, 100):
            assert hitting_H(t, p) + 1.0 == pytest.approx(hitting_cdf(t, p), abs=1e-10)

    def test_density_integrates_to_G(self):
        p = ModelParams(0.7, 0.9)
        val, _ = integrate.quad(lambda s: hitting_density(s, p), 0.0, 2 * p.radius, limit=200)
        assert val == pytest.approx(hitting_cdf(2 * p.radius, p), abs=1e-9)


class TestOccupiedExponent:
    def test_residual_grid(self):
        for lam in (0.5, 1.0, 2.0):
            for R in (0.5, 1.0, 2.0):
                res = alpha_occupied(ModelParams(lam, R))
                assert abs(res.residual) < 1e-10
                assert res.alpha > 0.0

    def test_monotone_decreasing_in_intensity(self):
        alphas = [alpha_occupied(ModelParams(lam, 1.0)).alpha for lam in (0.5, 1.0, 2.0, 4.0)]
        assert all(a > b for a, b in zip(alphas, alphas[1:]))

    def test_defining_integrand_monotone_in_beta(self):
        # the beta-derivative of the exponential moment is positive
        p = ModelParams(1.0, 1.0)

        def moment(beta):
            val, _ = integrate.quad(
                lambda s: math.exp(beta * s) * hitting_density(s, p), 0.0, 2.0, limit=200
            )
            return val

        assert moment(0.8) > moment(0.3) > 0.0

    def test_density_positive_inside(self):
        p = ModelParams(1.0, 1.0)
        s = np.linspace(0.05, 1.95, 20)
        assert (hitting_density(s, p) > 0.0).all()

    def test_renewal_consistency(self):
        # the pure exponential e^{-alpha r} solves the renewal equation
        # f(r) = int_0^{2R} f(r - s) G'(s) ds at the solved exponent;
        # quadrature here is scipy's, independent of the solver's nodes
        for lam, R in ((0.5, 1.0), (1.0, 1.0)):
            p = ModelParams(lam, R)
            alpha = alpha_occupied(p).alpha
            for r in (3 * R, 5 * R):
                val, _ = integrate.quad(
                    lambda s: math.exp(-alpha * (r - s)) * hitting_density(s, p),
                    0.0,
                    2 * R,
                    limit=200,
                )
                assert val == pytest.approx(math.exp(-alpha * r), rel=1e-8)

    def test_zero_intensity_rejected(self):
        with pytest.raises(ValueError):
            alpha_occupied(ModelParams(0.0, 1.0))


class TestCriticalIntensity:
    def test_self_consistency(self):
        for R in (0.5, 1.0, 2.0):
            lam = lambda_gc(R)
            assert 0.0 < lam < math.inf
            assert abs(alpha_occupied(ModelParams(lam, R)).alpha - 1.0) < 1e-8

    def test_known_value_R1(self):
        # pinned from the solver itself; guards against regressions
        assert lambda_gc(1.0) == pytest.approx(0.159873, abs=1e-5)


class TestGrassmannForms:
    def test_values(self):
        assert f_grassmann(0.0, 1.0) == 1.0
        assert f_grassmann(2.0, 1.0) == pytest.approx(math.exp(-2.0), rel=1e-15)

    def test_supermultiplicative_with_equality(self):
        for _ in range(20):
            r1, r2 = RNG.uniform(0, 5, 2)
            lhs = f_grassmann(r1 + r2, 0.7)
            rhs = f_grassmann(r1, 0.7) * f_grassmann(r2, 0.7)
            assert lhs == pytest.approx(rhs, rel=1e-12)


class TestLongRangePercolation:
    def test_gap_two_value(self):
        m = lrp_edge_measure(0, 2)
        assert m == pytest.approx(0.28768207245178085, abs=1e-15)
        # 2-D quadrature oracle over the two unit intervals
        oracle, _ = integrate.dblquad(
            lambda v, u: (u - v) ** -2, 0.0, 1.0, lambda u: 2.0, lambda u: 3.0
        )
        assert m == pytest.approx(oracle, abs=1e-10)

    def test_symmetry_in_interval_exchange(self):
        assert lrp_edge_measure(3, 10) == pytest.approx(lrp_edge_measure(-10, -3), rel=1e-15)

    def test_asymptotic_tail(self):
        n = 100
        val = n * n * lrp_edge_prob(0, n, 1.0, 1.0)
        assert val == pytest.approx(1.0, abs=1e-4)

    def test_rejects_overlapping(self):
        for bad in (0, 1):
            with pytest.raises(ValueError):
                lrp_edge_measure(0, bad)


class TestQuadratureConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            Quadrature(abs_tol=0.0)

    def test_custom_tolerances_accepted(self):
        q = Quadrature(abs_tol=1e-10, rel_tol=1e-10, gauss_nodes=120)
        res = alpha_occupied(ModelParams(1.0, 1.0), q)
        assert abs(res.residual) < 1e-10
