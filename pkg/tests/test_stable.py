import math

import numpy as np
import pytest
from scipy.special import gammaln

from pivotal.rng import RngStream
from pivotal.stable import (
    EnvelopeError,
    RadialEnvelope,
    SpectralMeasure,
    StableParams,
    alphadens1_residual,
    dimone_residual,
    levy_integral,
    positive_half_cdf,
    positive_half_pdf,
    radvec_residual,
    sample_stable,
    sample_stable_many,
    tail_mean_sum,
    tail_meansq_sum,
    truncation_plan,
)
from pivotal.summaries import ks_two_sample


class TestSpectralMeasure:
    def test_unit_norm_required(self):
        with pytest.raises(ValueError):
            SpectralMeasure(np.array([[1.0, 1.0]]), np.array([1.0]))

    def test_positive_weights_required(self):
        with pytest.raises(ValueError):
            SpectralMeasure(np.array([[1.0]]), np.array([0.0]))

    def test_centered_required_above_one(self):
        with pytest.raises(ValueError):
            StableParams(1.2, SpectralMeasure.positive_half_line(1.0))
        StableParams(1.2, SpectralMeasure.symmetric_pair(1.0))  # fine

    def test_alpha_range(self):
        with pytest.raises(ValueError):
            StableParams(2.0, SpectralMeasure.symmetric_pair(1.0))
        with pytest.raises(ValueError):
            StableParams(0.0, SpectralMeasure.positive_half_line(1.0))

    def test_mean_direction(self):
        spec = SpectralMeasure.axis_symmetric(2.0, dim=2)
        assert np.linalg.norm(spec.mean_direction) < 1e-15
        assert spec.total_mass == pytest.approx(2.0)


class TestTailSums:
    def test_closed_forms_match_partial_sums(self):
        # telescoping: the closed form equals a long partial sum plus its
        # closed-form remainder
        for n0, beta in [(10, 2.0), (10, 1.25), (50, 2.5)]:
            k = np.arange(n0 + 1, n0 + 200_001, dtype=float)
            partial = float(np.exp(gammaln(k - beta) - gammaln(k)).sum())
            remainder = math.exp(gammaln(n0 + 200_000 + 1 - beta) - gammaln(n0 + 200_000)) / (beta - 1.0)
            closed = math.exp(gammaln(n0 + 1 - beta) - gammaln(n0)) / (beta - 1.0)
            assert partial + remainder == pytest.approx(closed, rel=1e-9)

    def test_wrappers(self):
        # alpha=0.5: mean-sum has beta=2 giving 1/(N-1); mean-square beta=4
        assert tail_mean_sum(11, 0.5) == pytest.approx(0.1, rel=1e-12)
        assert tail_meansq_sum(10, 0.5) == pytest.approx(
            math.exp(gammaln(7.0) - gammaln(10.0)) / 3.0, rel=1e-12
        )

    def test_plan_monotone(self):
        params = StableParams(0.5, SpectralMeasure.positive_half_line(1.0))
        bounds = [truncation_plan(params, nterms=n).tail_std_bound for n in (10, 30, 100, 300)]
        assert all(b1 > b2 for b1, b2 in zip(bounds, bounds[1:]))

    def test_plan_hits_tolerance(self):
        params = StableParams(0.7, SpectralMeasure.positive_half_line(1.5))
        plan = truncation_plan(params, trunc_tol=1e-3)
        assert plan.tail_std_bound <= 1e-3
        assert truncation_plan(params, nterms=plan.nterms - 1).tail_std_bound > 1e-3

    def test_cap_reported(self):
        params = StableParams(1.5, SpectralMeasure.symmetric_pair(1.0))
        plan = truncation_plan(params, trunc_tol=1e-6, cap=1000)
        assert plan.capped and plan.nterms == 1000


class TestSampler:
    def test_positive_law_is_positive(self):
        params = StableParams(0.5, SpectralMeasure.positive_half_line(1.0))
        draws, _ = sample_stable_many(params, 500, RngStream(71))
        assert np.all(draws > 0.0)
        single = sample_stable(params, RngStream(72))
        assert single.shape == (1,) and single[0] > 0

    def test_partial_sums_increase_with_terms(self):
        # for a positive law every series term is positive, so the raw
        # truncated sum is monotone in the number of kept terms
        gen = RngStream(73).generator()
        gam = np.cumsum(gen.exponential(size=2000))
        partial = np.cumsum(gam ** -2.0)
        assert np.all(np.diff(partial) > 0.0)

    def test_reproducible(self):
        params = StableParams(0.8, SpectralMeasure.symmetric_pair(1.0))
        a, _ = sample_stable_many(params, 300, RngStream(74, 5))
        b, _ = sample_stable_many(params, 300, RngStream(74, 5))
        assert np.array_equal(a, b)

    def test_golden_cdf(self):
        params = StableParams(0.5, SpectralMeasure.positive_half_line(1.0))
        draws, plan = sample_stable_many(params, 10_000, RngStream(75))
        xs = np.sort(draws[:, 0])
        gap = np.max(np.abs(np.arange(1, 10_001) / 10_000 - positive_half_cdf(xs, 1.0)))
        assert gap <= 0.02
        assert plan.compensation is not None  # non-symmetric law gets its tail mean back

    def test_scaling_law(self):
        for alpha, symmetric in [(0.5, False), (1.5, True)]:
            mk = SpectralMeasure.symmetric_pair if symmetric else SpectralMeasure.positive_half_line
            nt = 5000 if alpha >= 1 else None
            a, _ = sample_stable_many(StableParams(alpha, mk(1.0)), 10_000,
                                      RngStream(76, int(alpha * 10)), nterms=nt)
            b, _ = sample_stable_many(StableParams(alpha, mk(2.0)), 10_000,
                                      RngStream(77, int(alpha * 10)), nterms=nt)
            _, p = ks_two_sample(2.0 ** (1.0 / alpha) * a[:, 0], b[:, 0])
            assert p > 0.01

    def test_strict_stability(self):
        params = StableParams(0.8, SpectralMeasure.symmetric_pair(1.0))
        t = 0.5
        x1, _ = sample_stable_many(params, 10_000, RngStream(78, 1))
        x2, _ = sample_stable_many(params, 10_000, RngStream(78, 2))
        x0, _ = sample_stable_many(params, 10_000, RngStream(78, 3))
        combo = t ** (1 / 0.8) * x1[:, 0] + (1 - t) ** (1 / 0.8) * x2[:, 0]
        _, p = ks_two_sample(combo, x0[:, 0])
        assert p > 0.01

    def test_symmetric_one_matches_cauchy(self):
        # two equal atoms at +-1 with alpha = 1: the law is Cauchy with scale
        # theta*pi/2 (matched through the characteristic function)
        theta = 1.0
        params = StableParams(1.0, SpectralMeasure.symmetric_pair(theta))
        draws, _ = sample_stable_many(params, 10_000, RngStream(79), nterms=2000)
        gamma = theta * math.pi / 2.0
        rs = np.sort(np.abs(draws[:, 0]))
        cdf = 2.0 / math.pi * np.arctan(rs / gamma)
        gap = np.max(np.abs(np.arange(1, 10_001) / 10_000 - cdf))
        assert gap <= 0.025


class TestLevyIntegral:
    PARAMS = StableParams(0.8, SpectralMeasure.axis_symmetric(2.0, dim=2))

    def test_far_indicator(self):
        val = levy_integral(self.PARAMS, lambda z: 1.0 if np.linalg.norm(z) > 1 else 0.0,
                            tol=1e-6, envelope=RadialEnvelope(0.0, 2.0, 1.0))
        assert val == pytest.approx(2.0, abs=1e-6)

    def test_zero(self):
        val = levy_integral(self.PARAMS, lambda z: 0.0, tol=1e-8,
                            envelope=RadialEnvelope(0.0, 2.0, 0.0))
        assert val == 0.0

    def test_homogeneity(self):
        def shell(a, b):
            return lambda z: 1.0 if a < float(np.linalg.norm(z)) <= b else 0.0

        base = levy_integral(self.PARAMS, shell(1.0, 2.0), tol=1e-9,
                             envelope=RadialEnvelope(0.0, 2.0, 1.0))
        assert base == pytest.approx(2.0 * (1.0 - 2.0**-0.8), abs=1e-8)
        for c in (0.5, 2.0, 4.0):
            small = 1.5 / (c * c) if c < 1.0 else 0.0
            val = levy_integral(self.PARAMS, shell(c, 2.0 * c), tol=1e-9,
                                envelope=RadialEnvelope(small, 2.0, 1.0))
            assert val / base == pytest.approx(c**-0.8, abs=1e-6)

    def test_envelope_violation_detected(self):
        with pytest.raises(EnvelopeError):
            levy_integral(self.PARAMS, lambda z: 1.0, tol=1e-6,
                          envelope=RadialEnvelope(1.0, 2.0, 1.0))

    def test_exponent_must_clear_alpha(self):
        with pytest.raises(EnvelopeError):
            levy_integral(self.PARAMS, lambda z: 0.0, tol=1e-6,
                          envelope=RadialEnvelope(1.0, 0.5, 1.0))


class TestCdfIdentity:
    def test_quadrature_residuals(self):
        for x in (0.5, 1.0, 2.0, 5.0):
            res = dimone_residual(0.5, 1.0, x, tol=1e-7)
            assert abs(res.residual) <= 1e-3

    def test_known_left_side(self):
        res = dimone_residual(0.5, 1.0, 1.0, tol=1e-7)
        assert res.lhs == pytest.approx(0.5 * math.exp(-math.pi / 4.0), abs=1e-12)

    def test_vanishes_at_origin(self):
        res = dimone_residual(0.5, 1.0, 1e-3, tol=1e-9)
        assert abs(res.lhs) <= 1e-6 and abs(res.rhs) <= 1e-6

    def test_monte_carlo_route(self):
        res = dimone_residual(0.7, 1.0, 1.0, method="monte_carlo", reps=100_000,
                              rng=RngStream(80))
        assert abs(res.residual) <= 4.0 * res.stderr
        assert not res.sign_flip_suspected

    def test_method_validation(self):
        with pytest.raises(ValueError):
            dimone_residual(0.7, 1.0, 1.0, method="closed_form_levy")
        with pytest.raises(ValueError):
            dimone_residual(0.5, 1.0, 1.0, method="unknown")


class TestDensityIdentity:
    def test_quadrature_residuals(self):
        for x in (0.5, 1.0, 2.0, 5.0):
            res = alphadens1_residual(0.5, 1.0, x, tol=1e-7)
            assert abs(res.residual) <= 1e-3

    def test_consistent_with_cdf_identity(self):
        # d/dx of the CDF identity's two sides, by central difference,
        # reproduces the density identity
        h = 1e-4
        x = 1.3

        def side(fn):
            up = dimone_residual(0.5, 1.0, x + h, tol=1e-9)
            dn = dimone_residual(0.5, 1.0, x - h, tol=1e-9)
            return (fn(up) - fn(dn)) / (2.0 * h)

        res = alphadens1_residual(0.5, 1.0, x, tol=1e-9)
        assert side(lambda r: r.lhs) == pytest.approx(res.lhs, abs=1e-4)
        assert side(lambda r: r.rhs) == pytest.approx(res.rhs, abs=1e-4)

    def test_monte_carlo_route(self):
        res = alphadens1_residual(0.5, 1.0, 1.0, method="monte_carlo", reps=200_000,
                                  rng=RngStream(81))
        assert abs(res.residual) <= 4.0 * res.stderr


class TestRadiusIdentity:
    def test_positive_reduction_matches_truth(self):
        params = StableParams(0.5, SpectralMeasure.positive_half_line(1.0))
        res = radvec_residual(params, 1.0, 100_000, RngStream(82))
        assert abs(res.residual) <= 4.0 * res.stderr
        assert res.lhs == pytest.approx(0.5 * math.exp(-math.pi / 4.0), abs=0.02)
        assert not res.sign_flip_suspected

    def test_symmetric_one_dimensional(self):
        params = StableParams(1.0, SpectralMeasure.symmetric_pair(1.0))
        res = radvec_residual(params, 1.0, 100_000, RngStream(83), nterms=1000)
        assert abs(res.residual) <= 4.0 * res.stderr

    def test_planar_four_atoms(self):
        params = StableParams(0.8, SpectralMeasure.axis_symmetric(1.0, dim=2))
        res = radvec_residual(params, 1.0, 100_000, RngStream(84), nterms=800)
        assert abs(res.residual) <= 4.0 * res.stderr

    def test_validation(self):
        params = StableParams(0.5, SpectralMeasure.positive_half_line(1.0))
        with pytest.raises(ValueError):
            radvec_residual(params, -1.0, 1000, RngStream(85))
        with pytest.raises(ValueError):
            radvec_residual(params, 1.0, 10, RngStream(85))
