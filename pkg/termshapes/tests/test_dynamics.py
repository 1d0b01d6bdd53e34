import math

from django.test import SimpleTestCase

from termshapes.choices import CurveKind, Sign
from termshapes.dynamics import (
    TRAPPED_NEGATIVE,
    TRAPPED_POSITIVE,
    DynamicsInitial,
    attainable_over_time,
    euler_gamma2_moments,
    euler_gamma2_paths,
    evolve_params,
    forward_crossings,
    gamma1_at,
    gamma2_law,
    horizons,
    long_run_shape,
    sample_shapes,
    shape_probabilities,
)
from termshapes.envelope import envelope_point
from termshapes.exceptions import ArgumentError, ConsistencyError, UndeterminedError
from termshapes.term_structure import CurveParams


def init(beta1=0.0, beta2=1.0, beta3=1.0, tau1=1.0, beta0=0.0):
    return DynamicsInitial(beta0, beta1, beta2, beta3, tau1)


class InitialTests(SimpleTestCase):
    def test_beta3_must_be_positive(self):
        with self.assertRaises(ConsistencyError):
            init(beta3=0.0)
        with self.assertRaises(ConsistencyError):
            init(beta3=-1.0)

    def test_from_params_requires_half_tau(self):
        self.assertEqual(DynamicsInitial.from_params(CurveParams(0, 1, 2, 3, 1.0, 0.5)).tau2, 0.5)
        with self.assertRaises(ConsistencyError):
            DynamicsInitial.from_params(CurveParams(0, 1, 2, 3, 1.0, 0.7))


class GammaLawTests(SimpleTestCase):
    def test_at_time_zero(self):
        mu, sigma2 = gamma2_law(init(beta1=3.0, beta3=2.0), 0.0)
        self.assertAlmostEqual(mu, 1.5)
        self.assertEqual(sigma2, 0.0)

    def test_reference_values(self):
        mu, sigma2 = gamma2_law(init(beta1=0.0, beta2=0.0), 1.0)
        self.assertAlmostEqual(mu, 2 * math.e - 2, delta=1e-12)
        self.assertAlmostEqual(sigma2, 2 * math.e ** 2, delta=1e-12)

    def test_scaling_with_beta3(self):
        mu, sigma2 = gamma2_law(init(beta1=4.0, beta2=4.0, beta3=4.0), 1.0)
        self.assertAlmostEqual(mu, 4 * math.e - 2, delta=1e-12)
        self.assertAlmostEqual(sigma2, math.e ** 2 / 2, delta=1e-12)

    def test_evolve_params(self):
        start = init(beta1=0.3, beta2=1.0, beta3=1.0)
        params, g = evolve_params(start, 0.0)
        self.assertAlmostEqual(g, 1.0)
        self.assertAlmostEqual(params.beta1, 0.3)
        params, g = evolve_params(start, math.log(2.0))
        self.assertAlmostEqual(g, 2.0)
        self.assertAlmostEqual(params.beta2, 0.5)
        self.assertAlmostEqual(params.beta3, 0.25)
        self.assertEqual(params.tau2, 0.5)

    def test_negative_time(self):
        with self.assertRaises(ArgumentError):
            gamma2_law(init(), -1.0)

    def test_euler_moments_converge(self):
        start = init(beta1=0.3, beta2=0.2)
        exact = gamma2_law(start, 1.0)
        approx = euler_gamma2_moments(start, 1.0)
        self.assertAlmostEqual(approx[0], exact[0], delta=1e-2 * abs(exact[0]))
        self.assertAlmostEqual(approx[1], exact[1], delta=1e-2 * exact[1])

    def test_euler_paths(self):
        start = init(beta1=0.3, beta2=0.2)
        mu, sigma2 = gamma2_law(start, 0.5)
        paths = euler_gamma2_paths(start, 0.5, 2000, seed=3, steps_per_tau=400)
        self.assertEqual(paths.shape, (2000,))
        self.assertAlmostEqual(paths.mean(), mu, delta=5 * math.sqrt(sigma2 / 2000) + 1e-2 * abs(mu))


class HorizonTests(SimpleTestCase):
    def test_forward_hump_horizon(self):
        h = horizons(init(beta2=4.0 * math.exp(-3.5)))
        self.assertAlmostEqual(h.t_dagger_f, 1.0, delta=1e-12)
        self.assertEqual(h.branch, Sign.POSITIVE)
        self.assertIsNone(h.t_star_f)

    def test_already_past(self):
        self.assertEqual(horizons(init(beta2=1.0)).t_dagger_f, 0.0)

    def test_scales_with_tau1(self):
        h1 = horizons(init(beta2=0.01, tau1=1.0))
        h2 = horizons(init(beta2=0.01, tau1=2.0))
        self.assertAlmostEqual(h2.t_dagger_f, 2.0 * h1.t_dagger_f, delta=1e-12)

    def test_yield_horizon_precedes_forward(self):
        h = horizons(init(beta2=0.01))
        self.assertGreater(h.t_dagger_y, 0.0)
        self.assertLess(h.t_dagger_y, h.t_dagger_f)

    def test_negative_branch(self):
        h = horizons(init(beta2=-1.25))
        self.assertAlmostEqual(h.t_star_star_y, 0.0, delta=1e-12)
        self.assertAlmostEqual(h.t_star_f, math.log(4.8), delta=1e-12)
        self.assertEqual(h.t_star_f, h.t_star_y)
        self.assertIsNone(h.t_dagger_f)

    def test_zero_beta2(self):
        h = horizons(init(beta2=0.0))
        self.assertTrue(h.flag)
        self.assertEqual(h.branch, Sign.ZERO)

    def test_long_run(self):
        self.assertEqual(long_run_shape(init(beta2=0.5)), "i")
        self.assertEqual(long_run_shape(init(beta2=-0.5)), "n")
        with self.assertRaises(UndeterminedError):
            long_run_shape(init(beta2=0.0))


class AttainableOverTimeTests(SimpleTestCase):
    def test_forward_stages(self):
        start = init(beta2=0.01)
        self.assertEqual(attainable_over_time(CurveKind.FORWARD, start, 1.0), TRAPPED_POSITIVE)
        self.assertEqual(attainable_over_time(CurveKind.FORWARD, start, 4.0), {"i", "h"})
        start = init(beta2=-0.1)
        self.assertEqual(attainable_over_time(CurveKind.FORWARD, start, 1.0), TRAPPED_NEGATIVE)
        self.assertEqual(attainable_over_time(CurveKind.FORWARD, start, 5.0), {"n", "d"})

    def test_yield_stages(self):
        start = init(beta2=-0.1)
        self.assertEqual(attainable_over_time(CurveKind.YIELD, start, 1.0), {"i", "h", "hd", "n"})
        self.assertEqual(attainable_over_time(CurveKind.YIELD, start, 3.0), {"i", "d", "hd", "n"})
        self.assertEqual(attainable_over_time(CurveKind.YIELD, start, 5.0), {"i", "d", "n"})

    def test_horizon_instant_takes_smaller_set(self):
        start = init(beta2=4.0 * math.exp(-3.5))
        t = horizons(start).t_dagger_f
        self.assertEqual(attainable_over_time(CurveKind.FORWARD, start, t), {"i", "h"})

    def test_time_must_be_positive(self):
        with self.assertRaises(ArgumentError):
            attainable_over_time(CurveKind.FORWARD, init(), 0.0)


class ForwardCrossingTests(SimpleTestCase):
    def test_lambert_matches_envelope(self):
        params = CurveParams.from_gamma(0.0, 0.0, 1.0, 0.5)
        crossings = forward_crossings(1.0, 0.15)
        self.assertEqual(len(crossings), 2)
        for _branch, x in crossings:
            self.assertAlmostEqual(envelope_point(CurveKind.FORWARD, params, x)[0], 0.15, delta=1e-10)
        xs = sorted(x for _, x in crossings)
        self.assertLess(xs[0], 2.5)
        self.assertGreater(xs[1], 2.5)

    def test_no_crossing_above_cusp(self):
        self.assertEqual(forward_crossings(1.0, 0.5), [])


class ShapeProbabilityTests(SimpleTestCase):
    def test_sums_to_one_and_trapped(self):
        for beta2, trapped in ((0.01, TRAPPED_POSITIVE), (-0.1, TRAPPED_NEGATIVE)):
            for t in (0.5, 2.0, 6.0):
                dist = shape_probabilities(CurveKind.FORWARD, init(beta2=beta2), t)
                with self.subTest(beta2=beta2, t=t):
                    self.assertAlmostEqual(sum(dist.probs.values()), 1.0, delta=1e-9)
                    self.assertTrue(dist.support() <= trapped)

    def test_hdh_vanishes_after_horizon(self):
        start = init(beta2=0.01)
        t = horizons(start).t_dagger_f
        self.assertGreater(shape_probabilities(CurveKind.FORWARD, start, 0.9 * t).probs["hdh"], 0.0)
        self.assertEqual(shape_probabilities(CurveKind.FORWARD, start, 1.1 * t).probs["hdh"], 0.0)

    def test_hd_vanishes_after_horizon(self):
        start = init(beta2=-0.1)
        t = horizons(start).t_star_f
        self.assertGreater(shape_probabilities(CurveKind.FORWARD, start, 0.9 * t).probs["hd"], 0.0)
        self.assertEqual(shape_probabilities(CurveKind.FORWARD, start, 1.1 * t).probs["hd"], 0.0)

    def test_median_on_initial_line(self):
        # μ(1) coincide con la ordenada de ℓ₀ sobre la vertical γ_I(1)
        start = init(beta1=4.0 / math.e - 2.0, beta2=1.0)
        dist = shape_probabilities(CurveKind.FORWARD, start, 1.0)
        self.assertAlmostEqual(dist.probs["i"], 0.5, delta=1e-12)

    def test_long_run_concentration(self):
        up = shape_probabilities(CurveKind.FORWARD, init(beta2=2.0, beta3=2.0), 20.0)
        self.assertGreaterEqual(up.probs["i"], 0.999)
        down = shape_probabilities(CurveKind.FORWARD, init(beta2=-2.0, beta3=2.0), 20.0)
        self.assertGreaterEqual(down.probs["n"], 0.999)

    def test_yield_sums_to_one(self):
        for beta2 in (0.3, -0.3):
            dist = shape_probabilities(CurveKind.YIELD, init(beta2=beta2), 1.0)
            self.assertAlmostEqual(sum(dist.probs.values()), 1.0, delta=1e-9)

    def test_zero_beta2_uses_bands(self):
        dist = shape_probabilities(CurveKind.FORWARD, init(beta2=0.0), 1.0)
        self.assertAlmostEqual(sum(dist.probs.values()), 1.0, delta=1e-9)
        self.assertEqual(gamma1_at(init(beta2=0.0), 1.0), 0.0)


class MonteCarloTests(SimpleTestCase):
    def test_matches_analytic(self):
        start = init(beta2=0.01)
        analytic = shape_probabilities(CurveKind.FORWARD, start, 3.0).probs
        n = 20000
        empirical = sample_shapes(CurveKind.FORWARD, start, 3.0, n, seed=11, points=2000)
        self.assertEqual(sum(empirical.counts.values()), n)
        for tag in set(analytic) | set(empirical.probs):
            p = analytic.get(tag, 0.0)
            with self.subTest(shape=tag):
                self.assertAlmostEqual(
                    empirical.probs.get(tag, 0.0), p, delta=4 * math.sqrt(p * (1 - p) / n) + 1e-3
                )

    def test_large_sample_within_three_standard_errors(self):
        n = 100000
        for beta2, t, trapped in ((0.01, 2.0, TRAPPED_POSITIVE), (-0.1, 1.0, TRAPPED_NEGATIVE)):
            start = init(beta2=beta2)
            analytic = shape_probabilities(CurveKind.FORWARD, start, t).probs
            empirical = sample_shapes(CurveKind.FORWARD, start, t, n, seed=2024, threads=2, points=2000)
            self.assertTrue(empirical.support() <= trapped)
            for tag, p in analytic.items():
                if p < 1e-3:
                    continue
                with self.subTest(beta2=beta2, shape=tag):
                    self.assertAlmostEqual(empirical.probs.get(tag, 0.0), p, delta=3 * math.sqrt(p * (1 - p) / n))

    def test_deterministic_across_threads(self):
        start = init(beta2=-0.1)
        a = sample_shapes(CurveKind.FORWARD, start, 2.0, 5000, seed=5, threads=1, points=1000)
        b = sample_shapes(CurveKind.FORWARD, start, 2.0, 5000, seed=5, threads=2, points=1000)
        self.assertEqual(a.counts, b.counts)
        self.assertTrue(a.support() <= TRAPPED_NEGATIVE)

    def test_invalid_n(self):
        with self.assertRaises(ArgumentError):
            sample_shapes(CurveKind.FORWARD, init(), 1.0, 0)
