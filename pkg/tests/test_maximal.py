import time
import unittest

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from closed_form import Constant
from errors import NonPositiveWeight
from grid import GridFunction, Interval, sample
from maximal import (WindowFamily, maximal_fast, maximal_iterate, maximal_naive,
                     maximal_shifted_dyadic, op_norm_estimate, weak_norm_estimate)

UNIT = Interval(0.0, 1.0)

cell_values = st.lists(st.floats(min_value=-1e3, max_value=1e3), min_size=32, max_size=32)


def spike(n, at=0):
    values = np.zeros(n)
    values[at] = 1.0
    return GridFunction.from_values(UNIT, values)


def indicator_half(depth):
    return sample(Constant(1.0).restrict(0.0, 0.5), UNIT, depth)


class TestMaximalNaive(unittest.TestCase):
    def test_constant(self):
        f = GridFunction(UNIT, 5, np.full(32, -2.5))
        np.testing.assert_allclose(maximal_naive(f).values, 2.5, rtol=1e-12)

    def test_indicator_half(self):
        """Best window for x > 1/2 is [0, x], with average (1/2)/x."""
        f = indicator_half(10)
        m = maximal_naive(f).values
        centers = f.centers
        left = centers < 0.5
        np.testing.assert_allclose(m[left], 1.0, rtol=1e-12)
        expected = np.minimum(1.0, 0.5 / centers[~left])
        self.assertLessEqual(np.max(np.abs(m[~left] - expected)), 2.0 / f.n_cells)

    def test_spike_distance(self):
        m = maximal_naive(spike(8, 2)).values
        expected = 1.0 / (np.abs(np.arange(8) - 2) + 1.0)
        np.testing.assert_allclose(m, expected, rtol=1e-12)

    def test_dominates_f(self):
        rng = np.random.default_rng(1)
        f = GridFunction(UNIT, 7, rng.standard_normal(128))
        for family in WindowFamily:
            self.assertTrue(np.all(maximal_naive(f, family).values >= np.abs(f.values)))

    def test_dyadic_below_all(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            f = GridFunction(UNIT, 7, rng.lognormal(size=128))
            dyadic = maximal_naive(f, "dyadic").values
            full = maximal_naive(f, "all").values
            self.assertTrue(np.all(dyadic <= full * (1.0 + 1e-12)))

    def test_one_third_trick(self):
        """Every window sits inside a shifted dyadic block at most 6 times longer."""
        rng = np.random.default_rng(3)
        for _ in range(20):
            f = GridFunction(UNIT, 8, rng.lognormal(sigma=2.0, size=256))
            full = maximal_naive(f).values
            shifted = np.max([maximal_shifted_dyadic(f, s).values for s in (0, 1, 2)], axis=0)
            self.assertTrue(np.all(full <= 6.0 * shifted * (1.0 + 1e-12)))

    def test_unknown_family(self):
        with self.assertRaises(ValueError):
            maximal_naive(spike(4), "centered")


class TestMaximalFast(unittest.TestCase):
    def test_matches_oracle(self):
        rng = np.random.default_rng(0)
        for trial in range(200):
            depth = int(rng.integers(0, 11))
            values = rng.lognormal(sigma=1.5, size=2 ** depth) * rng.choice([-1.0, 1.0], size=2 ** depth)
            f = GridFunction(UNIT, depth, values)
            np.testing.assert_allclose(maximal_fast(f).values, maximal_naive(f).values,
                                       rtol=1e-12, err_msg=f"trial {trial}")

    def test_sparse_inputs_match_oracle(self):
        rng = np.random.default_rng(4)
        for _ in range(50):
            values = np.where(rng.random(512) < 0.05, rng.random(512), 0.0)
            f = GridFunction(UNIT, 9, values)
            np.testing.assert_allclose(maximal_fast(f).values, maximal_naive(f).values, rtol=1e-12)

    def test_constant(self):
        f = GridFunction(UNIT, 6, np.ones(64))
        np.testing.assert_allclose(maximal_fast(f).values, 1.0, rtol=1e-12)

    def test_spike(self):
        m = maximal_fast(spike(8)).values
        np.testing.assert_allclose(m, 1.0 / np.arange(1, 9), rtol=1e-12)

    def test_large_grid_runtime(self):
        maximal_fast(GridFunction(UNIT, 4, np.ones(16)))
        f = GridFunction(UNIT, 16, np.random.default_rng(5).random(2 ** 16))
        start = time.perf_counter()
        maximal_fast(f)
        self.assertLess(time.perf_counter() - start, 5.0)

    @settings(max_examples=500, derandomize=True, deadline=None)
    @given(cell_values, cell_values)
    def test_sublinear(self, a, b):
        f, g = GridFunction(UNIT, 5, a), GridFunction(UNIT, 5, b)
        total = maximal_fast(f.with_values(f.values + g.values)).values
        bound = maximal_fast(f).values + maximal_fast(g).values
        self.assertTrue(np.all(total <= bound * (1.0 + 1e-12) + 1e-9))

    @settings(max_examples=500, derandomize=True, deadline=None)
    @given(cell_values, st.floats(min_value=-100.0, max_value=100.0))
    def test_scaling(self, values, c):
        f = GridFunction(UNIT, 5, values)
        np.testing.assert_allclose(maximal_fast(f.scale(c)).values,
                                   abs(c) * maximal_fast(f).values, rtol=1e-12, atol=1e-300)


class TestMaximalIterate(unittest.TestCase):
    def test_constant_fixed_point(self):
        f = GridFunction(UNIT, 4, np.ones(16))
        np.testing.assert_allclose(maximal_iterate(f, 5).values, 1.0, rtol=1e-12)

    def test_iterates_increase(self):
        f = spike(8)
        once, twice = maximal_iterate(f, 1).values, maximal_iterate(f, 2).values
        self.assertTrue(np.all(twice >= once))
        self.assertTrue(np.any(twice > once))

    def test_bounded_by_sup(self):
        m = maximal_iterate(indicator_half(8), 3).values
        self.assertTrue(np.all(m <= 1.0 + 1e-12))

    def test_k_must_be_positive(self):
        with self.assertRaises(ValueError):
            maximal_iterate(spike(4), 0)


class TestNormEstimate(unittest.TestCase):
    def test_unit_weight(self):
        w = GridFunction(UNIT, 10, np.ones(1024))
        estimate = op_norm_estimate(w, 2.0, trials=100, seed=0)
        self.assertGreaterEqual(estimate.lower_bound, 1.0)
        self.assertEqual(estimate.bound, 2.0 * estimate.lower_bound)
        # spikes alone force ||M||^2 >= sum 1/(d+1)^2 over one side
        self.assertGreater(estimate.lower_bound, 1.2)

    def test_deterministic_given_seed(self):
        rng = np.random.default_rng(6)
        w = GridFunction(UNIT, 8, rng.lognormal(size=256))
        a = op_norm_estimate(w, 3.0, trials=20, seed=11)
        b = op_norm_estimate(w, 3.0, trials=20, seed=11)
        self.assertEqual(a, b)
        self.assertEqual(a.to_dict()["seed"], 11)

    def test_rejects_non_positive_weight(self):
        w = GridFunction(UNIT, 2, [1.0, 0.0, 1.0, 1.0])
        with self.assertRaises(NonPositiveWeight):
            op_norm_estimate(w, 2.0, trials=1)

    def test_weak_space(self):
        estimate = weak_norm_estimate(UNIT, 8, 2.0, trials=10, seed=0)
        self.assertEqual(estimate.space, "weak")
        self.assertGreaterEqual(estimate.lower_bound, 1.0)


if __name__ == "__main__":
    unittest.main()
