import math
import os
import shutil
import tempfile
import unittest

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from closed_form import Constant, Maximum, PowerLog, abs_power
from errors import DepthMismatch, NonIntegrableCell
from grid import (GridFunction, Interval, integral, lp_norm, read_csv, sample,
                  symmetric, weak_lp_banach_norm, weak_lp_quasinorm,
                  weighted_lp_norm, write_csv)

UNIT = Interval(0.0, 1.0)

cell_values = st.lists(st.floats(min_value=0.0, max_value=1e3), min_size=16, max_size=16)


def example1():
    return PowerLog(1.0, 0.0, -1.0, -2.0).restrict(0.0, 0.5)


class TestSample(unittest.TestCase):
    def test_constant_is_exact(self):
        f = sample(Constant(1.0), UNIT, 3)
        self.assertEqual(f.n_cells, 8)
        np.testing.assert_array_equal(f.values, np.ones(8))

    def test_example1_total_integral(self):
        """x^-1 (log x)^-2 on (0, 1/2) integrates to 1/log 2."""
        f = sample(example1(), UNIT, 10)
        self.assertAlmostEqual(integral(f), 1.0 / math.log(2.0), delta=1e-3)

    def test_example1_at_depth_16(self):
        f = sample(example1(), UNIT, 16)
        self.assertAlmostEqual(integral(f), 1.0 / math.log(2.0), delta=1e-3)

    def test_unmasked_pole_raises(self):
        with self.assertRaises(NonIntegrableCell) as ctx:
            sample(PowerLog(1.0, 0.0, -1.0), Interval(-1.0, 1.0), 3)
        # 0 is the shared edge of cells 3 and 4
        self.assertIn(ctx.exception.cell_index, (3, 4))
        self.assertLessEqual(ctx.exception.cell_left, 0.0)
        self.assertGreaterEqual(ctx.exception.cell_right, 0.0)

    def test_pole_under_max_still_raises(self):
        f = Maximum(PowerLog(1.0, 0.0, -1.0), Constant(1.0))
        with self.assertRaises(NonIntegrableCell):
            sample(f, Interval(-1.0, 1.0), 4)

    def test_sample_is_monotone(self):
        small = abs_power(0.0, -0.5)
        large = Maximum(small, Constant(1.0))
        a = sample(small, Interval(-1.0, 1.0), 8)
        b = sample(large, Interval(-1.0, 1.0), 8)
        self.assertTrue(np.all(a.values <= b.values * (1.0 + 1e-12)))

    def test_values_are_read_only(self):
        f = sample(Constant(2.0), UNIT, 2)
        with self.assertRaises(ValueError):
            f.values[0] = 1.0

    def test_prefix_matches_values(self):
        f = sample(abs_power(0.3, 0.5), UNIT, 6)
        np.testing.assert_allclose(np.diff(f.prefix), f.values * f.cell_width, rtol=1e-12)
        with self.assertRaises(TypeError):
            GridFunction(UNIT, 2, np.ones(4), prefix=np.zeros(5))
        g = GridFunction(UNIT, 2, [1.0, 2.0, 3.0, 4.0])
        np.testing.assert_array_equal(g.prefix, [0.0, 0.25, 0.75, 1.5, 2.5])
        self.assertEqual(g.window_integral(1, 2), 1.25)


class TestNorms(unittest.TestCase):
    def test_lp_norm_of_one(self):
        f = sample(Constant(1.0), UNIT, 5)
        for p in (0.5, 1.0, 2.0, 7.0, np.inf):
            self.assertAlmostEqual(lp_norm(f, p), 1.0, places=12)

    def test_indicator_l2(self):
        f = sample(Constant(1.0).restrict(0.0, 0.5), UNIT, 4)
        self.assertAlmostEqual(lp_norm(f, 2.0), math.sqrt(0.5), places=12)

    def test_unit_weight_reduces_to_lp(self):
        f = sample(abs_power(0.0, -0.25), Interval(-1.0, 1.0), 8)
        one = f.with_values(np.ones(f.n_cells))
        self.assertAlmostEqual(weighted_lp_norm(f, one, 2.0), lp_norm(f, 2.0), places=12)

    def test_weighted_needs_same_grid(self):
        f = sample(Constant(1.0), UNIT, 4)
        w = sample(Constant(1.0), UNIT, 5)
        with self.assertRaises(DepthMismatch):
            weighted_lp_norm(f, w, 2.0)

    def test_weak_norm_of_constant(self):
        f = sample(Constant(3.0), UNIT, 6)
        self.assertAlmostEqual(weak_lp_quasinorm(f, 2.0), 3.0, places=12)

    def test_weak_norm_of_indicator(self):
        f = sample(Constant(1.0).restrict(0.0, 0.5), UNIT, 4)
        self.assertAlmostEqual(weak_lp_quasinorm(f, 2.0), math.sqrt(0.5), places=12)

    def test_inverse_square_root_is_weak_l2(self):
        """|x|^-1/2 has |{|f| > t}| = 2/t^2, so the weak L^2 norm is sqrt 2."""
        f = sample(abs_power(0.0, -0.5), symmetric(64.0), 16)
        value = weak_lp_quasinorm(f, 2.0, resolved_cells=64)
        self.assertLess(abs(value / math.sqrt(2.0) - 1.0), 0.02)

    def test_banach_norm_brackets_quasinorm(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            f = GridFunction(UNIT, 6, rng.lognormal(size=64))
            p = rng.uniform(1.1, 5.0)
            quasi = weak_lp_quasinorm(f, p)
            norm = weak_lp_banach_norm(f, p)
            self.assertLessEqual(quasi, norm * (1.0 + 1e-12))
            self.assertLessEqual(norm, p / (p - 1.0) * quasi * (1.0 + 1e-12))


class TestGridInvariants(unittest.TestCase):
    @settings(max_examples=500, derandomize=True, deadline=None)
    @given(cell_values, st.floats(min_value=1.0, max_value=6.0))
    def test_refinement_exactness(self, values, p):
        f = GridFunction(UNIT, 4, values)
        w = f.with_values(np.asarray(values) + 1.0)
        fine, fine_w = f.refine(), w.refine()
        self.assertAlmostEqual(integral(fine), integral(f), delta=1e-12 * (1.0 + integral(f)))
        self.assertAlmostEqual(lp_norm(fine, p), lp_norm(f, p), delta=1e-12 * (1.0 + lp_norm(f, p)))
        self.assertAlmostEqual(weighted_lp_norm(fine, fine_w, p), weighted_lp_norm(f, w, p),
                               delta=1e-12 * (1.0 + weighted_lp_norm(f, w, p)))
        self.assertEqual(weak_lp_quasinorm(fine, p), weak_lp_quasinorm(f, p))

    @settings(max_examples=500, derandomize=True, deadline=None)
    @given(cell_values, cell_values, st.floats(min_value=1.05, max_value=8.0))
    def test_holder(self, a, b, p):
        f, g = GridFunction(UNIT, 4, a), GridFunction(UNIT, 4, b)
        q = p / (p - 1.0)
        pairing = integral(f.with_values(np.abs(f.values * g.values)))
        self.assertLessEqual(pairing, lp_norm(f, p) * lp_norm(g, q) * (1.0 + 1e-12) + 1e-300)

    @settings(max_examples=500, derandomize=True, deadline=None)
    @given(cell_values, st.floats(min_value=1.0, max_value=8.0))
    def test_weak_below_strong(self, values, p):
        f = GridFunction(UNIT, 4, values)
        self.assertLessEqual(weak_lp_quasinorm(f, p), lp_norm(f, p) * (1.0 + 1e-12))

    def test_coarsen_undoes_refine(self):
        f = sample(abs_power(0.2, 0.5), UNIT, 5)
        np.testing.assert_allclose(f.refine().refine().coarsen(5).values, f.values, rtol=1e-14)

    def test_from_values_needs_power_of_two(self):
        with self.assertRaises(ValueError):
            GridFunction.from_values(UNIT, np.ones(6))

    def test_non_finite_values_rejected(self):
        with self.assertRaises(ValueError):
            GridFunction(UNIT, 1, [1.0, np.inf])


class TestGridCsv(unittest.TestCase):
    def setUp(self):
        self.temp_dir = tempfile.mkdtemp()

    def test_write_then_read(self):
        """Header carries the domain and depth; rows carry exact reprs."""
        f = sample(abs_power(0.0, -0.25), Interval(-1.0, 1.0), 5)
        path = os.path.join(self.temp_dir, "f.csv")
        write_csv(f, path)
        with open(path) as handle:
            self.assertTrue(handle.readline().startswith("# domain=-1.0,1.0 depth=5"))
        back = read_csv(path)
        self.assertEqual(back.domain, f.domain)
        np.testing.assert_array_equal(back.values, f.values)

    def test_missing_header(self):
        path = os.path.join(self.temp_dir, "bad.csv")
        with open(path, "w") as handle:
            handle.write("0,0,1,1\n")
        with self.assertRaises(ValueError):
            read_csv(path)

    def tearDown(self):
        shutil.rmtree(self.temp_dir, ignore_errors=True)


if __name__ == "__main__":
    unittest.main()
