import math
import unittest

import numpy as np
from scipy import integrate

from closed_form import (Constant, Maximum, Minimum, PowerLog, Restrict, Singularity,
                         Truncate, abs_power, from_dict)


def quad_cells(cf, edges):
    return np.array([integrate.quad(lambda x: float(cf(x)), a, b, epsrel=1e-12, limit=200)[0]
                     for a, b in zip(edges[:-1], edges[1:])])


class TestAlgebra(unittest.TestCase):
    def test_power_of_atom_is_atom(self):
        f = abs_power(0.0, -0.5, c=4.0) ** 2
        self.assertIsInstance(f, PowerLog)
        self.assertEqual((f.c, f.alpha), (16.0, -1.0))

    def test_power_distributes_over_max(self):
        f = Maximum(abs_power(0.0, -0.25), abs_power(0.0, -0.5)) ** 2
        self.assertIsInstance(f, Maximum)
        self.assertEqual(f.right.alpha, -1.0)

    def test_scaling_pushes_into_atoms(self):
        f = 3.0 * Truncate(abs_power(1.0, 0.5), 2.0)
        self.assertIsInstance(f, Truncate)
        self.assertEqual(f.level, 6.0)
        self.assertEqual(f.child.c, 3.0)

    def test_product_merges_shared_centre(self):
        f = abs_power(0.0, 0.5) * PowerLog(2.0, 0.0, 0.25, -1.0)
        self.assertEqual((f.alpha, f.beta, f.c), (0.75, -1.0, 2.0))

    def test_negative_truncation_level(self):
        with self.assertRaises(ValueError):
            abs_power(0.0, 1.0).truncate(0.0)

    def test_rebuild_from_dict(self):
        f = Minimum(abs_power(0.0, -0.8), Constant(1.0)).restrict(-2.0, 2.0)
        g = from_dict(f.to_dict())
        xs = np.linspace(-3.0, 3.0, 13) + 0.01
        np.testing.assert_array_equal(f(xs), g(xs))


class TestEvaluation(unittest.TestCase):
    def test_nonnegative(self):
        f = Maximum(PowerLog(1.0, 0.0, -1.0, -2.0), Constant(0.5)).restrict(0.0, 0.5)
        xs = np.linspace(-1.0, 1.0, 101)
        self.assertTrue(np.all(f(xs) >= 0.0))

    def test_centre_limit(self):
        self.assertEqual(float(abs_power(0.0, -0.5)(0.0)), math.inf)
        self.assertEqual(float(abs_power(0.0, 0.5)(0.0)), 0.0)

    def test_log_near_matches_evaluate(self):
        f = Maximum(PowerLog(1.0, 0.0, -1.0, -2.0), Constant(0.5))
        t = np.array([1.0, 2.5, 7.0])
        expected = np.log(f(np.exp(-t)))
        np.testing.assert_allclose(f.log_near(0.0, 1.0, t), expected, rtol=1e-12)

    def test_restrict_masks_outside(self):
        f = Restrict(Constant(2.0), 0.0, 1.0)
        np.testing.assert_array_equal(f(np.array([-0.5, 0.5, 1.5])), [0.0, 2.0, 0.0])


class TestExactIntegrals(unittest.TestCase):
    """Closed-form cell integrals against scipy quadrature away from poles."""

    def test_power(self):
        f = abs_power(0.2, -0.5, c=1.5)
        edges = np.linspace(0.3, 2.0, 9)
        np.testing.assert_allclose(f.cell_integrals(edges), quad_cells(f, edges), rtol=1e-9)

    def test_inverse_log(self):
        f = PowerLog(1.0, 0.0, 0.5, -1.0)
        edges = np.linspace(0.1, 0.5, 9)
        np.testing.assert_allclose(f.cell_integrals(edges), quad_cells(f, edges), rtol=1e-8)

    def test_inverse_log_squared(self):
        f = PowerLog(1.0, 0.0, -1.0, -2.0)
        edges = np.linspace(0.05, 0.45, 5)
        np.testing.assert_allclose(f.cell_integrals(edges), quad_cells(f, edges), rtol=1e-8)

    def test_maximum_with_crossing(self):
        """|x|^-1/4 and |x|^-1/2 cross at |x| = 1."""
        f = Maximum(abs_power(0.0, -0.25), abs_power(0.0, -0.5))
        edges = np.linspace(0.05, 2.05, 9)
        np.testing.assert_allclose(f.cell_integrals(edges), quad_cells(f, edges), rtol=1e-8)

    def test_minimum_of_power_and_constant(self):
        f = Minimum(abs_power(0.0, -0.8), Constant(1.0))
        edges = np.linspace(0.3, 3.3, 7)
        np.testing.assert_allclose(f.cell_integrals(edges), quad_cells(f, edges), rtol=1e-8)

    def test_log_atom_across_unit_distance(self):
        f = PowerLog(1.0, 0.0, 0.0, -1.0)
        self.assertTrue(np.isinf(f.cell_integrals(np.array([0.5, 1.5]))[0]))


class TestSingularities(unittest.TestCase):
    def test_integrability_rule(self):
        self.assertTrue(Singularity(0.0, -0.5, 0.0).integrable)
        self.assertFalse(Singularity(0.0, -1.0, 0.0).integrable)
        self.assertTrue(Singularity(0.0, -1.0, -2.0).integrable)
        self.assertFalse(Singularity(0.0, -1.0, -1.0).integrable)

    def test_minimum_keeps_only_shared_poles(self):
        f = Minimum(abs_power(0.0, -1.0), abs_power(1.0, -1.0))
        self.assertEqual(f.singularities(), ())

    def test_maximum_keeps_stronger_pole(self):
        f = Maximum(abs_power(0.0, -0.25), abs_power(0.0, -0.5))
        (s,) = f.singularities()
        self.assertEqual(s.alpha, -0.5)


if __name__ == "__main__":
    unittest.main()
