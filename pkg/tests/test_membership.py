import math
import unittest

import numpy as np

import constants
from closed_form import Constant, PowerLog, abs_power
from config import TrendThresholds
from grid import GridFunction, Interval, sample
from membership import (MembershipClass, MembershipReport, TrendBundle, ap_majorant_report,
                        classify_global, classify_local, classify_local_ainfty,
                        global_a1_test, global_radii, global_weighted_report,
                        integrable_weight_trend, lp_membership_trend, radial_average,
                        weak_membership_trend)
from trend import classify_trend

UNIT = Interval(0.0, 1.0)
CUBE = Interval(-1.0, 1.0)
YES, NO = constants.CERTIFIED_YES, constants.CERTIFIED_NO


def example1():
    return PowerLog(1.0, 0.0, -1.0, -2.0).restrict(0.0, 0.5)


def max_power():
    return abs_power(0.0, -0.25).maximum(abs_power(0.0, -0.5))


def verdicts(reports):
    return {r.membership_class: r.verdict for r in reports}


def by_class(reports, cls):
    return next(r for r in reports if r.membership_class is cls)


class TestMembershipReport(unittest.TestCase):
    def test_yes_needs_evidence(self):
        with self.assertRaises(ValueError):
            MembershipReport("f", MembershipClass.L1, YES)

    def test_unknown_verdict(self):
        with self.assertRaises(ValueError):
            MembershipReport("f", MembershipClass.L1, "maybe")

    def test_serializes_class_and_overflow(self):
        report = MembershipReport("f", MembershipClass.M_F, NO, {"integral": math.inf})
        data = report.to_dict()
        self.assertEqual(data["class"], "M_F")
        self.assertEqual(data["evidence"]["integral"], "overflow")


class TestTrendBundle(unittest.TestCase):
    flat = classify_trend([1, 2, 3, 4], [1.0, 1.0, 1.0, 1.0])
    growing = classify_trend([1, 2, 3, 4], [1.0, 10.0, 100.0, 1000.0])
    wobbly = classify_trend([1, 2, 3, 4], [1.0, 2.0, 1.0, 2.0])

    def test_combination(self):
        self.assertEqual(TrendBundle("x", (self.flat, self.flat)).verdict, constants.PLATEAU)
        self.assertEqual(TrendBundle("x", (self.flat, self.growing)).verdict, constants.DIVERGENT)
        self.assertEqual(TrendBundle("x", (self.flat, self.wobbly)).verdict,
                         constants.INCONCLUSIVE)


class TestLpMembership(unittest.TestCase):
    def test_example1_integrable(self):
        bundle = lp_membership_trend(example1(), 1.0, UNIT)
        self.assertEqual(bundle.verdict, constants.PLATEAU)
        self.assertAlmostEqual(bundle.last, 1.0 / math.log(2.0), delta=1e-3)

    def test_example1_not_in_l15(self):
        self.assertEqual(lp_membership_trend(example1(), 1.5, UNIT).verdict, constants.DIVERGENT)

    def test_inverse_square_root_misses_every_lp(self):
        f = abs_power(0.0, -0.5)
        for p in (1.5, 2.0, 4.0):
            self.assertEqual(lp_membership_trend(f, p).verdict, constants.DIVERGENT, p)

    def test_integrable_tail(self):
        f = abs_power(0.0, -0.25).minimum(abs_power(0.0, -0.6))
        self.assertEqual(lp_membership_trend(f, 2.0).verdict, constants.PLATEAU)


class TestClassifyLocal(unittest.TestCase):
    def test_indicator_is_everywhere(self):
        reports = classify_local(Constant(1.0).restrict(0.0, 0.5), UNIT)
        self.assertTrue(all(v == YES for v in verdicts(reports).values()))
        self.assertEqual(by_class(reports, MembershipClass.UNION_LP).evidence["p"], 1.01)
        cert = by_class(reports, MembershipClass.M_A1).evidence["certificate"]
        self.assertTrue(cert.valid)
        self.assertTrue(cert.verify())
        witness = by_class(reports, MembershipClass.UNION_WEIGHTED_LP).evidence["witness"]
        self.assertTrue(witness.bound_ok)

    def test_example1_consistency_triple(self):
        reports = classify_local(example1(), UNIT)
        self.assertEqual(verdicts(reports), {
            MembershipClass.L1: YES,
            MembershipClass.M_F: YES,
            MembershipClass.UNION_LP: NO,
            MembershipClass.M_A1: NO,
            MembershipClass.UNION_WEIGHTED_LP: NO,
        })
        integral = by_class(reports, MembershipClass.L1).evidence["integral"]
        self.assertAlmostEqual(integral, 1.0 / math.log(2.0), delta=1e-3)

    def test_inverse_power_needs_small_r(self):
        f = abs_power(0.0, -1.0)
        half = verdicts(classify_local(f, CUBE, r=0.5))
        self.assertEqual(half[MembershipClass.M_A1], YES)
        self.assertEqual(half[MembershipClass.UNION_WEIGHTED_LP], YES)
        one = verdicts(classify_local(f, CUBE, r=1.0))
        self.assertEqual(one[MembershipClass.M_A1], NO)
        self.assertEqual(one[MembershipClass.M_F], NO)

    def test_grid_input_uses_coarsening(self):
        f = sample(abs_power(0.0, 0.5), UNIT, 10)
        reports = classify_local(f)
        self.assertEqual(reports[0].params["depths"], [6, 7, 8, 9, 10])
        self.assertTrue(all(v == YES for v in verdicts(reports).values()))

    def test_thresholds_reach_the_verdicts(self):
        """The singular L^1 mass of example1 still moves by 1e-3 between the last scales."""
        strict = TrendThresholds(plateau_spread=1e-9)
        reports = verdicts(classify_local(example1(), UNIT, thresholds=strict))
        self.assertEqual(reports[MembershipClass.L1], constants.UNDECIDED)

    def test_coarse_grid_is_undecided(self):
        reports = classify_local(GridFunction(UNIT, 2, np.ones(4)))
        self.assertEqual(len(reports), 5)
        for report in reports:
            self.assertEqual(report.verdict, constants.UNDECIDED)
            self.assertIn("too coarse", report.evidence["note"])
        coarse = GridFunction(CUBE, 1, np.ones(2))
        self.assertEqual(classify_local_ainfty(coarse, CUBE).verdict, constants.UNDECIDED)
        self.assertEqual(ap_majorant_report(coarse, Constant(1.0), CUBE, 2.0).verdict,
                         constants.UNDECIDED)

    def test_weighted_exponent_above_r(self):
        with self.assertRaises(ValueError):
            classify_local(Constant(1.0), UNIT, p0=1.0)

    def test_union_over_r(self):
        report = classify_local_ainfty(abs_power(0.0, -1.0), CUBE)
        self.assertEqual(report.verdict, YES)
        self.assertEqual(report.evidence["r"], 0.5)

    def test_ap_weight_gives_a1_majorant(self):
        w = abs_power(0.0, 0.5)
        report = ap_majorant_report(w, w, CUBE, 2.0)
        self.assertEqual(report.verdict, YES)
        self.assertTrue(report.evidence["certificate"].dominates)

    def test_ap_majorant_must_dominate(self):
        w = abs_power(0.0, 0.5)
        report = ap_majorant_report(w * 2.0, w, CUBE, 2.0)
        self.assertEqual(report.verdict, constants.UNDECIDED)


class TestGlobal(unittest.TestCase):
    def test_constant_is_a1(self):
        report = global_a1_test(Constant(1.0))
        self.assertEqual(report.verdict, YES)
        self.assertEqual(report.evidence["s"], constants.GLOBAL_S_LADDER[0])
        self.assertAlmostEqual(report.evidence["certificate"].a1_report.constant, 1.0, places=12)

    def test_growing_power_is_not_a1(self):
        self.assertEqual(global_a1_test(abs_power(0.0, 0.5)).verdict, NO)

    def test_radial_averages_of_growing_power(self):
        for s in constants.GLOBAL_S_LADDER:
            for r in (4.0, 64.0, 1024.0):
                expected = r ** (s / 2.0) / (s / 2.0 + 1.0)
                self.assertLess(abs(radial_average(abs_power(0.0, 0.5), s, r) / expected - 1.0),
                                1e-6)

    def test_max_power_is_a1(self):
        report = global_a1_test(max_power())
        self.assertEqual(report.verdict, YES)
        self.assertLess(report.evidence["s"], 2.0)
        self.assertTrue(report.evidence["certificate"].valid)

    def test_inverse_square_root_is_weak_l2(self):
        bundle = weak_membership_trend(abs_power(0.0, -0.5), 2.0)
        self.assertEqual(bundle.verdict, constants.PLATEAU)
        self.assertLess(abs(bundle.last / math.sqrt(2.0) - 1.0), 0.02)

    def test_max_power_is_in_no_weak_space(self):
        for p in constants.WEAK_P_LADDER:
            self.assertEqual(weak_membership_trend(max_power(), p).verdict, constants.DIVERGENT, p)

    def test_ainfty_weights_are_not_integrable(self):
        for w in (Constant(1.0), abs_power(0.0, 0.5), abs_power(0.0, 1.0)):
            trend = integrable_weight_trend(w)
            self.assertEqual(trend.verdict, constants.DIVERGENT)
            ratios = np.array(trend.values[1:]) / np.array(trend.values[:-1])
            self.assertTrue(np.all(ratios >= 2.0 - 1e-9))
        self.assertEqual(integrable_weight_trend(abs_power(0.0, -0.5)).verdict,
                         constants.DIVERGENT)

    def test_inverse_square_root_separates_weak_from_strong(self):
        reports = verdicts(classify_global(abs_power(0.0, -0.5)))
        self.assertEqual(reports[MembershipClass.UNION_WEAK_LP], YES)
        self.assertEqual(reports[MembershipClass.UNION_LP], NO)
        self.assertEqual(reports[MembershipClass.M_A1], YES)

    def test_constant_one_is_a1_but_in_no_lp(self):
        reports = verdicts(classify_global(Constant(1.0)))
        self.assertEqual(reports[MembershipClass.M_F], YES)
        self.assertEqual(reports[MembershipClass.M_A1], YES)
        self.assertEqual(reports[MembershipClass.UNION_LP], NO)
        self.assertEqual(reports[MembershipClass.UNION_WEAK_LP], NO)

    def test_radius_caps_the_ladder(self):
        self.assertEqual(global_radii(constants.GLOBAL_RADII[-1]), constants.GLOBAL_RADII)
        self.assertEqual(global_radii(100.0), (4.0, 8.0, 16.0, 32.0, 64.0))
        with self.assertRaises(ValueError):
            global_radii(16.0)
        reports = classify_global(Constant(1.0), radii=global_radii(64.0))
        self.assertEqual(reports[0].params["radii"], [4.0, 8.0, 16.0, 32.0, 64.0])

    def test_max_min_pipeline(self):
        w = abs_power(0.0, -0.5).truncate(1.0)
        u = abs_power(0.0, -0.8).minimum(Constant(1.0))
        report = global_weighted_report(max_power(), w, u, 2.0)
        self.assertEqual(report.verdict, YES)
        self.assertTrue(report.evidence["global_ap"].cellwise_ok)
        self.assertGreaterEqual(report.evidence["certificate"].domination_margin,
                                -1e-12 * float(np.max(report.evidence["certificate"].w.values)))


if __name__ == "__main__":
    unittest.main()
