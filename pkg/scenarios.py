"""
Named scenarios: each worked example run end to end with its checks.

A scenario writes report.json plus CSV tables and SVG plots into its own
directory and passes when every check passes. Check ids name the property
they exercise.
"""
import dataclasses
import logging
import math
from dataclasses import dataclass, field

import numpy as np

import constants
from closed_form import Constant, PowerLog, abs_power
from config import Settings
from errors import ConfigError, UnknownScenario
from grid import GridFunction, Interval, integral, sample
from hardy import (CircleGrid, analytic_defect, circle_ap_trend, outer_from_weight, szego_test,
                   weighted_hp_membership)
from majorant import coifman_rochberg
from maximal import maximal_fast, maximal_iterate, maximal_naive
from membership import (MembershipClass, classify_local, global_a1_test, global_ap_trend,
                        global_radii, global_weighted_report, integrable_weight_trend,
                        lp_membership_trend, radial_average, to_jsonable, weak_membership_trend)
from plots import circle_figure, grid_figure, trend_figure
from weights import Weight, ap_constant, ap_trend, dual_weight, sampled_power_weight

LOGGER = logging.getLogger(__name__)

UNIT = Interval(0.0, 1.0)
CUBE = Interval(-1.0, 1.0)

YES, NO = constants.CERTIFIED_YES, constants.CERTIFIED_NO


# function catalogue


def example1():
    """x^-1 |log x|^-2 on (0, 1/2): integrable, yet in no L^p with p > 1."""
    return PowerLog(1.0, 0.0, -1.0, -2.0).restrict(0.0, 0.5)


def max_power():
    return abs_power(0.0, -0.25).maximum(abs_power(0.0, -0.5))


FUNCTION_CATALOGUE = {
    "example1": (lambda alpha: example1(), UNIT),
    "abs-power": (lambda alpha: abs_power(0.0, alpha), CUBE),
    "max-power": (lambda alpha: max_power(), CUBE),
    "constant-one": (lambda alpha: Constant(1.0), CUBE),
    "indicator-half": (lambda alpha: Constant(1.0).restrict(0.0, 0.5), UNIT),
}


def build_function(name, alpha=-0.5):
    """A catalogue function and its default bounded domain."""
    if name not in FUNCTION_CATALOGUE:
        raise ValueError(
            f"Unknown function '{name}'.\n"
            f"Known functions: {', '.join(sorted(FUNCTION_CATALOGUE))}"
        )
    make, domain = FUNCTION_CATALOGUE[name]
    return make(float(alpha)), domain


# running


@dataclass
class ScenarioRun:
    name: str
    parameters: dict
    output: object
    plots: bool = True
    settings: Settings = field(default_factory=Settings)
    checks: dict = field(default_factory=dict)
    results: dict = field(default_factory=dict)

    @property
    def thresholds(self):
        return self.settings.trend

    @property
    def radii(self):
        return global_radii(self.settings.radius)

    def check(self, check_id, ok, detail=""):
        ok = bool(ok)
        self.checks[check_id] = ok
        mark = "✓" if ok else "✗"
        LOGGER.info("%s %s %s %s", self.name, mark, check_id, detail)
        return ok

    def record(self, key, value):
        self.results[key] = to_jsonable(value)

    def trends(self, filename, trends, title=""):
        rows = [(t.label, p, v if math.isfinite(v) else "overflow", t.verdict)
                for t in trends for p, v in zip(t.params, t.values)]
        self.output.write_table(self.name, f"{filename}.csv", ["label", "param", "value", "verdict"],
                                rows)
        if self.plots:
            self.output.write_figure(self.name, f"{filename}.svg", trend_figure(trends, title))

    def grids(self, filename, grids, labels, title="", log=False):
        for grid, label in zip(grids, labels):
            self.output.write_grid(self.name, f"{filename}_{label}.csv", grid)
        if self.plots:
            self.output.write_figure(self.name, f"{filename}.svg",
                                     grid_figure(grids, labels, title, log))

    @property
    def passed(self):
        return all(self.checks.values())

    @property
    def failed(self):
        return [c for c, ok in self.checks.items() if not ok]

    def to_dict(self):
        return {
            "scenario": self.name,
            "parameters": to_jsonable(self.parameters),
            "settings": {"trend": dataclasses.asdict(self.thresholds), "radii": list(self.radii)},
            "checks": dict(self.checks),
            "passed": self.passed,
            "results": self.results,
        }


def _verdicts(reports):
    return {r.membership_class.value: r.verdict for r in reports}


def _relative(a, b):
    return abs(a - b) / max(abs(a), abs(b))


# scenarios


def _example1(run):
    p = run.parameters
    f = example1()
    value = integral(sample(f, UNIT, p["depth"]))
    run.record("l1_integral", value)
    run.check("l1-integral", abs(value - 1.0 / math.log(2.0)) < 1e-3, f"{value:.6f}")

    trends = []
    for q in p["ladder"]:
        bundle = lp_membership_trend(f, q, UNIT, thresholds=run.thresholds)
        run.record(f"L^{q:g}", bundle)
        run.check(f"l{q:g}-divergent", bundle.verdict == constants.DIVERGENT)
        trends += bundle.trends
    run.trends("lp_trends", trends, "example1: L^p norms")

    reports = classify_local(f, UNIT, thresholds=run.thresholds)
    run.record("classes", reports)
    run.check("example1-verdicts", _verdicts(reports) == {
        MembershipClass.L1.value: YES,
        MembershipClass.M_F.value: YES,
        MembershipClass.UNION_LP.value: NO,
        MembershipClass.M_A1.value: NO,
        MembershipClass.UNION_WEIGHTED_LP.value: NO,
    })
    run.grids("f", [sample(f, UNIT, 10)], ["example1"], "example1 cell averages", log=False)


def _power_weight(run):
    p = run.parameters
    trends = []
    for alpha in p["alphas"]:
        trend = ap_trend(lambda k: sampled_power_weight(alpha, CUBE, k), p["depths"], p["p"],
                         thresholds=run.thresholds, log_growth=True)
        expected = constants.PLATEAU if -1.0 < alpha < p["p"] - 1.0 else constants.DIVERGENT
        run.check(f"alpha={alpha:g}", trend.verdict == expected, trend.verdict)
        run.record(f"alpha={alpha:g}", trend)
        trends.append(trend)
    run.trends("ap_trends", trends, f"[|x|^a]_A{p['p']:g} under refinement")

    rng = np.random.default_rng(p["seed"])
    worst = 0.0
    for _ in range(p["duality_cases"]):
        w = Weight(UNIT, 7, rng.lognormal(sigma=1.0, size=2 ** 7))
        for q in (4.0 / 3.0, 2.0, 3.0):
            dual_q = q / (q - 1.0)
            left = ap_constant(dual_weight(w, q), dual_q).constant
            right = ap_constant(w, q).constant ** (dual_q - 1.0)
            worst = max(worst, _relative(left, right))
    run.record("duality_worst_relative_gap", worst)
    run.check("duality", worst < 1e-9, f"{worst:.3g}")
    run.grids("weights", [sampled_power_weight(a, CUBE, 8) for a in (-0.5, 0.5)],
              ["alpha=-0.5", "alpha=0.5"], "|x|^a", log=True)


def _spike(run):
    p = run.parameters
    values = np.zeros(2 ** p["depth"])
    values[p["cell"]] = 1.0
    spike = GridFunction(UNIT, p["depth"], values)
    mf = maximal_fast(spike)
    expected = 1.0 / (np.abs(np.arange(values.size) - p["cell"]) + 1.0)
    run.check("spike-profile", np.allclose(mf.values, expected, rtol=1e-12, atol=0.0))
    twice = maximal_iterate(spike, 2)
    run.check("iterate-grows", np.all(twice.values >= mf.values * (1.0 - 1e-12))
              and np.any(twice.values > mf.values * (1.0 + 1e-12)))

    rng = np.random.default_rng(p["seed"])
    worst = 0.0
    for _ in range(p["oracle_cases"]):
        depth = int(rng.integers(1, 11))
        f = GridFunction(UNIT, depth, rng.lognormal(sigma=2.0, size=2 ** depth))
        fast, naive = maximal_fast(f).values, maximal_naive(f).values
        worst = max(worst, float(np.max(np.abs(fast - naive) / naive)))
    run.record("oracle_worst_relative_gap", worst)
    run.check("oracle", worst <= 1e-12, f"{worst:.3g}")

    cert = coifman_rochberg(spike, 0.5, target="spike")
    run.record("coifman_rochberg", cert)
    run.check("spike-a1", cert.valid and cert.verify())
    run.grids("maximal", [spike, mf, twice], ["f", "Mf", "MMf"], "spike and its maximal functions")


def _global_maxmin(run):
    p = run.parameters
    f = max_power()
    w = abs_power(0.0, -0.5).truncate(1.0)
    u = abs_power(0.0, -0.8).minimum(Constant(1.0))
    report = global_weighted_report(f, w, u, p["p"], thresholds=run.thresholds)
    run.record("weighted", report)
    run.check("maxmin-pipeline", report.verdict == YES, report.verdict)
    a1 = global_a1_test(f, radii=run.radii, thresholds=run.thresholds)
    run.record("max_power_a1", a1)
    run.check("max-power-a1", a1.verdict == YES, a1.verdict)
    evidence = report.evidence
    run.trends("weight_trends", [evidence[k] for k in ("w_a1", "u_a1", "v_ap")],
               "A_p constants on [-2^m, 2^m]")
    cert = evidence["certificate"]
    run.grids("certificate", [cert.dominated, cert.w], ["f", "w"], "|f| <= w", log=True)


def _global_power(run):
    p = run.parameters
    f = abs_power(0.0, 0.5)
    worst = 0.0
    for s in constants.GLOBAL_S_LADDER:
        for r in p["radii"]:
            expected = r ** (s / 2.0) / (s / 2.0 + 1.0)
            worst = max(worst, _relative(radial_average(f, s, r), expected))
    run.record("radial_worst_relative_gap", worst)
    run.check("radial-closed-form", worst < 1e-6, f"{worst:.3g}")
    report = global_a1_test(f, radii=run.radii, thresholds=run.thresholds)
    run.record("a1", report)
    run.check("not-a1", report.verdict == NO
              and all(b.verdict == constants.DIVERGENT for b in report.evidence.values()))
    run.trends("maximal_trends", [t for b in report.evidence.values() for t in b.trends],
               "M(|x|^(s/2)) on [-R, R]")


def _weak_counterexample(run):
    p = run.parameters
    f = abs_power(0.0, -0.5)
    weak = weak_membership_trend(f, p["p"], run.radii, thresholds=run.thresholds)
    run.record("weak", weak)
    run.check("weak-sqrt2", weak.verdict == constants.PLATEAU
              and abs(weak.last / math.sqrt(2.0) - 1.0) < 0.02, f"{weak.last:.6f}")
    strong = {q: lp_membership_trend(f, q, thresholds=run.thresholds) for q in constants.LP_LADDER}
    run.record("strong", {f"p={q:g}": b for q, b in strong.items()})
    run.check("no-strong-lp", all(b.verdict == constants.DIVERGENT for b in strong.values()))
    run.trends("weak_trends", list(weak.trends), "weak L^2 quasinorm of |x|^-1/2")


def _constant_one(run):
    p = run.parameters
    one = Constant(1.0)
    local = classify_local(one, UNIT, thresholds=run.thresholds)
    run.record("local", local)
    run.check("local-verdicts", all(r.verdict == YES for r in local))
    a1 = global_a1_test(one, radii=run.radii, thresholds=run.thresholds)
    run.record("global_a1", a1)
    run.check("constant-a1", a1.verdict == YES)

    fixtures = {"1": one, "|x|^0.5": abs_power(0.0, 0.5), "|x|": abs_power(0.0, 1.0)}
    trends = []
    for label, w in fixtures.items():
        ap = global_ap_trend(w, p["ainfty_p"], thresholds=run.thresholds)
        run.check(f"ainfty[{label}]", ap.verdict == constants.PLATEAU, ap.verdict)
        growth = integrable_weight_trend(w, run.radii, run.thresholds)
        ratios = np.array(growth.values[1:]) / np.array(growth.values[:-1])
        run.check(f"not-integrable[{label}]", growth.verdict == constants.DIVERGENT
                  and np.all(ratios >= 2.0 - 1e-9))
        run.record(label, {"ap": ap, "integral": growth})
        trends.append(growth)
    run.trends("integral_trends", trends, "int_[-R,R] w")


def _chord(theta):
    return np.abs(1.0 - np.exp(1j * theta))


def _hardy_outer(run):
    p = run.parameters
    w = CircleGrid.from_function(lambda t: _chord(t) ** 2, p["m"])
    h = outer_from_weight(w, p["p0"])
    gap = float(np.max(np.abs(h.boundary_modulus.values / _chord(w.theta) - 1.0)))
    run.record("one_minus_z", {"outer": h, "worst_relative_gap": gap})
    run.check("one-minus-z", gap < 1e-6 and abs(abs(h.origin_value) - 1.0) < 1e-3)

    rng = np.random.default_rng(p["seed"])
    worst = 0.0
    for _ in range(p["random_cases"]):
        a, b = rng.normal(scale=0.3, size=(2, 6))
        k = np.arange(1, 7)[:, None]
        smooth = CircleGrid.from_function(
            lambda t: np.exp(a @ np.cos(k * t) + b @ np.sin(k * t)), 8)
        outer = outer_from_weight(smooth, p["p0"])
        expected = math.exp(float(np.mean(np.log(smooth.values))))
        worst = max(worst, abs(abs(outer.origin_value) ** p["p0"] / expected - 1.0))
    run.record("geometric_mean_worst_relative_gap", worst)
    run.check("geometric-mean", worst < 1e-9, f"{worst:.3g}")

    for alpha in (-0.5, 0.5):
        def weight(t, alpha=alpha):
            return _chord(t) ** alpha

        trend = circle_ap_trend(weight, 2.0, thresholds=run.thresholds)
        szego = szego_test(CircleGrid.from_function(weight, p["m"]))
        run.record(f"alpha={alpha:g}", {"ap": trend, "szego": szego})
        run.check(f"ap-in-szego[{alpha:g}]",
                  trend.verdict == constants.PLATEAU and szego.in_szego_class)

    run.output.write_circle(run.name, "outer.csv", h.boundary)
    if run.plots:
        run.output.write_figure(run.name, "outer.svg",
                                circle_figure([w, h.boundary_modulus], ["w", "|h|"],
                                              "outer function of 2 - 2cos θ"))


def _hardy_membership(run):
    p = run.parameters
    m, p0 = p["m"], p["p0"]

    def pole(theta):
        return (1.0 - np.exp(1j * theta)) ** -0.25

    def anti(theta):
        return np.exp(-1j * theta)

    def ones(theta):
        return np.ones_like(theta)

    accept = analytic_defect(CircleGrid.from_function(pole, m))
    reject = analytic_defect(CircleGrid.from_function(anti, m))
    run.record("defects", {"analytic": accept, "anti_analytic": reject})
    run.check("analytic-accept", accept < constants.HARDY_DEFECT_TOLERANCE, f"{accept:.3g}")
    run.check("anti-analytic-reject", reject > 0.99, f"{reject:.3g}")

    cases = {"trivial": (ones, ones, YES), "pole": (pole, _chord, YES), "anti": (anti, ones, NO)}
    for label, (f, w, expected) in cases.items():
        report = weighted_hp_membership(f, w, p0, m, thresholds=run.thresholds)
        run.record(label, report)
        run.check(f"membership[{label}]", report.verdict == expected, report.verdict)
    if run.plots:
        grids = [CircleGrid.from_function(pole, m), CircleGrid.from_function(_chord, m)]
        run.output.write_figure(run.name, "membership.svg",
                                circle_figure(grids, ["|f|", "w"], "f = (1 - z)^-1/4"))


SCENARIOS = {
    "example1": (_example1, {"depth": 16, "ladder": [1.1, 1.5]}),
    "power-weight": (_power_weight, {"alphas": [-0.5, 0.5, -1.0, 1.0], "depths": list(range(8, 15)),
                                     "p": 2.0, "seed": constants.DEFAULT_SEED,
                                     "duality_cases": 100}),
    "spike": (_spike, {"depth": 3, "cell": 3, "oracle_cases": 200,
                       "seed": constants.DEFAULT_SEED}),
    "global-maxmin": (_global_maxmin, {"p": 2.0}),
    "global-power": (_global_power, {"radii": [4.0, 64.0, 1024.0]}),
    "weak-counterexample": (_weak_counterexample, {"p": 2.0}),
    "constant-one": (_constant_one, {"ainfty_p": 3.0}),
    "hardy-outer": (_hardy_outer, {"m": constants.HARDY_DEFAULT_M, "p0": 2.0,
                                   "random_cases": 50, "seed": constants.DEFAULT_SEED}),
    "hardy-membership": (_hardy_membership, {"m": constants.HARDY_DEFAULT_M, "p0": 2.0}),
}


def scenario_parameters(name, overrides=None):
    """Default parameters of a scenario, with overrides for keys it declares."""
    if name not in SCENARIOS:
        raise UnknownScenario(
            f"Unknown scenario '{name}'.\n"
            f"Known scenarios: {', '.join(constants.SCENARIO_NAMES)}"
        )
    parameters = dict(SCENARIOS[name][1])
    for key, value in (overrides or {}).items():
        if value is None or key not in parameters:
            continue
        if isinstance(parameters[key], list):
            raise ConfigError(f"Scenario parameter '{key}' is a list and cannot be overridden.")
        parameters[key] = type(parameters[key])(value)
    return parameters


def run_scenario(name, output, overrides=None, plots=True, settings=None):
    """Run one scenario into output/<name>/ and return the finished ScenarioRun.

    settings supplies the trend thresholds and the global radius ladder.
    """
    parameters = scenario_parameters(name, overrides)
    output.prepare(name)
    run = ScenarioRun(name, parameters, output, plots, settings or Settings())
    SCENARIOS[name][0](run)
    output.write_json(name, "report.json", run.to_dict())
    output.finish(name)
    return run
