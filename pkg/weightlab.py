"""
weightlab command line: single computations on grids, membership classification,
circle computations and the scenario suite.

Exit codes: 0 all checks pass, 1 a check failed, 2 usage error.
"""
import argparse
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import constants
from config import load_settings
from errors import CheckFailed, NoExponentFound, WeightLabError
from file_manager import OutputManager
from grid import read_csv, sample
from hardy import outer_from_weight, read_circle_csv, szego_test, weighted_hp_membership
from logger import RunLogger, configure_logging
from majorant import coifman_rochberg, rubio_de_francia
from maximal import WindowFamily, maximal_iterate
from membership import classify_global, classify_local, global_radii, to_jsonable
from scenarios import FUNCTION_CATALOGUE, build_function, run_scenario
from weights import ap_constant, reverse_holder_exponent

LOGGER = logging.getLogger(__name__)

EXIT_PASS, EXIT_CHECK_FAILED, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _common_options():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--depth", type=int, help="grid depth k (2^k cells)")
    common.add_argument("--radius", type=float, help="half-width R of [-R, R]")
    common.add_argument("--p", type=float, help="exponent p")
    common.add_argument("--seed", type=int, help="seed for random probes")
    common.add_argument("--jobs", type=int, help="scenarios run in parallel")
    common.add_argument("--out", help="output directory")
    common.add_argument("--format", choices=["csv", "json"], help="result file format")
    common.add_argument("--no-plots", dest="plots", action="store_false", default=None,
                        help="skip SVG plots")
    common.add_argument("--config", help=f"settings file (default ./{constants.CONFIG_FILE_NAME})")
    common.add_argument("-v", "--verbose", action="count", default=0)
    return common


def _input_options(parser):
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--csv", help="grid CSV written by weightlab")
    source.add_argument("--function", choices=sorted(FUNCTION_CATALOGUE),
                        help="catalogue function, sampled at --depth")
    parser.add_argument("--alpha", type=float, default=-0.5, help="exponent for abs-power")
    parser.add_argument("--family", choices=[f.value for f in WindowFamily],
                        default=WindowFamily.ALL.value)


def build_parser():
    common = _common_options()
    parser = _Parser(prog="weightlab", description=__doc__.strip().splitlines()[0],
                     parents=[common])
    parser.add_argument("--list", action="store_true", help="list the scenarios and exit")
    verbs = parser.add_subparsers(dest="verb", parser_class=_Parser)

    for verb, text in (("apconst", "A_p constant of a grid weight"),
                       ("maximal", "maximal function of a grid function"),
                       ("rh", "reverse Hölder exponent of a grid weight")):
        sub = verbs.add_parser(verb, parents=[common], help=text)
        _input_options(sub)
        if verb == "maximal":
            sub.add_argument("--iterate", type=int, default=1, help="apply M this many times")

    sub = verbs.add_parser("majorant", parents=[common], help="an A_1 majorant of a grid function")
    _input_options(sub)
    sub.add_argument("--method", choices=["cr", "rdf"], default="cr",
                     help="Coifman-Rochberg (M f)^delta or the Rubio de Francia series")
    sub.add_argument("--delta", type=float, default=0.5, help="exponent of the cr majorant")

    sub = verbs.add_parser("classify", parents=[common], help="membership verdicts")
    source = sub.add_mutually_exclusive_group(required=True)
    source.add_argument("--csv", help="grid CSV written by weightlab (local only)")
    source.add_argument("--function", choices=sorted(FUNCTION_CATALOGUE))
    sub.add_argument("--alpha", type=float, default=-0.5)
    sub.add_argument("--domain", choices=["local", "global"], default="local",
                     help="classes on the catalogue interval or on the whole line")
    sub.add_argument("--r", type=float, default=1.0, help="power r of the M^r classes")
    sub.add_argument("--p0", type=float, default=2.0, help="weighted exponent p0 > r")

    sub = verbs.add_parser("hardy", parents=[common], help="circle computations")
    sub.add_argument("action", choices=["szego", "outer", "member"])
    sub.add_argument("--weight", required=True, help="circle CSV of the weight")
    sub.add_argument("--f", help="circle CSV of the function (member)")
    sub.add_argument("--p0", type=float, default=2.0)

    sub = verbs.add_parser("repro", parents=[common], help="run one scenario")
    sub.add_argument("scenario", choices=constants.SCENARIO_NAMES)

    verbs.add_parser("suite", parents=[common], help="run every scenario")
    return parser


def _settings(args):
    overrides = {key: getattr(args, key, None)
                 for key in ("depth", "radius", "p", "seed", "jobs", "out", "format", "plots")}
    return load_settings(args.config, overrides)


def _scenario_overrides(args):
    """Only flags given on the command line reach scenario parameters."""
    return {key: getattr(args, key) for key in ("depth", "p", "seed")
            if getattr(args, key, None) is not None}


def _grid(args, settings):
    if args.csv:
        return read_csv(args.csv), os.path.splitext(os.path.basename(args.csv))[0]
    f, domain = build_function(args.function, args.alpha)
    return sample(f, domain, settings.depth, tol=settings.quad_tolerance), args.function


def _write_result(output, verb, settings, data, grid=None):
    output.prepare(verb)
    if settings.format == "csv":
        if grid is not None:
            output.write_grid(verb, "result.csv", grid)
        rows = [(key, value) for key, value in data.items() if not isinstance(value, (dict, list))]
        output.write_table(verb, "summary.csv", ["key", "value"], rows)
    else:
        output.write_json(verb, "result.json", to_jsonable(data))
        if grid is not None:
            output.write_grid(verb, "grid.csv", grid)
    output.finish(verb)


# verbs


def _apconst(args, settings, output):
    w, name = _grid(args, settings)
    report = ap_constant(w, settings.p, args.family)
    print(f"[{name}]_A{settings.p:g} = {report.constant:.10g} on cells {report.worst_window}")
    _write_result(output, "apconst", settings, {"input": name, **report.to_dict()})
    return EXIT_PASS


def _maximal(args, settings, output):
    f, name = _grid(args, settings)
    m = maximal_iterate(f, args.iterate)
    print(f"max M^{args.iterate}f = {m.values.max():.10g} over {m.n_cells} cells")
    _write_result(output, "maximal", settings, {"input": name, "iterate": args.iterate,
                                                "max": float(m.values.max())}, m)
    return EXIT_PASS


def _rh(args, settings, output):
    w, name = _grid(args, settings)
    try:
        report = reverse_holder_exponent(w, args.family)
    except NoExponentFound as e:
        print(f"✗ {e}")
        return EXIT_CHECK_FAILED
    print(f"reverse Hölder holds with s = {report.s:.6g} for {name}")
    _write_result(output, "rh", settings, {"input": name, **report.to_dict()})
    return EXIT_PASS


def _majorant(args, settings, output):
    f, name = _grid(args, settings)
    if args.method == "cr":
        cert = coifman_rochberg(f, args.delta, target=name)
    else:
        cert = rubio_de_francia(f, settings.p, tol=settings.rdf_tolerance,
                                k_max=settings.rdf_max_terms, trials=settings.norm_trials,
                                seed=settings.seed, target=name)
    mark = "✓" if cert.valid else "✗"
    print(f"{mark} A_1 majorant of |{name}|^{cert.r:g}: [w]_A1 = {cert.a1_report.constant:.6g}")
    _write_result(output, "majorant", settings, cert.to_dict(), cert.w)
    return EXIT_PASS if cert.valid else EXIT_CHECK_FAILED


def _classify(args, settings, output):
    if args.csv:
        if args.domain == "global":
            raise UsageError("classify --domain global needs a catalogue --function")
        f = read_csv(args.csv)
        domain = f.domain
    else:
        f, domain = build_function(args.function, args.alpha)
    if args.domain == "global":
        reports = classify_global(f, radii=global_radii(settings.radius),
                                  thresholds=settings.trend)
    else:
        reports = classify_local(f, domain, p0=args.p0, r=args.r, thresholds=settings.trend)
    for report in reports:
        print(f"{report.membership_class.value:>20}: {report.verdict}")
    output.prepare("classify")
    if settings.format == "csv":
        output.write_table("classify", "verdicts.csv", ["class", "verdict"],
                           [(r.membership_class.value, r.verdict) for r in reports])
    else:
        output.write_json("classify", "result.json",
                          {"function": f.to_dict(), "reports": to_jsonable(reports)})
    output.finish("classify")
    return EXIT_PASS


def _hardy(args, settings, output):
    w = read_circle_csv(args.weight)
    if args.action == "szego":
        report = szego_test(w)
        print(f"mean log w = {report.log_mean:.10g}, Szegő class: {report.in_szego_class}")
        _write_result(output, "hardy", settings, report.to_dict())
        return EXIT_PASS if report.in_szego_class else EXIT_CHECK_FAILED
    if args.action == "outer":
        h = outer_from_weight(w, args.p0)
        print(f"h(0) = {h.origin_value:.10g}, resolved: {h.resolved}")
        output.prepare("hardy")
        output.write_circle("hardy", "outer.csv", h.boundary)
        output.write_json("hardy", "result.json", h.to_dict())
        output.finish("hardy")
        return EXIT_PASS
    if not args.f:
        raise UsageError("hardy member needs --f")
    report = weighted_hp_membership(read_circle_csv(args.f), w, args.p0,
                                    thresholds=settings.trend)
    print(f"{report.membership_class.value}: {report.verdict}")
    _write_result(output, "hardy", settings, report.to_dict())
    return EXIT_PASS if report.verdict != constants.CERTIFIED_NO else EXIT_CHECK_FAILED


def _report_run(run, run_logger, output):
    for check_id, ok in run.checks.items():
        print(f"  {'✓' if ok else '✗'} {check_id}")
    status = EXIT_PASS if run.passed else EXIT_CHECK_FAILED
    run_logger.record(run.name, status, run.failed, output.directory(run.name))
    print(f"{'✓' if run.passed else '✗'} {run.name}")
    return status


def _repro(args, settings, output):
    run_logger = RunLogger(os.path.join(settings.out, constants.LOG_FILE_NAME))
    run = run_scenario(args.scenario, output, _scenario_overrides(args), settings.plots,
                       settings)
    status = _report_run(run, run_logger, output)
    if status != EXIT_PASS:
        LOGGER.warning("%s", CheckFailed(run.failed[0], f"in scenario {run.name}"))
    return status


def _suite(args, settings, output):
    run_logger = RunLogger(os.path.join(settings.out, constants.LOG_FILE_NAME))
    overrides = _scenario_overrides(args)
    with ThreadPoolExecutor(max_workers=settings.jobs) as pool:
        runs = list(pool.map(lambda name: run_scenario(name, output, overrides, settings.plots,
                                                       settings),
                             constants.SCENARIO_NAMES))
    statuses = [_report_run(run, run_logger, output) for run in runs]
    passed = statuses.count(EXIT_PASS)
    print(f"{passed}/{len(runs)} scenarios passed")
    return EXIT_PASS if passed == len(runs) else EXIT_CHECK_FAILED


VERBS = {
    "apconst": _apconst,
    "maximal": _maximal,
    "rh": _rh,
    "majorant": _majorant,
    "classify": _classify,
    "hardy": _hardy,
    "repro": _repro,
    "suite": _suite,
}


def main(argv=None):
    """Main entry point; returns the exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.list:
            for name in constants.SCENARIO_NAMES:
                print(name)
            return EXIT_PASS
        if args.verb is None:
            raise UsageError("a verb is required (or --list)")
        configure_logging(args.verbose)
        settings = _settings(args)
        return VERBS[args.verb](args, settings, OutputManager(settings.out))
    except UsageError as e:
        print(f"weightlab: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (WeightLabError, ValueError, OSError) as e:
        print(f"weightlab: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
