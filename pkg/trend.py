"""
Trend verdicts: finite numeric proxies for "finite" versus "infinite".
"""
import logging
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate

import constants
from config import TrendThresholds
from errors import NonIntegrableCell
from grid import FUNCTIONALS

LOGGER = logging.getLogger(__name__)


def _jsonable(value):
    return float(value) if math.isfinite(value) else "overflow"


@dataclass(frozen=True)
class TrendReport:
    params: tuple
    values: tuple
    verdict: str
    slope: float
    label: str = ""

    @property
    def last(self):
        return self.values[-1]

    def to_dict(self):
        return {
            "label": self.label,
            "params": [float(p) for p in self.params],
            "values": [_jsonable(v) for v in self.values],
            "verdict": self.verdict,
            "slope": _jsonable(self.slope),
        }


def _tail_slope(params, values):
    x, y = params[-3:], values[-3:]
    if not np.all(np.isfinite(y)):
        return math.inf
    if np.any(y <= 0.0) or np.any(x <= 0.0):
        return 0.0
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


def _close(a, b, spread):
    return a == b or abs(a - b) < spread * max(abs(a), abs(b))


def classify_trend(params, values, thresholds=None, label="", log_growth=False):
    """Decide plateau / divergent / inconclusive for a refinement or radius ladder.

    Growth by a persistent step counts as divergence only with log_growth (or
    thresholds.log_rule), for ladders known to grow like the log of the scale.
    """
    th = thresholds or TrendThresholds()
    params = np.asarray(params, dtype=float)
    values = np.asarray(values, dtype=float)
    if params.size < constants.TREND_MIN_POINTS or params.size != values.size:
        raise ValueError(
            f"A trend needs at least {constants.TREND_MIN_POINTS} parameters with one value each."
        )
    if np.any(np.diff(params) <= 0.0):
        raise ValueError("Trend parameters must be strictly increasing.")

    slope = _tail_slope(params, values)
    last3 = values[-3:]
    if not math.isfinite(values[-1]):
        verdict = constants.DIVERGENT
    elif slope > th.min_slope and values[-1] > th.min_growth * values[0]:
        verdict = constants.DIVERGENT
    elif all(_close(a, b, th.plateau_spread) for i, a in enumerate(last3) for b in last3[i + 1:]):
        verdict = constants.PLATEAU
    elif (log_growth or th.log_rule) and _grows_logarithmically(values, th):
        verdict = constants.DIVERGENT
    else:
        verdict = constants.INCONCLUSIVE
    return TrendReport(tuple(params.tolist()), tuple(values.tolist()), verdict, slope, label)


def _grows_logarithmically(values, th):
    tail = values[-4:]
    if not np.all(np.isfinite(tail)):
        return False
    steps = np.diff(tail)
    return bool(
        np.all(steps > 0.0)
        and steps[-1] >= th.log_persistence * steps[0]
        and steps[-1] >= th.log_min_step * abs(tail[-1])
    )


def divergence_probe(family, functional, params, thresholds=None, label="", log_growth=False,
                     **kwargs):
    """Evaluate a named functional along a parameterized family of grids.

    A family member whose cells cannot be averaged counts as an overflow.
    """
    evaluate = FUNCTIONALS[functional] if isinstance(functional, str) else functional
    values = []
    for param in params:
        try:
            values.append(evaluate(family(param), **kwargs))
        except NonIntegrableCell as e:
            LOGGER.info("parameter %s: %s", param, str(e).splitlines()[0])
            values.append(math.inf)
    name = label or (functional if isinstance(functional, str) else getattr(functional, "__name__", ""))
    return classify_trend(params, values, thresholds, label=name, log_growth=log_growth)


def _log_piece(cf, anchor, side, p, a, b):
    """log of the integral over t in [a, b] of |f(anchor + side e^-t)|^p e^-t."""
    grid = np.linspace(a, b, 33)
    with np.errstate(invalid="ignore", over="ignore"):
        logs = p * cf.log_near(anchor, side, grid) - grid
    logs = logs[np.isfinite(logs)]
    if logs.size == 0:
        return -math.inf
    peak = float(np.max(logs))

    def integrand(t):
        with np.errstate(all="ignore"):
            value = p * cf.log_near(anchor, side, np.array([t]))[0] - t - peak
        return math.exp(value) if math.isfinite(value) and value < 700.0 else 0.0

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        value, _ = integrate.quad(integrand, a, b, epsabs=0.0, epsrel=1e-8, limit=200)
    return peak + math.log(value) if value > 0.0 else -math.inf


def singular_scale_probe(cf, x0, side, p, scales=constants.LOG_SCALE_LADDER,
                         reach=0.5, thresholds=None):
    """L^p mass of cf on {2^-m <= |x - x0| <= reach} for each m in scales.

    Works in t = -log|x - x0| so scales far below double-precision cell widths
    stay representable.
    """
    if not 0.0 < reach < 1.0:
        raise ValueError(f"reach must lie in (0, 1), got {reach}.")
    start = -math.log(reach)
    log_mass = -math.inf
    lower = start
    values = []
    for m in scales:
        upper = m * math.log(2.0)
        while lower < upper:
            step = min(2.0 * lower, upper)
            log_mass = np.logaddexp(log_mass, _log_piece(cf, x0, side, p, lower, step))
            lower = step
        with np.errstate(over="ignore"):
            values.append(float(np.exp(log_mass / p)))
    label = f"L^{p:g} mass near x={x0:g} ({'right' if side > 0 else 'left'})"
    return classify_trend(scales, values, thresholds, label=label)


def radial_tail_probe(cf, p, scales=constants.RADIAL_SCALE_LADDER,
                      start=constants.RADIAL_PROBE_MIN_RADIUS, center=0.0, thresholds=None):
    """L^p mass of cf on {start <= |x - center| <= 2^m}, both sides, for m in scales.

    Works in t = log|x - center|, so radii up to 2^512 stay representable and
    slowly decaying tails are followed far past any uniform grid.
    """
    if not start > 0.0:
        raise ValueError(f"start must be positive, got {start}.")
    lower = math.log(start)
    log_mass = -math.inf
    values = []
    for m in scales:
        upper = m * math.log(2.0)
        while lower < upper:
            step = min(max(2.0 * lower, lower + 1.0), upper)
            for side in (-1.0, 1.0):
                # x = center + side * e^t, written as e^-(-t) for _log_piece
                log_mass = np.logaddexp(log_mass, _log_piece(cf, center, side, p, -step, -lower))
            lower = step
        with np.errstate(over="ignore"):
            values.append(float(np.exp(log_mass / p)))
    label = f"L^{p:g} mass of {cf.describe()} on {start:g} <= |x| <= 2^m"
    return classify_trend(scales, values, thresholds, label=label)
