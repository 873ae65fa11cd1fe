"""
A_p constants, reverse Hölder exponents and the weight algebra.

Every per-window quantity goes through one compiled window function, so the
value stored in a report is reproduced bit for bit when the worst window is
evaluated again.
"""
import logging
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from numba import njit

import constants
from closed_form import Constant, Minimum, PowerLog
from errors import NoExponentFound, NonPositiveWeight
from grid import GridFunction, require_same_grid, sample
from maximal import WindowFamily
from trend import divergence_probe

LOGGER = logging.getLogger(__name__)


class Weight(GridFunction):
    """A GridFunction whose cell values are all strictly positive."""

    def __post_init__(self):
        super().__post_init__()
        if not np.all(self.values > 0.0):
            bad = int(np.argmin(self.values))
            raise NonPositiveWeight(
                f"Weight cell {bad} has value {self.values[bad]:g}.\n"
                "Weights must be strictly positive on every cell; "
                "raise the function with truncate() or add a positive floor."
            )

    @classmethod
    def of(cls, f):
        if isinstance(f, cls):
            return f
        return cls(f.domain, f.depth, f.values)

    @cached_property
    def minima(self):
        """Range-minimum table over the cells, built on first use."""
        return SparseTableMin(self.values)

    def window_min(self, l, r):
        """Smallest value over cells l..r; indices past the last cell wrap around."""
        n = self.n_cells
        if r < n:
            return self.minima(l, r + 1)
        return min(self.minima(l, n), self.minima(0, r + 1 - n))


# compiled window kernels


@njit
def _window(P1, P2, a, b, l, r):
    """avg1**a * avg2**b over cells l..r."""
    length = r - l + 1
    first = (P1[r + 1] - P1[l]) / length
    second = (P2[r + 1] - P2[l]) / length
    if a != 1.0:
        first = first ** a
    if b != 1.0:
        second = second ** b
    return first * second


@njit
def _min_window(P1, l, r, lowest):
    return ((P1[r + 1] - P1[l]) / (r - l + 1)) / lowest


@njit
def _scan_all(P1, P2, a, b, n_starts, max_len):
    best, best_l, best_r = -np.inf, 0, 0
    for l in range(n_starts):
        for r in range(l, l + max_len):
            value = _window(P1, P2, a, b, l, r)
            if value > best:
                best, best_l, best_r = value, l, r
    return best, best_l, best_r


@njit
def _scan_all_min(P1, values, n_starts, max_len):
    best, best_l, best_r = -np.inf, 0, 0
    for l in range(n_starts):
        lowest = np.inf
        for r in range(l, l + max_len):
            if values[r] < lowest:
                lowest = values[r]
            value = _min_window(P1, l, r, lowest)
            if value > best:
                best, best_l, best_r = value, l, r
    return best, best_l, best_r


@njit
def _scan_dyadic(P1, P2, a, b, n):
    best, best_l, best_r = -np.inf, 0, 0
    size = 1
    while size <= n:
        for l in range(0, n, size):
            value = _window(P1, P2, a, b, l, l + size - 1)
            if value > best:
                best, best_l, best_r = value, l, l + size - 1
        size *= 2
    return best, best_l, best_r


@njit
def _scan_dyadic_min(P1, values, n):
    best, best_l, best_r = -np.inf, 0, 0
    size = 1
    while size <= n:
        for l in range(0, n, size):
            lowest = np.inf
            for i in range(l, l + size):
                if values[i] < lowest:
                    lowest = values[i]
            value = _min_window(P1, l, l + size - 1, lowest)
            if value > best:
                best, best_l, best_r = value, l, l + size - 1
        size *= 2
    return best, best_l, best_r


class SparseTableMin:
    """
    Range-minimum queries in O(1) after O(N log N) preprocessing.

    table[k][i] holds the minimum of values[i : i + 2**k].
    """

    def __init__(self, values):
        values = np.asarray(values, dtype=float)
        self.table = [values]
        span = 1
        while 2 * span <= values.size:
            previous = self.table[-1]
            self.table.append(np.minimum(previous[:-span], previous[span:]))
            span *= 2

    def __call__(self, start, stop):
        """Minimum of values[start:stop]; None for an empty range."""
        if start >= stop:
            return None
        level = (stop - start).bit_length() - 1
        row = self.table[level]
        return float(min(row[start], row[stop - 2 ** level]))


def _prefix(values):
    return np.concatenate(([0.0], np.cumsum(values)))


def _arcs(values, periodic):
    """Cell values plus scan bounds; arcs on the circle come from the doubled grid."""
    n = values.size
    if periodic:
        return np.concatenate((values, values)), n, n
    return values, n, n


def _dual_exponent(p):
    return 1.0 - p / (p - 1.0)


@dataclass(frozen=True)
class ApReport:
    p: float
    constant: float
    worst_window: tuple
    family: str
    periodic: bool = False

    @property
    def formula(self):
        if self.p == 1.0:
            return "avg_I(w) / min_I(w)"
        return "avg_I(w) * avg_I(w^(1-p'))^(p-1)"

    def verify(self, w):
        """Re-evaluate the stored worst window and compare with the stored constant."""
        l, r = self.worst_window
        return ap_window_value(w, self.p, l, r, self.periodic) == self.constant

    def to_dict(self):
        return {
            "p": self.p,
            "constant": self.constant,
            "worst_window": list(self.worst_window),
            "family": self.family,
            "formula": self.formula,
            "periodic": self.periodic,
        }


def ap_window_value(w, p, l, r, periodic=False):
    """The A_p product of one window [l, r] (indices into the doubled grid when periodic)."""
    values, _, _ = _arcs(w.values, periodic)
    P1 = _prefix(values)
    if p == 1.0:
        lowest = Weight.of(w).window_min(l, r)
        return float(_min_window(P1, l, r, lowest))
    P2 = _prefix(values ** _dual_exponent(p))
    return float(_window(P1, P2, 1.0, p - 1.0, l, r))


def ap_constant(w, p, family=WindowFamily.ALL, periodic=False):
    """[w]_{A_p}: the largest A_p product over the window family, with its window."""
    if not p >= 1.0:
        raise ValueError(f"ap_constant needs p >= 1, got {p}.")
    w = Weight.of(w)
    family = WindowFamily.parse(family)
    values, n_starts, max_len = _arcs(w.values, periodic)
    P1 = _prefix(values)
    n = w.n_cells
    if p == 1.0:
        if family is WindowFamily.DYADIC:
            best, l, r = _scan_dyadic_min(P1, values, n)
        else:
            best, l, r = _scan_all_min(P1, values, n_starts, max_len)
    else:
        P2 = _prefix(values ** _dual_exponent(p))
        if family is WindowFamily.DYADIC:
            best, l, r = _scan_dyadic(P1, P2, 1.0, p - 1.0, n)
        else:
            best, l, r = _scan_all(P1, P2, 1.0, p - 1.0, n_starts, max_len)
    return ApReport(float(p), float(best), (int(l), int(r)), family.value, periodic)


def ap_trend(family, depths, p, window_family=WindowFamily.ALL, thresholds=None, log_growth=False):
    """TrendReport of [w_k]_{A_p} for w_k = family(k) along the depths.

    log_growth for weights on the boundary of A_p, whose constants grow like the depth.
    """
    def constant(w):
        return ap_constant(w, p, window_family).constant

    return divergence_probe(family, constant, depths, thresholds, label=f"[w]_A{p:g}",
                            log_growth=log_growth)


# weight algebra


def dual_weight(w, p):
    if not p > 1.0:
        raise ValueError(f"dual_weight needs p > 1, got {p}.")
    return Weight.of(w.with_values(w.values ** _dual_exponent(p)))


def power_weight(w, s):
    if not s > 0.0:
        raise ValueError(f"power_weight needs s > 0, got {s}.")
    return Weight.of(w.with_values(w.values ** s))


def factor_product(u, v, p):
    """u * v^(1-p), an A_p weight whenever u and v are A_1."""
    require_same_grid(u, v)
    return Weight.of(u.with_values(u.values * v.values ** (1.0 - p)))


def combine_max(u, v):
    require_same_grid(u, v)
    return Weight.of(u.with_values(np.maximum(u.values, v.values)))


def combine_min(u, v):
    require_same_grid(u, v)
    return Weight.of(u.with_values(np.minimum(u.values, v.values)))


def truncate(w, level):
    if not level > 0.0:
        raise ValueError(f"Truncation level must be positive, got {level}.")
    return Weight.of(w.with_values(np.maximum(w.values, level)))


def sampled_power_weight(alpha, domain, depth, x0=0.0):
    """|x - x0|^alpha as a Weight; poles with alpha <= -1 are capped at cell scale."""
    atom = PowerLog(1.0, x0, alpha)
    if alpha <= -1.0:
        width = domain.length / 2 ** depth
        atom = Minimum(atom, Constant(width ** alpha))
    return Weight.of(sample(atom, domain, depth))


# reverse Hölder


def _rh_ladder():
    top = int(math.floor(math.log2(constants.RH_LADDER_SPAN / constants.RH_LADDER_FLOOR)))
    return [1.0 + constants.RH_LADDER_SPAN * 2.0 ** -j for j in range(top + 1)]


@dataclass(frozen=True)
class RHReport:
    s: float
    rh_constant: float
    satisfied: bool
    worst_window: tuple
    trace: tuple
    family: str
    monotone: bool

    def to_dict(self):
        return {
            "s": self.s,
            "rh_constant": self.rh_constant,
            "satisfied": self.satisfied,
            "worst_window": list(self.worst_window),
            "trace": [[s, ratio] for s, ratio in self.trace],
            "family": self.family,
            "monotone": self.monotone,
        }


def _rh_ratio(values, s, family):
    """max over windows of (avg w^s)^(1/s) / avg w."""
    P1, P2 = _prefix(values ** s), _prefix(values)
    if family is WindowFamily.DYADIC:
        return _scan_dyadic(P1, P2, 1.0 / s, -1.0, values.size)
    return _scan_all(P1, P2, 1.0 / s, -1.0, values.size, values.size)


def reverse_holder_exponent(w, family=WindowFamily.ALL):
    """Largest ladder s with (avg_I w^s)^(1/s) <= 2 avg_I w on every window I."""
    w = Weight.of(w)
    family = WindowFamily.parse(family)
    values = w.values / np.max(w.values)
    ladder = _rh_ladder()
    results = {}

    def passes(j):
        if j not in results:
            results[j] = _rh_ratio(values, ladder[j], family)
        return results[j][0] <= constants.RH_CONSTANT

    last = len(ladder) - 1
    if passes(0):
        found = 0
    elif not passes(last):
        raise NoExponentFound(
            f"Reverse Hölder fails even at s = {ladder[last]:.6g} "
            f"(ratio {results[last][0]:.6g} > {constants.RH_CONSTANT:g}).\n"
            "The weight is numerically degenerate at this depth."
        )
    else:
        failing, found = 0, last
        while found - failing > 1:
            middle = (found + failing) // 2
            if passes(middle):
                found = middle
            else:
                failing = middle

    s = ladder[found]
    ratio, l, r = results[found]
    above = _rh_ratio(values, s * 1.01, family)[0]
    trace = tuple((ladder[j], float(results[j][0])) for j in sorted(results))
    trace += ((s * 1.01, float(above)),)
    return RHReport(s, constants.RH_CONSTANT, True, (int(l), int(r)), trace, family.value,
                    monotone=bool(above >= ratio * (1.0 - 1e-12)))


# openness


def _one_step_plateau(fine, coarse, p, family, spread):
    a = ap_constant(fine, p, family).constant
    b = ap_constant(coarse, p, family).constant
    return abs(a - b) < spread * max(a, b), a


def self_improve_exponent(w, p, family=WindowFamily.ALL, spread=constants.PLATEAU_RELATIVE_SPREAD):
    """Largest ladder s > 1 keeping w^s in A_p across one refinement step."""
    w = Weight.of(w)
    if w.depth < 1:
        raise ValueError("self_improve_exponent needs depth >= 1 to compare two depths.")
    coarse = Weight.of(w.coarsen(w.depth - 1))
    base = ap_constant(w, p, family).constant
    for s in _rh_ladder():
        stable, constant = _one_step_plateau(power_weight(w, s), power_weight(coarse, s),
                                             p, family, spread)
        if stable and constant <= constants.SELF_IMPROVE_FACTOR * base ** s:
            LOGGER.info("w^%g stays in A_%g: constant %.6g", s, p, constant)
            return s
    raise NoExponentFound(
        f"No ladder exponent s > 1 keeps w^s in A_{p:g} across one refinement step.\n"
        "Reported as inconclusive; this does not refute self-improvement."
    )


def lower_ap_exponent(w, p, family=WindowFamily.ALL, steps=10,
                      spread=constants.PLATEAU_RELATIVE_SPREAD):
    """Smallest q = 1 + (p-1)2^-j with a one-refinement A_q plateau; q <= p."""
    if not p > 1.0:
        raise ValueError(f"lower_ap_exponent needs p > 1, got {p}.")
    w = Weight.of(w)
    coarse = Weight.of(w.coarsen(w.depth - 1))
    for j in range(steps, -1, -1):
        q = 1.0 + (p - 1.0) * 2.0 ** -j
        stable, _ = _one_step_plateau(w, coarse, q, family, spread)
        if stable:
            return q
    raise NoExponentFound(f"No exponent q <= {p:g} gives a stable A_q constant.")
