"""
Restricted Hardy-Littlewood maximal operator on dyadic grids.

Windows are grid-aligned cell ranges [l, r]; averages are of |f| and come from
prefix sums, so every value is (P[r+1] - P[l]) / ((r - l + 1) * width).
"""
import logging
from dataclasses import dataclass
from enum import Enum

import numpy as np
from numba import njit

import constants
from errors import NonPositiveWeight
from grid import GridFunction, weak_lp_banach_norm, weighted_lp_norm

LOGGER = logging.getLogger(__name__)


class WindowFamily(Enum):
    ALL = "all"
    DYADIC = "dyadic"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        try:
            return cls(value)
        except ValueError:
            raise ValueError(f"Window family must be 'all' or 'dyadic', got '{value}'.")


def _abs_prefix(f):
    magnitude = np.abs(f.values)
    return np.concatenate(([0.0], np.cumsum(magnitude * f.cell_width))), magnitude


@njit
def _slope(P, a, b, width):
    return (P[b] - P[a]) / ((b - a) * width)


@njit
def _cross(P, o, a, b):
    return (a - o) * (P[b] - P[o]) - (P[a] - P[o]) * (b - o)


@njit
def _naive_all(P, magnitude, width):
    n = magnitude.size
    out = magnitude.copy()
    for a in range(n):
        best = -np.inf
        # suffix maximum over window ends: cell b-1 sees every window [a, b') with b' >= b
        for b in range(n, a, -1):
            value = _slope(P, a, b, width)
            if value > best:
                best = value
            if best > out[b - 1]:
                out[b - 1] = best
    return out


@njit
def _fast_all(P, magnitude, width):
    n = magnitude.size
    out = magnitude.copy()
    hull = np.empty(n + 1, dtype=np.int64)
    size = 2
    while size <= n:
        half = size // 2
        for lo in range(0, n, size):
            mid = lo + half
            hi = lo + size

            # windows [a, b) crossing mid, seen from the left: upper hull of the ends
            k = 0
            for b in range(mid + 1, hi + 1):
                while k >= 2 and _cross(P, hull[k - 2], hull[k - 1], b) >= 0.0:
                    k -= 1
                hull[k] = b
                k += 1
            best = -np.inf
            for a in range(lo, mid):
                i, j = 0, k - 1
                while i < j:
                    m = (i + j) // 2
                    if _slope(P, hull[m], hull[m + 1], width) > _slope(P, a, hull[m], width):
                        i = m + 1
                    else:
                        j = m
                value = _slope(P, a, hull[i], width)
                if value > best:
                    best = value
                if best > out[a]:
                    out[a] = best

            # seen from the right: lower hull of the starts
            k = 0
            for a in range(lo, mid):
                while k >= 2 and _cross(P, hull[k - 2], hull[k - 1], a) <= 0.0:
                    k -= 1
                hull[k] = a
                k += 1
            best = -np.inf
            for b in range(hi, mid, -1):
                i, j = 0, k - 1
                while i < j:
                    m = (i + j) // 2
                    if _slope(P, hull[m], hull[m + 1], width) < _slope(P, hull[m], b, width):
                        i = m + 1
                    else:
                        j = m
                value = _slope(P, hull[i], b, width)
                if value > best:
                    best = value
                if best > out[b - 1]:
                    out[b - 1] = best
        size *= 2
    return out


def maximal_shifted_dyadic(f, shift=0):
    """Maximal function over dyadic blocks of every size s shifted by floor(shift*s/3) cells."""
    if shift not in (0, 1, 2):
        raise ValueError(f"shift must be 0, 1 or 2, got {shift}.")
    P, magnitude = _abs_prefix(f)
    n = f.n_cells
    cells = np.arange(n)
    out = magnitude.copy()
    size = 1
    while size <= n:
        offset = (shift * size) // 3
        block = np.floor_divide(cells - offset, size)
        left = np.maximum(block * size + offset, 0)
        right = np.minimum((block + 1) * size + offset, n)
        out = np.maximum(out, (P[right] - P[left]) / ((right - left) * f.cell_width))
        size *= 2
    return f.with_values(out)


def maximal_naive(f, family=WindowFamily.ALL):
    """Brute-force maximal function; O(N^2) over all windows."""
    family = WindowFamily.parse(family)
    if family is WindowFamily.DYADIC:
        return maximal_shifted_dyadic(f, 0)
    P, magnitude = _abs_prefix(f)
    return f.with_values(_naive_all(P, magnitude, f.cell_width))


def maximal_fast(f):
    """Same cell maxima as maximal_naive over all windows, by divide and conquer.

    Each level of the recursion handles the windows crossing a split point with
    tangent queries against convex hulls of the prefix-sum points.
    """
    P, magnitude = _abs_prefix(f)
    if f.n_cells == 1:
        return f.with_values(magnitude)
    return f.with_values(_fast_all(P, magnitude, f.cell_width))


def maximal_iterate(f, k):
    if k < 1:
        raise ValueError(f"maximal_iterate needs k >= 1, got {k}.")
    for _ in range(k):
        f = maximal_fast(f)
    return f


@dataclass(frozen=True)
class NormEstimate:
    p: float
    weight_id: str
    lower_bound: float
    bound: float
    trials: int
    seed: int
    space: str = "lp"

    def to_dict(self):
        return {
            "p": self.p,
            "weight_id": self.weight_id,
            "lower_bound": self.lower_bound,
            "B": self.bound,
            "trials": self.trials,
            "seed": self.seed,
            "space": self.space,
        }


def _probes(n, rng, trials):
    """Deterministic probes first, then seeded log-uniform random functions."""
    yield np.ones(n)
    for i in sorted({0, n // 4, n // 2, (3 * n) // 4, n - 1}):
        spike = np.zeros(n)
        spike[i] = 1.0
        yield spike
    for _ in range(trials):
        yield np.exp(rng.uniform(np.log(1e-3), np.log(1e3), size=n))


def op_norm_estimate(w, p, trials=constants.NORM_TRIALS, seed=constants.DEFAULT_SEED,
                     weight_id="w"):
    """Empirical lower bound for the norm of M on L^p_w, with B = 2 * lower bound."""
    if not p > 1:
        raise ValueError(f"op_norm_estimate needs p > 1, got {p}.")
    if not np.all(w.values > 0.0):
        raise NonPositiveWeight(
            f"Weight '{weight_id}' has non-positive cells.\n"
            "Operator norms on L^p_w need a strictly positive weight."
        )
    dual = w.values ** (1.0 - p / (p - 1.0))
    rng = np.random.default_rng(seed)
    candidates = [dual, *_probes(w.n_cells, rng, trials)]
    lower = 1.0
    for values in candidates:
        g = w.with_values(values)
        denominator = weighted_lp_norm(g, w, p)
        if denominator > 0.0:
            lower = max(lower, weighted_lp_norm(maximal_fast(g), w, p) / denominator)
    LOGGER.info("norm of M on L^%g_%s >= %.6g (%d trials, seed %d)", p, weight_id, lower, trials, seed)
    return NormEstimate(p, weight_id, lower, constants.NORM_SAFETY_FACTOR * lower, trials, seed)


def weak_norm_estimate(domain, depth, p, trials=constants.NORM_TRIALS, seed=constants.DEFAULT_SEED):
    """Empirical norm of M on L^{p,inf} measured with the normable weak-L^p norm."""
    if not p > 1:
        raise ValueError(f"weak_norm_estimate needs p > 1, got {p}.")
    rng = np.random.default_rng(seed)
    n = 2 ** depth
    lower = 1.0
    for values in _probes(n, rng, trials):
        g = GridFunction(domain, depth, values)
        denominator = weak_lp_banach_norm(g, p)
        if denominator > 0.0:
            lower = max(lower, weak_lp_banach_norm(maximal_fast(g), p) / denominator)
    return NormEstimate(p, "weak", lower, constants.NORM_SAFETY_FACTOR * lower, trials, seed,
                        space="weak")
