"""
Piecewise-constant functions on dyadic partitions and their integral functionals.

Cell values are cell AVERAGES of the represented function, so every integral
of a GridFunction equals the integral of the function over unions of cells.
"""
import csv
import logging
import re
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

import constants
from closed_form import ClosedFormFunction
from errors import DepthMismatch, NonIntegrableCell

LOGGER = logging.getLogger(__name__)

_HEADER = re.compile(r"#\s*domain=([^,\s]+),([^\s]+)\s+depth=(\d+)")


@dataclass(frozen=True)
class Interval:
    left: float
    right: float

    def __post_init__(self):
        if not self.left < self.right:
            raise ValueError(f"Interval needs left < right, got [{self.left}, {self.right}].")

    @property
    def length(self):
        return self.right - self.left

    def contains(self, x):
        return self.left <= x <= self.right

    def edges(self, depth):
        return np.linspace(self.left, self.right, 2 ** depth + 1)

    def to_dict(self):
        return {"left": self.left, "right": self.right}


def symmetric(radius):
    return Interval(-float(radius), float(radius))


@dataclass(frozen=True, eq=False)
class GridFunction:
    domain: Interval
    depth: int
    values: np.ndarray
    prefix: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim != 1 or values.size != 2 ** self.depth:
            raise ValueError(
                f"A depth-{self.depth} grid needs {2 ** self.depth} values, got {values.size}."
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("Grid values must be finite reals.")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)
        prefix = np.concatenate(([0.0], np.cumsum(values * self.cell_width)))
        prefix.flags.writeable = False
        object.__setattr__(self, "prefix", prefix)

    @classmethod
    def from_values(cls, domain, values):
        values = np.asarray(values, dtype=float)
        depth = int(round(np.log2(values.size))) if values.size else -1
        if depth < 0 or 2 ** depth != values.size:
            raise ValueError(f"Number of cells must be a power of two, got {values.size}.")
        return cls(domain, depth, values)

    @property
    def n_cells(self):
        return self.values.size

    @property
    def cell_width(self):
        return self.domain.length / 2 ** self.depth

    @property
    def edges(self):
        return self.domain.edges(self.depth)

    @property
    def centers(self):
        e = self.edges
        return 0.5 * (e[:-1] + e[1:])

    def cell_of(self, x):
        """Index of the cell containing x (right edge belongs to the last cell)."""
        i = int((x - self.domain.left) / self.cell_width)
        return min(max(i, 0), self.n_cells - 1)

    def with_values(self, values):
        return GridFunction(self.domain, self.depth, values)

    def abs(self):
        return self.with_values(np.abs(self.values))

    def power(self, s):
        with np.errstate(over="ignore", divide="ignore"):
            return self.with_values(np.abs(self.values) ** s)

    def scale(self, c):
        return self.with_values(c * self.values)

    def refine(self):
        """Split every cell in two; every integral functional is unchanged."""
        return GridFunction(self.domain, self.depth + 1, np.repeat(self.values, 2))

    def coarsen(self, depth):
        """Average consecutive blocks down to the given depth."""
        if depth > self.depth or depth < 0:
            raise ValueError(f"Cannot coarsen depth {self.depth} to depth {depth}.")
        block = 2 ** (self.depth - depth)
        return GridFunction(self.domain, depth, self.values.reshape(-1, block).mean(axis=1))

    def window_integral(self, l, r):
        return self.prefix[r + 1] - self.prefix[l]

    def to_dict(self):
        return {"domain": self.domain.to_dict(), "depth": self.depth,
                "values": self.values.tolist()}


def require_same_grid(f, g):
    if f.depth != g.depth or f.domain != g.domain:
        raise DepthMismatch(
            f"Grids differ: depth {f.depth} on [{f.domain.left:g}, {f.domain.right:g}] versus "
            f"depth {g.depth} on [{g.domain.left:g}, {g.domain.right:g}].\n"
            "Sample both functions on the same domain and depth."
        )


# sampling


def _quad(cf, lo, hi, tol):
    def scalar(x):
        return float(cf.evaluate(np.array([x]))[0])

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        value, _ = integrate.quad(scalar, lo, hi, epsabs=0.0, epsrel=tol,
                                  limit=constants.QUAD_SUBDIVISION_LIMIT)
    return value


def _quad_toward(cf, anchor, other, tol):
    """Integral between a singular anchor and other, by geometric shells."""
    span = other - anchor
    total = 0.0
    for j in range(constants.QUAD_SINGULAR_SHELLS):
        near = anchor + span * 2.0 ** -(j + 1)
        far = anchor + span * 2.0 ** -j
        total += _quad(cf, min(near, far), max(near, far), tol)
    innermost = anchor + span * 2.0 ** -constants.QUAD_SINGULAR_SHELLS
    total += _quad(cf, min(anchor, innermost), max(anchor, innermost), tol)
    return total


def _quad_cell(cf, lo, hi, singular_xs, tol):
    cuts = sorted({lo, hi, *(p for p in cf.breakpoints() if lo < p < hi),
                   *(s for s in singular_xs if lo < s < hi)})
    total = 0.0
    for a, b in zip(cuts[:-1], cuts[1:]):
        at_a, at_b = a in singular_xs, b in singular_xs
        if not (at_a or at_b):
            total += _quad(cf, a, b, tol)
            continue
        mid = 0.5 * (a + b)
        total += _quad_toward(cf, a, mid, tol) if at_a else _quad(cf, a, mid, tol)
        total += _quad_toward(cf, b, mid, tol) if at_b else _quad(cf, mid, b, tol)
    return total


def _check_integrable(cf, edges):
    """Raise NonIntegrableCell where a non-integrable singularity is not masked."""
    width = edges[1] - edges[0]
    for s in cf.singularities():
        if s.integrable or not edges[0] <= s.x <= edges[-1]:
            continue
        nudge = width * 1e-6
        for side in (-1.0, 1.0):
            x = s.x + side * nudge
            if not edges[0] <= x <= edges[-1] or cf.evaluate(np.array([x]))[0] == 0.0:
                continue
            i = int(np.clip(np.searchsorted(edges, x) - 1, 0, len(edges) - 2))
            raise NonIntegrableCell(
                i, edges[i], edges[i + 1],
                f"Singularity at x = {s.x:g} with |x-x0|^{s.alpha:g}|log|^{s.beta:g} growth.",
            )


def sample(cf, domain, depth, tol=constants.QUAD_RELATIVE_TOLERANCE):
    """Exact cell averages of a closed-form function on a dyadic grid."""
    if not isinstance(cf, ClosedFormFunction):
        raise TypeError(f"sample needs a ClosedFormFunction, got {type(cf).__name__}.")
    edges = domain.edges(depth)
    integrals = cf.cell_integrals(edges)
    if integrals is None:
        _check_integrable(cf, edges)
        singular_xs = {s.x for s in cf.singularities()}
        LOGGER.debug("quadrature fallback for %s at depth %d", cf.describe(), depth)
        integrals = np.array([_quad_cell(cf, edges[i], edges[i + 1], singular_xs, tol)
                              for i in range(len(edges) - 1)])
    bad = np.nonzero(~np.isfinite(integrals))[0]
    if bad.size:
        i = int(bad[0])
        raise NonIntegrableCell(i, edges[i], edges[i + 1], f"Function: {cf.describe()}")
    width = domain.length / 2 ** depth
    return GridFunction(domain, depth, integrals / width)


# functionals


def integral(f):
    return float(f.prefix[-1])


def lp_norm(f, p):
    if p == np.inf:
        return float(np.max(np.abs(f.values)))
    with np.errstate(over="ignore"):
        total = np.sum(np.abs(f.values) ** p) * f.cell_width
        return float(total ** (1.0 / p))


def weighted_lp_norm(f, w, p):
    require_same_grid(f, w)
    with np.errstate(over="ignore"):
        total = np.sum(np.abs(f.values) ** p * w.values) * f.cell_width
        return float(total ** (1.0 / p))


def weak_lp_quasinorm(f, p, resolved_cells=1):
    """sup_t t*|{|f| > t}|^(1/p), attained as t rises to each distinct level.

    resolved_cells > 1 skips thresholds whose level set spans fewer cells; the
    few innermost cells around a singularity carry averages, not point values.
    """
    levels = np.sort(np.abs(f.values))[::-1]
    levels = levels[levels > 0.0]
    if levels.size == 0:
        return 0.0
    # cells with value >= level, for each distinct level
    distinct, first = np.unique(-levels, return_index=True)
    counts = np.concatenate((first[1:], [levels.size]))
    keep = counts >= min(resolved_cells, levels.size)
    measures = counts[keep] * f.cell_width
    return float(np.max(-distinct[keep] * measures ** (1.0 / p)))


def weak_lp_banach_norm(f, p):
    """sup over sets E of |E|^(1/p - 1) * int_E |f|, a true norm on L^{p,inf}."""
    levels = np.sort(np.abs(f.values))[::-1]
    k = np.arange(1, levels.size + 1)
    mass = np.cumsum(levels) * f.cell_width
    return float(np.max(mass * (k * f.cell_width) ** (1.0 / p - 1.0)))


def log_plus_mean(f):
    with np.errstate(divide="ignore"):
        logs = np.log(np.abs(f.values))
    return float(np.mean(np.maximum(logs, 0.0)))


FUNCTIONALS = {
    "integral": integral,
    "lp_norm": lp_norm,
    "weak_lp_quasinorm": weak_lp_quasinorm,
    "weak_lp_banach_norm": weak_lp_banach_norm,
    "log_plus_mean": log_plus_mean,
}


# CSV


def write_csv(f, path):
    edges = f.edges
    with open(path, "w", newline="") as handle:
        handle.write(f"# domain={f.domain.left!r},{f.domain.right!r} depth={f.depth}\n")
        writer = csv.writer(handle)
        for i, value in enumerate(f.values):
            writer.writerow([i, repr(float(edges[i])), repr(float(edges[i + 1])), repr(float(value))])


def read_csv(path):
    with open(path, newline="") as handle:
        header = handle.readline()
        match = _HEADER.match(header.strip())
        if not match:
            raise ValueError(
                f"{path} does not start with a grid header.\n"
                "Expected: # domain=<left>,<right> depth=<k>"
            )
        domain = Interval(float(match.group(1)), float(match.group(2)))
        depth = int(match.group(3))
        values = [float(row[3]) for row in csv.reader(handle) if row]
    if len(values) != 2 ** depth:
        raise ValueError(f"{path} declares depth {depth} but has {len(values)} rows.")
    return GridFunction(domain, depth, values)
