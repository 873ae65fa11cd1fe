"""
Closed-form power-log functions c*|x-x0|^a*|log|x-x0||^b and their combinators.

Every node evaluates vectorized, reports its singular points with a strength
(alpha, beta), and when possible integrates exactly over consecutive cells.
"""
import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np
from scipy import optimize, special

LOGGER = logging.getLogger(__name__)

_EXACT_BETAS = (0.0, -1.0, -2.0)
_CROSSING_SAMPLES = 4
_CROSSING_SHELLS = 40


@dataclass(frozen=True)
class Singularity:
    x: float
    alpha: float
    beta: float

    @property
    def integrable(self):
        return self.alpha > -1.0 or (self.alpha == -1.0 and self.beta < -1.0)

    @property
    def unbounded(self):
        return self.alpha < 0.0 or (self.alpha == 0.0 and self.beta > 0.0)

    def dominates(self, other):
        """True when self blows up at least as fast as other."""
        if self.alpha != other.alpha:
            return self.alpha < other.alpha
        return self.beta >= other.beta

    def scaled(self, s):
        return Singularity(self.x, self.alpha * s, self.beta * s)

    def combined(self, other):
        return Singularity(self.x, self.alpha + other.alpha, self.beta + other.beta)


def _by_point(singularities):
    return {s.x: s for s in singularities}


def _keep_unbounded(points):
    return tuple(sorted((s for s in points if s.unbounded), key=lambda s: s.x))


class ClosedFormFunction(ABC):
    """A nonnegative function built from power-log atoms."""

    def __call__(self, x):
        return self.evaluate(np.asarray(x, dtype=float))

    @abstractmethod
    def evaluate(self, x):
        """Values at the points x (array)."""

    @abstractmethod
    def log_near(self, anchor, side, t):
        """log f(anchor + side*exp(-t)) without forming exp(-t) where possible."""

    def cell_integrals(self, edges):
        """Exact integrals over [edges[i], edges[i+1]], or None without a closed form."""
        return None

    def singularities(self):
        return ()

    def breakpoints(self):
        return ()

    @abstractmethod
    def describe(self):
        pass

    @abstractmethod
    def to_dict(self):
        pass

    # algebra
    def maximum(self, other):
        return Maximum(self, other)

    def minimum(self, other):
        return Minimum(self, other)

    def restrict(self, left, right):
        return Restrict(self, float(left), float(right))

    def truncate(self, level):
        if level <= 0:
            raise ValueError(f"Truncation level must be positive, got {level}.")
        return Truncate(self, float(level))

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return scale(self, float(other))
        return product(self, other)

    __rmul__ = __mul__

    def __pow__(self, s):
        return power(self, float(s))

    def __str__(self):
        return self.describe()


@dataclass(frozen=True)
class Constant(ClosedFormFunction):
    c: float

    def __post_init__(self):
        if not self.c >= 0:
            raise ValueError(f"Constant must be nonnegative, got {self.c}.")

    def evaluate(self, x):
        return np.full(np.shape(x), self.c, dtype=float)

    def log_near(self, anchor, side, t):
        with np.errstate(divide="ignore"):
            return np.full(np.shape(t), np.log(self.c), dtype=float)

    def cell_integrals(self, edges):
        return self.c * np.diff(edges)

    def describe(self):
        return f"{self.c:g}"

    def to_dict(self):
        return {"kind": "Constant", "c": self.c}


@dataclass(frozen=True)
class PowerLog(ClosedFormFunction):
    c: float
    x0: float
    alpha: float
    beta: float = 0.0

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError(f"PowerLog coefficient must be positive, got {self.c}.")

    def _from_distance(self, u):
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            value = self.c * u ** self.alpha
            if self.beta != 0.0:
                value = value * np.abs(np.log(u)) ** self.beta
        # 0 * inf at the centre resolves to the dominant power
        at_centre = u == 0.0
        if np.any(at_centre):
            centre = Singularity(self.x0, self.alpha, self.beta)
            if centre.unbounded:
                limit = np.inf
            elif self.alpha == 0.0 and self.beta == 0.0:
                limit = self.c
            else:
                limit = 0.0
            value = np.where(at_centre, limit, value)
        return value

    def evaluate(self, x):
        return self._from_distance(np.abs(x - self.x0))

    def log_near(self, anchor, side, t):
        t = np.asarray(t, dtype=float)
        if anchor == self.x0:
            value = math.log(self.c) - self.alpha * t
            if self.beta != 0.0:
                # |log|x - x0|| = |t| on both sides of distance one
                with np.errstate(divide="ignore"):
                    value = value + self.beta * np.log(np.abs(t))
            return value
        x = anchor + side * np.exp(-t)
        with np.errstate(divide="ignore"):
            return np.log(self.evaluate(x))

    def _primitive(self, u):
        """Antiderivative in u = |x - x0| on one side of the centre."""
        a = self.alpha + 1.0
        beta = self.beta
        with np.errstate(all="ignore"):
            lu = np.log(u)
            if beta == 0.0:
                value = lu if a == 0.0 else u ** a / a
            elif beta == -1.0:
                core = np.log(np.abs(lu)) if a == 0.0 else special.expi(a * lu)
                value = np.where(u < 1.0, -core, core)
            else:
                value = -1.0 / lu if a == 0.0 else -(u ** a) / lu + a * special.expi(a * lu)
        origin = 0.0 if Singularity(self.x0, self.alpha, beta).integrable else -np.inf
        return np.where(u == 0.0, origin, value)

    def _branch(self, lo, hi):
        active = hi > lo
        with np.errstate(all="ignore"):
            values = self._primitive(hi) - self._primitive(lo)
        values = np.where(active, values, 0.0)
        if self.beta != 0.0:
            values = np.where(active & (lo <= 1.0) & (hi >= 1.0), np.inf, values)
        return np.where(np.isnan(values), np.inf, values)

    def cell_integrals(self, edges):
        if self.beta not in _EXACT_BETAS:
            return None
        a, b = edges[:-1], edges[1:]
        right = self._branch(np.maximum(a, self.x0) - self.x0, np.maximum(b, self.x0) - self.x0)
        left = self._branch(np.maximum(self.x0 - b, 0.0), np.maximum(self.x0 - a, 0.0))
        return self.c * (left + right)

    def singularities(self):
        points = [Singularity(self.x0, self.alpha, self.beta)]
        if self.beta < 0.0:
            points += [Singularity(self.x0 - 1.0, self.beta, 0.0),
                       Singularity(self.x0 + 1.0, self.beta, 0.0)]
        return _keep_unbounded(points)

    def breakpoints(self):
        if self.beta != 0.0:
            return (self.x0 - 1.0, self.x0, self.x0 + 1.0)
        return (self.x0,)

    def describe(self):
        text = f"{self.c:g}*|x-{self.x0:g}|^{self.alpha:g}"
        if self.beta != 0.0:
            text += f"*|log|x-{self.x0:g}||^{self.beta:g}"
        return text

    def to_dict(self):
        return {"kind": "PowerLog", "c": self.c, "x0": self.x0,
                "alpha": self.alpha, "beta": self.beta}


def _crossings(first, second, edges, singular_xs):
    """Points in (edges[0], edges[-1]) where first - second changes sign."""
    lo, hi = edges[0], edges[-1]
    width = (hi - lo) / max(len(edges) - 1, 1)
    offsets = np.arange(1, _CROSSING_SAMPLES) / _CROSSING_SAMPLES
    samples = [edges, (edges[:-1, None] + offsets * np.diff(edges)[:, None]).ravel()]
    shells = width * 2.0 ** -np.arange(3, _CROSSING_SHELLS)
    for s in singular_xs:
        samples.append(s - shells)
        samples.append(s + shells)
    xs = np.unique(np.concatenate(samples))
    xs = xs[(xs > lo) & (xs < hi)]
    if xs.size == 0:
        return np.empty(0)
    with np.errstate(invalid="ignore"):
        diff = first.evaluate(xs) - second.evaluate(xs)
    usable = np.isfinite(diff)
    xs, diff = xs[usable], diff[usable]
    signs = np.sign(diff)
    roots = list(xs[signs == 0.0])
    change = np.nonzero(signs[:-1] * signs[1:] < 0.0)[0]

    def gap(x):
        return float(first.evaluate(np.array([x]))[0] - second.evaluate(np.array([x]))[0])

    for i in change:
        try:
            roots.append(optimize.brentq(gap, xs[i], xs[i + 1], xtol=1e-14))
        except ValueError:
            LOGGER.debug("no bracketed crossing in [%g, %g]", xs[i], xs[i + 1])
    return np.asarray(roots, dtype=float)


def _regroup(pieces, points, edges):
    """Sum piece integrals back into the cells delimited by edges."""
    starts = np.searchsorted(points, edges[:-1])
    stops = np.searchsorted(points, edges[1:])
    out = np.zeros(len(edges) - 1)
    nonempty = stops > starts
    if np.any(nonempty):
        out[nonempty] = np.add.reduceat(pieces, starts[nonempty])
    return out


def _extreme_integrals(first, second, edges, take_max):
    singular_xs = [s.x for s in first.singularities() + second.singularities()]
    cuts = _crossings(first, second, edges, singular_xs)
    inner = [p for p in first.breakpoints() + second.breakpoints() if edges[0] < p < edges[-1]]
    points = np.union1d(edges, np.concatenate([cuts, np.asarray(inner, dtype=float)]))
    a = first.cell_integrals(points)
    if a is None:
        return None
    b = second.cell_integrals(points)
    if b is None:
        return None
    mids = 0.5 * (points[:-1] + points[1:])
    with np.errstate(invalid="ignore"):
        va, vb = first.evaluate(mids), second.evaluate(mids)
    pick_first = va >= vb if take_max else va <= vb
    return _regroup(np.where(pick_first, a, b), points, edges)


@dataclass(frozen=True)
class Maximum(ClosedFormFunction):
    left: ClosedFormFunction
    right: ClosedFormFunction

    def evaluate(self, x):
        return np.maximum(self.left.evaluate(x), self.right.evaluate(x))

    def log_near(self, anchor, side, t):
        return np.maximum(self.left.log_near(anchor, side, t), self.right.log_near(anchor, side, t))

    def cell_integrals(self, edges):
        return _extreme_integrals(self.left, self.right, edges, take_max=True)

    def singularities(self):
        merged = _by_point(self.left.singularities())
        for s in self.right.singularities():
            if s.x not in merged or s.dominates(merged[s.x]):
                merged[s.x] = s
        return _keep_unbounded(merged.values())

    def breakpoints(self):
        return self.left.breakpoints() + self.right.breakpoints()

    def describe(self):
        return f"max({self.left.describe()}, {self.right.describe()})"

    def to_dict(self):
        return {"kind": "Max", "left": self.left.to_dict(), "right": self.right.to_dict()}


@dataclass(frozen=True)
class Minimum(ClosedFormFunction):
    left: ClosedFormFunction
    right: ClosedFormFunction

    def evaluate(self, x):
        return np.minimum(self.left.evaluate(x), self.right.evaluate(x))

    def log_near(self, anchor, side, t):
        return np.minimum(self.left.log_near(anchor, side, t), self.right.log_near(anchor, side, t))

    def cell_integrals(self, edges):
        return _extreme_integrals(self.left, self.right, edges, take_max=False)

    def singularities(self):
        # a point stays singular only where both sides blow up
        theirs = _by_point(self.right.singularities())
        kept = []
        for s in self.left.singularities():
            other = theirs.get(s.x)
            if other is not None:
                kept.append(other if s.dominates(other) else s)
        return _keep_unbounded(kept)

    def breakpoints(self):
        return self.left.breakpoints() + self.right.breakpoints()

    def describe(self):
        return f"min({self.left.describe()}, {self.right.describe()})"

    def to_dict(self):
        return {"kind": "Min", "left": self.left.to_dict(), "right": self.right.to_dict()}


@dataclass(frozen=True)
class Truncate(ClosedFormFunction):
    child: ClosedFormFunction
    level: float

    def _as_maximum(self):
        return Maximum(self.child, Constant(self.level))

    def evaluate(self, x):
        return np.maximum(self.child.evaluate(x), self.level)

    def log_near(self, anchor, side, t):
        return np.maximum(self.child.log_near(anchor, side, t), math.log(self.level))

    def cell_integrals(self, edges):
        return self._as_maximum().cell_integrals(edges)

    def singularities(self):
        return self.child.singularities()

    def breakpoints(self):
        return self.child.breakpoints()

    def describe(self):
        return f"max({self.child.describe()}, {self.level:g})"

    def to_dict(self):
        return {"kind": "Truncate", "level": self.level, "child": self.child.to_dict()}


@dataclass(frozen=True)
class Restrict(ClosedFormFunction):
    child: ClosedFormFunction
    left: float
    right: float

    def __post_init__(self):
        if not self.left < self.right:
            raise ValueError(f"Restrict needs left < right, got [{self.left}, {self.right}].")

    def _inside(self, x):
        return (x >= self.left) & (x <= self.right)

    def evaluate(self, x):
        inside = self._inside(x)
        out = np.zeros(np.shape(x), dtype=float)
        if np.any(inside):
            out[inside] = self.child.evaluate(np.asarray(x)[inside])
        return out

    def log_near(self, anchor, side, t):
        x = anchor + side * np.exp(-np.asarray(t, dtype=float))
        with np.errstate(divide="ignore"):
            return np.where(self._inside(x), self.child.log_near(anchor, side, t), -np.inf)

    def cell_integrals(self, edges):
        clipped = np.clip(edges, self.left, self.right)
        inner = self.child.cell_integrals(clipped)
        if inner is None:
            return None
        return np.where(np.diff(clipped) > 0.0, inner, 0.0)

    def singularities(self):
        return tuple(s for s in self.child.singularities() if self.left <= s.x <= self.right)

    def breakpoints(self):
        return (self.left, self.right) + self.child.breakpoints()

    def describe(self):
        return f"{self.child.describe()} on [{self.left:g}, {self.right:g}]"

    def to_dict(self):
        return {"kind": "Restrict", "left": self.left, "right": self.right,
                "child": self.child.to_dict()}


@dataclass(frozen=True)
class Product(ClosedFormFunction):
    left: ClosedFormFunction
    right: ClosedFormFunction

    def evaluate(self, x):
        a, b = self.left.evaluate(x), self.right.evaluate(x)
        with np.errstate(invalid="ignore"):
            return np.where((a == 0.0) | (b == 0.0), 0.0, a * b)

    def log_near(self, anchor, side, t):
        return self.left.log_near(anchor, side, t) + self.right.log_near(anchor, side, t)

    def singularities(self):
        merged = _by_point(self.left.singularities())
        for s in self.right.singularities():
            merged[s.x] = merged[s.x].combined(s) if s.x in merged else s
        return _keep_unbounded(merged.values())

    def breakpoints(self):
        return self.left.breakpoints() + self.right.breakpoints()

    def describe(self):
        return f"({self.left.describe()})*({self.right.describe()})"

    def to_dict(self):
        return {"kind": "Product", "left": self.left.to_dict(), "right": self.right.to_dict()}


@dataclass(frozen=True)
class Power(ClosedFormFunction):
    child: ClosedFormFunction
    exponent: float

    def evaluate(self, x):
        with np.errstate(over="ignore"):
            return self.child.evaluate(x) ** self.exponent

    def log_near(self, anchor, side, t):
        return self.exponent * self.child.log_near(anchor, side, t)

    def singularities(self):
        return _keep_unbounded(s.scaled(self.exponent) for s in self.child.singularities())

    def breakpoints(self):
        return self.child.breakpoints()

    def describe(self):
        return f"({self.child.describe()})^{self.exponent:g}"

    def to_dict(self):
        return {"kind": "Power", "s": self.exponent, "child": self.child.to_dict()}


def scale(f, c):
    """c*f, pushed down to the atoms."""
    if c < 0:
        raise ValueError(f"Scale factor must be nonnegative, got {c}.")
    if isinstance(f, Constant):
        return Constant(c * f.c)
    if c == 0.0:
        return Constant(0.0)
    if isinstance(f, PowerLog):
        return PowerLog(c * f.c, f.x0, f.alpha, f.beta)
    if isinstance(f, (Maximum, Minimum)):
        return type(f)(scale(f.left, c), scale(f.right, c))
    if isinstance(f, Truncate):
        return Truncate(scale(f.child, c), c * f.level)
    if isinstance(f, Restrict):
        return Restrict(scale(f.child, c), f.left, f.right)
    if isinstance(f, Product):
        return Product(scale(f.left, c), f.right)
    return Product(Constant(c), f)


def product(f, g):
    """f*g, merging atoms that share a centre."""
    if isinstance(f, Constant):
        return scale(g, f.c)
    if isinstance(g, Constant):
        return scale(f, g.c)
    if isinstance(f, PowerLog) and isinstance(g, PowerLog) and f.x0 == g.x0:
        return PowerLog(f.c * g.c, f.x0, f.alpha + g.alpha, f.beta + g.beta)
    if isinstance(f, Restrict):
        return Restrict(product(f.child, g), f.left, f.right)
    if isinstance(g, Restrict):
        return Restrict(product(f, g.child), g.left, g.right)
    return Product(f, g)


def power(f, s):
    """f**s for s > 0; powers are monotone so they distribute over max/min."""
    if not s > 0:
        raise ValueError(f"Power exponent must be positive, got {s}.")
    if s == 1.0:
        return f
    if isinstance(f, Constant):
        return Constant(f.c ** s)
    if isinstance(f, PowerLog):
        return PowerLog(f.c ** s, f.x0, f.alpha * s, f.beta * s)
    if isinstance(f, (Maximum, Minimum)):
        return type(f)(power(f.left, s), power(f.right, s))
    if isinstance(f, Truncate):
        return Truncate(power(f.child, s), f.level ** s)
    if isinstance(f, Restrict):
        return Restrict(power(f.child, s), f.left, f.right)
    if isinstance(f, Product):
        return product(power(f.left, s), power(f.right, s))
    if isinstance(f, Power):
        return power(f.child, f.exponent * s)
    return Power(f, s)


def abs_power(x0, alpha, c=1.0):
    """c*|x - x0|^alpha."""
    return PowerLog(float(c), float(x0), float(alpha), 0.0)


def from_dict(data):
    """Rebuild an expression tree from to_dict() output."""
    kind = data["kind"]
    if kind == "Constant":
        return Constant(data["c"])
    if kind == "PowerLog":
        return PowerLog(data["c"], data["x0"], data["alpha"], data["beta"])
    if kind == "Max":
        return Maximum(from_dict(data["left"]), from_dict(data["right"]))
    if kind == "Min":
        return Minimum(from_dict(data["left"]), from_dict(data["right"]))
    if kind == "Product":
        return Product(from_dict(data["left"]), from_dict(data["right"]))
    if kind == "Power":
        return Power(from_dict(data["child"]), data["s"])
    if kind == "Restrict":
        return Restrict(from_dict(data["child"]), data["left"], data["right"])
    if kind == "Truncate":
        return Truncate(from_dict(data["child"]), data["level"])
    raise ValueError(f"Unknown expression kind '{kind}'.")
