"""
Circle-side computations: the Szegő test, outer functions built from a weight,
and weighted Hardy-space membership.

The circle is [0, 2π) sampled at θ_j = 2π(j + offset)/2^m. Weights vanishing at
a sample point (|1 - e^{iθ}|^α at θ = 0) are sampled at midpoints, offset 1/2.
"""
import csv
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import fft

import constants
from errors import NonPositiveSample, SzegoFailed
from grid import Interval
from maximal import WindowFamily
from membership import MembershipClass, MembershipReport
from trend import classify_trend, divergence_probe
from weights import Weight, ap_constant

LOGGER = logging.getLogger(__name__)

CIRCLE = Interval(0.0, 2.0 * math.pi)


@dataclass(frozen=True, eq=False)
class CircleGrid:
    m: int
    values: np.ndarray
    offset: float = 0.0

    def __post_init__(self):
        values = np.asarray(self.values)
        if values.ndim != 1 or values.size != 2 ** self.m:
            raise ValueError(f"A circle grid with m = {self.m} needs {2 ** self.m} samples, "
                             f"got {values.size}.")
        if not np.iscomplexobj(values):
            values = values.astype(float)
        elif np.all(values.imag == 0.0):
            values = values.real.copy()
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @classmethod
    def from_function(cls, fn, m, offset=0.5):
        theta = 2.0 * math.pi * (np.arange(2 ** m) + offset) / 2 ** m
        return cls(m, np.asarray(fn(theta)), offset)

    @property
    def n(self):
        return self.values.size

    @property
    def theta(self):
        return 2.0 * math.pi * (np.arange(self.n) + self.offset) / self.n

    @property
    def is_positive(self):
        return not np.iscomplexobj(self.values) and bool(np.all(self.values > 0.0))

    def with_values(self, values):
        return CircleGrid(self.m, values, self.offset)

    def decimate(self):
        """Every other sample: the grid with m - 1 whose offset halves."""
        if self.m == 0:
            raise ValueError("A single-sample circle grid cannot be decimated.")
        return CircleGrid(self.m - 1, self.values[::2], self.offset / 2.0)

    def mean(self):
        return self.values.mean()

    def as_weight(self):
        """The samples as a periodic grid weight on [0, 2π]."""
        return Weight(CIRCLE, self.m, self.values)

    def to_dict(self):
        return {"m": self.m, "offset": self.offset, "n": self.n}


def _require_positive(w):
    if np.iscomplexobj(w.values) or not np.all(w.values > 0.0):
        values = np.abs(w.values) if np.iscomplexobj(w.values) else w.values
        bad = int(np.argmin(values))
        raise NonPositiveSample(
            f"Circle weight sample {bad} (θ = {w.theta[bad]:.6g}) is not a positive real.\n"
            "Sample weights vanishing on the circle at midpoints (offset 0.5)."
        )


@dataclass(frozen=True)
class SzegoReport:
    log_mean: float
    in_szego_class: bool
    a_infty_gap: float
    underflow_count: int

    def to_dict(self):
        return {"log_mean": self.log_mean, "in_szego_class": self.in_szego_class,
                "a_infty_gap": self.a_infty_gap, "underflow_count": self.underflow_count}


def szego_test(w):
    """Mean of log w, the Szegő gate and the gap mean(w)·exp(-mean log w)."""
    _require_positive(w)
    underflow = int(np.count_nonzero(w.values < constants.HARDY_UNDERFLOW_FLOOR))
    log_mean = float(np.mean(np.log(w.values)))
    with np.errstate(over="ignore"):
        gap = float(np.mean(w.values) * math.exp(-log_mean)) if -log_mean < 709.0 else math.inf
    return SzegoReport(log_mean, underflow == 0 and math.isfinite(log_mean), gap, underflow)


def _split_coefficients(coefficients):
    """Analytic projection: keep index 0, double 1..N/2-1, keep N/2, drop the rest."""
    n = coefficients.size
    projected = np.zeros_like(coefficients)
    projected[0] = coefficients[0]
    projected[1:n // 2] = 2.0 * coefficients[1:n // 2]
    if n > 1:
        projected[n // 2] = coefficients[n // 2]
    return projected


def _tail_energy(coefficients):
    energy = np.abs(coefficients) ** 2
    total = energy[1:].sum()
    if total == 0.0:
        return 0.0
    n = coefficients.size
    k = np.abs(fft.fftfreq(n, 1.0 / n))
    return float(energy[k >= n // 4].sum() / total)


@dataclass(frozen=True, eq=False)
class OuterFunction:
    p0: float
    boundary: CircleGrid
    analytic_coeffs: np.ndarray
    origin_value: complex
    tail_energy: float

    @property
    def boundary_modulus(self):
        return self.boundary.with_values(np.abs(self.boundary.values))

    @property
    def resolved(self):
        """The log-coefficient tail is below the truncation floor."""
        return self.tail_energy < constants.HARDY_TAIL_ENERGY

    def evaluate(self, z):
        z = np.asarray(z, dtype=complex)
        if np.any(np.abs(z) >= 1.0):
            raise ValueError("Outer functions are evaluated inside the unit disk, |z| < 1.")
        return np.exp(np.polynomial.polynomial.polyval(z, self.analytic_coeffs))

    def to_dict(self):
        return {
            "p0": self.p0,
            "m": self.boundary.m,
            "origin_value": [self.origin_value.real, self.origin_value.imag],
            "tail_energy": self.tail_energy,
            "resolved": self.resolved,
        }


def outer_from_weight(w, p0):
    """The outer function h with |h|^p0 = w on the circle, from the log coefficients of w."""
    if not p0 > 0.0:
        raise ValueError(f"The Hardy exponent must be positive, got {p0}.")
    szego = szego_test(w)
    if not szego.in_szego_class:
        raise SzegoFailed(
            f"{szego.underflow_count} samples of the weight underflow below "
            f"{constants.HARDY_UNDERFLOW_FLOOR:g}; mean log w is not resolved at m = {w.m}.\n"
            "No outer function exists for weights outside the Szegő class."
        )
    n = w.n
    coefficients = fft.fft(np.log(w.values) / p0) / n
    projected = _split_coefficients(coefficients)
    boundary = np.exp(fft.ifft(projected) * n)
    # FFT coefficients of offset samples carry the phase e^{2πik·offset/N}
    k = np.arange(n // 2 + 1)
    analytic = projected[:n // 2 + 1] * np.exp(-2j * math.pi * k * w.offset / n)
    tail = _tail_energy(coefficients)
    outer = OuterFunction(float(p0), w.with_values(boundary), analytic,
                          complex(np.exp(projected[0])), tail)
    if not outer.resolved:
        LOGGER.info("log w keeps a tail energy of %.3g at m = %d", tail, w.m)
    return outer


def analytic_defect(f):
    """Share of the energy of f carried by negative Fourier indices; 0 for analytic data."""
    coefficients = fft.fft(f.values)
    energy = np.abs(coefficients) ** 2
    total = energy.sum()
    if total == 0.0:
        return 0.0
    return float(energy[f.n // 2 + 1:].sum() / total)


def circle_ap_constant(w, p, family=WindowFamily.ALL):
    """[w]_{A_p} over arcs, windows wrapping around θ = 0."""
    _require_positive(w)
    return ap_constant(w.as_weight(), p, family, periodic=True)


def circle_ap_trend(weight, p, ms=(8, 9, 10, 11, 12), thresholds=None):
    """A_p constants of a sampled circle weight under refinement."""
    return divergence_probe(lambda m: CircleGrid.from_function(weight, m),
                            lambda w: circle_ap_constant(w, p).constant, ms, thresholds,
                            label=f"[w]_A{p:g}(T)")


def _decimations(grid, count):
    """grid and up to count - 1 decimations of it, coarsest first."""
    grids = [grid]
    while len(grids) < count and grids[-1].m > 0:
        grids.append(grids[-1].decimate())
    return grids[::-1]


def _paired_levels(f, w, m, count):
    """Circle grids of f and w at count resolutions, sampled at the same angles.

    A CircleGrid argument fixes the angles through its decimations; functions
    are sampled there, or at midpoints with 2^k points, k ending at m.
    """
    given = [g for g in (f, w) if isinstance(g, CircleGrid)]
    if given:
        angles = [(g.m, g.offset) for g in _decimations(given[0], count)]
    else:
        angles = [(k, 0.5) for k in range(m - count + 1, m + 1)]

    def levels(g):
        if isinstance(g, CircleGrid):
            return _decimations(g, count)
        return [CircleGrid.from_function(g, k, offset) for k, offset in angles]

    fs, ws = levels(f), levels(w)
    if [(g.m, g.offset) for g in fs] != [(g.m, g.offset) for g in ws]:
        raise ValueError("f and w must be sampled on the same circle grid.")
    return fs, ws


def weighted_circle_norm(f, w, p0):
    """(mean over samples of |f|^p0 w)^(1/p0), a Riemann sum for the L^p0_w norm."""
    return float(np.mean(np.abs(f.values) ** p0 * w.values) ** (1.0 / p0))


def weighted_hp_membership(f, w, p0, m=constants.HARDY_DEFAULT_M, thresholds=None):
    """Evidence for f in H^p0_w: f·h analytic for the outer h of w, and f in L^p0_w.

    f and w are CircleGrids on the same angles or vectorized functions of θ. A
    function is sampled on the angles of the other argument when that is a
    grid, else at midpoints with 2^m points.
    """
    fs, ws = _paired_levels(f, w, m, constants.TREND_MIN_POINTS)
    norms = classify_trend([g.m for g in fs],
                           [weighted_circle_norm(a, b, p0) for a, b in zip(fs, ws)],
                           thresholds, label=f"||f||_L^{p0:g}_w(T)")
    f_top, w_top = fs[-1], ws[-1]
    outer = outer_from_weight(w_top, p0)
    product = f_top.with_values(f_top.values * outer.boundary.values)
    defect = analytic_defect(product)
    evidence = {"outer": outer, "defect": defect, "norm_trend": norms}
    try:
        inverse = outer_from_weight(w_top.with_values(1.0 / w_top.values), p0)
    except SzegoFailed:
        LOGGER.debug("1/w is outside the Szegő class; no Smirnov check")
    else:
        evidence["smirnov_defect"] = analytic_defect(
            product.with_values(product.values * inverse.boundary.values))
    if defect < constants.HARDY_DEFECT_TOLERANCE and norms.verdict == constants.PLATEAU:
        verdict = constants.CERTIFIED_YES
    elif defect >= constants.HARDY_REJECT_DEFECT or norms.verdict == constants.DIVERGENT:
        verdict = constants.CERTIFIED_NO
    else:
        verdict = constants.UNDECIDED
    LOGGER.info("f in H^%g_w: %s (defect %.3g)", p0, verdict, defect)
    return MembershipReport("circle data", MembershipClass.WEIGHTED_HARDY, verdict, evidence,
                            {"p0": p0, "m": f_top.m})


# CSV


def write_circle_csv(grid, path):
    values = grid.values.astype(complex)
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["j", "theta", "value_re", "value_im"])
        for j, (theta, value) in enumerate(zip(grid.theta, values)):
            writer.writerow([j, repr(float(theta)), repr(float(value.real)),
                             repr(float(value.imag))])


def read_circle_csv(path):
    with open(path, newline="") as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames != ["j", "theta", "value_re", "value_im"]:
            raise ValueError(
                f"{path} is not circle data.\n"
                "Expected the header: j,theta,value_re,value_im"
            )
        rows = list(reader)
    n = len(rows)
    m = int(round(math.log2(n))) if n else -1
    if m < 0 or 2 ** m != n:
        raise ValueError(f"{path} has {n} samples; circle grids need a power of two.")
    values = np.array([complex(float(r["value_re"]), float(r["value_im"])) for r in rows])
    offset = float(rows[0]["theta"]) * n / (2.0 * math.pi)
    return CircleGrid(m, values, round(offset, 12))
