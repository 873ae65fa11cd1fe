"""
A_1 majorants with machine-checkable evidence.

A MajorantCertificate stores the majorant w, the grid it dominates (cell values
of |f|^r) and the A_1 report of w, so it can be re-verified from stored data.
"""
import logging
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

import constants
from errors import (BTooSmall, ChainBroken, DeltaOutOfRange, NoExponentFound, NotInLp,
                    RHFailed, TailNotSmall)
from grid import integral, require_same_grid, weak_lp_banach_norm, weighted_lp_norm
from maximal import WindowFamily, maximal_fast, op_norm_estimate, weak_norm_estimate
from weights import (Weight, ap_constant, dual_weight, factor_product, power_weight,
                     reverse_holder_exponent, self_improve_exponent)

LOGGER = logging.getLogger(__name__)


class Recipe(Enum):
    COIFMAN_ROCHBERG = "coifman-rochberg"
    RUBIO_DE_FRANCIA = "rubio-de-francia"
    TRUNCATION = "truncation"
    MAXIMAL = "maximal"
    PRODUCT = "product"
    POWER = "power"
    EXTERNAL = "external"


@dataclass(frozen=True)
class Trace:
    recipe: Recipe
    params: dict = field(default_factory=dict)

    def to_dict(self):
        return {"recipe": self.recipe.value, **self.params}


def _relative_gap(a, b):
    return abs(a - b) <= constants.CERTIFICATE_TOLERANCE * max(abs(a), abs(b), 1.0)


def _margin(w, dominated):
    return float(np.min(w.values - dominated.values))


@dataclass(frozen=True, eq=False)
class MajorantCertificate:
    target: str
    r: float
    w: Weight
    dominated: object
    domination_margin: float
    a1_report: object
    trace: Trace
    checks: dict = field(default_factory=dict)

    @property
    def dominates(self):
        """|f|^r <= w on every cell, up to rounding relative to the largest cell."""
        scale = float(np.max(self.w.values))
        return self.domination_margin >= -constants.CERTIFICATE_TOLERANCE * scale

    @property
    def valid(self):
        return self.dominates and self.a1_report.p == 1.0 and all(self.checks.values())

    def verify(self):
        """Recompute the margin and the A_1 constant from stored data."""
        margin = _margin(self.w, self.dominated)
        a1 = ap_constant(self.w, 1.0, self.a1_report.family)
        return (_relative_gap(margin, self.domination_margin)
                and _relative_gap(a1.constant, self.a1_report.constant)
                and a1.worst_window == self.a1_report.worst_window)

    def to_dict(self):
        return {
            "target": self.target,
            "r": self.r,
            "domain": self.w.domain.to_dict(),
            "depth": self.w.depth,
            "domination_margin": self.domination_margin,
            "a1": self.a1_report.to_dict(),
            "trace": self.trace.to_dict(),
            "checks": dict(self.checks),
        }


def certify(dominated, w, r, trace, target="f", checks=None, family=WindowFamily.ALL):
    """Wrap a candidate majorant w of the grid `dominated` (= |f|^r) into a certificate."""
    w = Weight.of(w)
    require_same_grid(dominated, w)
    cert = MajorantCertificate(
        target=target,
        r=float(r),
        w=w,
        dominated=dominated,
        domination_margin=_margin(w, dominated),
        a1_report=ap_constant(w, 1.0, family),
        trace=trace,
        checks=dict(checks or {}),
    )
    LOGGER.info("%s majorant of |%s|^%g: margin %.3g, [w]_A1 = %.6g",
                trace.recipe.value, target, r, cert.domination_margin, cert.a1_report.constant)
    return cert


# Coifman-Rochberg


def _unit(f):
    return Weight(f.domain, f.depth, np.ones(f.n_cells))


def coifman_rochberg(f, delta, target="f"):
    """(Mf)^delta, an A_1 weight dominating |f|^delta for 0 < delta < 1."""
    if not 0.0 < delta < 1.0:
        raise DeltaOutOfRange(
            f"Coifman-Rochberg needs 0 < delta < 1, got {delta}.\n"
            "delta = 1 gives Mf itself, which need not be an A_1 weight."
        )
    m = maximal_fast(f)
    trace = Trace(Recipe.COIFMAN_ROCHBERG, {"delta": float(delta)})
    if not np.any(m.values > 0.0):
        # the zero function is majorized by w = 1
        return certify(f.abs(), _unit(f), delta, trace, target)
    return certify(f.power(delta), m.power(delta), delta, trace, target)


def local_majorant(f, r, p, trend=None, power_grid=None, target="f"):
    """|f|^r <= M(|f|^p)^(r/p), an A_1 weight when f is in L^p with p > r.

    power_grid holds cell averages of |f|^p when they differ from |f_i|^p, as
    for grids carrying cell averages of |f|^r.
    """
    if not p > r > 0.0:
        raise ValueError(f"local_majorant needs p > r > 0, got r = {r}, p = {p}.")
    if trend is not None and trend.verdict != constants.PLATEAU:
        raise NotInLp(
            f"The L^{p:g} norm of {target} does not plateau under refinement "
            f"(verdict {trend.verdict}).\n"
            "No Coifman-Rochberg majorant is built without L^p evidence.",
            trend,
        )
    g = power_grid if power_grid is not None else f.power(p)
    require_same_grid(f, g)
    m = maximal_fast(g)
    trace = Trace(Recipe.COIFMAN_ROCHBERG, {"delta": r / p, "p": float(p)})
    if not np.any(m.values > 0.0):
        return certify(f.power(r), _unit(f), r, trace, target)
    return certify(f.power(r), m.power(r / p), r, trace, target)


def truncation_certificate(f, w, level, target="f"):
    """max(w, level) as a majorant of |f| for an A_infty weight w."""
    raised = Weight.of(w.with_values(np.maximum(w.values, level)))
    return certify(f.abs(), raised, 1.0, Trace(Recipe.TRUNCATION, {"level": float(level)}), target)


# Rubio de Francia


def _space_norm(space, w, p):
    if space == "weak":
        return lambda g: weak_lp_banach_norm(g, p)
    return lambda g: weighted_lp_norm(g, w, p)


def _estimate(f, space, w, p, trials, seed):
    if space == "weak":
        return weak_norm_estimate(f.domain, f.depth, p, trials, seed)
    return op_norm_estimate(w, p, trials, seed)


def _series(g, B, norm, tol, k_min, k_max, first):
    """Partial sums sum_{k=first}^K M^k g / (2B)^k, K grown until the tail is small.

    Returns (sum, K, largest observed norm ratio, tail bound).
    """
    current = g
    total = g.values.copy() if first == 0 else np.zeros(g.n_cells)
    observed = 0.0
    k = 0
    while True:
        following = maximal_fast(current)
        base = norm(current)
        if base > 0.0:
            ratio = norm(following) / base
            observed = max(observed, ratio)
            if ratio > B:
                raise BTooSmall(
                    f"||M^{k + 1} g|| / ||M^{k} g|| = {ratio:.6g} exceeds B = {B:.6g}.\n"
                    "Re-estimate the operator norm with more trials or pass a larger B.",
                    observed=ratio,
                )
        factor = (2.0 * B) ** -(k + 1)
        tail = factor * float(np.max(following.values))
        floor = float(np.min(total))
        if k >= k_min and floor > 0.0 and tail <= tol * floor:
            return total, k, observed, tail
        total = total + factor * following.values
        k += 1
        current = following
        if k > k_max:
            raise TailNotSmall(
                f"Series tail still above {tol:g} * min(R_K) after {k_max} terms.\n"
                "Verdict is inconclusive for this input.",
                terms=k,
            )


def rubio_de_francia(f, p, w=None, space="lp", B=None, K=1,
                     tol=constants.RDF_TOLERANCE, k_max=constants.RDF_MAX_TERMS,
                     trials=constants.NORM_TRIALS, seed=constants.DEFAULT_SEED, target="f"):
    """R_K f = sum_{k<=K} M^k|f| / (2B)^k, an A_1 majorant of f with ||R_K f|| <= 2||f||.

    space is "lp" (the weighted L^p_w, w = 1 by default) or "weak" (L^{p,inf}
    under its normable Banach norm).
    """
    if space not in ("lp", "weak"):
        raise ValueError(f"space must be 'lp' or 'weak', got '{space}'.")
    g = f.abs()
    if not np.any(g.values > 0.0):
        raise ValueError("Rubio de Francia iteration needs f not identically zero.")
    if w is None:
        w = _unit(f)
    require_same_grid(f, w)
    if B is None:
        B = _estimate(f, space, w, p, trials, seed).bound
    norm = _space_norm(space, w, p)
    total, terms, observed, tail = _series(g, B, norm, tol, max(K, 1), k_max, first=0)
    R = Weight(f.domain, f.depth, total)

    checks = {
        "dominates": bool(np.all(g.values <= R.values)),
        "norm_bound": norm(R) <= 2.0 * norm(g) * (1.0 + tol),
        "a1_bound": bool(np.all(maximal_fast(R).values
                                <= 2.0 * B * (1.0 + tol) * R.values
                                * (1.0 + constants.CERTIFICATE_TOLERANCE))),
    }
    if not all(checks.values()):
        failed = ", ".join(name for name, ok in checks.items() if not ok)
        raise ChainBroken(f"Rubio de Francia contract(s) failed: {failed}.")
    trace = Trace(Recipe.RUBIO_DE_FRANCIA, {
        "B": float(B), "K": terms, "tol": float(tol), "space": space, "p": float(p),
        "observed_ratio": observed, "tail": tail,
    })
    return certify(g, R, 1.0, trace, target, checks)


@dataclass(frozen=True, eq=False)
class AssociateWeight:
    weight: Weight
    B: float
    terms: int
    norm_ratio: float
    a1_report: object

    def to_dict(self):
        return {"B": self.B, "K": self.terms, "norm_ratio": self.norm_ratio,
                "a1": self.a1_report.to_dict()}


def associate_a1_weight(g, p, w=None, B=None, K=1, tol=constants.RDF_TOLERANCE,
                        k_max=constants.RDF_MAX_TERMS, trials=constants.NORM_TRIALS,
                        seed=constants.DEFAULT_SEED):
    """sum_{k>=1} M^k g / (2B)^k: an A_1 weight whose L^p_w norm is at most ||g||."""
    g = g.abs()
    if not np.any(g.values > 0.0):
        raise ValueError("associate_a1_weight needs g not identically zero.")
    if w is None:
        w = _unit(g)
    if B is None:
        B = op_norm_estimate(w, p, trials, seed).bound
    norm = _space_norm("lp", w, p)
    total, terms, _, _ = _series(g, B, norm, tol, max(K, 1), k_max, first=1)
    weight = Weight(g.domain, g.depth, total)
    return AssociateWeight(weight, float(B), terms, norm(weight) / norm(g),
                           ap_constant(weight, 1.0))


# weighted witnesses


@dataclass(frozen=True, eq=False)
class WeightedWitness:
    sigma: Weight
    q0: float
    p0: float
    weighted_integral: float
    majorant_integral: float
    bound_ok: bool
    ap_report: object

    def to_dict(self):
        return {
            "q0": self.q0,
            "p0": self.p0,
            "weighted_integral": self.weighted_integral,
            "majorant_integral": self.majorant_integral,
            "bound_ok": self.bound_ok,
            "ap": self.ap_report.to_dict(),
        }


def weighted_membership_from_majorant(f, cert, p0):
    """sigma = w^(1-q0) with q0 = p0/r, and int |f|^p0 sigma <= int w."""
    q0 = p0 / cert.r
    if not q0 > 1.0:
        raise ValueError(f"Need p0 > r, got p0 = {p0}, r = {cert.r}.")
    sigma = Weight.of(cert.w.power(1.0 - q0))
    lhs = weighted_lp_norm(f, sigma, p0) ** p0
    rhs = integral(cert.w)
    return WeightedWitness(sigma, q0, float(p0), lhs, rhs,
                           lhs <= rhs * (1.0 + constants.WEIGHTED_BOUND_SLACK),
                           ap_constant(sigma, q0))


@dataclass(frozen=True, eq=False)
class GlobalApCertificate:
    v: Weight
    p: float
    ap_report: object
    u_report: object
    weighted_integral: float
    unweighted_integral: float
    cellwise_ok: bool

    def to_dict(self):
        return {
            "p": self.p,
            "ap": self.ap_report.to_dict(),
            "u_a1": self.u_report.to_dict(),
            "weighted_integral": self.weighted_integral,
            "u_integral": self.unweighted_integral,
            "cellwise_ok": self.cellwise_ok,
        }


def global_ap_certificate(f, cert, u, p):
    """v = u w^(1-p) in A_p, with |f|^p w^(1-p) u <= |f| u on every cell."""
    if cert.r != 1.0:
        raise ValueError(f"global_ap_certificate needs an r = 1 majorant, got r = {cert.r}.")
    require_same_grid(f, u)
    v = factor_product(u, cert.w, p)
    magnitude = np.abs(f.values)
    with np.errstate(over="ignore"):
        lhs = magnitude ** p * cert.w.values ** (1.0 - p) * u.values
    rhs = magnitude * u.values
    ok = bool(np.all(lhs <= rhs * (1.0 + constants.SANDWICH_TOLERANCE)))
    width = f.cell_width
    return GlobalApCertificate(v, float(p), ap_constant(v, p), ap_constant(u, 1.0),
                               float(np.sum(lhs) * width), float(np.sum(rhs) * width), ok)


# transfers between classes


def ainfty_to_a1(w, ap_evidence=None, family=WindowFamily.ALL, target="w"):
    """M w as an A_1 majorant of an A_infty weight w."""
    w = Weight.of(w)
    if ap_evidence is not None and ap_evidence.verdict != constants.PLATEAU:
        raise RHFailed(
            f"A_p constants of {target} do not plateau (verdict {ap_evidence.verdict}).\n"
            "Reverse Hölder is only sought for weights with A_p evidence."
        )
    try:
        rh = reverse_holder_exponent(w, family)
    except NoExponentFound as e:
        raise RHFailed(str(e))
    s = rh.s
    m = maximal_fast(w)
    upper = maximal_fast(w.power(s)).power(1.0 / s)
    slack = 1.0 + constants.SANDWICH_TOLERANCE
    checks = {
        "rh_upper": bool(np.all(upper.values <= 2.0 * m.values * slack)),
        "rh_lower": bool(np.all(m.values <= upper.values * slack)),
    }
    trace = Trace(Recipe.MAXIMAL, {"s": s, "rh_constant": rh.rh_constant})
    return certify(w, m, 1.0, trace, target, checks)


def majorant_maximal_transfer(f, cert):
    """(Mf)^r <= M(|f|^r) <= M w <= [w]_A1 w, checked cell by cell."""
    r = cert.r
    if r < 1.0:
        raise ValueError(f"The maximal transfer needs r >= 1, got {r}.")
    slack = 1.0 + constants.CERTIFICATE_TOLERANCE
    mf_r = maximal_fast(f).power(r)
    m_fr = maximal_fast(f.power(r))
    m_w = maximal_fast(cert.w)
    a1 = cert.a1_report.constant
    links = {
        "jensen": bool(np.all(mf_r.values <= m_fr.values * slack)),
        "monotone": bool(np.all(m_fr.values <= m_w.values * slack)),
        "a1": bool(np.all(m_w.values <= a1 * cert.w.values * slack)),
    }
    broken = [name for name, ok in links.items() if not ok]
    if broken:
        raise ChainBroken(
            f"Maximal transfer link(s) {', '.join(broken)} fail beyond rounding.\n"
            "This points at an inconsistent certificate, not at the input function."
        )
    trace = Trace(Recipe.PRODUCT, {"factor": a1})
    return certify(mf_r, cert.w.scale(a1), r, trace, f"M{cert.target}", links)


def raise_certificate_power(cert, family=WindowFamily.ALL):
    """|f|^(rt) <= w^t with w^t still in A_1 for the self-improvement exponent t."""
    t = self_improve_exponent(cert.w, 1.0, family)
    raised = power_weight(cert.w, t)
    dominated = cert.dominated.with_values(cert.dominated.values ** t)
    return certify(dominated, raised, cert.r * t, Trace(Recipe.POWER, {"t": t}), cert.target)


def ap_view(cert, p):
    """Read an A_1 certificate as an A_p certificate; [w]_Ap <= [w]_A1."""
    report = ap_constant(cert.w, p, cert.a1_report.family)
    if report.constant > cert.a1_report.constant * (1.0 + constants.CERTIFICATE_TOLERANCE):
        raise ChainBroken(
            f"[w]_A{p:g} = {report.constant:.6g} exceeds [w]_A1 = {cert.a1_report.constant:.6g}."
        )
    return report


@dataclass(frozen=True)
class HolderWitness:
    p: float
    lhs: float
    rhs: float
    exponent: float = None

    @property
    def ok(self):
        return self.lhs <= self.rhs * (1.0 + constants.WEIGHTED_BOUND_SLACK)

    def to_dict(self):
        data = {"p": self.p, "lhs": self.lhs, "rhs": self.rhs, "ok": self.ok}
        if self.exponent is not None:
            data["rh_exponent"] = self.exponent
        return data


def lp_exponent_from_weighted(f, w, p0, r=1.0, family=WindowFamily.ALL):
    """f in L^p0_w with w in A_{p0/r} gives f in L^p for p = rq > r.

    With q0 = p0/r, sigma = w^(1-q0') and s its reverse Hölder exponent,
    1/q = 1/q0 + 1/(s q0'); Hölder gives
    int |f|^p <= (int |f|^p0 w)^(q/q0) * (int sigma^s)^(1-q/q0).
    """
    q0 = p0 / r
    if not q0 > 1.0:
        raise ValueError(f"Need p0 > r, got p0 = {p0}, r = {r}.")
    require_same_grid(f, w)
    sigma = dual_weight(w, q0)
    s = reverse_holder_exponent(sigma, family).s
    q_conj = q0 / (q0 - 1.0)
    q = 1.0 / (1.0 / q0 + 1.0 / (s * q_conj))
    p = r * q
    width = f.cell_width
    magnitude = np.abs(f.values)
    lhs = float(np.sum(magnitude ** p) * width)
    weighted = float(np.sum(magnitude ** p0 * w.values) * width)
    sigma_s = float(np.sum(sigma.values ** s) * width)
    rhs = weighted ** (q / q0) * sigma_s ** (1.0 - q / q0)
    return HolderWitness(float(p), lhs, rhs, exponent=s)


def lp_from_ainfty_weighted(f, w, p0, q):
    """f in L^p0_w with w in A_q gives f in L^(p0/q):
    int |f|^(p0/q) <= (int |f|^p0 w)^(1/q) (int w^(1-q'))^(1/q')."""
    if not q > 1.0:
        raise ValueError(f"Need q > 1, got {q}.")
    require_same_grid(f, w)
    q_conj = q / (q - 1.0)
    width = f.cell_width
    magnitude = np.abs(f.values)
    lhs = float(np.sum(magnitude ** (p0 / q)) * width)
    weighted = float(np.sum(magnitude ** p0 * w.values) * width)
    dual = float(np.sum(w.values ** (1.0 - q_conj)) * width)
    return HolderWitness(float(p0 / q), lhs, weighted ** (1.0 / q) * dual ** (1.0 / q_conj))


@dataclass(frozen=True, eq=False)
class CrossTransfer:
    p: float
    q: float
    majorant: MajorantCertificate
    dual: MajorantCertificate
    pairing: float
    pairing_bound: float
    certificate: GlobalApCertificate

    @property
    def ok(self):
        return (self.majorant.valid and self.dual.valid and self.certificate.cellwise_ok
                and self.pairing <= self.pairing_bound * (1.0 + constants.WEIGHTED_BOUND_SLACK))

    def to_dict(self):
        return {
            "p": self.p,
            "q": self.q,
            "majorant": self.majorant.to_dict(),
            "dual": self.dual.to_dict(),
            "pairing": self.pairing,
            "pairing_bound": self.pairing_bound,
            "certificate": self.certificate.to_dict(),
            "ok": self.ok,
        }


def cross_exponent_transfer(f, p, w, q, trials=constants.NORM_TRIALS,
                            seed=constants.DEFAULT_SEED, target="f"):
    """From f in L^p_w, w in A_p to f in L^q_v with v = u W^(1-q) in A_q.

    W is the Rubio de Francia majorant of f in L^p_w; u = R g for the extremal
    g in L^{p'}_sigma of norm one, so int |f| u <= 2 ||f||_{L^p_w}.
    """
    w = Weight.of(w)
    majorant = rubio_de_francia(f, p, w, trials=trials, seed=seed, target=target)
    sigma = dual_weight(w, p)
    p_conj = p / (p - 1.0)
    norm_f = weighted_lp_norm(f, w, p)
    g = f.with_values(np.abs(f.values) ** (p - 1.0) * w.values / norm_f ** (p - 1.0))
    dual = rubio_de_francia(g, p_conj, sigma, trials=trials, seed=seed, target="g")
    pairing = float(np.sum(np.abs(f.values) * dual.w.values) * f.cell_width)
    bound = 2.0 * norm_f * weighted_lp_norm(g, sigma, p_conj)
    return CrossTransfer(float(p), float(q), majorant, dual, pairing, bound,
                         global_ap_certificate(f, majorant, dual.w, q))
