"""
Membership verdicts for the majorant classes, assembled from trends and certificates.

Verdicts are bound to the scales tried: certified-yes means every numeric witness
passed at the configured depths and radii, certified-no-at-scale means a divergence
trend refutes membership there, inconclusive covers the rest.
"""
import logging
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

import constants
from closed_form import ClosedFormFunction, power, product
from errors import NonIntegrableCell, RHFailed
from grid import GridFunction, Interval, integral, sample, symmetric, weak_lp_quasinorm
from majorant import (Recipe, Trace, ainfty_to_a1, certify, global_ap_certificate,
                      local_majorant, weighted_membership_from_majorant)
from maximal import maximal_fast
from trend import classify_trend, divergence_probe, radial_tail_probe, singular_scale_probe
from weights import Weight, ap_trend, factor_product

LOGGER = logging.getLogger(__name__)


class MembershipClass(Enum):
    L1 = "L1"
    M_F = "M_F"
    UNION_LP = "union-Lp"
    M_A1 = "M_A1"
    UNION_WEIGHTED_LP = "union-weighted-Lp"
    M_AP = "M_Ap"
    M_AINFTY = "M_Ainfty"
    UNION_WEAK_LP = "union-weak-Lp"
    UNION_L1_A1 = "union-L1-A1"
    WEIGHTED_HARDY = "weighted-Hp"


_VERDICTS = {
    constants.PLATEAU: constants.CERTIFIED_YES,
    constants.DIVERGENT: constants.CERTIFIED_NO,
    constants.INCONCLUSIVE: constants.UNDECIDED,
}


def to_jsonable(item):
    """Plain JSON data: reports by to_dict, overflow as a string, numpy scalars unwrapped."""
    if isinstance(item, np.generic):
        item = item.item()
    if hasattr(item, "to_dict"):
        return item.to_dict()
    if isinstance(item, (list, tuple)):
        return [to_jsonable(i) for i in item]
    if isinstance(item, dict):
        return {k: to_jsonable(v) for k, v in item.items()}
    if isinstance(item, float) and not math.isfinite(item):
        return "overflow"
    return item


@dataclass(frozen=True, eq=False)
class MembershipReport:
    function: str
    membership_class: MembershipClass
    verdict: str
    evidence: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.verdict not in _VERDICTS.values():
            raise ValueError(f"Unknown verdict '{self.verdict}'.")
        if self.verdict == constants.CERTIFIED_YES and not self.evidence:
            raise ValueError(
                f"A certified-yes verdict for {self.membership_class.value} needs evidence."
            )

    @property
    def certified(self):
        return self.verdict == constants.CERTIFIED_YES

    def to_dict(self):
        return {
            "function": self.function,
            "class": self.membership_class.value,
            "verdict": self.verdict,
            "params": to_jsonable(self.params),
            "evidence": to_jsonable(self.evidence),
        }


@dataclass(frozen=True)
class TrendBundle:
    """Trends read together: one divergence refutes, all plateaus confirm."""
    label: str
    trends: tuple

    @property
    def verdict(self):
        verdicts = [t.verdict for t in self.trends]
        if constants.DIVERGENT in verdicts:
            return constants.DIVERGENT
        if all(v == constants.PLATEAU for v in verdicts):
            return constants.PLATEAU
        return constants.INCONCLUSIVE

    @property
    def last(self):
        return self.trends[0].last

    def to_dict(self):
        return {"label": self.label, "verdict": self.verdict,
                "trends": [t.to_dict() for t in self.trends]}


def _report(name, cls, verdict, evidence, params):
    report = MembershipReport(name, cls, verdict, evidence, params)
    LOGGER.info("%s in %s: %s", name, cls.value, verdict)
    return report


def _ladder_verdict(bundles):
    verdicts = [b.verdict for b in bundles]
    if verdicts and all(v == constants.DIVERGENT for v in verdicts):
        return constants.CERTIFIED_NO
    return constants.UNDECIDED


def describe(f):
    return f.describe() if isinstance(f, ClosedFormFunction) else "grid"


# carriers


def power_cells(f, s, domain, depth):
    """Cell averages of |f|^s: exact for closed forms, coarsened from the finest cells of a grid."""
    if isinstance(f, GridFunction):
        if f.domain != domain:
            raise ValueError(
                f"Grid lives on [{f.domain.left:g}, {f.domain.right:g}], "
                f"not on [{domain.left:g}, {domain.right:g}]."
            )
        return f.power(s).coarsen(depth)
    return sample(power(f, s), domain, depth)


def carrier(f, r, domain, depth):
    """The grid standing for f in M^r classes: (cell averages of |f|^r)^(1/r)."""
    cells = power_cells(f, r, domain, depth)
    return cells if r == 1.0 else cells.power(1.0 / r)


def usable_depths(f, depths=constants.LOCAL_DEPTHS):
    if not isinstance(f, GridFunction):
        return tuple(depths)
    usable = tuple(k for k in depths if k <= f.depth)
    if len(usable) < constants.TREND_MIN_POINTS:
        usable = tuple(range(max(f.depth - constants.TREND_MIN_POINTS, 0), f.depth + 1))
    return usable


def _too_coarse(name, classes, depths, params):
    note = f"grid too coarse: {len(depths)} depths, a trend needs {constants.TREND_MIN_POINTS}"
    LOGGER.warning("%s: %s", name, note)
    return [MembershipReport(name, cls, constants.UNDECIDED, {"note": note}, params)
            for cls in classes]


def global_radii(radius):
    """The radius ladder 4, 8, ..., up to radius for the global trends."""
    top = int(math.floor(math.log2(radius))) if radius > 0 else 0
    radii = tuple(2.0 ** m for m in range(2, top + 1))
    if len(radii) < constants.TREND_MIN_POINTS:
        raise ValueError(
            f"radius {radius:g} leaves {len(radii)} radii; global trends need "
            f"{constants.TREND_MIN_POINTS} (radius >= {2 ** (constants.TREND_MIN_POINTS + 1)})."
        )
    return radii


def global_depth(radius):
    """Depth of [-radius, radius] at the fixed global cell width."""
    return int(round(math.log2(2.0 * radius))) + constants.CELLS_PER_UNIT_LOG2


def global_grid(f, s, radius):
    return power_cells(f, s, symmetric(radius), global_depth(radius))


# trends


def _root(p):
    def norm(g):
        return integral(g) ** (1.0 / p)

    return norm


def _singular_trends(f, p, domain, thresholds):
    trends = []
    for s in f.singularities():
        if not domain.left <= s.x <= domain.right:
            continue
        for side in (-1.0, 1.0):
            distance = domain.right - s.x if side > 0 else s.x - domain.left
            if distance <= 0.0:
                continue
            trends.append(singular_scale_probe(f, s.x, side, p, reach=min(0.5, distance),
                                               thresholds=thresholds))
    return trends


def lp_membership_trend(f, p, domain=None, depths=constants.LOCAL_DEPTHS, thresholds=None):
    """Evidence for f in L^p(domain), or in L^p(R) when domain is None.

    Locally: the exact L^p norm under refinement plus a log-scale probe at every
    singular point. Globally: the same on a window around the singular points
    and a radial tail probe beyond it.
    """
    if domain is None:
        if not isinstance(f, ClosedFormFunction):
            raise TypeError("Global L^p evidence needs a closed-form function.")
        start = max([1.0] + [abs(s.x) + 1.0 for s in f.singularities()])
        inner = lp_membership_trend(f, p, Interval(-start, start), depths, thresholds)
        tail = radial_tail_probe(f, p, start=start, thresholds=thresholds)
        return TrendBundle(f"L^{p:g}(R)", inner.trends + (tail,))
    depths = usable_depths(f, depths)
    grid = divergence_probe(lambda k: power_cells(f, p, domain, k), _root(p), depths, thresholds,
                            label=f"||f||_L^{p:g} under refinement")
    trends = [grid]
    if isinstance(f, ClosedFormFunction):
        trends += _singular_trends(f, p, domain, thresholds)
    return TrendBundle(f"L^{p:g}([{domain.left:g}, {domain.right:g}])", tuple(trends))


def maximal_point_trend(family, point, params, thresholds=None, label="Mf(x)"):
    """M g at the cell holding `point`, along a family of grids."""
    def value(g):
        return float(maximal_fast(g).values[g.cell_of(point)])

    return divergence_probe(family, value, params, thresholds, label=label)


def global_maximal_trend(f, s=1.0, point=constants.GLOBAL_PROBE_POINT,
                         radii=constants.GLOBAL_RADII, thresholds=None):
    return maximal_point_trend(lambda R: global_grid(f, s, R), point, radii, thresholds,
                               label=f"M(|f|^{s:g})({point:g}) on [-R, R]")


def radial_average(f, s, radius):
    """Average of |f|^s over [-radius, radius]."""
    return float(sample(power(f, s), symmetric(radius), 0).values[0])


def radial_probe(f, s=1.0, radii=constants.GLOBAL_RADII, thresholds=None):
    """Running sup of avg_{[-r, r]} |f|^s, a lower bound for M(|f|^s) on [-r, r]."""
    best, values = 0.0, []
    for r in radii:
        try:
            best = max(best, radial_average(f, s, r))
        except NonIntegrableCell:
            best = math.inf
        values.append(best)
    return classify_trend(radii, values, thresholds, label=f"sup avg_[-r,r] |f|^{s:g}")


def weak_membership_trend(f, p, radii=constants.GLOBAL_RADII, depth_radius=None, thresholds=None):
    """Weak-L^p quasinorm over growing [-R, R] and under refinement of [-R0, R0]."""
    def quasinorm(g):
        return weak_lp_quasinorm(g, p, resolved_cells=constants.WEAK_RESOLVED_CELLS)

    scale = divergence_probe(lambda R: global_grid(f, 1.0, R), quasinorm, radii, thresholds,
                             label=f"||f||_L^({p:g},inf) on [-R, R]", log_growth=True)
    radius = depth_radius or radii[0]
    base = global_depth(radius)
    depths = tuple(base + i for i in range(len(constants.LOCAL_DEPTHS)))
    fine = divergence_probe(lambda k: power_cells(f, 1.0, symmetric(radius), k), quasinorm,
                            depths, thresholds, label=f"||f||_L^({p:g},inf) under refinement",
                            log_growth=True)
    return TrendBundle(f"L^({p:g},inf)(R)", (scale, fine))


def integrable_weight_trend(w, radii=constants.GLOBAL_RADII, thresholds=None):
    """int_{-R}^{R} w along the radius ladder; A_infty weights never plateau."""
    return divergence_probe(lambda R: global_grid(w, 1.0, R), "integral", radii, thresholds,
                            label="int_[-R,R] w")


def global_ap_trend(w, p, exponents=constants.GLOBAL_SCALE_EXPONENTS,
                    depth=constants.GLOBAL_DEPTH, thresholds=None):
    """[w]_{A_p} on [-2^m, 2^m] at a fixed depth."""
    return ap_trend(lambda m: Weight.of(sample(w, symmetric(2.0 ** m), depth)), exponents, p,
                    thresholds=thresholds)


# local classification


def _integrability_reports(f, domain, depths, thresholds, point, name, params):
    l1 = lp_membership_trend(f, 1.0, domain, depths, thresholds)
    yield _report(name, MembershipClass.L1, _VERDICTS[l1.verdict],
                  {"trend": l1, "integral": l1.last}, params)

    point = 0.5 * (domain.left + domain.right) if point is None else point
    mf = maximal_point_trend(lambda k: power_cells(f, 1.0, domain, k), point, depths, thresholds,
                             label=f"Mf({point:g}) under refinement")
    # M_Q f >= avg_Q |f| everywhere, so on a bounded Q finiteness a.e. is integrability
    source = l1.verdict if l1.verdict != constants.INCONCLUSIVE else mf.verdict
    yield _report(name, MembershipClass.M_F, _VERDICTS[source],
                  {"integrable": l1, "maximal_trend": mf}, params)


def _majorant_chain(f, domain, r, p0, ladder, depths, thresholds, name, params):
    """L^p for some p > r, an A_1 majorant of |f|^r, and the weighted witness."""
    tried = {}
    chosen = None
    for q in ladder:
        p = r * q
        bundle = lp_membership_trend(f, p, domain, depths, thresholds)
        tried[f"p={p:g}"] = bundle
        if bundle.verdict == constants.PLATEAU:
            chosen = p, bundle
            break
    params = {**params, "r": r, "p0": p0, "ladder": [r * q for q in ladder]}
    classes = (MembershipClass.UNION_LP, MembershipClass.M_A1, MembershipClass.UNION_WEIGHTED_LP)
    if chosen is None:
        # no L^p evidence: no majorant is built
        verdict = _ladder_verdict(tried.values())
        return [_report(name, cls, verdict, tried, params) for cls in classes]

    p, bundle = chosen
    params = {**params, "p": p}
    certificates = {}

    def certificate(k):
        certificates[k] = local_majorant(carrier(f, r, domain, k), r, p, trend=bundle,
                                         power_grid=power_cells(f, p, domain, k), target=name)
        return certificates[k]

    a1 = divergence_probe(certificate, lambda c: c.a1_report.constant, depths, thresholds,
                          label="[w]_A1 of the majorant under refinement")
    cert = certificates[depths[-1]]
    witness = weighted_membership_from_majorant(carrier(f, r, domain, depths[-1]), cert, p0)
    majorized = a1.verdict == constants.PLATEAU and cert.valid
    return [
        _report(name, MembershipClass.UNION_LP, constants.CERTIFIED_YES,
                {"p": p, "trend": bundle}, params),
        _report(name, MembershipClass.M_A1,
                constants.CERTIFIED_YES if majorized else constants.UNDECIDED,
                {"certificate": cert, "a1_trend": a1}, params),
        _report(name, MembershipClass.UNION_WEIGHTED_LP,
                constants.CERTIFIED_YES if majorized and witness.bound_ok else constants.UNDECIDED,
                {"witness": witness, "a1_trend": a1}, params),
    ]


_LOCAL_CLASSES = (MembershipClass.L1, MembershipClass.M_F, MembershipClass.UNION_LP,
                  MembershipClass.M_A1, MembershipClass.UNION_WEIGHTED_LP)


def classify_local(f, domain=None, p0=2.0, r=1.0, ladder=constants.LP_LADDER,
                   depths=constants.LOCAL_DEPTHS, thresholds=None, point=None):
    """L^1, M_F, union of L^p (p > r), M^r_A1 and the weighted union on a bounded interval.

    The last three are one equivalence: on the first plateau p of the ladder the
    L^p trend, the majorant M(|f|^p)^(r/p) and the weighted witness are all
    produced; when every ladder point diverges all three are refuted at scale.
    """
    if isinstance(f, GridFunction):
        domain = domain or f.domain
    elif domain is None:
        raise ValueError("classify_local needs a domain for a closed-form function.")
    if not p0 > r:
        raise ValueError(f"The weighted witness needs p0 > r, got p0 = {p0}, r = {r}.")
    depths = usable_depths(f, depths)
    name = describe(f)
    params = {"domain": domain.to_dict(), "depths": list(depths)}
    if len(depths) < constants.TREND_MIN_POINTS:
        return _too_coarse(name, _LOCAL_CLASSES, depths, params)
    reports = list(_integrability_reports(f, domain, depths, thresholds, point, name, params))
    reports += _majorant_chain(f, domain, r, p0, ladder, depths, thresholds, name, params)
    return reports


def classify_local_ainfty(f, domain, r_ladder=constants.POWER_R_LADDER, p0=2.0,
                          ladder=constants.LP_LADDER, depths=constants.LOCAL_DEPTHS,
                          thresholds=None):
    """Union over r > 0 of M^r_A1: the first r on the ladder with a majorant."""
    name = describe(f)
    depths = usable_depths(f, depths)
    params = {"domain": domain.to_dict(), "depths": list(depths), "r_ladder": list(r_ladder)}
    if len(depths) < constants.TREND_MIN_POINTS:
        return _too_coarse(name, (MembershipClass.M_AINFTY,), depths, params)[0]
    tried = {}
    for r in r_ladder:
        chain = _majorant_chain(f, domain, r, p0, ladder, depths, thresholds, name, params)
        majorant = next(rep for rep in chain if rep.membership_class is MembershipClass.M_A1)
        tried[f"r={r:g}"] = majorant.verdict
        if majorant.certified:
            return _report(name, MembershipClass.M_AINFTY, constants.CERTIFIED_YES,
                           {"r": r, "majorant": majorant}, params)
    no = all(v == constants.CERTIFIED_NO for v in tried.values())
    return _report(name, MembershipClass.M_AINFTY,
                   constants.CERTIFIED_NO if no else constants.UNDECIDED, tried, params)


def ap_majorant_report(f, w, domain, p, depths=constants.LOCAL_DEPTHS, thresholds=None):
    """|f| <= w with w in A_p gives f in M_A1: M w is an A_1 majorant of w."""
    name = describe(f)
    depths = usable_depths(f, depths)
    params = {"domain": domain.to_dict(), "depths": list(depths), "p": p}
    if len(depths) < constants.TREND_MIN_POINTS:
        return _too_coarse(name, (MembershipClass.M_AP,), depths, params)[0]
    evidence = ap_trend(lambda k: Weight.of(power_cells(w, 1.0, domain, k)), depths, p,
                        thresholds=thresholds)
    if evidence.verdict != constants.PLATEAU:
        return _report(name, MembershipClass.M_AP, constants.UNDECIDED,
                       {"ap_trend": evidence}, params)
    try:
        lifted = ainfty_to_a1(Weight.of(power_cells(w, 1.0, domain, depths[-1])), evidence,
                              target=describe(w))
    except RHFailed as e:
        LOGGER.info("no reverse Hölder exponent: %s", str(e).splitlines()[0])
        return _report(name, MembershipClass.M_AP, constants.UNDECIDED,
                       {"ap_trend": evidence}, params)
    dominated = power_cells(f, 1.0, domain, depths[-1]).abs()
    cert = certify(dominated, lifted.w, 1.0, Trace(Recipe.MAXIMAL, dict(lifted.trace.params)),
                   name, lifted.checks)
    verdict = constants.CERTIFIED_YES if cert.valid else constants.UNDECIDED
    return _report(name, MembershipClass.M_AP, verdict,
                   {"ap_trend": evidence, "certificate": cert}, params)


# global classification


def _global_certificate(f, s, radius):
    """|f| <= M(|f|^s)^(1/s) on [-radius, radius]."""
    domain, depth = symmetric(radius), global_depth(radius)
    return local_majorant(power_cells(f, 1.0, domain, depth), 1.0, s,
                          power_grid=power_cells(f, s, domain, depth), target=describe(f))


def global_a1_test(f, s_ladder=constants.GLOBAL_S_LADDER, radii=constants.GLOBAL_RADII,
                   thresholds=None, certificate_radius=constants.GLOBAL_CERTIFICATE_RADIUS):
    """f is in M_A1(R) iff |f|^s is in M_F(R) for some s > 1.

    For each s, M(|f|^s) is probed at a fixed point over growing [-R, R] and by
    the radial averages; the first s passing both gets the majorant
    M(|f|^s)^(1/s) on [-certificate_radius, certificate_radius].
    """
    name = describe(f)
    params = {"s_ladder": list(s_ladder), "radii": list(radii),
              "certificate_radius": certificate_radius}
    tried = {}
    for s in s_ladder:
        bundle = TrendBundle(f"|f|^{s:g} in M_F(R)", (global_maximal_trend(f, s, radii=radii,
                                                                         thresholds=thresholds),
                                                   radial_probe(f, s, radii, thresholds)))
        tried[f"s={s:g}"] = bundle
        if bundle.verdict == constants.PLATEAU:
            cert = _global_certificate(f, s, certificate_radius)
            return _report(name, MembershipClass.M_A1, constants.CERTIFIED_YES,
                           {"s": s, "trends": bundle, "certificate": cert}, params)
    return _report(name, MembershipClass.M_A1, _ladder_verdict(tried.values()), tried, params)


def _first_plateau(name, cls, bundles, params, key):
    tried = {}
    for value, bundle in bundles:
        tried[f"{key}={value:g}"] = bundle
        if bundle.verdict == constants.PLATEAU:
            return _report(name, cls, constants.CERTIFIED_YES, {key: value, "trend": bundle}, params)
    return _report(name, cls, _ladder_verdict(tried.values()), tried, params)


def classify_global(f, lp_ladder=constants.LP_LADDER, weak_ladder=constants.WEAK_P_LADDER,
                    s_ladder=constants.GLOBAL_S_LADDER, radii=constants.GLOBAL_RADII,
                    thresholds=None):
    """M_F(R), M_A1(R), union of L^p(R) and union of weak L^p(R) for a closed form."""
    name = describe(f)
    params = {"radii": list(radii)}
    mf = TrendBundle("f in M_F(R)", (global_maximal_trend(f, radii=radii, thresholds=thresholds),
                                    radial_probe(f, 1.0, radii, thresholds)))
    reports = [
        _report(name, MembershipClass.M_F, _VERDICTS[mf.verdict], {"trends": mf}, params),
        global_a1_test(f, s_ladder, radii, thresholds),
    ]
    lp = ((p, lp_membership_trend(f, p, thresholds=thresholds)) for p in lp_ladder)
    reports.append(_first_plateau(name, MembershipClass.UNION_LP, lp,
                                  {**params, "ladder": list(lp_ladder)}, "p"))
    weak = ((p, weak_membership_trend(f, p, radii, thresholds=thresholds)) for p in weak_ladder)
    reports.append(_first_plateau(name, MembershipClass.UNION_WEAK_LP, weak,
                                  {**params, "ladder": list(weak_ladder)}, "p"))
    return reports


def global_weighted_report(f, w, u, p, exponents=constants.GLOBAL_SCALE_EXPONENTS,
                           depth=constants.GLOBAL_DEPTH,
                           radius=constants.GLOBAL_CERTIFICATE_RADIUS,
                           pairing_depths=constants.QUADRATURE_DEPTHS, thresholds=None):
    """f in L^p_v with v = u w^(1-p) in A_p, from |f| <= w, w and u in A_1, int |f| u < inf."""
    name = describe(f)
    params = {"p": p, "exponents": list(exponents), "depth": depth, "radius": radius}

    def weight(g, m):
        return Weight.of(sample(g, symmetric(2.0 ** m), depth))

    trends = {
        "w_a1": ap_trend(lambda m: weight(w, m), exponents, 1.0, thresholds=thresholds),
        "u_a1": ap_trend(lambda m: weight(u, m), exponents, 1.0, thresholds=thresholds),
        "v_ap": ap_trend(lambda m: factor_product(weight(u, m), weight(w, m), p), exponents, p,
                         thresholds=thresholds),
        "pairing": lp_membership_trend(product(f, u), 1.0, depths=pairing_depths,
                                       thresholds=thresholds),
    }
    domain, grid_depth = symmetric(radius), global_depth(radius)
    f_grid = sample(f, domain, grid_depth)
    cert = certify(f_grid.abs(), sample(w, domain, grid_depth), 1.0,
                   Trace(Recipe.EXTERNAL, {"weight": describe(w)}), name)
    evidence = {**trends, "certificate": cert}
    if cert.dominates:
        evidence["global_ap"] = global_ap_certificate(f_grid, cert,
                                                      Weight.of(sample(u, domain, grid_depth)), p)
    passed = (all(t.verdict == constants.PLATEAU for t in trends.values())
              and cert.valid and evidence.get("global_ap") is not None
              and evidence["global_ap"].cellwise_ok)
    return _report(name, MembershipClass.UNION_WEIGHTED_LP,
                   constants.CERTIFIED_YES if passed else constants.UNDECIDED, evidence, params)
