"""End-to-end evaluation of the inequalities, sharpness probes and equivalence checks."""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
from dataclasses import asdict, dataclass, field

from .criterion import (
    BoundsResult,
    _jsonable,
    constant_bounds,
    criterion_from_weight,
    multinomial_constant_bounds,
)
from .errors import DivergenceError, DomainError
from .group import HomogeneousGroup, polar_integral
from .operators import (
    InequalityParams,
    beta_reduce,
    dual_weight_transform,
    matched_weight,
    transformed_weight,
    weight_profile,
)
from .profiles import (
    BallPower,
    PiecewisePower,
    PowerLaw,
    RadialProfile,
    constant,
    cutoff_power_tail,
    dual_mean_profile,
    mean_profile,
    power,
    product,
)
from .quadrature import QuadratureSpec, outer_integral, resolve_spec

HOLDS_TOL = 1e-6


@dataclass
class VerificationReport:
    """Both sides of one inequality as raw norms, their ratio and the bounds on C.

    ``holds`` is None whenever either side is infinite.
    """

    lhs: float
    rhs: float
    ratio: float
    bound_lower: float
    bound_upper: float
    holds: bool | None
    quadrature_error: float
    flags: list[str] = field(default_factory=list)
    extras: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return _jsonable(asdict(self))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _norm(res, power_: float):
    """(value^(1/power), relative error of that value) from an IntegralResult."""
    if not res.finite:
        return math.inf, math.nan, math.inf
    lv = res.log_value / power_
    val = math.exp(lv) if lv < 709 else math.inf
    rel = res.error / res.value / power_ if res.value > 0 else 0.0
    return val, rel, lv


def _resolve_bounds(bounds, u, v, params, G, spec, side):
    if bounds is None:
        b = constant_bounds(u, v, params, G, spec, side=side)
        return b.lower, b.upper, list(b.flags)
    if isinstance(bounds, BoundsResult):
        return bounds.lower, bounds.upper, list(bounds.flags)
    lower, upper = bounds
    return float(lower), float(upper), []


def evaluate_inequality(f: RadialProfile, u, v, params: InequalityParams, G: HomogeneousGroup,
                        spec: QuadratureSpec | None = None, side: str = "forward",
                        bounds=None, tol: float = HOLDS_TOL) -> VerificationReport:
    """Evaluate lhs = ||M f||_{q,u} and rhs = ||f||_{p,v} (without C) and compare.

    ``bounds`` is a BoundsResult or a (lower, upper) pair; when omitted it is
    computed with ``constant_bounds`` for the same weights and side.
    """
    spec = resolve_spec(spec)
    if side not in ("forward", "dual"):
        raise DomainError(f"side must be 'forward' or 'dual', got {side!r}")
    p, q = params.p, params.q
    m = params.order(G)
    up = weight_profile(u, G, params.beta, spec)
    vp = weight_profile(v, G, params.beta, spec)
    flags: list[str] = []

    try:
        if side == "forward":
            mean_q = mean_profile(f, m, q, spec)
        else:
            mean_q = dual_mean_profile(f, m, q, spec)
        lhs_res = polar_integral(G, product(mean_q, up), spec)
    except DivergenceError as exc:
        lhs_res = None
        flags.append(f"lhs mean diverges at {exc.endpoint}: {exc}")
    rhs_res = polar_integral(G, product(power(f, p), vp), spec)

    if lhs_res is None:
        lhs, lhs_rel, lhs_log = math.inf, math.nan, math.inf
    else:
        if not lhs_res.finite:
            flags.append(f"lhs integral diverges at {lhs_res.divergence}: {lhs_res.detail}")
        lhs, lhs_rel, lhs_log = _norm(lhs_res, q)
    if not rhs_res.finite:
        flags.append(f"rhs integral diverges at {rhs_res.divergence}: {rhs_res.detail}")
    rhs, rhs_rel, rhs_log = _norm(rhs_res, p)

    lower, upper, bflags = _resolve_bounds(bounds, u, v, params, G, spec, side)
    flags.extend(bflags)
    if math.isfinite(lhs_log) and math.isfinite(rhs_log):
        ratio = math.exp(lhs_log - rhs_log)
        holds = bool(ratio <= upper * (1.0 + tol))
        qerr = abs(lhs_rel) + abs(rhs_rel)
    else:
        ratio = math.nan
        holds = None
        qerr = math.nan
    return VerificationReport(lhs, rhs, ratio, lower, upper, holds, qerr, flags)


# ---------------------------------------------------------------------------
# sharpness probes
# ---------------------------------------------------------------------------


@dataclass
class ProbeRow:
    gamma_over_Q: float
    ratio_numeric: float
    ratio_closed_form: float
    limit_constant: float


@dataclass
class ProbeResult:
    a: float
    beta: float
    side: str
    limit: float
    rows: list[ProbeRow]
    monotone: bool
    below_limit: bool
    generic_check: list[dict] = field(default_factory=list)

    @property
    def ratios(self) -> list[float]:
        return [r.ratio_numeric for r in self.rows]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["gamma_over_Q", "ratio_numeric", "ratio_closed_form", "limit_constant"])
        for r in self.rows:
            w.writerow([repr(r.gamma_over_Q), repr(r.ratio_numeric),
                        repr(r.ratio_closed_form), repr(r.limit_constant)])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return _jsonable(asdict(self))


def default_gamma_sequence(a: float, n: int = 11) -> list[float]:
    """gamma/Q = (a+1) + |a+1| 2^(-j), j = 0..n-1 (gap 1 when a = -1)."""
    gap = abs(a + 1.0) or 1.0
    return [(a + 1.0) + gap * 2.0 ** (-j) for j in range(n)]


def probe_head_exponent(a: float, G: HomogeneousGroup) -> float:
    """Power of f on (0, R0]: 0 when a > -1, otherwise large enough for integrability at 0."""
    e = G.Q * (a + 1.0)
    return 0.0 if e > 0 else G.Q - e


def extremal_profile(a: float, beta: float, G: HomogeneousGroup, gamma: float) -> PiecewisePower:
    """r^sigma on (0, e^(1/(beta Q))] and r^(-gamma) beyond."""
    R0 = math.exp(1.0 / (beta * G.Q))
    return cutoff_power_tail(R0, 1.0, gamma, head_exponent=probe_head_exponent(a, G))


def extremal_ratio_closed(a: float, beta: float, G: HomogeneousGroup, gamma: float) -> float:
    """Exact ratio lhs/rhs for the extremal profile with u = v = |B|^a, p = q = 1.

    With e = Q(a+1), m = beta Q and head power sigma it is
    (1/(sigma+e) + 1/(gamma-e)) / (e^(sigma/m)/(sigma+e) + e^(-gamma/m)/(gamma-e)),
    which for sigma = 0 is e^(gamma/m) / (e/gamma + (1 - e/gamma) e^(gamma/m)).
    """
    m = beta * G.Q
    e = G.Q * (a + 1.0)
    s = probe_head_exponent(a, G)
    if not gamma > e:
        raise DomainError("gamma must exceed Q(a+1)")
    num = 1.0 / (s + e) + 1.0 / (gamma - e)
    den = math.exp(s / m) / (s + e) + math.exp(-gamma / m) / (gamma - e)
    return num / den


def extremal_norms_closed(a: float, beta: float, G: HomogeneousGroup, gamma: float):
    """(lhs, rhs) norms of the extremal profile for u = v = |B|^a, p = q = 1 and a > -1."""
    if not a > -1:
        raise DomainError("closed-form extremal norms need a > -1")
    x = gamma / G.Q - (a + 1.0)
    if not x > 0:
        raise DomainError("gamma/Q must exceed a+1")
    pref = G.unit_ball_volume ** (a + 1.0) * math.exp((a + 1.0) / beta)
    lhs = pref * (1.0 / (a + 1.0) + 1.0 / x)
    rhs = pref * (1.0 / (a + 1.0) + math.exp(-gamma / (beta * G.Q)) / x)
    return lhs, rhs


def _check_sequence(a: float, G: HomogeneousGroup, seq) -> list[float]:
    seq = [float(g) for g in seq]
    if any(not g > a + 1.0 for g in seq):
        raise DomainError("every gamma/Q must exceed a+1 (otherwise the rhs diverges)")
    return seq


def _monotone(ratios) -> bool:
    return all(y >= x * (1.0 - 1e-12) for x, y in zip(ratios, ratios[1:]))


def sharpness_probe_power(a: float, beta: float, G: HomogeneousGroup, gamma_over_Q=None,
                          spec: QuadratureSpec | None = None, *, generic_upto: int = 0,
                          bounds=None) -> ProbeResult:
    """Ratios of the extremal family for u = v = |B|^a, p = q = 1, as gamma/Q decreases.

    The first ``generic_upto`` probes are recomputed with every closed form
    disabled and stored in ``generic_check``.
    """
    spec = resolve_spec(spec)
    seq = _check_sequence(a, G, default_gamma_sequence(a) if gamma_over_Q is None else gamma_over_Q)
    params = InequalityParams(1.0, 1.0, beta)
    u = BallPower(a, G)
    limit = math.exp((a + 1.0) / beta)
    if bounds is None:
        bounds = (limit, limit)
    rows, generic = [], []
    for j, gq in enumerate(seq):
        gamma = gq * G.Q
        f = extremal_profile(a, beta, G, gamma)
        rep = evaluate_inequality(f, u, u, params, G, spec, bounds=bounds)
        rows.append(ProbeRow(gq, rep.ratio, extremal_ratio_closed(a, beta, G, gamma), limit))
        if j < generic_upto:
            gen = evaluate_inequality(f, u, u, params, G, spec.with_(closed_forms="none"),
                                      bounds=bounds)
            generic.append({"gamma_over_Q": gq, "lhs": gen.lhs, "rhs": gen.rhs, "ratio": gen.ratio,
                            "quadrature_error": gen.quadrature_error})
    ratios = [r.ratio_numeric for r in rows]
    return ProbeResult(a, beta, "forward", limit, rows, _monotone(ratios),
                       all(x < limit for x in ratios), generic)


def sharpness_probe_dual(a: float, beta: float, G: HomogeneousGroup, gamma_over_Q=None,
                         spec: QuadratureSpec | None = None, *, bounds=None) -> ProbeResult:
    """Dual-operator probe for u = v = |B|^a.

    The inversion r -> 1/r turns the weights into multiples of |B|^(-(a+2)),
    so the forward extremal family g for exponent -(a+2) is pulled back to
    f = g o inv and evaluated through the dual operator. The ratios tend to
    e^(-(a+1)/beta).
    """
    spec = resolve_spec(spec)
    a_dual = -(a + 2.0)
    ut = dual_weight_transform(BallPower(a, G), G)
    if abs(ut.asymptote("inf").power + G.Q * (a + 2.0)) > 1e-12 * G.Q * (1 + abs(a)):
        raise DomainError("dual weight transform did not produce a power of the ball volume")
    seq = _check_sequence(a_dual, G,
                          default_gamma_sequence(a_dual) if gamma_over_Q is None else gamma_over_Q)
    params = InequalityParams(1.0, 1.0, beta)
    u = BallPower(a, G)
    limit = math.exp(-(a + 1.0) / beta)
    if bounds is None:
        bounds = (limit, limit)
    rows = []
    for gq in seq:
        gamma = gq * G.Q
        f = extremal_profile(a_dual, beta, G, gamma).compose(-1.0)
        rep = evaluate_inequality(f, u, u, params, G, spec, side="dual", bounds=bounds)
        rows.append(ProbeRow(gq, rep.ratio, extremal_ratio_closed(a_dual, beta, G, gamma), limit))
    ratios = [r.ratio_numeric for r in rows]
    return ProbeResult(a, beta, "dual", limit, rows, _monotone(ratios),
                       all(x < limit for x in ratios))


# ---------------------------------------------------------------------------
# multinomial and matched weights
# ---------------------------------------------------------------------------


def compositions(k: int, n: int):
    """All (m_1, ..., m_n) of non-negative integers with sum k."""
    for cut in itertools.combinations(range(k + n - 1), n - 1):
        prev, parts = -1, []
        for c in cut:
            parts.append(c - prev - 1)
            prev = c
        parts.append(k + n - 1 - prev - 1)
        yield tuple(parts)


def multinomial_coefficient(k: int, ms) -> int:
    out = math.factorial(k)
    for x in ms:
        out //= math.factorial(x)
    return out


def verify_multinomial(a_list, k: int, beta: float, G: HomogeneousGroup, f: RadialProfile,
                       spec: QuadratureSpec | None = None, tol: float = HOLDS_TOL) -> VerificationReport:
    """The inequality with u = v = (sum_i |B|^(a_i))^k, p = q = 1.

    Besides the direct evaluation, the weight is expanded into its
    multinomial terms; each term is a power weight whose own ratio must stay
    below e^((1 + sum a_i m_i)/beta), and the term sums must reproduce the
    direct lhs and rhs. All of this is stored in ``extras``.
    """
    from .operators import MultinomialWeight

    spec = resolve_spec(spec)
    weight = MultinomialWeight(tuple(a_list), k)
    b = multinomial_constant_bounds(weight.a_list, weight.k, beta, G)
    params = InequalityParams(1.0, 1.0, beta)
    rep = evaluate_inequality(f, weight, weight, params, G, spec, bounds=(b.lower, b.upper), tol=tol)
    terms = []
    lhs_sum = rhs_sum = 0.0
    all_ok = True
    for ms in compositions(weight.k, len(weight.a_list)):
        s = math.fsum(ai * mi for ai, mi in zip(weight.a_list, ms))
        coef = multinomial_coefficient(weight.k, ms)
        c_term = math.exp((1.0 + s) / beta)
        t = evaluate_inequality(f, BallPower(s, G), BallPower(s, G), params, G, spec,
                                bounds=(c_term, c_term), tol=tol)
        lhs_sum += coef * t.lhs
        rhs_sum += coef * t.rhs
        ok = bool(t.holds) if t.holds is not None else False
        all_ok = all_ok and ok
        terms.append({"m": list(ms), "coefficient": coef, "exponent": s, "lhs": coef * t.lhs,
                      "rhs": coef * t.rhs, "ratio": t.ratio, "constant": c_term, "holds": ok})
    rep.extras.update({
        "collection": list(b.collection),
        "terms": terms,
        "terms_hold": all_ok,
        "lhs_from_terms": lhs_sum,
        "rhs_from_terms": rhs_sum,
        "lhs_term_rel_diff": abs(lhs_sum - rep.lhs) / rep.lhs if math.isfinite(rep.lhs) else math.nan,
        "rhs_term_rel_diff": abs(rhs_sum - rep.rhs) / rep.rhs if math.isfinite(rep.rhs) else math.nan,
    })
    return rep


def multinomial_probe_profile(a_list, k: int, beta: float, G: HomogeneousGroup,
                              gap: float) -> PiecewisePower:
    """Cutoff profile whose tail exponent sits ``gap`` above the weight's growth at infinity."""
    top = k * max(a_list) + 1.0
    return cutoff_power_tail(math.exp(1.0 / (beta * G.Q)), 1.0, G.Q * (top + gap))


def verify_matched(v, beta: float, G: HomogeneousGroup, f: RadialProfile,
                   spec: QuadratureSpec | None = None, tol: float = HOLDS_TOL) -> VerificationReport:
    """Inequality with u = M[v] and constant e^(1/beta).

    Also evaluates the unweighted inequality for g = f v, whose ratio must
    coincide; the relative difference is stored as ``extras["substitution_rel_diff"]``.
    """
    spec = resolve_spec(spec)
    params = InequalityParams(1.0, 1.0, beta)
    vp = weight_profile(v, G, beta, spec)
    u = matched_weight(vp, beta, G, spec)
    C = math.exp(1.0 / beta)
    rep = evaluate_inequality(f, u, vp, params, G, spec, bounds=(C, C), tol=tol)
    one = constant(1.0)
    g = product(f, vp)
    plain = evaluate_inequality(g, one, one, params, G, spec, bounds=(C, C), tol=tol)
    rep.extras["unweighted_ratio"] = plain.ratio
    if math.isfinite(rep.ratio) and math.isfinite(plain.ratio):
        rep.extras["substitution_rel_diff"] = abs(rep.ratio - plain.ratio) / plain.ratio
    else:
        rep.extras["substitution_rel_diff"] = math.nan
    return rep


def matched_probe_profile(v, beta: float, G: HomogeneousGroup, gap: float,
                          spec: QuadratureSpec | None = None) -> RadialProfile:
    """f = g / v with g the unweighted extremal profile (tail exponent Q(1 + gap))."""
    vp = weight_profile(v, G, beta, spec)
    g = cutoff_power_tail(math.exp(1.0 / (beta * G.Q)), 1.0, G.Q * (1.0 + gap))
    return product(g, power(vp, -1.0))


# ---------------------------------------------------------------------------
# equivalence checks
# ---------------------------------------------------------------------------


@dataclass
class EquivalenceCheck:
    """Ratios computed two ways and whether they agree to ``tolerance``."""

    ratio_direct: float
    ratio_reduced: float
    agreement: bool | None
    rel_diff: float
    tolerance: float
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return _jsonable(asdict(self))


def _rel(x: float, y: float) -> float:
    if not (math.isfinite(x) and math.isfinite(y)):
        return math.nan
    return abs(x - y) / max(abs(x), abs(y), 1e-300)


def _compare(direct: VerificationReport, other: VerificationReport, tol: float) -> EquivalenceCheck:
    d = _rel(direct.ratio, other.ratio)
    agreement = None if math.isnan(d) else bool(d < tol)
    details = {"lhs_direct": direct.lhs, "lhs_reduced": other.lhs, "rhs_direct": direct.rhs,
               "rhs_reduced": other.rhs, "lhs_rel_diff": _rel(direct.lhs, other.lhs),
               "rhs_rel_diff": _rel(direct.rhs, other.rhs),
               "flags": direct.flags + other.flags}
    return EquivalenceCheck(direct.ratio, other.ratio, agreement, d, tol, details)


def check_beta_reduction(u, v, f: RadialProfile, beta: float, G: HomogeneousGroup,
                         spec: QuadratureSpec | None = None, *, p: float = 1.0, q: float = 1.0,
                         tol: float = 1e-7) -> EquivalenceCheck:
    """Order-beta inequality versus its order-1 form after s = r^beta."""
    spec = resolve_spec(spec)
    nan_bounds = (math.nan, math.nan)
    direct = evaluate_inequality(f, u, v, InequalityParams(p, q, beta), G, spec, bounds=nan_bounds)
    ub, vb, g = beta_reduce(u, v, f, beta, G, spec)
    reduced = evaluate_inequality(g, ub, vb, InequalityParams(p, q, 1.0), G, spec, bounds=nan_bounds)
    return _compare(direct, reduced, tol)


def check_duality(f: RadialProfile, u, v, params: InequalityParams, G: HomogeneousGroup,
                  spec: QuadratureSpec | None = None, tol: float = 1e-7) -> EquivalenceCheck:
    """Dual inequality for (f, u, v) versus the forward one for (f o inv, u~, v~)."""
    spec = resolve_spec(spec)
    nan_bounds = (math.nan, math.nan)
    dual = evaluate_inequality(f, u, v, params, G, spec, side="dual", bounds=nan_bounds)
    ut = dual_weight_transform(u, G, params.beta, spec)
    vt = dual_weight_transform(v, G, params.beta, spec)
    fwd = evaluate_inequality(f.compose(-1.0), ut, vt, params, G, spec, bounds=nan_bounds)
    return _compare(dual, fwd, tol)


@dataclass
class NecessityWitness:
    """Lower estimate of C from the test function built for one (alpha, R)."""

    R: float
    alpha: float
    truncated_lhs: float
    T_R: float
    rhs_norm: float
    rhs_norm_closed: float
    witness_value: float
    A_alpha_value: float
    reproduces_T: bool

    def to_dict(self) -> dict:
        return _jsonable(asdict(self))


def necessity_test_function(params: InequalityParams, G: HomogeneousGroup, R: float,
                            alpha: float) -> PiecewisePower:
    """R^-Q on (0, R] and e^(-(Q beta+alpha)/(beta Q)) R^(Q(beta-1)+alpha) r^(-(beta Q+alpha)) beyond."""
    Q, beta = G.Q, params.beta
    m = beta * Q
    return PiecewisePower(
        (R,),
        (-Q * math.log(R), -(m + alpha) / m + (Q * (beta - 1.0) + alpha) * math.log(R)),
        (0.0, -(m + alpha)),
    )


def necessity_rhs_factor(params: InequalityParams, G: HomogeneousGroup, alpha: float) -> float:
    """|B1|^(1/p) (1 + e^(-(beta Q+alpha)/(beta Q)) / (alpha/Q+beta-1))^(1/p)."""
    d = alpha / G.Q + params.beta - 1.0
    m = params.order(G)
    return (G.unit_ball_volume * (1.0 + math.exp(-(m + alpha) / m) / d)) ** (1.0 / params.p)


def necessity_witness(u, v, params: InequalityParams, G: HomogeneousGroup, R: float,
                      spec: QuadratureSpec | None = None, *, alpha: float | None = None,
                      tol: float = 1e-7) -> NecessityWitness:
    """Evaluate the test-function argument that bounds A(alpha) by C times a norm factor."""
    spec = resolve_spec(spec)
    alpha = params.alpha if alpha is None else alpha
    if alpha is None:
        raise DomainError("necessity witness needs alpha")
    Q, beta, p, q = G.Q, params.beta, params.p, params.q
    if not alpha > Q * (1.0 - beta):
        raise DomainError(f"alpha must exceed Q(1-beta) = {Q * (1 - beta):g}")
    if not R > 0:
        raise DomainError("R must be positive")
    w = transformed_weight(u, v, params, G, spec)
    g = necessity_test_function(params, G, R, alpha)
    mean = mean_profile(g, params.order(G), q / p, spec)
    trunc = outer_integral(product(mean, w), G, R, spec).scaled(G.sphere_measure)
    truncated_lhs = math.exp(trunc.log_value / q) if trunc.finite else math.inf

    crit = criterion_from_weight(w, params, G, alpha, spec)
    tail = outer_integral(product(PowerLaw(-(Q * beta + alpha) * q / p), w),
                          G, R, spec).scaled(G.sphere_measure)
    T_R = (math.exp((Q * (beta - 1.0) + alpha) / p * math.log(R) + tail.log_value / q)
           if tail.finite else math.inf)
    rhs = polar_integral(G, g, spec)
    rhs_norm = math.exp(rhs.log_value / p)
    rhs_closed = necessity_rhs_factor(params, G, alpha)
    agree = math.isfinite(T_R) and abs(truncated_lhs - T_R) <= tol * T_R
    return NecessityWitness(float(R), float(alpha), truncated_lhs, T_R, rhs_norm, rhs_closed,
                            truncated_lhs / rhs_norm, crit.A_value, bool(agree))
