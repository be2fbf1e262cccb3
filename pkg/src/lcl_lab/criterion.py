"""The A(alpha) weight criterion and the two-sided bounds on the best constant.

For the inequality with weights (u, v) and w = u * M[1/v]^(q/p),

    A(alpha) = sup_R R^((Q(beta-1)+alpha)/p) (|S| int_R^inf r^(-(Q beta+alpha) q/p) w(r) r^(Q-1) dr)^(1/q)

and the best constant C satisfies

    |B1|^(-1/p) sup_alpha (1 + e^(-(beta Q+alpha)/(beta Q)) / (alpha/Q+beta-1))^(-1/p) A(alpha)
        <= C <= (beta/|B1|)^(1/p) inf_alpha e^(alpha/(beta p Q)) A(alpha).
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import DomainError
from .group import HomogeneousGroup
from .operators import (
    InequalityParams,
    dual_weight_transform,
    transformed_weight,
)
from .optimize import golden_section, grid_then_golden
from .profiles import PowerLaw, RadialProfile, product
from .quadrature import QuadratureSpec, _end_divergence, log_tail_integrals, resolve_spec

GRID_PER_DECADE = 64
ALPHA_GRID = 200
ALPHA_DECADES = 3.0
ALPHA_WIDTH = 1e-8
# the lower bound is searched only for alpha >= Q(1-beta)(1 + margin): the
# per-alpha factor tends to 0 and A(alpha) to inf there, and the tail exponent
# of the criterion integrand cancels catastrophically
ALPHA_EDGE_MARGIN = 1e-6
# relative slack when deciding that an asymptotic slope of log T is zero
SLOPE_TOL = 1e-9


def json_number(x):
    """JSON-safe float: infinities become the strings "inf" / "-inf"."""
    if isinstance(x, float) and math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if isinstance(x, float) and math.isnan(x):
        return "nan"
    return x


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        obj = obj.item()
    return json_number(obj)


@dataclass
class CriterionResult:
    """A(alpha) together with the per-alpha lower and upper estimates of C.

    ``sup_R_location`` is the maximising radius, or ``"0+"`` / ``"inf"`` when
    the supremum is approached at an end of the radial range.
    """

    alpha: float
    A_value: float
    sup_R_location: float | str
    lower_bound_C: float
    upper_bound_C: float
    finite: bool
    flags: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return _jsonable(asdict(self))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


@dataclass
class BoundsResult:
    lower: float
    upper: float
    alpha_star_lower: float
    alpha_star_upper: float
    side: str = "forward"
    flags: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return _jsonable(asdict(self))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


@dataclass
class MultinomialBounds:
    """Bounds exp((1 + sum a_i m_i)/beta) <= C <= exp((1 + k sum a_i)/beta)."""

    lower: float
    upper: float
    collection: tuple[int, ...]
    exponent_sum: float

    def to_dict(self) -> dict:
        return _jsonable(asdict(self))


# ---------------------------------------------------------------------------
# per-alpha bound factors
# ---------------------------------------------------------------------------


def _log_lower_factor(alpha: float, params: InequalityParams, G: HomogeneousGroup) -> float:
    """log of (1/|B1|)^(1/p) (1 + e^(-(bQ+al)/(bQ))/(al/Q+b-1))^(-1/p); -inf if undefined."""
    d = alpha / G.Q + params.beta - 1.0
    if d <= 0:
        return -math.inf
    m = params.order(G)
    corr = math.log1p(math.exp(-(m + alpha) / m) / d)
    return -(G.log_unit_ball_volume + corr) / params.p


def _log_upper_factor(alpha: float, params: InequalityParams, G: HomogeneousGroup) -> float:
    m = params.order(G)
    return (math.log(params.beta) - G.log_unit_ball_volume) / params.p + alpha / (m * params.p)


def _safe_exp(x: float) -> float:
    if x == -math.inf:
        return 0.0
    return math.exp(x) if x < 709.0 else math.inf


# ---------------------------------------------------------------------------
# A(alpha)
# ---------------------------------------------------------------------------


class _Criterion:
    """log T(R) for one transformed weight w and one alpha."""

    def __init__(self, w: RadialProfile, params: InequalityParams, G: HomogeneousGroup,
                 alpha: float, spec: QuadratureSpec):
        self.params, self.G, self.alpha, self.spec = params, G, alpha, spec
        Q, p, q, beta = G.Q, params.p, params.q, params.beta
        self.h = product(PowerLaw(-(Q * beta + alpha) * q / p), w)
        self.lead = (Q * (beta - 1.0) + alpha) / p

    def log_T(self, radii: np.ndarray) -> np.ndarray:
        lj = log_tail_integrals(self.h, self.G, radii, self.spec)
        return self.lead * np.log(radii) + (math.log(self.G.sphere_measure) + lj) / self.params.q

    def asymptotic_slopes(self):
        """Exact slopes of log T in ln R at 0 and at infinity (or +-inf)."""
        Q, q = self.G.Q, self.params.q
        div, _ = _end_divergence(self.h, Q, "inf")
        if div is not None:
            return None, None, div
        a_inf = self.h.asymptote("inf")
        if a_inf.exp_coef < 0 and a_inf.exp_order > 0:
            s_inf = -math.inf
        else:
            s_inf = self.lead + (a_inf.power + Q) / q
        a0 = self.h.asymptote("zero")
        if a0.exp_coef != 0 and a0.exp_order < 0:
            s0 = -math.inf if a0.exp_coef > 0 else self.lead
        else:
            net = a0.power + Q
            if net < 0:
                s0 = self.lead + net / q
            elif net == 0:
                # J(R) ~ ln(1/R): only a positive lead power keeps T bounded
                s0 = self.lead if self.lead != 0 else -math.inf
            else:
                s0 = self.lead
        return s0, s_inf, None


def _slope_scale(params: InequalityParams, G: HomogeneousGroup, alpha: float) -> float:
    return SLOPE_TOL * max(1.0, (G.Q * params.beta + alpha) / params.p * (params.q / params.p))


def _radial_grid(spec: QuadratureSpec, per_decade: int) -> np.ndarray:
    lo, hi = math.log10(spec.r_min_hint), math.log10(spec.r_max_hint)
    n = int(round((hi - lo) * per_decade))
    return np.logspace(lo, hi, n + 1)


def criterion_from_weight(w: RadialProfile, params: InequalityParams, G: HomogeneousGroup,
                          alpha: float, spec: QuadratureSpec | None = None, *,
                          per_decade: int = GRID_PER_DECADE) -> CriterionResult:
    """A(alpha) for an already transformed weight w."""
    spec = resolve_spec(spec)
    if not (alpha > 0 and math.isfinite(alpha)):
        raise DomainError(f"alpha must be positive, got {alpha!r}")
    crit = _Criterion(w, params, G, alpha, spec)
    lo_f = _log_lower_factor(alpha, params, G)
    up_f = _log_upper_factor(alpha, params, G)

    def infinite(where: str, why: str) -> CriterionResult:
        lower = math.inf if lo_f > -math.inf else 0.0
        return CriterionResult(alpha, math.inf, where, lower, math.inf, False, [why])

    s0, s_inf, div = crit.asymptotic_slopes()
    if div is not None:
        return infinite("inf", f"tail integral diverges: {div}")
    tol = _slope_scale(params, G, alpha)
    if s_inf > tol:
        return infinite("inf", f"T(R) grows like R^{s_inf:.6g} as R -> inf")
    if s0 < -tol:
        return infinite("0+", f"T(R) grows like R^{s0:.6g} as R -> 0")

    radii = _radial_grid(spec, per_decade)
    logT = crit.log_T(radii)
    if np.any(np.isnan(logT)):
        raise DomainError("criterion integrand produced NaN")
    flags: list[str] = []
    k = per_decade
    if len(logT) > k:
        right, left = logT[-k - 1:], logT[:k + 1]
        if np.all(np.diff(right) > 0) and right[-1] - right[0] > math.log(10.0):
            return infinite("inf", "T(R) grows by more than 10x over the last decade")
        if np.all(np.diff(left) < 0) and left[0] - left[-1] > math.log(10.0):
            return infinite("0+", "T(R) grows by more than 10x over the first decade")

    i = int(np.argmax(logT))
    best_log, best_R = float(logT[i]), float(radii[i])
    location: float | str
    if i == 0 or i == len(radii) - 1:
        location = "0+" if i == 0 else "inf"
        flags.append("supremum approached at the edge of the radial window")
    else:
        lr = np.log(radii)

        def neg(t):
            return -float(crit.log_T(np.array([math.exp(t)]))[0])

        t, fneg, _ = golden_section(neg, float(lr[i - 1]), float(lr[i + 1]), width=1e-6)
        if -fneg > best_log:
            best_log, best_R = -fneg, math.exp(t)
        location = best_R
    A = _safe_exp(best_log)
    lower = _safe_exp(lo_f + best_log) if lo_f > -math.inf else 0.0
    upper = _safe_exp(up_f + best_log)
    return CriterionResult(alpha, A, location, lower, upper, math.isfinite(A), flags)


def A_alpha(u, v, params: InequalityParams, G: HomogeneousGroup,
            spec: QuadratureSpec | None = None, *, alpha: float | None = None,
            per_decade: int = GRID_PER_DECADE) -> CriterionResult:
    """A(alpha) for weights (u, v); ``alpha`` defaults to ``params.alpha``."""
    spec = resolve_spec(spec)
    alpha = params.alpha if alpha is None else alpha
    if alpha is None:
        raise DomainError("A(alpha) needs alpha")
    w = transformed_weight(u, v, params, G, spec)
    return criterion_from_weight(w, params, G, alpha, spec, per_decade=per_decade)


def criterion_curve(u, v, params: InequalityParams, G: HomogeneousGroup, radii,
                    spec: QuadratureSpec | None = None, *, alpha: float | None = None) -> np.ndarray:
    """T(R) on the given increasing radii (``inf`` where the tail diverges)."""
    spec = resolve_spec(spec)
    alpha = params.alpha if alpha is None else alpha
    if alpha is None or not alpha > 0:
        raise DomainError("T(R) needs alpha > 0")
    w = transformed_weight(u, v, params, G, spec)
    crit = _Criterion(w, params, G, alpha, spec)
    with np.errstate(over="ignore"):
        return np.exp(crit.log_T(np.asarray(radii, dtype=float)))


def dual_weights(u, v, params: InequalityParams, G: HomogeneousGroup,
                 spec: QuadratureSpec | None = None):
    """(u~, v~) with u~(r) = r^(-2Q) u(1/r), turning the dual problem into a forward one."""
    return (dual_weight_transform(u, G, params.beta, spec),
            dual_weight_transform(v, G, params.beta, spec))


def dual_A_alpha(u, v, params: InequalityParams, G: HomogeneousGroup,
                 spec: QuadratureSpec | None = None, *, alpha: float | None = None) -> CriterionResult:
    ut, vt = dual_weights(u, v, params, G, spec)
    return A_alpha(ut, vt, params, G, spec, alpha=alpha)


def balance_gap(a: float, b: float, params: InequalityParams) -> float:
    """(1+a)/q - (1+b)/p; zero exactly when power weights are admissible."""
    return (1.0 + a) / params.q - (1.0 + b) / params.p


def is_balanced(a: float, b: float, params: InequalityParams) -> bool:
    gap = balance_gap(a, b, params)
    return abs(gap) <= 1e-12 * max(1.0, abs(1.0 + a) / params.q, abs(1.0 + b) / params.p)


def A_alpha_power_closed(a: float, b: float, params: InequalityParams, G: HomogeneousGroup,
                         alpha: float | None = None) -> float:
    """Closed form of A(alpha) for u = |B|^a, v = |B|^b.

    ``inf`` when (1+a)/q != (1+b)/p. Raises DomainError when alpha is not
    above max(Qp((1+a)/q - (beta+b)/p), Q(1-beta)).
    """
    alpha = params.alpha if alpha is None else alpha
    if alpha is None or not alpha > 0:
        raise DomainError("A(alpha) needs alpha > 0")
    p, q, beta, Q = params.p, params.q, params.beta, G.Q
    if not is_balanced(a, b, params):
        return math.inf
    threshold = Q * p * ((1.0 + a) / q - (beta + b) / p)
    d = alpha / Q + beta - 1.0
    if not (alpha > threshold and d > 0):
        raise DomainError(
            f"alpha = {alpha:g} must exceed Qp((1+a)/q - (beta+b)/p) = {threshold:g} "
            f"and Q(1-beta) = {Q * (1 - beta):g}"
        )
    log_A = (math.log(p / q) - math.log(d)) / q + G.log_unit_ball_volume / p + b / (p * beta)
    return math.exp(log_A)


# ---------------------------------------------------------------------------
# constant bounds
# ---------------------------------------------------------------------------


def bounds_from_weight(w: RadialProfile, params: InequalityParams, G: HomogeneousGroup,
                       spec: QuadratureSpec | None = None, *, side: str = "forward",
                       n_grid: int = ALPHA_GRID, width: float = ALPHA_WIDTH) -> BoundsResult:
    """Optimise both per-alpha bounds over ln alpha in [ln(Q 1e-3), ln(Q 1e3)]."""
    spec = resolve_spec(spec)
    memo: dict[float, float] = {}

    def log_A(t: float) -> float:
        v = memo.get(t)
        if v is None:
            res = criterion_from_weight(w, params, G, math.exp(t), spec)
            v = math.log(res.A_value) if res.A_value > 0 else -math.inf
            memo[t] = v
        return v

    def upper_obj(t):
        return _log_upper_factor(math.exp(t), params, G) + log_A(t)

    def lower_obj(t):
        f = _log_lower_factor(math.exp(t), params, G)
        if f == -math.inf:
            return math.inf
        return -(f + log_A(t))

    flags: list[str] = []
    t_q = math.log(G.Q)
    if not math.isfinite(log_A(t_q)):
        flags.append("A(alpha) is infinite at alpha = Q")
    lo, hi = t_q - ALPHA_DECADES * math.log(10.0), t_q + ALPHA_DECADES * math.log(10.0)
    up = grid_then_golden(upper_obj, lo, hi, n_grid=n_grid, width=width)
    lo_low = lo
    if params.beta < 1.0:
        lo_low = max(lo, math.log(G.Q * (1.0 - params.beta)) + math.log1p(ALPHA_EDGE_MARGIN))
    low = grid_then_golden(lower_obj, lo_low, hi, n_grid=n_grid, width=width)
    if up.at_boundary:
        flags.append("upper-bound optimum at the edge of the alpha range")
    if low.at_boundary:
        flags.append("lower-bound optimum at the edge of the alpha range")
    upper = _safe_exp(up.fx) if math.isfinite(up.fx) else math.inf
    if low.fx == -math.inf:
        lower = math.inf
    elif low.fx == math.inf:
        lower = 0.0
    else:
        lower = _safe_exp(-low.fx)
    return BoundsResult(lower, upper, math.exp(low.x), math.exp(up.x), side, flags)


def constant_bounds(u, v, params: InequalityParams, G: HomogeneousGroup,
                    spec: QuadratureSpec | None = None, *, side: str = "forward",
                    n_grid: int = ALPHA_GRID, width: float = ALPHA_WIDTH) -> BoundsResult:
    """Lower and upper bounds on the best constant, with their optimising alphas.

    ``side="dual"`` bounds the dual inequality by moving both weights through
    r -> r^(-2Q) u(1/r) first.
    """
    spec = resolve_spec(spec)
    if side == "dual":
        u, v = dual_weights(u, v, params, G, spec)
    elif side != "forward":
        raise DomainError(f"side must be 'forward' or 'dual', got {side!r}")
    w = transformed_weight(u, v, params, G, spec)
    return bounds_from_weight(w, params, G, spec, side=side, n_grid=n_grid, width=width)


def power_infimum_closed(params: InequalityParams) -> float:
    """[inf_alpha e^(q alpha/(p Q beta)) / (alpha/(Q beta) + 1 - 1/beta)]^(1/q) in closed form.

    Valid when the minimiser is at a positive alpha, i.e. p/q > 1 - 1/beta.
    """
    p, q, beta = params.p, params.q, params.beta
    if not p / q > 1.0 - 1.0 / beta:
        raise DomainError("the infimum is attained at alpha > 0 only when p/q > 1 - 1/beta")
    return (q / p) ** (1.0 / q) * math.exp(1.0 / q + 1.0 / (p * beta) - 1.0 / p)


def power_infimum_numeric(params: InequalityParams, G: HomogeneousGroup, *,
                          n_grid: int = ALPHA_GRID, width: float = ALPHA_WIDTH):
    """Same infimum by the grid + golden-section optimiser; returns (value, alpha*)."""
    p, q, beta, Q = params.p, params.q, params.beta, G.Q

    def obj(t):
        al = math.exp(t)
        d = al / (Q * beta) + 1.0 - 1.0 / beta
        return math.inf if d <= 0 else q * al / (p * Q * beta) - math.log(d)

    t_q = math.log(Q)
    res = grid_then_golden(obj, t_q - ALPHA_DECADES * math.log(10.0),
                           t_q + ALPHA_DECADES * math.log(10.0), n_grid=n_grid, width=width)
    return math.exp(res.fx / q), math.exp(res.x)


def multinomial_constant_bounds(a_list, k: int, beta: float,
                                G: HomogeneousGroup | None = None) -> MultinomialBounds:
    """Guaranteed bounds for the weight (sum_i |B|^(a_i))^k.

    The lower bound uses the collection with the smallest sum a_i m_i
    (all of k on the smallest a_i), since only the existence of some
    collection is guaranteed.
    """
    a = [float(x) for x in a_list]
    if not a:
        raise DomainError("multinomial bounds need at least one exponent")
    if any(not x > 0 for x in a):
        raise DomainError("multinomial exponents must be positive")
    if int(k) != k or k < 0:
        raise DomainError("k must be a non-negative integer")
    if not beta > 0:
        raise DomainError("beta must be positive")
    k = int(k)
    j = int(np.argmin(a))
    collection = tuple(k if i == j else 0 for i in range(len(a)))
    low_sum = k * a[j]
    upper = _safe_exp((1.0 + k * math.fsum(a)) / beta)
    lower = _safe_exp((1.0 + low_sum) / beta)
    return MultinomialBounds(lower, upper, collection, low_sum)
