"""Adaptive radial quadrature.

Three integral shapes are needed:

* the inner log-mean  m * int_0^1 t^(m-1) ln f(r t) dt  (signed integrand,
  logarithmic singularity at t = 0, handled with a geometric mesh);
* the outer integral  int_lower^inf h(r) r^(Q-1) dr  of a positive profile,
  done in the variable t = ln r with per-panel log scaling so that huge
  or tiny magnitudes never overflow;
* cumulative tail integrals  J(R) = int_R^inf h r^(Q-1) dr  on a grid of R.

All of them run on one vectorised Gauss-Kronrod (7, 15) engine. Panels are
kept sorted by their left endpoint and summed with ``numpy.sum`` so results
are identical from run to run.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, NamedTuple

import numpy as np

from .errors import DivergenceError, DomainError, ToleranceError

# Kronrod 15-point abscissae (non-negative half) and weights; odd indices are
# the 7-point Gauss nodes.
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

# full 15-point rule on [-1, 1]
NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
KRONROD_WEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
_GAUSS_IDX = np.array([1, 3, 5, 7, 9, 11, 13])
GAUSS_WEIGHTS = np.concatenate([_WG[:-1], _WG[::-1]])

_EPS = np.finfo(float).eps
_TINY = np.finfo(float).tiny

CLOSED_FORM_MODES = ("all", "means", "none")
TAIL_POLICIES = ("analytic_power_tail", "truncate_with_bound")


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances and the numerically explored window for radial integrals.

    ``closed_forms`` picks how much symbolic shortcutting is allowed:
    ``"all"`` uses closed-form log-means and exact piecewise-power outer
    integrals, ``"means"`` keeps closed-form log-means but integrates outer
    integrals by quadrature, ``"none"`` runs every integral through the
    generic quadrature path.
    """

    rel_tol: float = 1e-9
    abs_tol: float = 1e-12
    max_subdivisions: int = 5000
    r_min_hint: float = 1e-8
    r_max_hint: float = 1e8
    tail_policy: str = "analytic_power_tail"
    closed_forms: str = "all"

    def __post_init__(self) -> None:
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise DomainError("rel_tol and abs_tol must be positive")
        if self.max_subdivisions < 1:
            raise DomainError("max_subdivisions must be at least 1")
        if not (0 < self.r_min_hint < self.r_max_hint < math.inf):
            raise DomainError("need 0 < r_min_hint < r_max_hint < inf")
        if self.tail_policy not in TAIL_POLICIES:
            raise DomainError(f"tail_policy must be one of {TAIL_POLICIES}")
        if self.closed_forms not in CLOSED_FORM_MODES:
            raise DomainError(f"closed_forms must be one of {CLOSED_FORM_MODES}")

    def with_(self, **changes) -> "QuadratureSpec":
        return replace(self, **changes)

    @property
    def symbolic_means(self) -> bool:
        return self.closed_forms in ("all", "means")

    @property
    def symbolic_integrals(self) -> bool:
        return self.closed_forms == "all"


DEFAULT_SPEC = QuadratureSpec()


def resolve_spec(spec: QuadratureSpec | None) -> QuadratureSpec:
    return DEFAULT_SPEC if spec is None else spec


class IntegralResult(NamedTuple):
    value: float
    error: float
    log_value: float
    divergence: str | None = None
    detail: str = ""

    @property
    def finite(self) -> bool:
        return self.divergence is None

    def scaled(self, factor: float) -> "IntegralResult":
        if not self.finite:
            return self
        return IntegralResult(
            self.value * factor, self.error * factor,
            self.log_value + math.log(factor), None, self.detail,
        )

    @classmethod
    def divergent(cls, endpoint: str, detail: str) -> "IntegralResult":
        return cls(math.inf, math.nan, math.inf, endpoint, detail)


# ---------------------------------------------------------------------------
# Gauss-Kronrod engine
# ---------------------------------------------------------------------------


def _gk_rule(vals: np.ndarray, half: np.ndarray):
    """QUADPACK qk15 estimate and error for each row of ``vals``."""
    resk = vals @ KRONROD_WEIGHTS
    resg = vals[:, _GAUSS_IDX] @ GAUSS_WEIGHTS
    reskh = 0.5 * resk
    resabs = np.abs(vals) @ KRONROD_WEIGHTS
    resasc = np.abs(vals - reskh[:, None]) @ KRONROD_WEIGHTS
    ahalf = np.abs(half)
    err = np.abs((resk - resg) * half)
    resasc = resasc * ahalf
    resabs = resabs * ahalf
    with np.errstate(divide="ignore", invalid="ignore"):
        scaled = resasc * np.minimum(1.0, (200.0 * err / resasc) ** 1.5)
    err = np.where((resasc != 0) & (err != 0), scaled, err)
    floor = 50.0 * _EPS * resabs
    err = np.where(resabs > _TINY / (50.0 * _EPS), np.maximum(floor, err), err)
    return resk * half, err


class Panels(NamedTuple):
    """Converged panels; ``value``/``error`` are in units of ``exp(shift)``."""

    a: np.ndarray
    b: np.ndarray
    value: np.ndarray
    error: np.ndarray
    shift: np.ndarray

    def log_values(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return self.shift + np.log(self.value)

    def log_total(self) -> float:
        return _logsumexp(self.log_values())

    def log_error(self) -> float:
        with np.errstate(divide="ignore"):
            return _logsumexp(self.shift + np.log(self.error))

    def total(self) -> float:
        return float(np.sum(self.value * np.exp(self.shift)))

    def total_error(self) -> float:
        return float(np.sum(self.error * np.exp(self.shift)))


def _logsumexp(x: np.ndarray) -> float:
    x = np.asarray(x, dtype=float)
    if x.size == 0:
        return -math.inf
    top = np.max(x)
    if not np.isfinite(top):
        return float(top)
    return float(top + np.log(np.sum(np.exp(x - top))))


def _evaluate(fn, a, b, log_mode):
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    x = mid[:, None] + half[:, None] * NODES[None, :]
    fv = np.asarray(fn(x.ravel()), dtype=float).reshape(x.shape)
    if log_mode:
        if np.any(np.isnan(fv)) or np.any(fv == np.inf):
            raise ToleranceError("log-integrand is not finite inside the window", math.nan, math.nan)
        shift = np.max(fv, axis=1)
        dead = ~np.isfinite(shift)
        shift = np.where(dead, 0.0, shift)
        vals = np.exp(fv - shift[:, None])
        vals[dead] = 0.0
    else:
        if not np.all(np.isfinite(fv)):
            raise ToleranceError("integrand is not finite inside the window", math.nan, math.nan)
        shift = np.zeros(len(a))
        vals = fv
    value, err = _gk_rule(vals, half)
    return value, err, shift


def gk_integrate(
    fn: Callable[[np.ndarray], np.ndarray],
    breaks,
    *,
    rel_tol: float,
    abs_tol: float = 0.0,
    max_panels: int = 5000,
    log_mode: bool = False,
    local: bool = False,
) -> Panels:
    """Adaptive G7/K15 quadrature over consecutive ``breaks``.

    ``fn`` is vectorised. In ``log_mode`` it returns the logarithm of a
    positive integrand and each panel is rescaled by its own maximum.
    Global mode stops once the summed error is below
    ``max(rel_tol*|total|, abs_tol)``; ``local`` mode requires every panel to
    meet ``rel_tol`` relative to its own value, which keeps partial sums
    (cumulative tails) relatively accurate.
    """
    breaks = np.asarray(breaks, dtype=float)
    a, b = breaks[:-1].copy(), breaks[1:].copy()
    if np.any(b <= a):
        raise DomainError("integration breakpoints must be strictly increasing")
    width = float(breaks[-1] - breaks[0])
    value, err, shift = _evaluate(fn, a, b, log_mode)
    while True:
        peak = float(np.max(shift)) if log_mode else 0.0
        scale = np.exp(shift - peak)
        v, e = value * scale, err * scale
        if local:
            bad = e > rel_tol * np.abs(v) + abs_tol * (b - a) / width
            if not np.any(bad):
                break
        else:
            tol = max(rel_tol * abs(float(np.sum(v))), abs_tol)
            if float(np.sum(e)) <= tol:
                break
            bad = e > tol * (b - a) / width
            if not np.any(bad):
                bad = e == np.max(e)
        if len(a) + int(np.count_nonzero(bad)) > max_panels:
            total = float(np.sum(v)) * math.exp(peak)
            raise ToleranceError(
                f"quadrature did not converge within {max_panels} panels",
                total, float(np.sum(e)) * math.exp(peak),
            )
        ab, bb = a[bad], b[bad]
        mb = 0.5 * (ab + bb)
        na = np.concatenate([ab, mb])
        nb = np.concatenate([mb, bb])
        nv, ne, ns = _evaluate(fn, na, nb, log_mode)
        keep = ~bad
        a = np.concatenate([a[keep], na])
        b = np.concatenate([b[keep], nb])
        value = np.concatenate([value[keep], nv])
        err = np.concatenate([err[keep], ne])
        shift = np.concatenate([shift[keep], ns])
        order = np.argsort(a, kind="stable")
        a, b, value, err, shift = a[order], b[order], value[order], err[order], shift[order]
    return Panels(a, b, value, err, shift)


def integrate(fn, lo: float, hi: float, *, rel_tol=1e-10, abs_tol=1e-14, breaks=(), max_panels=5000):
    """Plain adaptive integral of a vectorised function on [lo, hi]."""
    pts = sorted({lo, hi, *[x for x in breaks if lo < x < hi]})
    panels = gk_integrate(fn, pts, rel_tol=rel_tol, abs_tol=abs_tol, max_panels=max_panels)
    return panels.total(), panels.total_error()


# ---------------------------------------------------------------------------
# inner log-mean
# ---------------------------------------------------------------------------


def _head_log_mean(f, r: float, m: float, t_h: float) -> float:
    """m * int_0^t_h t^(m-1) ln f(r t) dt from the profile's behaviour at 0."""
    asym = f.asymptote("zero")
    s_h = r * t_h
    log_sh = math.log(s_h)
    has_exp = asym.exp_coef != 0.0 and asym.exp_order < 0
    if has_exp and m + asym.exp_order <= 0:
        raise DivergenceError(
            f"ln f ~ {asym.exp_coef:g} s^{asym.exp_order:g} is not integrable against "
            f"s^{m - 1:g} at 0", "0", asym.exp_order,
        )
    exp_part = asym.exp_coef * s_h ** asym.exp_order if has_exp else 0.0
    d = float(f.log_eval(np.array([s_h]))[0]) - asym.power * log_sh - exp_part
    head = t_h ** m * (asym.power * (log_sh - 1.0 / m) + d)
    if has_exp:
        head += m * exp_part * t_h ** m / (m + asym.exp_order)
    return head


def log_mean_numeric(f, r: float, m: float, spec: QuadratureSpec | None = None) -> float:
    """m * int_0^1 t^(m-1) ln f(r t) dt by graded adaptive quadrature.

    The mesh in t is geometric with ratio 1/4 down to t = abs_tol / r (depth
    capped by ``max_subdivisions``); the remaining piece near 0 is taken from
    the profile's asymptotic form. Knots of ``f`` are always breakpoints.
    """
    spec = resolve_spec(spec)
    if not (r > 0 and m > 0):
        raise DomainError("log-mean needs r > 0 and m > 0")
    depth = math.ceil(math.log(r / spec.abs_tol, 4)) if r > spec.abs_tol else 1
    depth = int(min(max(depth, 1), spec.max_subdivisions))
    t_h = 4.0 ** (-depth)
    grid = 4.0 ** -np.arange(depth, -1, -1, dtype=float)
    knots = [k / r for k in f.knots() if t_h < k / r < 1.0]
    breaks = np.unique(np.concatenate([grid, np.asarray(knots, dtype=float)]))
    head = _head_log_mean(f, r, m, t_h)

    def fn(t):
        return t ** (m - 1.0) * f.log_eval(r * t)

    panels = gk_integrate(
        fn, breaks, rel_tol=spec.rel_tol, abs_tol=spec.abs_tol / max(m, 1.0),
        max_panels=max(spec.max_subdivisions, len(breaks)),
    )
    return m * panels.total() + head


def log_mean_inner(f, r: float, m: float, spec: QuadratureSpec | None = None) -> float:
    """L(r) = int_0^r s^(m-1) ln f(s) ds.

    Closed forms are used when the profile has one and the spec allows it;
    otherwise the graded quadrature of ``log_mean_numeric`` is used.
    """
    spec = resolve_spec(spec)
    if not (r > 0 and m > 0):
        raise DomainError("log-mean needs r > 0 and m > 0")
    closed = f.log_mean(np.array([float(r)]), m) if spec.symbolic_means else None
    expo = float(closed[0]) if closed is not None else log_mean_numeric(f, r, m, spec)
    return expo * math.exp(m * math.log(r)) / m


# ---------------------------------------------------------------------------
# outer integrals
# ---------------------------------------------------------------------------


def _power_piece_log_integral(log_coef: float, e: float, x: float, y: float):
    """log of int_x^y e^lc r^(e-1) dr, or the divergent endpoint."""
    if x == 0.0 and e <= 0:
        return None, "0"
    if y == math.inf and e >= 0:
        return None, "inf"
    if e == 0.0:
        return log_coef + math.log(math.log(y / x)), None
    if e > 0:
        if x == 0.0:
            return log_coef + e * math.log(y) - math.log(e), None
        return log_coef + e * math.log(y) + math.log(-math.expm1(e * math.log(x / y))) - math.log(e), None
    if y == math.inf:
        return log_coef + e * math.log(x) - math.log(-e), None
    return log_coef + e * math.log(x) + math.log(-math.expm1(e * math.log(y / x))) - math.log(-e), None


def piecewise_outer_integral(pw, Q: float, lower: float) -> IntegralResult:
    """Exact int_lower^inf pw(r) r^(Q-1) dr for a piecewise power profile."""
    edges = [0.0, *pw.knots_, math.inf]
    logs = []
    for j, (lc, c) in enumerate(zip(pw.log_coefs, pw.exponents)):
        x, y = max(edges[j], lower), edges[j + 1]
        if y <= x or lc == -math.inf:
            continue
        val, div = _power_piece_log_integral(lc, c + Q, x, y)
        if div is not None:
            return IntegralResult.divergent(div, f"net power exponent {c + Q - 1:g} at {div}")
        logs.append(val)
    lv = _logsumexp(np.array(logs))
    value = math.exp(lv) if lv < 709 else math.inf
    return IntegralResult(value, 4 * _EPS * value * max(len(logs), 1), lv, None, "closed form")


def piecewise_log_tails(pw, Q: float, radii: np.ndarray) -> np.ndarray:
    """Vectorised log int_R^inf pw(r) r^(Q-1) dr over an array of R > 0."""
    radii = np.asarray(radii, dtype=float)
    if pw.exponents[-1] + Q >= 0 and pw.log_coefs[-1] > -math.inf:
        return np.full(radii.shape, np.inf)
    edges = [0.0, *pw.knots_, math.inf]
    lr = np.log(radii)
    acc = np.full(radii.shape, -np.inf)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        for j, (lc, c) in enumerate(zip(pw.log_coefs, pw.exponents)):
            hi = edges[j + 1]
            if lc == -math.inf:
                continue
            lx = np.maximum(lr, math.log(edges[j]) if edges[j] > 0 else -np.inf)
            e = c + Q
            if hi == math.inf:
                part = lc + e * lx - math.log(-e)
            else:
                ly = math.log(hi)
                if e > 0:
                    part = lc + e * ly + np.log(-np.expm1(e * (lx - ly))) - math.log(e)
                elif e < 0:
                    part = lc + e * lx + np.log(-np.expm1(e * (ly - lx))) - math.log(-e)
                else:
                    part = lc + np.log(ly - lx)
                part = np.where(lx < ly, part, -np.inf)
            acc = np.logaddexp(acc, part)
    return acc


def _end_divergence(h, Q: float, end: str):
    """Return (divergence detail or None, net power exponent or None)."""
    asym = h.asymptote(end)
    if end == "inf":
        if asym.exp_coef != 0 and asym.exp_order > 0:
            if asym.exp_coef > 0:
                return f"integrand grows like exp({asym.exp_coef:g} r^{asym.exp_order:g}) at inf", None
            return None, -math.inf
        net = asym.power + Q
        if net >= 0:
            return f"integrand ~ r^{asym.power + Q - 1:g} is not integrable at inf", net
        return None, net
    if asym.exp_coef != 0 and asym.exp_order < 0:
        if asym.exp_coef > 0:
            return f"integrand grows like exp({asym.exp_coef:g} r^{asym.exp_order:g}) at 0", None
        return None, math.inf
    net = asym.power + Q
    if net <= 0:
        return f"integrand ~ r^{asym.power + Q - 1:g} is not integrable at 0", net
    return None, net


def _log_breaks(h, lo: float, hi: float) -> np.ndarray:
    tl, th = math.log(lo), math.log(hi)
    n = max(1, math.ceil((th - tl) / math.log(10.0)))
    pts = [np.linspace(tl, th, n + 1)]
    ks = [math.log(k) for k in h.knots() if lo < k < hi]
    pts.append(np.asarray(ks, dtype=float))
    return np.unique(np.concatenate(pts))


def _window(lower: float, spec: QuadratureSpec):
    lo = lower if lower > 0 else spec.r_min_hint
    hi = max(spec.r_max_hint, 1e3 * lo)
    return lo, hi


def outer_integral(h, G, lower: float = 0.0, spec: QuadratureSpec | None = None) -> IntegralResult:
    """int_lower^inf h(r) r^(Q-1) dr for a positive radial profile ``h``.

    The sphere factor is not included. Piecewise power integrands are done in
    closed form when the spec allows; otherwise quadrature runs over
    [r_min_hint, r_max_hint] (or from ``lower``) in log-radius and the head
    and tail outside the window come from the profile's asymptotic power
    exponents. Divergence is returned as an ``inf`` result naming the
    endpoint rather than raised.
    """
    spec = resolve_spec(spec)
    Q = G.Q if hasattr(G, "Q") else float(G)
    if lower < 0:
        raise DomainError("lower limit must be non-negative")
    if spec.symbolic_integrals:
        pw = h.as_piecewise_power()
        if pw is not None:
            return piecewise_outer_integral(pw, Q, lower)

    div, net_inf = _end_divergence(h, Q, "inf")
    if div is not None:
        return IntegralResult.divergent("inf", div)
    lo, hi = _window(lower, spec)
    logs, errs = [], []
    if lower == 0.0:
        div, net0 = _end_divergence(h, Q, "zero")
        if div is not None:
            return IntegralResult.divergent("0", div)
        if math.isfinite(net0):
            logs.append(float(h.log_eval(np.array([lo]))[0]) + Q * math.log(lo) - math.log(net0))

    def fn(t):
        return h.log_eval(np.exp(t)) + Q * t

    panels = gk_integrate(
        fn, _log_breaks(h, lo, hi), rel_tol=spec.rel_tol, log_mode=True,
        max_panels=spec.max_subdivisions,
    )
    logs.append(panels.log_total())
    errs.append(panels.log_error())
    tail_log = -math.inf
    if math.isfinite(net_inf):
        tail_log = float(h.log_eval(np.array([hi]))[0]) + Q * math.log(hi) - math.log(-net_inf)
    if spec.tail_policy == "analytic_power_tail":
        logs.append(tail_log)
    else:
        errs.append(tail_log)
    lv = _logsumexp(np.array(logs))
    le = _logsumexp(np.array(errs))
    value = math.exp(lv) if lv < 709 else math.inf
    return IntegralResult(value, math.exp(le) if le < 709 else math.inf, lv, None, "quadrature")


def log_tail_integrals(h, G, radii, spec: QuadratureSpec | None = None):
    """log J(R) = log int_R^inf h(r) r^(Q-1) dr for every R in sorted ``radii``.

    Returns an array; ``+inf`` everywhere when the tail diverges. The grid
    points become panel boundaries and each panel meets ``rel_tol`` locally,
    so every partial tail is relatively accurate.
    """
    spec = resolve_spec(spec)
    Q = G.Q if hasattr(G, "Q") else float(G)
    radii = np.asarray(radii, dtype=float)
    if np.any(np.diff(radii) <= 0) or radii[0] <= 0:
        raise DomainError("tail radii must be positive and increasing")
    if spec.symbolic_integrals:
        pw = h.as_piecewise_power()
        if pw is not None:
            return piecewise_log_tails(pw, Q, radii)
    div, net_inf = _end_divergence(h, Q, "inf")
    if div is not None:
        return np.full(len(radii), np.inf)
    hi = max(spec.r_max_hint, 1e3 * radii[-1])
    t_grid = np.log(np.append(radii, hi))
    ks = [math.log(k) for k in h.knots() if radii[0] < k < hi]
    breaks = np.unique(np.concatenate([t_grid, np.asarray(ks, dtype=float)]))

    def fn(t):
        return h.log_eval(np.exp(t)) + Q * t

    panels = gk_integrate(
        fn, breaks, rel_tol=spec.rel_tol, abs_tol=0.0, log_mode=True, local=True,
        max_panels=max(spec.max_subdivisions, 4 * len(breaks)),
    )
    tail_log = -math.inf
    if math.isfinite(net_inf):
        tail_log = float(h.log_eval(np.array([hi]))[0]) + Q * math.log(hi) - math.log(-net_inf)
    # accumulate from the right in log domain
    plog = panels.log_values()
    rev = np.logaddexp.accumulate(np.concatenate([[tail_log], plog[::-1]]))[::-1]
    # rev[i] = tail + sum of panels i..end; panel starts are panels.a
    starts = np.append(panels.a, math.log(hi))
    idx = np.searchsorted(starts, t_grid[:-1])
    return rev[idx]
