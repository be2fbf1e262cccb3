"""Positive radial profiles and their closed-form log-means.

Every profile evaluates through its logarithm, declares its knots (points
where it is not smooth) and its asymptotic form at 0 and at infinity. The
symbolic variants also know the normalised log-mean

    M_m[f](r) = m r^(-m) int_0^r s^(m-1) ln f(s) ds

in closed form, which is the exponent of the exponential mean operator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DivergenceError, DomainError
from .group import HomogeneousGroup
from .quadrature import QuadratureSpec, log_mean_numeric, resolve_spec

# relative size below which a closed-form correction term counts as zero
PURITY_TOL = 1e-12


@dataclass(frozen=True)
class Asymptote:
    """ln f(r) ~ power * ln r + exp_coef * r^exp_order + const at one end.

    The exponential part only counts when it dominates at that end, i.e.
    ``exp_order > 0`` at infinity and ``exp_order < 0`` at zero.
    """

    power: float = 0.0
    exp_coef: float = 0.0
    exp_order: float = 0.0

    def scaled(self, k: float) -> "Asymptote":
        return Asymptote(self.power * k, self.exp_coef * k, self.exp_order)


def _dominant(order: float, end: str) -> bool:
    return order > 0 if end == "inf" else order < 0


def _combine(x: Asymptote, y: Asymptote, end: str) -> Asymptote:
    power = x.power + y.power
    xe = x.exp_coef != 0 and _dominant(x.exp_order, end)
    ye = y.exp_coef != 0 and _dominant(y.exp_order, end)
    if xe and ye:
        if x.exp_order == y.exp_order:
            coef = x.exp_coef + y.exp_coef
            if abs(coef) <= PURITY_TOL * max(abs(x.exp_coef), abs(y.exp_coef)):
                return Asymptote(power)
            return Asymptote(power, coef, x.exp_order)
        stronger = x if abs(x.exp_order) > abs(y.exp_order) else y
        return Asymptote(power, stronger.exp_coef, stronger.exp_order)
    if xe:
        return Asymptote(power, x.exp_coef, x.exp_order)
    if ye:
        return Asymptote(power, y.exp_coef, y.exp_order)
    return Asymptote(power)


def _other(end: str) -> str:
    return "zero" if end == "inf" else "inf"


def _arr(r) -> np.ndarray:
    return np.asarray(r, dtype=float)


class RadialProfile:
    """Base class. Subclasses implement ``log_eval`` on numpy arrays."""

    def log_eval(self, r: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, r):
        r = _arr(r)
        if np.any(r <= 0):
            raise DomainError("profiles are defined for r > 0")
        out = np.exp(self.log_eval(np.atleast_1d(r)))
        return float(out[0]) if r.ndim == 0 else out.reshape(r.shape)

    def log(self, r):
        r = _arr(r)
        out = self.log_eval(np.atleast_1d(r))
        return float(out[0]) if r.ndim == 0 else out.reshape(r.shape)

    def knots(self) -> tuple[float, ...]:
        return ()

    def asymptote(self, end: str) -> Asymptote:
        raise NotImplementedError

    def log_mean(self, r: np.ndarray, m: float) -> np.ndarray | None:
        """Closed-form M_m[f](r), or None when only quadrature can do it."""
        return None

    def compose(self, e: float) -> "RadialProfile":
        """The profile r -> f(r^e)."""
        if e == 1:
            return self
        return Composed(self, e)

    def power(self, k: float) -> "RadialProfile":
        """The profile r -> f(r)^k."""
        if k == 1:
            return self
        return Powered(self, k)

    def as_piecewise_power(self) -> "PiecewisePower | None":
        return None

    def __mul__(self, other: "RadialProfile") -> "RadialProfile":
        return product(self, other)


# ---------------------------------------------------------------------------
# symbolic variants
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PowerLaw(RadialProfile):
    """r -> exp(log_coef) * r^c."""

    c: float
    log_coef: float = 0.0

    def log_eval(self, r):
        return self.log_coef + self.c * np.log(r)

    def asymptote(self, end):
        return Asymptote(self.c)

    def log_mean(self, r, m):
        return self.log_coef + self.c * np.log(r) - self.c / m

    def compose(self, e):
        return PowerLaw(self.c * e, self.log_coef)

    def power(self, k):
        return PowerLaw(self.c * k, self.log_coef * k)

    def as_piecewise_power(self):
        return PiecewisePower((), (self.log_coef,), (self.c,))


def constant(value: float) -> PowerLaw:
    if not value > 0:
        raise DomainError("constant profile must be positive")
    return PowerLaw(0.0, math.log(value))


@dataclass(frozen=True)
class BallPower(RadialProfile):
    """r -> |B(0, r)|^a."""

    a: float
    group: HomogeneousGroup

    @property
    def as_power_law(self) -> PowerLaw:
        return PowerLaw(self.group.Q * self.a, self.a * self.group.log_unit_ball_volume)

    def log_eval(self, r):
        return self.as_power_law.log_eval(r)

    def asymptote(self, end):
        return Asymptote(self.group.Q * self.a)

    def log_mean(self, r, m):
        return self.as_power_law.log_mean(r, m)

    def compose(self, e):
        return self.as_power_law.compose(e)

    def power(self, k):
        return BallPower(self.a * k, self.group)

    def as_piecewise_power(self):
        return self.as_power_law.as_piecewise_power()


@dataclass(frozen=True)
class ExpPower(RadialProfile):
    """r -> exp(eta * r^gamma)."""

    eta: float
    gamma: float

    def log_eval(self, r):
        return self.eta * np.exp(self.gamma * np.log(r))

    def asymptote(self, end):
        if self.eta != 0 and _dominant(self.gamma, end):
            return Asymptote(0.0, self.eta, self.gamma)
        return Asymptote(0.0)

    def log_mean(self, r, m):
        if self.gamma == 0:
            return np.full(np.shape(r), self.eta, dtype=float)
        if self.eta != 0 and m + self.gamma <= 0:
            raise DivergenceError(
                f"ln f = {self.eta:g} s^{self.gamma:g} is not integrable against s^{m - 1:g} at 0",
                "0", self.gamma,
            )
        return self.eta * np.exp(self.gamma * np.log(r)) * (m / (m + self.gamma))

    def compose(self, e):
        return ExpPower(self.eta, self.gamma * e)

    def power(self, k):
        return ExpPower(self.eta * k, self.gamma)

    def as_piecewise_power(self):
        if self.eta == 0 or self.gamma == 0:
            return PiecewisePower((), (self.eta if self.gamma == 0 else 0.0,), (0.0,))
        return None


@dataclass(frozen=True)
class PiecewisePower(RadialProfile):
    """exp(log_coefs[j]) * r^exponents[j] on the j-th interval cut by ``knots_``.

    Intervals are closed on the right: piece j covers (k_(j-1), k_j].
    """

    knots_: tuple[float, ...]
    log_coefs: tuple[float, ...]
    exponents: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "knots_", tuple(float(k) for k in self.knots_))
        object.__setattr__(self, "log_coefs", tuple(float(v) for v in self.log_coefs))
        object.__setattr__(self, "exponents", tuple(float(v) for v in self.exponents))
        n = len(self.knots_)
        if len(self.log_coefs) != n + 1 or len(self.exponents) != n + 1:
            raise DomainError("piecewise power needs one more piece than knots")
        if any(math.isnan(v) or v == math.inf for v in self.log_coefs + self.exponents):
            raise DomainError("piecewise power coefficients must be finite (log_coef may be -inf)")
        if any(math.isinf(c) for c in self.exponents):
            raise DomainError("piecewise power exponents must be finite")
        if any(k <= 0 for k in self.knots_) or any(
            b <= a for a, b in zip(self.knots_, self.knots_[1:])
        ):
            raise DomainError("knots must be positive and strictly increasing")

    def _piece(self, r):
        return np.searchsorted(np.asarray(self.knots_), r, side="left")

    def log_eval(self, r):
        j = self._piece(r)
        return np.asarray(self.log_coefs)[j] + np.asarray(self.exponents)[j] * np.log(r)

    def knots(self):
        return self.knots_

    def asymptote(self, end):
        j = 0 if end == "zero" else -1
        if self.log_coefs[j] == -math.inf:
            # an identically zero end piece vanishes faster than any power
            return Asymptote(math.inf if end == "zero" else -math.inf)
        return Asymptote(self.exponents[j])

    @property
    def has_zero_piece(self) -> bool:
        return any(v == -math.inf for v in self.log_coefs)

    def mean_corrections(self, m: float):
        """Per-piece coefficients of the r^(-m) term in M_m[f].

        On piece j the normalised log-mean equals
        ``lc_j + c_j (ln r - 1/m) + (k_(j-1)/r)^m * K_j``; returns the list of
        K_j and a matching list of magnitudes used to judge K_j == 0.
        """
        edges = (0.0,) + self.knots_
        lc, cs = self.log_coefs, self.exponents

        def g(i, s):
            return lc[i] + cs[i] * (math.log(s) - 1.0 / m)

        Ks, scales = [0.0], [0.0]
        for j in range(1, len(lc)):
            kj = edges[j]
            terms = []
            for i in range(j):
                hi = edges[i + 1]
                terms.append(math.exp(m * math.log(hi / kj)) * g(i, hi))
                if edges[i] > 0:
                    terms.append(-math.exp(m * math.log(edges[i] / kj)) * g(i, edges[i]))
            terms.append(-g(j, kj))
            Ks.append(math.fsum(terms))
            scales.append(math.fsum(abs(t) for t in terms))
        return Ks, scales

    def log_mean(self, r, m):
        if self.has_zero_piece:
            raise DomainError("profile vanishes on an interval, so its log-mean is not finite")
        Ks, _ = self.mean_corrections(m)
        j = self._piece(r)
        lc = np.asarray(self.log_coefs)[j]
        c = np.asarray(self.exponents)[j]
        lower = np.asarray((0.0,) + self.knots_)[j]
        with np.errstate(divide="ignore"):
            ratio = np.where(lower > 0, np.exp(m * (np.log(np.where(lower > 0, lower, 1.0)) - np.log(r))), 0.0)
        return lc + c * (np.log(r) - 1.0 / m) + ratio * np.asarray(Ks)[j]

    def mean_is_pure(self, m: float) -> bool:
        if self.has_zero_piece:
            return False
        Ks, scales = self.mean_corrections(m)
        return all(abs(K) <= PURITY_TOL * max(s, 1.0) for K, s in zip(Ks, scales))

    def compose(self, e):
        if e > 0:
            return PiecewisePower(
                tuple(k ** (1.0 / e) for k in self.knots_),
                self.log_coefs, tuple(c * e for c in self.exponents),
            )
        return PiecewisePower(
            tuple(k ** (1.0 / e) for k in reversed(self.knots_)),
            tuple(reversed(self.log_coefs)), tuple(c * e for c in reversed(self.exponents)),
        )

    def power(self, k):
        return PiecewisePower(
            self.knots_, tuple(v * k for v in self.log_coefs), tuple(c * k for c in self.exponents)
        )

    def as_piecewise_power(self):
        return self

    def times(self, other: "PiecewisePower") -> "PiecewisePower":
        knots = tuple(sorted(set(self.knots_) | set(other.knots_)))
        edges = np.array((0.0,) + knots + (math.inf,))
        probe = np.empty(len(knots) + 1)
        for j in range(len(knots) + 1):
            lo, hi = edges[j], edges[j + 1]
            probe[j] = hi if math.isfinite(hi) else 2.0 * lo if lo > 0 else 1.0
        i, k = self._piece(probe), other._piece(probe)
        return PiecewisePower(
            knots,
            tuple(np.asarray(self.log_coefs)[i] + np.asarray(other.log_coefs)[k]),
            tuple(np.asarray(self.exponents)[i] + np.asarray(other.exponents)[k]),
        )


def cutoff_power_tail(R0: float, inner_value: float = 1.0, gamma: float = 1.0,
                      tail_multiplier: float = 1.0, head_exponent: float = 0.0) -> PiecewisePower:
    """inner_value * r^head_exponent on (0, R0] and tail_multiplier * r^-gamma beyond.

    With ``head_exponent = 0`` this is the cutoff-plus-power-tail family used
    for sharpness; a non-zero head exponent extends it to weights whose
    power is at most -1.
    """
    if not (R0 > 0 and inner_value > 0 and tail_multiplier >= 0):
        raise DomainError("cutoff profile needs R0, inner_value > 0 and tail_multiplier >= 0")
    tail = math.log(tail_multiplier) if tail_multiplier > 0 else -math.inf
    return PiecewisePower((R0,), (math.log(inner_value), tail), (head_exponent, -gamma))


def indicator(lo: float, hi: float = math.inf) -> PiecewisePower:
    """chi of [lo, hi] (lo may be 0); zero elsewhere, so only usable in outer integrals."""
    if not (0 <= lo < hi):
        raise DomainError("indicator needs 0 <= lo < hi")
    knots, lcs = [], []
    if lo > 0:
        knots.append(lo)
        lcs.append(-math.inf)
    lcs.append(0.0)
    if hi < math.inf:
        knots.append(hi)
        lcs.append(-math.inf)
    return PiecewisePower(tuple(knots), tuple(lcs), (0.0,) * len(lcs))


# ---------------------------------------------------------------------------
# generic variants
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SumPower(RadialProfile):
    """r -> (sum_i |B(0, r)|^(a_i))^k."""

    exponents: tuple[float, ...]
    group: HomogeneousGroup
    k: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "exponents", tuple(float(a) for a in self.exponents))
        if not self.exponents:
            raise DomainError("sum of powers needs at least one exponent")

    def log_eval(self, r):
        lb = self.group.log_unit_ball_volume + self.group.Q * np.log(r)
        terms = np.asarray(self.exponents)[:, None] * np.atleast_1d(lb)[None, :]
        top = np.max(terms, axis=0)
        return self.k * (top + np.log(np.sum(np.exp(terms - top), axis=0)))

    def asymptote(self, end):
        a = max(self.exponents) if end == "inf" else min(self.exponents)
        return Asymptote(self.k * self.group.Q * a)

    def power(self, k):
        return SumPower(self.exponents, self.group, self.k * k)


@dataclass(frozen=True)
class Sampled(RadialProfile):
    """Log-log linear interpolation through (nodes, values).

    Beyond the sampled range the end slopes are continued, so the profile
    stays a pure power at both ends.
    """

    nodes: tuple[float, ...]
    values: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(float(x) for x in self.nodes))
        object.__setattr__(self, "values", tuple(float(x) for x in self.values))
        if len(self.nodes) < 2 or len(self.nodes) != len(self.values):
            raise DomainError("sampled profile needs at least two (node, value) pairs")
        if any(x <= 0 for x in self.nodes) or any(b <= a for a, b in zip(self.nodes, self.nodes[1:])):
            raise DomainError("sample nodes must be positive and strictly increasing")
        if any(v <= 0 for v in self.values):
            raise DomainError("sample values must be positive")

    def _slopes(self):
        x, y = np.log(self.nodes), np.log(self.values)
        return (y[1] - y[0]) / (x[1] - x[0]), (y[-1] - y[-2]) / (x[-1] - x[-2])

    def log_eval(self, r):
        x, y = np.log(self.nodes), np.log(self.values)
        t = np.log(r)
        s0, s1 = self._slopes()
        out = np.interp(t, x, y)
        out = np.where(t < x[0], y[0] + s0 * (t - x[0]), out)
        return np.where(t > x[-1], y[-1] + s1 * (t - x[-1]), out)

    def knots(self):
        return self.nodes

    def asymptote(self, end):
        s0, s1 = self._slopes()
        return Asymptote(s0 if end == "zero" else s1)


@dataclass(frozen=True)
class Composed(RadialProfile):
    """r -> base(r^e)."""

    base: RadialProfile
    e: float

    def log_eval(self, r):
        return self.base.log_eval(np.exp(self.e * np.log(r)))

    def knots(self):
        return tuple(sorted(k ** (1.0 / self.e) for k in self.base.knots()))

    def asymptote(self, end):
        src = self.base.asymptote(end if self.e > 0 else _other(end))
        return Asymptote(src.power * self.e, src.exp_coef, src.exp_order * self.e)

    def compose(self, e):
        return self.base.compose(self.e * e)

    def as_piecewise_power(self):
        pw = self.base.as_piecewise_power()
        return None if pw is None else pw.compose(self.e)


@dataclass(frozen=True)
class Powered(RadialProfile):
    """r -> base(r)^k."""

    base: RadialProfile
    k: float

    def log_eval(self, r):
        return self.k * self.base.log_eval(r)

    def knots(self):
        return self.base.knots()

    def asymptote(self, end):
        return self.base.asymptote(end).scaled(self.k)

    def log_mean(self, r, m):
        inner = self.base.log_mean(r, m)
        return None if inner is None else self.k * inner

    def compose(self, e):
        return power(self.base.compose(e), self.k)

    def power(self, k):
        return power(self.base, self.k * k)

    def as_piecewise_power(self):
        pw = self.base.as_piecewise_power()
        return None if pw is None else pw.power(self.k)


@dataclass(frozen=True)
class Product(RadialProfile):
    factors: tuple[RadialProfile, ...]

    def log_eval(self, r):
        out = np.zeros(np.shape(r))
        for f in self.factors:
            out = out + f.log_eval(r)
        return out

    def knots(self):
        return tuple(sorted({k for f in self.factors for k in f.knots()}))

    def asymptote(self, end):
        acc = Asymptote(0.0)
        for f in self.factors:
            acc = _combine(acc, f.asymptote(end), end)
        return acc

    def log_mean(self, r, m):
        out = np.zeros(np.shape(r))
        for f in self.factors:
            part = f.log_mean(r, m)
            if part is None:
                return None
            out = out + part
        return out

    def compose(self, e):
        return product(*(f.compose(e) for f in self.factors))

    def power(self, k):
        return product(*(power(f, k) for f in self.factors))

    def as_piecewise_power(self):
        acc = PiecewisePower((), (0.0,), (0.0,))
        for f in self.factors:
            pw = f.as_piecewise_power()
            if pw is None:
                return None
            acc = acc.times(pw)
        return acc


@dataclass(frozen=True)
class LogMean(RadialProfile):
    """r -> exp(k * M_m[base](r)), i.e. the exponential mean raised to k.

    Evaluated from the base profile's closed form when the spec allows, and
    by graded quadrature otherwise (memoised per radius).
    """

    base: RadialProfile
    m: float
    k: float = 1.0
    spec: QuadratureSpec = field(default_factory=QuadratureSpec)
    _memo: dict = field(default_factory=dict, compare=False, hash=False, repr=False)

    def exponent(self, r: np.ndarray) -> np.ndarray:
        r = np.atleast_1d(_arr(r))
        if self.spec.symbolic_means:
            closed = self.base.log_mean(r, self.m)
            if closed is not None:
                return np.asarray(closed, dtype=float)
        out = np.empty(r.shape)
        memo = self._memo
        for i, x in enumerate(r.tolist()):
            v = memo.get(x)
            if v is None:
                v = log_mean_numeric(self.base, x, self.m, self.spec)
                memo[x] = v
            out[i] = v
        return out

    def log_eval(self, r):
        return self.k * self.exponent(r)

    def knots(self):
        return self.base.knots()

    def asymptote(self, end):
        src = self.base.asymptote(end)
        if src.exp_coef != 0 and _dominant(src.exp_order, end):
            d = self.m + src.exp_order
            coef = src.exp_coef * self.m / d if d > 0 else math.copysign(math.inf, src.exp_coef)
            return Asymptote(src.power * self.k, coef * self.k, src.exp_order)
        return Asymptote(src.power * self.k)

    def power(self, k):
        return LogMean(self.base, self.m, self.k * k, self.spec)

    def as_piecewise_power(self):
        if not self.spec.symbolic_integrals:
            return None
        pw = self.base.as_piecewise_power()
        if pw is None or not pw.mean_is_pure(self.m):
            return None
        return _pure_mean(pw, self.m).power(self.k)


def _pure_mean(pw: PiecewisePower, m: float) -> PiecewisePower:
    return PiecewisePower(
        pw.knots_, tuple(lc - c / m for lc, c in zip(pw.log_coefs, pw.exponents)), pw.exponents
    )


# ---------------------------------------------------------------------------
# factories with symbolic simplification
# ---------------------------------------------------------------------------


def product(*profiles: RadialProfile) -> RadialProfile:
    """Product of profiles, merging powers, exponentials and piecewise powers."""
    flat: list[RadialProfile] = []
    for p in profiles:
        flat.extend(p.factors if isinstance(p, Product) else (p,))

    pl_c, pl_lc, has_pl = 0.0, 0.0, False
    exps: dict[float, float] = {}
    pws: list[PiecewisePower] = []
    rest: list[RadialProfile] = []
    for p in flat:
        if isinstance(p, BallPower):
            p = p.as_power_law
        if isinstance(p, PowerLaw):
            pl_c += p.c
            pl_lc += p.log_coef
            has_pl = True
        elif isinstance(p, ExpPower):
            if p.gamma == 0:
                pl_lc += p.eta
                has_pl = True
            else:
                exps[p.gamma] = exps.get(p.gamma, 0.0) + p.eta
        elif isinstance(p, PiecewisePower):
            pws.append(p)
        else:
            rest.append(p)

    out: list[RadialProfile] = []
    if pws:
        acc = pws[0]
        for q in pws[1:]:
            acc = acc.times(q)
        if has_pl:
            acc = acc.times(PowerLaw(pl_c, pl_lc).as_piecewise_power())
        out.append(acc)
    elif has_pl and (pl_c != 0 or pl_lc != 0 or not (exps or rest)):
        out.append(PowerLaw(pl_c, pl_lc))
    for g in sorted(exps):
        if exps[g] != 0:
            out.append(ExpPower(exps[g], g))
    out.extend(rest)
    if not out:
        return PowerLaw(0.0, 0.0)
    if len(out) == 1:
        return out[0]
    return Product(tuple(out))


def power(f: RadialProfile, k: float) -> RadialProfile:
    """f^k, kept symbolic whenever the variant allows it."""
    if k == 1:
        return f
    return f.power(k)


def mean_profile(f: RadialProfile, m: float, k: float = 1.0,
                 spec: QuadratureSpec | None = None) -> RadialProfile:
    """The profile r -> exp(M_m[f](r))^k.

    Closed forms are returned for powers, exponentials of powers, piecewise
    powers whose mean has no r^(-m) correction, and products of these; the
    generic ``LogMean`` node is used otherwise.
    """
    spec = resolve_spec(spec)
    if not m > 0:
        raise DomainError("mean order must be positive")
    asym = f.asymptote("zero")
    if asym.exp_coef != 0 and asym.exp_order < 0 and m + asym.exp_order <= 0:
        raise DivergenceError(
            f"ln f ~ {asym.exp_coef:g} s^{asym.exp_order:g} is not integrable against "
            f"s^{m - 1:g} at 0", "0", asym.exp_order,
        )
    if isinstance(f, PiecewisePower) and f.has_zero_piece:
        raise DomainError("profile vanishes on an interval, so its log-mean is not finite")
    if spec.symbolic_means:
        if isinstance(f, BallPower):
            f = f.as_power_law
        if isinstance(f, PowerLaw):
            return PowerLaw(f.c * k, k * (f.log_coef - f.c / m))
        if isinstance(f, ExpPower):
            if f.gamma == 0:
                return PowerLaw(0.0, k * f.eta)
            return ExpPower(k * f.eta * m / (m + f.gamma), f.gamma)
        if isinstance(f, Product):
            return product(*(mean_profile(g, m, k, spec) for g in f.factors))
        if isinstance(f, Powered):
            return mean_profile(f.base, m, k * f.k, spec)
        if isinstance(f, PiecewisePower) and f.mean_is_pure(m):
            return _pure_mean(f, m).power(k)
    return LogMean(f, m, k, spec)


def dual_mean_profile(f: RadialProfile, m: float, k: float = 1.0,
                      spec: QuadratureSpec | None = None) -> RadialProfile:
    """r -> exp(m r^m int_r^inf s^(-m-1) ln f(s) ds)^k, through inversion."""
    return mean_profile(f.compose(-1.0), m, k, spec).compose(-1.0)
