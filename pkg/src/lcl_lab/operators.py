"""Exponential-mean operators and weight transforms in radial form.

With m = beta*Q the forward operator is

    M[f](r) = exp(m r^(-m) int_0^r s^(m-1) ln f(s) ds)

and the dual operator averages ln f over the exterior of the ball,

    M~[f](r) = exp(m r^m int_r^inf s^(-m-1) ln f(s) ds) = M[f o inv](1/r).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError
from .group import HomogeneousGroup
from .profiles import (
    BallPower,
    ExpPower,
    PowerLaw,
    RadialProfile,
    SumPower,
    constant,
    mean_profile,
    power,
    product,
)
from .quadrature import QuadratureSpec, resolve_spec


@dataclass(frozen=True)
class InequalityParams:
    """Exponents (p, q), mean order beta and, optionally, the criterion alpha."""

    p: float
    q: float
    beta: float
    alpha: float | None = None

    def __post_init__(self):
        if not (0 < self.p <= self.q < math.inf):
            raise DomainError(f"need 0 < p <= q < inf, got p={self.p!r}, q={self.q!r}")
        if not (self.beta > 0 and math.isfinite(self.beta)):
            raise DomainError(f"beta must be positive, got {self.beta!r}")
        if self.alpha is not None and not (self.alpha > 0 and math.isfinite(self.alpha)):
            raise DomainError(f"alpha must be positive, got {self.alpha!r}")

    def with_alpha(self, alpha: float) -> "InequalityParams":
        return InequalityParams(self.p, self.q, self.beta, alpha)

    def with_beta(self, beta: float) -> "InequalityParams":
        return InequalityParams(self.p, self.q, beta, self.alpha)

    def order(self, G: HomogeneousGroup) -> float:
        return self.beta * G.Q


# ---------------------------------------------------------------------------
# weight descriptors
# ---------------------------------------------------------------------------


class WeightSpec:
    """A radial weight that becomes a profile once the group (and beta) is known."""

    def profile(self, G: HomogeneousGroup, beta: float = 1.0,
                spec: QuadratureSpec | None = None) -> RadialProfile:
        raise NotImplementedError

    def describe(self) -> str:
        raise NotImplementedError


@dataclass(frozen=True)
class BallPowerWeight(WeightSpec):
    """|B(0, r)|^a."""

    a: float

    def profile(self, G, beta=1.0, spec=None):
        return BallPower(float(self.a), G)

    def describe(self):
        return f"ball_power:{self.a!r}"


@dataclass(frozen=True)
class ExpPowerWeight(WeightSpec):
    """scale * exp(eta r^gamma)."""

    eta: float
    gamma: float
    scale: float = 1.0

    def __post_init__(self):
        if not self.scale > 0:
            raise DomainError("exponential weight scale must be positive")

    def profile(self, G, beta=1.0, spec=None):
        return product(constant(self.scale), ExpPower(float(self.eta), float(self.gamma)))

    def describe(self):
        tail = "" if self.scale == 1.0 else f":{self.scale!r}"
        return f"exp_power:{self.eta!r}:{self.gamma!r}{tail}"


@dataclass(frozen=True)
class MultinomialWeight(WeightSpec):
    """(sum_i |B(0, r)|^(a_i))^k with every a_i > 0."""

    a_list: tuple[float, ...]
    k: int

    def __post_init__(self):
        object.__setattr__(self, "a_list", tuple(float(a) for a in self.a_list))
        if not self.a_list:
            raise DomainError("multinomial weight needs at least one exponent")
        if any(not a > 0 for a in self.a_list):
            raise DomainError("multinomial exponents must be positive")
        if int(self.k) != self.k or self.k < 0:
            raise DomainError("multinomial power k must be a non-negative integer")
        object.__setattr__(self, "k", int(self.k))

    def profile(self, G, beta=1.0, spec=None):
        return SumPower(self.a_list, G, float(self.k))

    def describe(self):
        return "multinomial:" + ",".join(repr(a) for a in self.a_list) + f":{self.k}"


@dataclass(frozen=True)
class MatchedWeight(WeightSpec):
    """The weight u = M[v] generated from v by the forward mean."""

    v: WeightSpec

    def profile(self, G, beta=1.0, spec=None):
        return matched_weight(self.v, beta, G, spec)

    def describe(self):
        return f"matched:{self.v.describe()}"


@dataclass(frozen=True)
class CustomWeight(WeightSpec):
    profile_: RadialProfile
    label: str = "custom"

    def profile(self, G, beta=1.0, spec=None):
        return self.profile_

    def describe(self):
        return self.label


def weight_profile(w, G: HomogeneousGroup, beta: float = 1.0,
                   spec: QuadratureSpec | None = None) -> RadialProfile:
    """Accept either a WeightSpec or a ready profile."""
    if isinstance(w, RadialProfile):
        return w
    if isinstance(w, WeightSpec):
        return w.profile(G, beta, spec)
    raise DomainError(f"not a weight: {w!r}")


# ---------------------------------------------------------------------------
# operators
# ---------------------------------------------------------------------------


def _check_radius(r: float):
    if not (r > 0 and math.isfinite(r)):
        raise DomainError(f"radius must be positive and finite, got {r!r}")


def log_forward_mean(f: RadialProfile, r: float, beta: float, G: HomogeneousGroup,
                     spec: QuadratureSpec | None = None) -> float:
    """ln M[f](r) = beta Q r^(-beta Q) int_0^r s^(beta Q - 1) ln f(s) ds."""
    _check_radius(r)
    if not beta > 0:
        raise DomainError("beta must be positive")
    return mean_profile(f, beta * G.Q, 1.0, resolve_spec(spec)).log(float(r))


def forward_mean(f: RadialProfile, r: float, beta: float, G: HomogeneousGroup,
                 spec: QuadratureSpec | None = None) -> float:
    """M[f](r); use ``log_forward_mean`` when the value may overflow."""
    return math.exp(log_forward_mean(f, r, beta, G, spec))


def log_dual_mean(f: RadialProfile, r: float, beta: float, G: HomogeneousGroup,
                  spec: QuadratureSpec | None = None) -> float:
    """ln of the dual mean, computed as ln M[f o inv](1/r)."""
    _check_radius(r)
    return log_forward_mean(f.compose(-1.0), 1.0 / r, beta, G, spec)


def dual_mean(f: RadialProfile, r: float, beta: float, G: HomogeneousGroup,
              spec: QuadratureSpec | None = None) -> float:
    return math.exp(log_dual_mean(f, r, beta, G, spec))


def transformed_weight(u, v, params: InequalityParams, G: HomogeneousGroup,
                       spec: QuadratureSpec | None = None) -> RadialProfile:
    """w = u * M[1/v]^(q/p), the weight entering the A(alpha) criterion."""
    spec = resolve_spec(spec)
    up = weight_profile(u, G, params.beta, spec)
    vp = weight_profile(v, G, params.beta, spec)
    return product(up, mean_profile(vp, params.order(G), -params.q / params.p, spec))


def dual_weight_transform(u, G: HomogeneousGroup, beta: float = 1.0,
                          spec: QuadratureSpec | None = None) -> RadialProfile:
    """r -> r^(-2Q) u(1/r); applying it twice gives back u."""
    up = weight_profile(u, G, beta, spec)
    return product(PowerLaw(-2.0 * G.Q), up.compose(-1.0))


def matched_weight(v, beta: float, G: HomogeneousGroup,
                   spec: QuadratureSpec | None = None) -> RadialProfile:
    """u = M[v]; with this u the inequality has constant e^(1/beta)."""
    spec = resolve_spec(spec)
    return mean_profile(weight_profile(v, G, beta, spec), beta * G.Q, 1.0, spec)


def beta_reduce(u, v, f: RadialProfile, beta: float, G: HomogeneousGroup,
                spec: QuadratureSpec | None = None):
    """Substitute s = r^beta so that the order-beta problem becomes order 1.

    Returns ``(u_b, v_b, g)`` with g(r) = f(r^(1/beta)) and
    u_b(r) = r^(Q(1-beta)/beta) / beta * u(r^(1/beta)) (likewise v_b), so
    that the forward mean of order beta of f at r^(1/beta) equals the
    order-1 mean of g at r and both weighted integrals are unchanged.
    """
    if not beta > 0:
        raise DomainError("beta must be positive")
    up = weight_profile(u, G, beta, spec)
    vp = weight_profile(v, G, beta, spec)
    if beta == 1:
        return up, vp, f
    jac = PowerLaw(G.Q * (1.0 - beta) / beta, -math.log(beta))
    inv = 1.0 / beta
    return product(jac, up.compose(inv)), product(jac, vp.compose(inv)), f.compose(inv)


def inverse(f: RadialProfile) -> RadialProfile:
    """1/f."""
    return power(f, -1.0)
