"""Radial data of a homogeneous group: homogeneous dimension and sphere measure."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError


@dataclass(frozen=True)
class HomogeneousGroup:
    """A homogeneous group reduced to the two scalars radial integrals need.

    ``Q`` is the homogeneous dimension and ``sphere_measure`` the total
    measure of the unit quasi-sphere. Both only enter as exponents and
    prefactors, so ``Q`` is allowed to be any positive real.
    """

    Q: float
    sphere_measure: float
    label: str = "custom"

    def __post_init__(self) -> None:
        if not (math.isfinite(self.Q) and self.Q > 0):
            raise DomainError(f"homogeneous dimension must be positive, got {self.Q!r}")
        if not (math.isfinite(self.sphere_measure) and self.sphere_measure > 0):
            raise DomainError(f"sphere measure must be positive, got {self.sphere_measure!r}")

    @property
    def unit_ball_volume(self) -> float:
        return self.sphere_measure / self.Q

    @property
    def log_unit_ball_volume(self) -> float:
        return math.log(self.sphere_measure) - math.log(self.Q)

    def log_ball_volume(self, r):
        """ln |B(0, r)| = ln(|S|/Q) + Q ln r, elementwise."""
        r = np.asarray(r, dtype=float)
        if np.any(r <= 0):
            raise DomainError("ball radius must be positive")
        out = self.log_unit_ball_volume + self.Q * np.log(r)
        return float(out) if out.ndim == 0 else out

    def preset(self) -> str:
        """The CLI preset string that reconstructs this group."""
        if self.label.startswith("euclidean:") or self.label.startswith("anisotropic:"):
            return self.label
        return f"custom:{self.Q!r}:{self.sphere_measure!r}"


def euclidean_sphere_measure(n: int) -> float:
    """Surface measure 2 pi^(n/2) / Gamma(n/2) of the unit sphere in R^n."""
    return math.exp(math.log(2.0) + 0.5 * n * math.log(math.pi) - math.lgamma(0.5 * n))


def make_group(kind: str, *args) -> HomogeneousGroup:
    """Build a group from a preset.

    ``make_group("euclidean", n)``, ``make_group("anisotropic", (v1, ..., vN), sigma)``
    or ``make_group("custom", Q, sigma)``. The sphere measure of anisotropic
    groups must be supplied by the caller; it is never derived from the
    dilation exponents.
    """
    if kind == "euclidean":
        (n,) = args
        if int(n) != n or n < 1:
            raise DomainError(f"euclidean dimension must be a positive integer, got {n!r}")
        n = int(n)
        return HomogeneousGroup(float(n), euclidean_sphere_measure(n), f"euclidean:{n}")
    if kind == "anisotropic":
        exponents, sigma = args
        exponents = tuple(float(v) for v in exponents)
        if not exponents or any(not (v > 0) for v in exponents):
            raise DomainError("dilation exponents must be strictly positive")
        label = "anisotropic:" + ",".join(repr(v) for v in exponents) + f":{float(sigma)!r}"
        return HomogeneousGroup(math.fsum(exponents), float(sigma), label)
    if kind == "custom":
        Q, sigma = args
        return HomogeneousGroup(float(Q), float(sigma))
    raise DomainError(f"unknown group preset {kind!r}")


def parse_group(text: str) -> HomogeneousGroup:
    """Parse ``euclidean:n``, ``anisotropic:v1,...,vN:sigma`` or ``custom:Q:sigma``."""
    parts = text.strip().split(":")
    try:
        if parts[0] == "euclidean" and len(parts) == 2:
            return make_group("euclidean", int(parts[1]))
        if parts[0] == "anisotropic" and len(parts) == 3:
            exps = [float(v) for v in parts[1].split(",")]
            return make_group("anisotropic", exps, float(parts[2]))
        if parts[0] == "custom" and len(parts) == 3:
            return make_group("custom", float(parts[1]), float(parts[2]))
    except ValueError as exc:
        if isinstance(exc, DomainError):
            raise
        raise DomainError(f"malformed group preset {text!r}: {exc}") from None
    raise DomainError(f"malformed group preset {text!r}")


def ball_volume(G: HomogeneousGroup, r: float) -> float:
    """|B(0, r)| = (|S|/Q) r^Q, evaluated through its logarithm (inf on overflow)."""
    if not r > 0:
        raise DomainError(f"ball radius must be positive, got {r!r}")
    lv = G.log_ball_volume(r)
    return math.inf if lv > 709.78 else math.exp(lv)


def polar_integral(G: HomogeneousGroup, g, spec=None):
    """|S| times the radial integral of g(r) r^(Q-1) over (0, inf).

    Returns an ``IntegralResult``; a divergent integral comes back with
    ``value == inf`` and ``divergence`` naming the endpoint.
    """
    from .quadrature import outer_integral

    res = outer_integral(g, G, 0.0, spec)
    return res.scaled(G.sphere_measure)
