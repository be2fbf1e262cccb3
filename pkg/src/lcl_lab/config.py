"""Run configuration: TOML parsing with field-path errors, and compact descriptors.

Descriptors are short strings such as ``ball_power:1.5``,
``exp_power:0.3:2``, ``cutoff_tail:auto:3`` (``auto`` = e^(1/(beta Q))),
``multinomial:1,2:2`` or ``matched:exp_power:1:0.5``. Profiles can be
multiplied with ``*``.
"""

from __future__ import annotations

import dataclasses
import hashlib
import math
from dataclasses import dataclass, field, fields
from typing import Any, get_type_hints

import tomli
import tomli_w

from .errors import DomainError
from .group import HomogeneousGroup, parse_group
from .operators import (
    BallPowerWeight,
    ExpPowerWeight,
    InequalityParams,
    MatchedWeight,
    MultinomialWeight,
    WeightSpec,
)
from .profiles import (
    BallPower,
    ExpPower,
    PowerLaw,
    RadialProfile,
    Sampled,
    constant,
    cutoff_power_tail,
    product,
)
from .quadrature import QuadratureSpec


class ConfigError(DomainError):
    """Malformed configuration; the message starts with the offending field path."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


# ---------------------------------------------------------------------------
# descriptors
# ---------------------------------------------------------------------------


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def parse_profile(text: str, G: HomogeneousGroup, beta: float) -> RadialProfile:
    """Parse a profile descriptor; factors joined by ``*`` are multiplied."""
    factors = [t.strip() for t in text.split("*")]
    if len(factors) > 1:
        return product(*(parse_profile(t, G, beta) for t in factors))
    parts = text.strip().split(":")
    kind, args = parts[0], parts[1:]
    try:
        if kind == "power" and len(args) == 1:
            return PowerLaw(float(args[0]))
        if kind == "const" and len(args) == 1:
            return constant(float(args[0]))
        if kind == "ball_power" and len(args) == 1:
            return BallPower(float(args[0]), G)
        if kind == "exp_power" and len(args) == 2:
            return ExpPower(float(args[0]), float(args[1]))
        if kind == "cutoff_tail" and 2 <= len(args) <= 4:
            R0 = math.exp(1.0 / (beta * G.Q)) if args[0] == "auto" else float(args[0])
            inner = float(args[2]) if len(args) > 2 else 1.0
            tail = float(args[3]) if len(args) > 3 else 1.0
            return cutoff_power_tail(R0, inner, float(args[1]), tail)
        if kind == "sampled" and len(args) == 2:
            return Sampled(tuple(_floats(args[0])), tuple(_floats(args[1])))
    except ValueError as exc:
        if isinstance(exc, DomainError):
            raise
        raise DomainError(f"bad number in profile descriptor {text!r}") from None
    raise DomainError(f"unknown profile descriptor {text!r}")


def parse_weight(text: str) -> WeightSpec:
    """Parse a weight descriptor (``profile:<profile descriptor>`` for custom weights)."""
    text = text.strip()
    kind, _, rest = text.partition(":")
    try:
        if kind == "matched":
            return MatchedWeight(parse_weight(rest))
        if kind == "profile":
            return _DeferredWeight(rest)
        args = rest.split(":") if rest else []
        if kind == "one" and not args:
            return BallPowerWeight(0.0)
        if kind == "ball_power" and len(args) == 1:
            return BallPowerWeight(float(args[0]))
        if kind == "exp_power" and len(args) in (2, 3):
            scale = float(args[2]) if len(args) == 3 else 1.0
            return ExpPowerWeight(float(args[0]), float(args[1]), scale)
        if kind == "multinomial" and len(args) == 2:
            k = float(args[1])
            return MultinomialWeight(tuple(_floats(args[0])), int(k) if k == int(k) else k)
    except ValueError as exc:
        if isinstance(exc, DomainError):
            raise
        raise DomainError(f"bad number in weight descriptor {text!r}") from None
    raise DomainError(f"unknown weight descriptor {text!r}")


@dataclass(frozen=True)
class _DeferredWeight(WeightSpec):
    """Custom weight given by a profile descriptor, resolved once G and beta are known."""

    descriptor: str

    def profile(self, G, beta=1.0, spec=None):
        return parse_profile(self.descriptor, G, beta)

    def describe(self):
        return f"profile:{self.descriptor}"


# ---------------------------------------------------------------------------
# configuration dataclasses
# ---------------------------------------------------------------------------


@dataclass
class ParamsConfig:
    p: float = 1.0
    q: float = 1.0
    beta: float = 1.0
    alpha: float | None = None


@dataclass
class WeightsConfig:
    u: str = "ball_power:0"
    v: str = "ball_power:0"


@dataclass
class QuadratureConfig:
    rel_tol: float = 1e-9
    abs_tol: float = 1e-12
    max_subdivisions: int = 5000
    r_min_hint: float = 1e-8
    r_max_hint: float = 1e8
    tail_policy: str = "analytic_power_tail"
    closed_forms: str = "all"


@dataclass
class VerifyConfig:
    side: str = "forward"


@dataclass
class CriterionConfig:
    alpha: list[float] = field(default_factory=list)
    per_decade: int = 64
    dual: bool = True


@dataclass
class BoundsConfig:
    side: str = "forward"
    n_alpha: int = 200


@dataclass
class SharpnessConfig:
    a: float | None = None
    n_probes: int = 11
    side: str = "forward"
    generic_upto: int = 0


@dataclass
class MultinomialConfig:
    a: list[float] = field(default_factory=lambda: [1.0, 2.0])
    k: int = 2
    gap: float = 1e-3
    use_function: bool = False


@dataclass
class SweepConfig:
    command: str = "criterion"
    axes: dict[str, list] = field(default_factory=dict)


@dataclass
class RunConfig:
    group: str = "euclidean:1"
    params: ParamsConfig = field(default_factory=ParamsConfig)
    weights: WeightsConfig = field(default_factory=WeightsConfig)
    function: str = "cutoff_tail:auto:2"
    quadrature: QuadratureConfig = field(default_factory=QuadratureConfig)
    verify: VerifyConfig = field(default_factory=VerifyConfig)
    criterion: CriterionConfig = field(default_factory=CriterionConfig)
    bounds: BoundsConfig = field(default_factory=BoundsConfig)
    sharpness: SharpnessConfig = field(default_factory=SharpnessConfig)
    multinomial: MultinomialConfig = field(default_factory=MultinomialConfig)
    sweep: SweepConfig = field(default_factory=SweepConfig)

    # -- domain objects -----------------------------------------------------

    def group_obj(self) -> HomogeneousGroup:
        try:
            return parse_group(self.group)
        except DomainError as exc:
            raise ConfigError("group", str(exc)) from None

    def params_obj(self) -> InequalityParams:
        p = self.params
        try:
            return InequalityParams(p.p, p.q, p.beta, p.alpha)
        except DomainError as exc:
            raise ConfigError("params", str(exc)) from None

    def spec_obj(self) -> QuadratureSpec:
        try:
            return QuadratureSpec(**dataclasses.asdict(self.quadrature))
        except DomainError as exc:
            raise ConfigError("quadrature", str(exc)) from None

    def weight_objs(self) -> tuple[WeightSpec, WeightSpec]:
        out = []
        for name in ("u", "v"):
            try:
                out.append(parse_weight(getattr(self.weights, name)))
            except DomainError as exc:
                raise ConfigError(f"weights.{name}", str(exc)) from None
        return tuple(out)

    def function_obj(self) -> RadialProfile:
        try:
            return parse_profile(self.function, self.group_obj(), self.params.beta)
        except DomainError as exc:
            raise ConfigError("function", str(exc)) from None

    def validate(self) -> "RunConfig":
        """Build every domain object once so that errors surface with their path."""
        self.group_obj()
        self.params_obj()
        self.spec_obj()
        self.weight_objs()
        self.function_obj()
        for path, value, allowed in (
            ("verify.side", self.verify.side, ("forward", "dual")),
            ("bounds.side", self.bounds.side, ("forward", "dual")),
            ("sharpness.side", self.sharpness.side, ("forward", "dual", "both")),
        ):
            if value not in allowed:
                raise ConfigError(path, f"must be one of {allowed}, got {value!r}")
        if self.sharpness.n_probes < 1:
            raise ConfigError("sharpness.n_probes", "must be at least 1")
        return self

    # -- serialisation -------------------------------------------------------

    def to_dict(self) -> dict:
        return _strip_none(dataclasses.asdict(self))

    def to_toml(self) -> str:
        return tomli_w.dumps(self.to_dict())

    def digest(self) -> str:
        return hashlib.sha256(self.to_toml().encode()).hexdigest()[:12]

    def with_override(self, path: str, value) -> "RunConfig":
        """Copy with one dotted field replaced (used by sweeps)."""
        data = self.to_dict()
        node = data
        keys = path.split(".")
        for k in keys[:-1]:
            node = node.setdefault(k, {})
        node[keys[-1]] = value
        return from_dict(data)


def _strip_none(obj):
    if isinstance(obj, dict):
        return {k: _strip_none(v) for k, v in obj.items() if v is not None}
    return obj


_SCALARS = {float: (int, float), int: (int,), str: (str,), bool: (bool,)}


def _coerce(path: str, tp, value):
    """Check and convert ``value`` against a (simple) dataclass field type."""
    origin = getattr(tp, "__origin__", None)
    args = getattr(tp, "__args__", ())
    if origin is list:
        if not isinstance(value, list):
            raise ConfigError(path, f"expected a list, got {type(value).__name__}")
        return [_coerce(f"{path}[{i}]", args[0], v) for i, v in enumerate(value)]
    if origin is dict:
        if not isinstance(value, dict):
            raise ConfigError(path, f"expected a table, got {type(value).__name__}")
        return {str(k): _coerce(f"{path}.{k}", args[1], v) for k, v in value.items()}
    if args and type(None) in args:  # optional
        if value is None:
            return None
        inner = [a for a in args if a is not type(None)][0]
        return _coerce(path, inner, value)
    if tp is Any or tp is list:
        return value
    if dataclasses.is_dataclass(tp):
        if not isinstance(value, dict):
            raise ConfigError(path, "expected a table")
        return _build(tp, value, path)
    ok = _SCALARS.get(tp)
    if ok is None:
        return value
    if isinstance(value, bool) and tp is not bool:
        raise ConfigError(path, f"expected {tp.__name__}, got bool")
    if not isinstance(value, ok):
        raise ConfigError(path, f"expected {tp.__name__}, got {type(value).__name__}")
    return tp(value)


def _build(cls, data: dict, prefix: str = ""):
    known = {f.name: f for f in fields(cls)}
    hints = get_type_hints(cls)
    for key in data:
        if key not in known:
            raise ConfigError(f"{prefix}{'.' if prefix else ''}{key}", "unknown key")
    kwargs = {}
    for name in known:
        if name in data:
            kwargs[name] = _coerce(f"{prefix}{'.' if prefix else ''}{name}", hints[name], data[name])
    return cls(**kwargs)


def from_dict(data: dict) -> RunConfig:
    return _build(RunConfig, data)


def parse_config(text: str) -> RunConfig:
    try:
        data = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        raise ConfigError("config", f"invalid TOML: {exc}") from None
    return from_dict(data)


def load_config(path: str) -> RunConfig:
    with open(path, "rb") as fh:
        try:
            data = tomli.load(fh)
        except tomli.TOMLDecodeError as exc:
            raise ConfigError("config", f"invalid TOML: {exc}") from None
    return from_dict(data)
