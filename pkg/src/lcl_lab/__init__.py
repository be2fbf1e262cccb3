"""Exponential-mean (Levin-Cochran-Lee type) inequalities on homogeneous groups, in radial form."""

from .criterion import (
    A_alpha,
    A_alpha_power_closed,
    BoundsResult,
    CriterionResult,
    constant_bounds,
    criterion_curve,
    dual_A_alpha,
    multinomial_constant_bounds,
)
from .errors import DivergenceError, DomainError, ToleranceError
from .group import HomogeneousGroup, ball_volume, make_group, parse_group, polar_integral
from .operators import (
    BallPowerWeight,
    CustomWeight,
    ExpPowerWeight,
    InequalityParams,
    MatchedWeight,
    MultinomialWeight,
    beta_reduce,
    dual_mean,
    dual_weight_transform,
    forward_mean,
    log_dual_mean,
    log_forward_mean,
    matched_weight,
    transformed_weight,
)
from .profiles import (
    BallPower,
    ExpPower,
    PiecewisePower,
    PowerLaw,
    Product,
    RadialProfile,
    Sampled,
    SumPower,
    constant,
    cutoff_power_tail,
    product,
)
from .quadrature import QuadratureSpec, log_mean_inner, outer_integral
from .verifier import (
    VerificationReport,
    check_beta_reduction,
    check_duality,
    evaluate_inequality,
    necessity_witness,
    sharpness_probe_dual,
    sharpness_probe_power,
    verify_matched,
    verify_multinomial,
)

__version__ = "0.1.0"
