"""Saddle-point objectives and first-order min-max steppers."""

from .problems import (
    SaddleObjective,
    bilinear,
    fig1_scsc,
    finite_diff_check,
    make_problem,
    nonquadratic_cc,
    random_quadratic,
    rescale_to_unit_smoothness,
)
from .steppers import (
    ALGORITHMS,
    AlgoParams,
    NonFiniteGradientError,
    OptimizerState,
    StepOutput,
    certified_params,
    counting,
    step,
    step_alt_neg_momentum,
    step_baseline,
    step_sim_momentum,
)

__all__ = [
    "ALGORITHMS",
    "AlgoParams",
    "NonFiniteGradientError",
    "OptimizerState",
    "SaddleObjective",
    "StepOutput",
    "bilinear",
    "certified_params",
    "counting",
    "fig1_scsc",
    "finite_diff_check",
    "make_problem",
    "nonquadratic_cc",
    "random_quadratic",
    "rescale_to_unit_smoothness",
    "step",
    "step_alt_neg_momentum",
    "step_baseline",
    "step_sim_momentum",
]
