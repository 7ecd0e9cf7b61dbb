"""holofit: sparse Legendre learning of smooth high-dimensional functions
from few random samples, with handcrafted tanh-network counterparts.
"""

from .estimators import LegendreNetworkRegressor, SparsePolynomialRegressor
from .indexsets import (
    IndexSet,
    MultiIndex,
    WeightVector,
    hyperbolic_cross,
    intrinsic_weights,
    is_anchored,
    is_lower,
    max_order,
    monotone_majorant,
    weighted_cardinality,
)
from .legendre import factorize, gauss_rule, psi_eval, tensor_eval
from .networks import (
    FeedforwardNetwork,
    TrainableClass,
    emulate_legendre,
    mult_gadget,
    product_tree,
    square_gadget,
    train_last_layer,
)
from .sampling import MeasurementSystem, build_system, draw_samples, l2_error
from .srlasso import (
    SRLassoProblem,
    SRLassoSolution,
    default_lambda,
    least_squares_oracle,
    objective,
    prox_group,
    prune_coefficients,
    solve,
)
from .targets import (
    ErrorBudget,
    TargetFunction,
    bernstein_param,
    error_budget,
    exp_rate_curve,
    log_factor,
    test_function_product,
)

__version__ = "0.1.0"

__all__ = [
    "SparsePolynomialRegressor",
    "LegendreNetworkRegressor",
    "IndexSet",
    "MultiIndex",
    "WeightVector",
    "hyperbolic_cross",
    "intrinsic_weights",
    "is_anchored",
    "is_lower",
    "max_order",
    "monotone_majorant",
    "weighted_cardinality",
    "factorize",
    "gauss_rule",
    "psi_eval",
    "tensor_eval",
    "FeedforwardNetwork",
    "TrainableClass",
    "emulate_legendre",
    "mult_gadget",
    "product_tree",
    "square_gadget",
    "train_last_layer",
    "MeasurementSystem",
    "build_system",
    "draw_samples",
    "l2_error",
    "SRLassoProblem",
    "SRLassoSolution",
    "default_lambda",
    "least_squares_oracle",
    "objective",
    "prox_group",
    "prune_coefficients",
    "solve",
    "ErrorBudget",
    "TargetFunction",
    "bernstein_param",
    "error_budget",
    "exp_rate_curve",
    "log_factor",
    "test_function_product",
]
