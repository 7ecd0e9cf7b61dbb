"""Target functions, holomorphy-based rate references and error budgets."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

__all__ = [
    "TargetFunction",
    "HolomorphyParams",
    "RateModel",
    "ErrorBudget",
    "bernstein_param",
    "exp_rate_curve",
    "test_function_product",
    "error_budget",
    "log_factor",
]


@dataclass(frozen=True)
class TargetFunction:
    """A deterministic map from [-1, 1]^dim to R^output_dim.

    ``evaluate`` takes a batch of points with shape (m, dim) and returns
    shape (m,) for scalar targets or (m, output_dim) otherwise.  Product
    targets carry ``coeff_1d``, a callable (dim_index, degree) -> float
    giving the 1-d expansion coefficient of that dimension's factor, so
    exact tensor coefficients are available to the reference machinery.
    """

    dim: int
    evaluate: Callable[[np.ndarray], np.ndarray]
    output_dim: int = 1
    coeff_1d: Callable[[int, int], float] | None = None
    label: str = "target"
    meta: dict = field(default_factory=dict)

    def __call__(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if points.shape[1] != self.dim:
            raise ValueError(
                f"points have {points.shape[1]} coordinates, target expects {self.dim}"
            )
        if np.any(np.abs(points) > 1.0 + 1e-12):
            raise ValueError("target evaluation point outside [-1, 1]^d")
        return self.evaluate(points)


@dataclass(frozen=True)
class HolomorphyParams:
    """Anisotropy sequence b (finitely represented), summability p, eps = 1."""

    b: np.ndarray
    p: float
    epsilon: float = 1.0

    def __post_init__(self):
        if not (0.0 < self.p < 1.0):
            raise ValueError("p must lie in (0, 1)")
        object.__setattr__(self, "b", np.asarray(self.b, dtype=float))
        if np.any(self.b < 0):
            raise ValueError("b must be nonnegative")


@dataclass
class RateModel:
    """A reference convergence curve, algebraic or exponential.

    The multiplicative constant is free; ``fit`` pins it by least squares
    on log-error data.  Used for plotting and slope comparisons only.
    """

    kind: str
    p: float | None = None
    rho: np.ndarray | None = None
    constant: float = 1.0

    def __post_init__(self):
        if self.kind not in ("algebraic", "exponential"):
            raise ValueError("kind must be 'algebraic' or 'exponential'")
        if self.kind == "exponential":
            self.rho = np.asarray(self.rho, dtype=float)
            if np.any(self.rho <= 1.0):
                raise ValueError("exponential model requires all rho_i > 1")

    def evaluate(self, s) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        if self.kind == "algebraic":
            expo = 0.5 - 1.0 / self.p
            return self.constant * s**expo
        d = len(self.rho)
        return np.array(
            [exp_rate_curve(int(si), d, self.rho, self.constant) for si in np.atleast_1d(s)]
        ).reshape(s.shape)

    def fit(self, s, errors) -> "RateModel":
        """Least-squares fit of log(constant) on the given (s, error) data."""
        s = np.asarray(s, dtype=float)
        errors = np.asarray(errors, dtype=float)
        self.constant = 1.0
        ref = self.evaluate(s)
        keep = (errors > 0) & (ref > 0)
        shift = np.mean(np.log(errors[keep]) - np.log(ref[keep]))
        self.constant = float(np.exp(shift))
        return self


@dataclass(frozen=True)
class ErrorBudget:
    """Additive decomposition of the recovery error bound."""

    approximation: float
    measurement: float
    discretization: float
    optimization: float

    def __post_init__(self):
        for name, v in self.as_dict().items():
            if v < 0:
                raise ValueError(f"{name} part must be nonnegative")

    @property
    def total(self) -> float:
        return self.approximation + self.measurement + self.discretization + self.optimization

    def as_dict(self) -> dict:
        return {
            "approximation": self.approximation,
            "measurement": self.measurement,
            "discretization": self.discretization,
            "optimization": self.optimization,
        }


def bernstein_param(delta: float) -> float:
    """Largest ellipse parameter rho with (rho + 1/rho)/2 = 1 + delta."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    return 1.0 + delta + math.sqrt(delta * delta + 2.0 * delta)


def exp_rate_curve(s: int, d: int, rho, C: float) -> float:
    """Finite-dimensional exponential reference C * exp(-(s d! prod log rho_i)^(1/d))."""
    rho = np.asarray(rho, dtype=float)
    if len(rho) != d:
        raise ValueError("need one rho per dimension")
    if np.any(rho <= 1.0):
        raise ValueError("exponential rate requires rho_i > 1")
    arg = s * math.factorial(d) * float(np.prod(np.log(rho)))
    return C * math.exp(-(arg ** (1.0 / d)))


def test_function_product(d: int, deltas) -> TargetFunction:
    """The product benchmark target with per-dimension pole offsets.

    f(y) = prod_i sqrt(2 delta_i + delta_i^2) / (y_i + 1 + delta_i); each
    1-d factor has unit L2 norm under the uniform probability measure, so
    ||f||_{L2} = 1 regardless of d.  1-d coefficients are computed on
    demand by high-degree Gauss quadrature and cached.
    """
    deltas = np.asarray(deltas, dtype=float)
    if len(deltas) != d:
        raise ValueError("need one delta per dimension")
    if np.any(deltas <= 0):
        raise ValueError("all deltas must be positive")
    scale = np.sqrt(2.0 * deltas + deltas**2)

    def evaluate(points: np.ndarray) -> np.ndarray:
        return np.prod(scale / (points + 1.0 + deltas), axis=1)

    cache: dict[tuple[int, int], float] = {}

    def coeff_1d(dim_index: int, degree: int) -> float:
        from .legendre import gauss_rule, psi_table

        key = (dim_index, degree)
        if key not in cache:
            rule = gauss_rule(degree + 60)
            delta = deltas[dim_index - 1]
            g = scale[dim_index - 1] / (rule.nodes + 1.0 + delta)
            vals = psi_table(rule.nodes, degree)
            for k in range(degree + 1):
                cache[(dim_index, k)] = float(np.sum(rule.weights * g * vals[k]))
        return cache[key]

    return TargetFunction(
        dim=d,
        evaluate=evaluate,
        output_dim=1,
        coeff_1d=coeff_1d,
        label="product",
        meta={"deltas": deltas},
    )


def error_budget(
    approx: float, noise_norm: float, m: int, disc: float, gamma: float
) -> ErrorBudget:
    """Assemble the additive error decomposition.

    The measurement part is noise_norm / sqrt(m); the universal constant
    in front of the sum is unknown and deliberately not applied.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    return ErrorBudget(
        approximation=approx,
        measurement=noise_norm / math.sqrt(m),
        discretization=disc,
        optimization=gamma,
    )


def log_factor(m: int, eps: float) -> tuple[float, int]:
    """The log factor L(m, eps) = log(m) (log^3(m) + log(1/eps)) and n = ceil(m/L)."""
    if m < 3:
        raise ValueError("m must be >= 3")
    if not (0.0 < eps < 1.0):
        raise ValueError("eps must lie in (0, 1)")
    lm = math.log(m)
    L = lm * (lm**3 + math.log(1.0 / eps))
    return L, max(1, math.ceil(m / L))
