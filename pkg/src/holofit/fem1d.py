"""Hilbert-valued target backend: 1-d parametric diffusion solved by
piecewise-linear finite elements on (0, 1) with homogeneous Dirichlet
conditions.  Output values live in V_h = span of hat functions; the V
inner product is the H^1_0 (stiffness) form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.linalg import solve_banded

from .targets import TargetFunction

__all__ = [
    "DiscretizedSpace",
    "HilbertPoint",
    "DiffusionCoefficient",
    "default_diffusion",
    "assemble_and_solve",
    "b_estimate",
    "norm_V",
    "diffusion_target",
]

# 2-point Gauss on the reference element (0, 1)
_GPTS = np.array([0.5 - 0.5 / math.sqrt(3.0), 0.5 + 0.5 / math.sqrt(3.0)])
_GWTS = np.array([0.5, 0.5])


@dataclass(frozen=True)
class DiscretizedSpace:
    """Uniform hat-function space with K interior nodes on (0, 1)."""

    K: int
    h: float = field(init=False)
    gram: np.ndarray = field(init=False)

    def __post_init__(self):
        if self.K < 1:
            raise ValueError("need at least one interior node")
        h = 1.0 / (self.K + 1)
        g = np.zeros((self.K, self.K))
        np.fill_diagonal(g, 2.0 / h)
        idx = np.arange(self.K - 1)
        g[idx, idx + 1] = -1.0 / h
        g[idx + 1, idx] = -1.0 / h
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "gram", g)

    @property
    def nodes(self) -> np.ndarray:
        return np.arange(1, self.K + 1) * self.h

    def cholesky(self) -> np.ndarray:
        """Lower-triangular L with gram = L L^T."""
        return np.linalg.cholesky(self.gram)


@dataclass(frozen=True)
class HilbertPoint:
    """Element of V_h as a coefficient vector against the hat basis."""

    coeffs: np.ndarray
    space: DiscretizedSpace

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        if c.shape != (self.space.K,):
            raise ValueError("coefficient length does not match the space")
        object.__setattr__(self, "coeffs", c)

    def norm(self) -> float:
        return norm_V(self)

    def evaluate(self, x) -> np.ndarray:
        """Piecewise-linear interpolant at points x in [0, 1]."""
        x = np.asarray(x, dtype=float)
        full = np.concatenate(([0.0], self.coeffs, [0.0]))
        grid = np.linspace(0.0, 1.0, self.space.K + 2)
        return np.interp(x, grid, full)

    def save_csv(self, path) -> None:
        """Snapshot of (node, value) pairs including the boundary zeros."""
        grid = np.linspace(0.0, 1.0, self.space.K + 2)
        full = np.concatenate(([0.0], self.coeffs, [0.0]))
        np.savetxt(path, np.column_stack([grid, full]), delimiter=",", header="x,u", comments="")


@dataclass(frozen=True)
class DiffusionCoefficient:
    """Affine-parametric field a(x, y) = a0(x) + sum_j y_j psi_j(x).

    ``ellipticity_floor`` is the uniform lower bound r; validity of
    sum_j |psi_j(x)| <= a0(x) - r is checked on a grid at construction.
    """

    a0: Callable[[np.ndarray], np.ndarray]
    modes: tuple
    ellipticity_floor: float
    check_points: int = 2001

    def __post_init__(self):
        if self.ellipticity_floor <= 0:
            raise ValueError("ellipticity floor must be positive")
        xs = np.linspace(0.0, 1.0, self.check_points)
        slack = self.a0(xs) - self.ellipticity_floor
        total = np.zeros_like(xs)
        for psi in self.modes:
            total += np.abs(psi(xs))
        if np.any(total > slack + 1e-12):
            raise ValueError("mode family violates the uniform ellipticity condition")

    @property
    def n_modes(self) -> int:
        return len(self.modes)

    def field(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        out = self.a0(x).astype(float).copy()
        for yj, psi in zip(y, self.modes):
            out += yj * psi(x)
        return out


def default_diffusion(d: int, floor: float = 0.1, mode_scale: float = 0.9) -> DiffusionCoefficient:
    """a0 = 1 with sine modes psi_j = (mode_scale / zeta(2)) j^-2 sin(j pi x).

    Satisfies the ellipticity condition by construction since the mode
    sup-norms sum to at most mode_scale < 1 - floor.
    """
    if not (0 < mode_scale < 1.0 - floor + 1e-15):
        raise ValueError("mode_scale must stay below 1 - floor")
    zeta2 = math.pi**2 / 6.0

    def make(j):
        amp = mode_scale / zeta2 * (j + 1) ** -2.0
        return lambda x: amp * np.sin((j + 1) * math.pi * x)

    return DiffusionCoefficient(
        a0=lambda x: np.ones_like(x),
        modes=tuple(make(j) for j in range(d)),
        ellipticity_floor=floor,
    )


def assemble_and_solve(
    coeff: DiffusionCoefficient,
    y,
    forcing: Callable[[np.ndarray], np.ndarray],
    space: DiscretizedSpace,
) -> HilbertPoint:
    """Galerkin solution of -(a(., y) u')' = F with zero boundary values.

    Element integrals use 2-point Gauss; the tridiagonal system is solved
    banded.  Raises if the sampled field dips below the ellipticity floor.
    """
    y = np.asarray(y, dtype=float)
    if y.shape != (coeff.n_modes,):
        raise ValueError(f"expected {coeff.n_modes} parameter values, got {y.shape}")
    K, h = space.K, space.h
    edges = np.linspace(0.0, 1.0, K + 2)
    # quadrature points per element, shape (K+1, 2)
    xq = edges[:-1, None] + h * _GPTS[None, :]
    aq = coeff.field(xq.ravel(), y).reshape(K + 1, 2)
    if np.any(aq <= 0.0):
        raise ValueError("ellipticity violated at a quadrature point for this y")
    abar = (aq @ _GWTS) * h  # integral of a over each element
    fq = np.asarray(forcing(xq.ravel()), dtype=float).reshape(K + 1, 2)

    # stiffness: diag_i = (abar_{i-1} + abar_i)/h^2, off_i = -abar_i/h^2
    diag = (abar[:-1] + abar[1:]) / h**2
    off = -abar[1:-1] / h**2
    # load: hat i rises on element i-1, falls on element i
    rise = h * (fq * _GPTS[None, :]) @ _GWTS
    fall = h * (fq * (1.0 - _GPTS[None, :])) @ _GWTS
    load = rise[:-1] + fall[1:]

    ab = np.zeros((3, K))
    ab[0, 1:] = off
    ab[1] = diag
    ab[2, :-1] = off
    try:
        u = solve_banded((1, 1), ab, load)
    except np.linalg.LinAlgError as exc:  # pragma: no cover
        raise ArithmeticError(f"singular stiffness system: {exc}") from exc
    return HilbertPoint(coeffs=u, space=space)


def b_estimate(coeff: DiffusionCoefficient, points_per_mode: int = 2001) -> np.ndarray:
    """Grid sup-norm surrogate b_j = max_x |psi_j(x)|."""
    xs = np.linspace(0.0, 1.0, points_per_mode)
    return np.array([float(np.max(np.abs(psi(xs)))) for psi in coeff.modes])


def norm_V(v: HilbertPoint) -> float:
    """H^1_0 norm sqrt(c^T G c) of a discretized element."""
    return float(math.sqrt(max(0.0, v.coeffs @ v.space.gram @ v.coeffs)))


def l2_error_vs(u: HilbertPoint, exact: Callable[[np.ndarray], np.ndarray]) -> float:
    """L2(0,1) distance between the FEM interpolant and a reference function."""
    xs = np.linspace(0.0, 1.0, 20 * (u.space.K + 2))
    diff = u.evaluate(xs) - exact(xs)
    return float(math.sqrt(np.trapezoid(diff**2, xs)))


def diffusion_target(
    coeff: DiffusionCoefficient,
    space: DiscretizedSpace,
    forcing: Callable[[np.ndarray], np.ndarray] | None = None,
) -> TargetFunction:
    """Wrap the parametric solve as a Hilbert-valued target.

    Evaluation maps a batch of parameter points to V_h coefficient rows.
    """
    if forcing is None:
        forcing = lambda x: np.full_like(x, 10.0)

    def evaluate(points: np.ndarray) -> np.ndarray:
        out = np.empty((points.shape[0], space.K))
        for i, yi in enumerate(points):
            out[i] = assemble_and_solve(coeff, yi, forcing, space).coeffs
        return out

    return TargetFunction(
        dim=coeff.n_modes,
        evaluate=evaluate,
        output_dim=space.K,
        label="diffusion-fem",
        meta={"K": space.K},
    )
