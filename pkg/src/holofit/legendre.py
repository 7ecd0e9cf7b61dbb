"""Orthonormal Legendre polynomials: evaluation, root factorizations,
Gauss quadrature under the uniform probability measure on [-1, 1].
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .indexsets import MultiIndex

__all__ = [
    "psi_eval",
    "psi_table",
    "tensor_eval",
    "factorize",
    "PolynomialFactorization",
    "QuadratureRule",
    "gauss_rule",
]

DOMAIN_TOL = 1e-12


def _check_domain(y: np.ndarray):
    if np.any(np.abs(y) > 1.0 + DOMAIN_TOL):
        bad = float(np.max(np.abs(y)))
        raise ValueError(f"evaluation point outside [-1, 1]: |y| = {bad}")


def psi_table(y, max_degree: int) -> np.ndarray:
    """All orthonormal values psi_0(y) .. psi_max(y) in one sweep.

    Runs the unnormalized three-term recurrence and scales at the end.
    Returns shape (max_degree + 1,) + y.shape.
    """
    y = np.asarray(y, dtype=float)
    _check_domain(y)
    P = np.zeros((max_degree + 1,) + y.shape)
    P[0] = 1.0
    if max_degree >= 1:
        P[1] = y
    for k in range(1, max_degree):
        P[k + 1] = ((2 * k + 1) * y * P[k] - k * P[k - 1]) / (k + 1)
    scale = np.sqrt(2.0 * np.arange(max_degree + 1) + 1.0)
    return P * scale.reshape((-1,) + (1,) * y.ndim)


def psi_eval(nu: int, y):
    """Orthonormal Legendre value psi_nu(y) = sqrt(2 nu + 1) P_nu(y)."""
    if nu < 0:
        raise ValueError("degree must be nonnegative")
    out = psi_table(y, nu)[nu]
    return float(out) if np.isscalar(y) or np.ndim(y) == 0 else out


def tensor_eval(nu: MultiIndex, y) -> float:
    """Tensor-product value Psi_nu(y) = prod over active dims of psi."""
    y = np.asarray(y, dtype=float)
    if y.ndim != 1:
        raise ValueError("y must be a single point (1-d array)")
    if nu.max_dim > y.shape[0]:
        raise ValueError(
            f"point has {y.shape[0]} coordinates, index active in dim {nu.max_dim}"
        )
    out = 1.0
    for d, v in nu.entries:
        out *= psi_eval(v, float(y[d - 1]))
    return out


@dataclass(frozen=True)
class PolynomialFactorization:
    """Linear-factor form of one orthonormal 1-d Legendre polynomial.

    psi_degree(y) = prod_j scales[j] * (y - roots[j]), with all roots real,
    simple and inside (-1, 1).  Scale magnitudes are equalized so each
    factor has the same sup over [-1, 1] (keeps downstream products of
    factors well conditioned); any sign is carried by the first factor.
    """

    degree: int
    roots: np.ndarray
    scales: np.ndarray

    @property
    def factor_sup(self) -> float:
        """Common bound max_{|y|<=1} |scales[j] (y - roots[j])|."""
        return float(np.max(np.abs(self.scales) * (1.0 + np.abs(self.roots))))

    def evaluate(self, y):
        y = np.asarray(y, dtype=float)
        out = np.ones_like(y)
        for a, r in zip(self.scales, self.roots):
            out = out * (a * (y - r))
        return out


def factorize(nu_1d: int) -> PolynomialFactorization:
    """Roots-and-scales factorization of psi_nu for nu >= 1.

    Roots come from the symmetric tridiagonal Jacobi-matrix eigenproblem;
    the total scale sqrt(2 nu + 1) * lead(P_nu) is distributed so that
    every factor attains the same sup on [-1, 1].
    """
    if nu_1d < 1:
        raise ValueError("factorize requires degree >= 1")
    if nu_1d == 1:
        roots = np.array([0.0])
    else:
        k = np.arange(1, nu_1d, dtype=float)
        off = k / np.sqrt((2 * k - 1) * (2 * k + 1))
        try:
            roots = eigh_tridiagonal(
                np.zeros(nu_1d), off, eigvals_only=True, lapack_driver="stebz"
            )
        except Exception as exc:  # pragma: no cover
            raise ArithmeticError(f"Jacobi eigenproblem failed: {exc}") from exc
        roots = np.sort(roots)
    # leading coefficient of P_nu times the orthonormal scale, always > 0
    lead = math.comb(2 * nu_1d, nu_1d) / 2.0**nu_1d
    total = math.sqrt(2 * nu_1d + 1) * lead
    sup_each = (total * np.prod(1.0 + np.abs(roots))) ** (1.0 / nu_1d)
    scales = sup_each / (1.0 + np.abs(roots))
    # equalization is inexact in floating point; pin the product exactly
    scales[0] *= total / np.prod(scales)
    return PolynomialFactorization(degree=nu_1d, roots=roots, scales=scales)


@dataclass(frozen=True)
class QuadratureRule:
    """Gauss-Legendre rule normalized to the uniform probability measure."""

    nodes: np.ndarray
    weights: np.ndarray
    exact_degree: int

    def integrate(self, values: np.ndarray):
        return np.tensordot(np.asarray(values), self.weights, axes=([-1], [0]))


def gauss_rule(degree: int) -> QuadratureRule:
    """Rule with ceil((degree + 1) / 2) nodes, weights summing to one."""
    if degree < 0:
        raise ValueError("degree must be nonnegative")
    n = max(1, (degree + 2) // 2)
    nodes, weights = np.polynomial.legendre.leggauss(n)
    return QuadratureRule(nodes=nodes, weights=weights / 2.0, exact_degree=2 * n - 1)
