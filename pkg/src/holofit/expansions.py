"""Reference expansion coefficients and best-approximation benchmarks.

Exact (quadrature-grade) Legendre coefficients of a target, tail errors
of best s-term truncations, and greedy structured / weighted-budget set
selection.  The greedy selections are quasi-best heuristics; exhaustive
search backs them up only at test scale.
"""

from __future__ import annotations

import math
import warnings

import numpy as np

from .indexsets import (
    ZERO_INDEX,
    IndexSet,
    MultiIndex,
    WeightVector,
    is_anchored,
    is_lower,
    unit_index,
)
from .legendre import gauss_rule, psi_table
from .targets import TargetFunction

__all__ = [
    "coefficients",
    "sigma_s",
    "best_structured_set",
    "weighted_best_k",
    "anisotropic_set",
    "truncation_floor",
]


def _row_norms(C: np.ndarray, gram: np.ndarray | None) -> np.ndarray:
    C = np.atleast_2d(np.asarray(C, dtype=float).T).T
    if gram is None:
        return np.linalg.norm(C, axis=1)
    return np.sqrt(np.maximum(np.einsum("ik,kl,il->i", C, gram, C), 0.0))


def coefficients(
    target: TargetFunction, Lambda: IndexSet, quad_degree: int | None = None
) -> np.ndarray:
    """Expansion coefficients c_nu for nu in Lambda, shape (N, K).

    Product targets use their exact per-dimension coefficient provider;
    everything else is integrated by tensor Gauss quadrature over the
    target's coordinates (cost grows exponentially in the dimension, so
    more than six active dimensions triggers a warning).
    """
    if Lambda.dim > target.dim:
        raise ValueError("index set dimension exceeds target dimension")
    degs = Lambda.max_degrees()
    max_deg = int(degs.max(initial=0))
    if quad_degree is None:
        quad_degree = max_deg + 30
    if quad_degree < max_deg + 10:
        warnings.warn(
            f"quadrature degree {quad_degree} is low for polynomial degree {max_deg};"
            " coefficients may carry truncation error",
            stacklevel=2,
        )

    if target.coeff_1d is not None:
        table = np.zeros((target.dim, max_deg + 1))
        for i in range(target.dim):
            for k in range(max_deg + 1):
                table[i, k] = target.coeff_1d(i + 1, k)
        dense = np.zeros((len(Lambda), target.dim), dtype=np.int64)
        for j, nu in enumerate(Lambda):
            for d_, v in nu.entries:
                dense[j, d_ - 1] = v
        gathered = table[np.arange(target.dim)[None, :], dense]
        return np.prod(gathered, axis=1)[:, None]

    d = target.dim
    if d > 6:
        warnings.warn(
            f"tensor quadrature over {d} dimensions is expensive", stacklevel=2
        )
    rule = gauss_rule(quad_degree)
    nq = len(rule.nodes)
    grids = np.meshgrid(*([rule.nodes] * d), indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=1)
    vals = target(pts)
    if vals.ndim == 1:
        vals = vals[:, None]
    K = vals.shape[1]
    # contract the value tensor against weighted psi tables one dim at a time
    M = psi_table(rule.nodes, max_deg) * rule.weights  # (max_deg+1, nq)
    tensor = vals.reshape((nq,) * d + (K,))
    for _ in range(d):
        # contract the leading point axis with the degree axis of M
        tensor = np.tensordot(M, tensor, axes=([1], [0]))
        # resulting degree axis sits in front; rotate it to the back (before K)
        tensor = np.moveaxis(tensor, 0, d - 1)
    # tensor now has shape (max_deg+1,)*d + (K,), degree axes in dim order
    out = np.empty((len(Lambda), K))
    for j, nu in enumerate(Lambda):
        out[j] = tensor[tuple(nu.to_dense(d))]
    return out


def sigma_s(C: np.ndarray, s: int, q: float = 2.0, gram: np.ndarray | None = None) -> float:
    """Tail l^q norm after removing the s largest coefficient V-norms."""
    norms = np.sort(_row_norms(C, gram))[::-1]
    if not (0 <= s <= len(norms)):
        raise ValueError(f"s must lie in [0, {len(norms)}]")
    if not (0.0 < q <= 2.0):
        raise ValueError("q must lie in (0, 2]")
    tail = norms[s:]
    if tail.size == 0:
        return 0.0
    return float(np.sum(tail**q) ** (1.0 / q))


def best_structured_set(
    Lambda: IndexSet,
    C: np.ndarray,
    s: int,
    structure: str = "lower",
    gram: np.ndarray | None = None,
) -> IndexSet:
    """Greedy quasi-best structured subset of Lambda with at most s members.

    Grows from {0}, at each step adding the admissible index (the set
    stays lower, or anchored) of largest coefficient V-norm.  Not
    certified optimal.
    """
    if s < 1:
        raise ValueError("s must be >= 1")
    if structure not in ("lower", "anchored"):
        raise ValueError("structure must be 'lower' or 'anchored'")
    norms = _row_norms(C, gram)
    chosen: set[MultiIndex] = {ZERO_INDEX}
    if ZERO_INDEX not in Lambda:
        raise ValueError("Lambda must contain the zero index")

    def admissible(nu: MultiIndex) -> bool:
        if any(nu.decrement(d) not in chosen for d in nu.support):
            return False
        if structure == "anchored" and nu.order == 1:
            j = nu.entries[0][0]
            return all(unit_index(i) in chosen for i in range(1, j))
        return True

    while len(chosen) < s:
        best_nu, best_norm = None, -1.0
        for j, nu in enumerate(Lambda):
            if nu in chosen or not admissible(nu):
                continue
            if norms[j] > best_norm:
                best_nu, best_norm = nu, float(norms[j])
        if best_nu is None:
            break
        chosen.add(best_nu)
    return Lambda.restrict(chosen)


def weighted_best_k(
    Lambda: IndexSet,
    C: np.ndarray,
    u: WeightVector,
    k: float,
    gram: np.ndarray | None = None,
) -> IndexSet:
    """Greedy knapsack selection under the weighted-cardinality budget k.

    Indices are taken in decreasing benefit-to-cost order
    ||c_nu||_V^2 / u_nu^2, each added only if the running sum of squared
    weights stays within k.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if len(u) != len(Lambda):
        raise ValueError("weights not aligned with Lambda")
    norms = _row_norms(C, gram)
    usq = np.asarray(u.values, dtype=float) ** 2
    ratio = norms**2 / usq
    order = sorted(range(len(Lambda)), key=lambda j: (-ratio[j], j))
    chosen = []
    spent = 0.0
    for j in order:
        if spent + usq[j] <= k + 1e-12:
            chosen.append(Lambda[j])
            spent += usq[j]
    return Lambda.restrict(chosen)


def anisotropic_set(log_rates: np.ndarray, budget: float) -> IndexSet:
    """All nu with sum_i nu_i * log_rates[i] <= budget (anisotropic cross).

    Used to build candidate sets that provably capture the largest
    coefficients of product targets with geometric per-dimension decay.
    """
    log_rates = np.asarray(log_rates, dtype=float)
    if np.any(log_rates <= 0):
        raise ValueError("log rates must be positive")
    d = len(log_rates)
    members: list[MultiIndex] = []
    entries: list[tuple[int, int]] = []

    def rec(i: int, remaining: float):
        if i == d:
            members.append(MultiIndex(tuple(entries)))
            return
        rec(i + 1, remaining)
        v = 1
        while v * log_rates[i] <= remaining:
            entries.append((i + 1, v))
            rec(i + 1, remaining - v * log_rates[i])
            entries.pop()
            v += 1

    rec(0, float(budget))
    return IndexSet(tuple(members), dim=d)


def truncation_floor(target: TargetFunction, C: np.ndarray) -> float:
    """||f - f_Lambda|| for unit-norm product targets, from Parseval.

    Requires the target to have L2 norm exactly one (true for the product
    benchmark family); then the tail energy is 1 - sum of squared
    retained coefficients.
    """
    if target.coeff_1d is None:
        raise ValueError("truncation floor needs a product-form target")
    energy = float(np.sum(np.asarray(C) ** 2))
    return math.sqrt(max(0.0, 1.0 - energy))


def export_coefficients_csv(
    path,
    Lambda: IndexSet,
    C: np.ndarray,
    gram: np.ndarray | None = None,
    include_values: bool = False,
) -> None:
    """Write a coefficient table: serialized index, V-norm, optional entries."""
    import csv
    import json as _json

    C = np.atleast_2d(np.asarray(C, dtype=float).T).T
    if C.shape[0] != len(Lambda):
        raise ValueError("coefficient rows not aligned with the index set")
    norms = _row_norms(C, gram)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        header = ["index", "norm_V"]
        if include_values:
            header += [f"c{k}" for k in range(C.shape[1])]
        writer.writerow(header)
        for j, nu in enumerate(Lambda):
            row = [_json.dumps({str(d): v for d, v in nu.entries}), f"{norms[j]:.16e}"]
            if include_values:
                row += [f"{v:.16e}" for v in C[j]]
            writer.writerow(row)


def check_quadrature_convergence(
    target: TargetFunction, Lambda: IndexSet, quad_degree: int, tol: float = 1e-12
) -> float:
    """Drift of c_0 when the quadrature degree doubles; warns above tol."""
    zero_set = IndexSet((ZERO_INDEX,), dim=Lambda.dim)
    c_lo = coefficients(target, zero_set, quad_degree)
    c_hi = coefficients(target, zero_set, 2 * quad_degree)
    drift = float(np.max(np.abs(c_lo - c_hi)))
    if drift > tol:
        warnings.warn(
            f"quadrature not converged: c_0 drift {drift:.2e} above {tol:.1e}",
            stacklevel=2,
        )
    return drift
