"""Hilbert-valued weighted square-root LASSO.

The program is

    min_Z  lam * sum_j u_j ||z_j||_V  +  ||(A Z - F) G^(1/2)||_F

with Z an N x K coefficient matrix (rows indexed by the polynomial index
set, columns by the V_h basis) and ||.||_V the Gram norm per row.  A
one-time Cholesky of G turns every norm Euclidean, and the problem is
solved by Chambolle-Pock primal-dual iteration wrapped in a restart
scheme.  Every solve carries a duality-gap certificate: a feasible
rescaling of the running dual variable gives a lower bound on the
optimum, so the reported gap is a guaranteed bound on suboptimality.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.linalg import solve_triangular

from .indexsets import IndexSet, WeightVector
from .sampling import MeasurementSystem, design_matrix
from .targets import log_factor

__all__ = [
    "SRLassoProblem",
    "SRLassoSolution",
    "objective",
    "prox_group",
    "solve",
    "default_lambda",
    "least_squares_oracle",
    "prune_coefficients",
    "predict",
]


@dataclass(frozen=True)
class SRLassoProblem:
    """Problem data; ``gram=None`` means V = R^K with the identity Gram."""

    A: np.ndarray
    F: np.ndarray
    weights: np.ndarray
    lam: float
    gram: np.ndarray | None = None
    index_set: IndexSet | None = None

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        F = np.asarray(self.F, dtype=float)
        if F.ndim == 1:
            F = F[:, None]
        w = np.asarray(
            self.weights.values if isinstance(self.weights, WeightVector) else self.weights,
            dtype=float,
        )
        if A.shape[0] != F.shape[0]:
            raise ValueError("A and F row counts differ")
        if w.shape != (A.shape[1],):
            raise ValueError("need one weight per column of A")
        if np.any(w < 1.0 - 1e-12):
            raise ValueError("weights must satisfy u >= 1")
        if self.lam <= 0:
            raise ValueError("lam must be positive")
        if self.gram is not None:
            g = np.asarray(self.gram, dtype=float)
            if g.shape != (F.shape[1], F.shape[1]):
                raise ValueError("Gram shape does not match data columns")
            object.__setattr__(self, "gram", g)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "F", F)
        object.__setattr__(self, "weights", w)

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.A.shape[0], self.A.shape[1], self.F.shape[1]

    def cholesky(self) -> np.ndarray | None:
        return None if self.gram is None else np.linalg.cholesky(self.gram)


@dataclass(frozen=True)
class SRLassoSolution:
    """Coefficient matrix with objective value and optimality certificate.

    ``gamma_certificate`` bounds objective(Z) - min objective from above;
    ``converged`` is False when the iteration budget ran out before the
    requested gap was certified (the best iterate is still returned).
    """

    Z: np.ndarray
    objective: float
    gamma_certificate: float
    iterations: int
    index_set: IndexSet | None = None
    converged: bool = True
    info: dict = field(default_factory=dict)

    def row_norms(self, gram: np.ndarray | None = None) -> np.ndarray:
        if gram is None:
            return np.linalg.norm(self.Z, axis=1)
        return np.sqrt(np.maximum(np.einsum("ik,kl,il->i", self.Z, gram, self.Z), 0.0))

    def support(self, tol: float = 0.0, gram: np.ndarray | None = None) -> np.ndarray:
        return np.flatnonzero(self.row_norms(gram) > tol)

    def summary(self) -> dict:
        return {
            "objective": self.objective,
            "gamma_certificate": self.gamma_certificate,
            "iterations": self.iterations,
            "support_size": int(len(self.support(1e-12))),
            "converged": self.converged,
        }

    def save(self, path) -> None:
        from .container import write_container

        header = {"kind": "srlasso-solution", **self.summary()}
        if self.index_set is not None:
            header["index_set"] = self.index_set.to_json()
            header["index_dim"] = self.index_set.dim
        write_container(path, header, {"Z": self.Z})

    @classmethod
    def load(cls, path) -> "SRLassoSolution":
        from .container import read_container

        header, arrays = read_container(path)
        if header.get("kind") != "srlasso-solution":
            raise ValueError(f"{path}: not a solution container")
        index_set = None
        if "index_set" in header:
            index_set = IndexSet.from_json(header["index_set"], dim=header["index_dim"])
        return cls(
            Z=arrays["Z"],
            objective=header["objective"],
            gamma_certificate=header["gamma_certificate"],
            iterations=header["iterations"],
            index_set=index_set,
            converged=header["converged"],
        )


def objective(prob: SRLassoProblem, Z: np.ndarray) -> float:
    """lam * weighted group norm of rows (V-norm) plus Frobenius misfit."""
    Z = np.asarray(Z, dtype=float)
    if Z.ndim == 1:
        Z = Z[:, None]
    m, N, K = prob.shape
    if Z.shape != (N, K):
        raise ValueError(f"Z must have shape {(N, K)}, got {Z.shape}")
    R = prob.A @ Z - prob.F
    if prob.gram is None:
        rows = np.linalg.norm(Z, axis=1)
        misfit = np.linalg.norm(R)
    else:
        rows = np.sqrt(np.maximum(np.einsum("ik,kl,il->i", Z, prob.gram, Z), 0.0))
        misfit = math.sqrt(max(np.sum((R @ prob.gram) * R), 0.0))
    return float(prob.lam * np.dot(prob.weights, rows) + misfit)


def prox_group(Z: np.ndarray, thresholds, gram: np.ndarray | None = None) -> np.ndarray:
    """Row-wise block soft-thresholding in the V-norm.

    Rows with ||z_j||_V <= t_j vanish, the rest shrink by the factor
    (1 - t_j / ||z_j||_V).
    """
    Z = np.asarray(Z, dtype=float)
    squeeze = Z.ndim == 1
    if squeeze:
        Z = Z[:, None]
    t = np.broadcast_to(np.asarray(thresholds, dtype=float), (Z.shape[0],))
    if np.any(t < 0):
        raise ValueError("thresholds must be nonnegative")
    if gram is None:
        norms = np.linalg.norm(Z, axis=1)
    else:
        norms = np.sqrt(np.maximum(np.einsum("ik,kl,il->i", Z, gram, Z), 0.0))
    scale = np.zeros_like(norms)
    alive = norms > t
    scale[alive] = 1.0 - t[alive] / norms[alive]
    out = Z * scale[:, None]
    return out[:, 0] if squeeze else out


def operator_norm(A: np.ndarray, iters: int = 50) -> float:
    """Spectral norm by power iteration from a fixed start vector."""
    v = np.ones(A.shape[1]) / math.sqrt(A.shape[1])
    for _ in range(iters):
        w = A.T @ (A @ v)
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        v = w / nw
    return float(np.linalg.norm(A @ v)) * 1.005


def _dual_value(p: np.ndarray, AtP: np.ndarray, Fw: np.ndarray, lam_w: np.ndarray) -> float:
    # Shrink the running dual variable onto the feasible set
    # {||P||_F <= 1, ||(A^T P)_j|| <= lam*u_j} and evaluate -<P, Fw>.
    rows = np.linalg.norm(AtP, axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(lam_w > 0, rows / lam_w, np.inf)
    t = 1.0 / max(1.0, float(np.max(ratio, initial=0.0)))
    val = -float(np.sum(p * Fw))
    return t * val if val > 0 else 0.0


def solve(
    prob: SRLassoProblem,
    gamma: float = 1e-6,
    budget: int = 400_000,
    check_every: int = 25,
    inner_cap: int = 4000,
) -> SRLassoSolution:
    """Restarted primal-dual solve to a certified gap of at most ``gamma``.

    Stages target a geometric gap sequence eps_k = objective(0) / 2^k,
    warm-starting each stage from the best iterate so far; the run stops
    once the duality-gap certificate reaches ``gamma`` or the iteration
    budget is exhausted (then ``converged=False`` and the certificate
    reports the best guaranteed bound).
    """
    if gamma <= 0 and budget is None:
        raise ValueError("need a positive gamma or a finite budget")
    m, N, K = prob.shape
    L = prob.cholesky()
    Fw = prob.F if L is None else prob.F @ L
    A = prob.A
    lam_w = prob.lam * prob.weights

    Anorm = operator_norm(A)
    if Anorm == 0.0:
        Z = np.zeros((N, K))
        return SRLassoSolution(Z, objective(prob, Z), 0.0, 0, prob.index_set)
    tau = sigma = 0.99 / Anorm
    thr = tau * lam_w

    def primal_obj(W):
        return float(
            prob.lam * np.dot(prob.weights, np.linalg.norm(W, axis=1))
            + np.linalg.norm(A @ W - Fw)
        )

    W = np.zeros((N, K))
    P = np.zeros((m, K))
    best_W = W.copy()
    best_obj = primal_obj(W)
    best_dual = 0.0
    trace = [best_obj]
    eps = best_obj
    total = 0
    while total < budget:
        eps = max(eps / 2.0, gamma)
        Wb = W.copy()
        inner = 0
        while inner < inner_cap and total < budget:
            for _ in range(check_every):
                P += sigma * (A @ Wb - Fw)
                pn = np.linalg.norm(P)
                if pn > 1.0:
                    P /= pn
                Wn = W - tau * (A.T @ P)
                rn = np.linalg.norm(Wn, axis=1)
                scale = np.zeros_like(rn)
                alive = rn > thr
                scale[alive] = 1.0 - thr[alive] / rn[alive]
                Wn *= scale[:, None]
                Wb = 2.0 * Wn - W
                W = Wn
            inner += check_every
            total += check_every
            obj = primal_obj(W)
            if not math.isfinite(obj):
                raise ArithmeticError(f"non-finite iterate at iteration {total}")
            if obj < best_obj:
                best_obj, best_W = obj, W.copy()
            if len(trace) < 4000:
                trace.append(best_obj)
            best_dual = max(best_dual, _dual_value(P, A.T @ P, Fw, lam_w))
            gap = best_obj - best_dual
            if gap <= gamma:
                Z = best_W if L is None else solve_triangular(L.T, best_W.T, lower=False).T
                return SRLassoSolution(
                    Z, objective(prob, Z), max(gap, 0.0), total, prob.index_set,
                    converged=True,
                    info={"operator_norm": Anorm, "objective_trace": trace},
                )
            if gap <= eps:
                break
        W = best_W.copy()
    Z = best_W if L is None else solve_triangular(L.T, best_W.T, lower=False).T
    return SRLassoSolution(
        Z, objective(prob, Z), max(best_obj - best_dual, 0.0), total, prob.index_set,
        converged=False, info={"operator_norm": Anorm, "objective_trace": trace},
    )


def default_lambda(m: int, eps: float = 1e-3) -> float:
    """Default regularization 1 / (4 sqrt(m / L(m, eps))).

    The theory only promises that a suitable value depends on (m, eps)
    alone; this default is a knob, and experiment records always carry
    the lambda actually used.
    """
    L, _ = log_factor(m, eps)
    return 1.0 / (4.0 * math.sqrt(m / L))


def least_squares_oracle(S: IndexSet, system: MeasurementSystem) -> SRLassoSolution:
    """Empirical least squares on a fixed index set, embedded in Lambda.

    Minimizes the mean squared V-norm misfit over polynomials supported
    on S via QR (lstsq) on the corresponding submatrix; the Gram factor
    drops out of the normal equations, so columns are solved jointly.
    Rank deficiency yields the least-norm solution and is flagged.
    """
    Lambda = system.index_set
    if len(S) > system.m:
        raise ValueError("least squares needs |S| <= m")
    pos = [Lambda.position(nu) for nu in S]
    sub = system.A[:, pos]
    sol, _, rank, _ = np.linalg.lstsq(sub, system.F, rcond=None)
    Z = np.zeros((system.N, system.K))
    Z[pos] = sol
    R = system.A @ Z - system.F
    if system.gram is None:
        misfit = float(np.linalg.norm(R))
    else:
        misfit = math.sqrt(max(np.sum((R @ system.gram) * R), 0.0))
    return SRLassoSolution(
        Z=Z,
        objective=misfit,
        gamma_certificate=0.0,
        iterations=0,
        index_set=Lambda,
        info={"rank": int(rank), "rank_deficient": bool(rank < len(S))},
    )


def prune_coefficients(
    sol: SRLassoSolution,
    n: int,
    gram: np.ndarray | None = None,
    prob: SRLassoProblem | None = None,
) -> tuple[IndexSet, SRLassoSolution]:
    """Keep the n rows of largest V-norm, zero the rest.

    Ties break toward earlier enumeration positions for determinism.
    Returns the surviving index set and the sparsified solution; when the
    originating problem is supplied the objective is recomputed for the
    pruned coefficients.
    """
    N = sol.Z.shape[0]
    if not (1 <= n <= N):
        raise ValueError(f"n must lie in [1, {N}]")
    norms = sol.row_norms(gram)
    order = sorted(range(N), key=lambda j: (-norms[j], j))
    keep = sorted(order[:n])
    Z = np.zeros_like(sol.Z)
    Z[keep] = sol.Z[keep]
    if sol.index_set is not None:
        support = IndexSet(tuple(sol.index_set[j] for j in keep), dim=sol.index_set.dim)
    else:
        support = None
    obj = objective(prob, Z) if prob is not None else sol.objective
    pruned = replace(
        sol,
        Z=Z,
        objective=obj,
        info=dict(sol.info, pruned_to=n, objective_stale=prob is None),
    )
    return support, pruned


def predict(index_set: IndexSet, Z: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Evaluate the polynomial with coefficient rows Z at new points."""
    B = design_matrix(points, index_set, normalize=False)
    out = B @ Z
    return out[:, 0] if out.ndim == 2 and out.shape[1] == 1 else out
