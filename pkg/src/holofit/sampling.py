"""Random sampling, design/data matrix assembly and empirical
sampling-discretization diagnostics.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

import numpy as np

from .container import read_container, write_container
from .indexsets import IndexSet
from .legendre import psi_table
from .targets import TargetFunction

__all__ = [
    "MeasurementSystem",
    "draw_samples",
    "design_matrix",
    "build_system",
    "discretization_constants",
    "l2_error",
]


def rng_from(seed: int, *streams: int) -> np.random.Generator:
    """Counter-based Philox generator keyed by (seed, stream ids).

    Deterministic across platforms and safely parallel: distinct stream
    tuples map to distinct 128-bit Philox keys via SHA-256.
    """
    tag = ("holofit:" + ":".join(str(x) for x in (seed, *streams))).encode()
    key = int.from_bytes(hashlib.sha256(tag).digest()[:16], "little")
    return np.random.Generator(np.random.Philox(key=key))


def draw_samples(m: int, d: int, seed: int) -> np.ndarray:
    """m i.i.d. points uniform on [-1, 1]^d; identical seed, identical points."""
    if m < 1 or d < 1:
        raise ValueError("m and d must be positive")
    return rng_from(seed, 1).uniform(-1.0, 1.0, size=(m, d))


def design_matrix(points: np.ndarray, Lambda: IndexSet, normalize: bool = True) -> np.ndarray:
    """Matrix of tensor Legendre values, A[i, j] = Psi_{nu_j}(y_i) / sqrt(m).

    Per-dimension value tables are built once by recurrence, columns are
    products over each index's active dimensions.  ``normalize=False``
    drops the 1/sqrt(m) factor.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    m, d = points.shape
    if Lambda.dim > d:
        raise ValueError(f"index set active in dim {Lambda.dim}, points have {d}")
    degs = Lambda.max_degrees()
    tables = [psi_table(points[:, k], int(degs[k])) if degs[k] > 0 else None for k in range(Lambda.dim)]
    A = np.ones((m, len(Lambda)))
    for j, nu in enumerate(Lambda):
        col = A[:, j]
        for dim, v in nu.entries:
            col *= tables[dim - 1][v]
    if normalize:
        A /= math.sqrt(m)
    return A


@dataclass(frozen=True)
class MeasurementSystem:
    """Sample points with the normalized design and data matrices.

    A[i, j] = Psi_{nu_j}(y_i)/sqrt(m) and row i of F is
    (f(y_i) + e_i)/sqrt(m) in V_h coordinates (K = 1 for scalar targets).
    """

    points: np.ndarray
    A: np.ndarray
    F: np.ndarray
    index_set: IndexSet
    seed: int
    noise_scale: float = 0.0
    gram: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @property
    def N(self) -> int:
        return self.A.shape[1]

    @property
    def K(self) -> int:
        return self.F.shape[1]

    def index_digest(self) -> str:
        return hashlib.sha256(self.index_set.to_json().encode()).hexdigest()[:16]

    def save(self, path) -> None:
        header = {
            "kind": "measurement-system",
            "m": self.m,
            "N": self.N,
            "K": self.K,
            "seed": self.seed,
            "noise_scale": self.noise_scale,
            "index_digest": self.index_digest(),
            "index_set": self.index_set.to_json(),
            "index_dim": self.index_set.dim,
        }
        arrays = {"points": self.points, "A": self.A, "F": self.F}
        if self.gram is not None:
            arrays["gram"] = self.gram
        write_container(path, header, arrays)

    @classmethod
    def load(cls, path) -> "MeasurementSystem":
        header, arrays = read_container(path)
        if header.get("kind") != "measurement-system":
            raise ValueError(f"{path}: not a measurement system container")
        Lambda = IndexSet.from_json(header["index_set"], dim=header["index_dim"])
        return cls(
            points=arrays["points"],
            A=arrays["A"],
            F=arrays["F"],
            index_set=Lambda,
            seed=header["seed"],
            noise_scale=header["noise_scale"],
            gram=arrays.get("gram"),
        )

    def save_csv(self, path) -> None:
        """Plain CSV dump of [points | A | F] for small instances."""
        block = np.hstack([self.points, self.A, self.F])
        cols = (
            [f"y{k+1}" for k in range(self.points.shape[1])]
            + [f"A{j}" for j in range(self.N)]
            + [f"F{k}" for k in range(self.K)]
        )
        np.savetxt(path, block, delimiter=",", header=",".join(cols), comments="")


def build_system(
    target: TargetFunction,
    Lambda: IndexSet,
    points: np.ndarray,
    noise_scale: float = 0.0,
    seed: int = 0,
    gram: np.ndarray | None = None,
) -> MeasurementSystem:
    """Assemble the design matrix and noisy data matrix at given points.

    Noise is adversarial-style: a direction drawn uniformly on the sphere
    in sample space, rescaled so the total V-norm sqrt(sum_i ||e_i||_V^2)
    equals ``noise_scale`` exactly.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if Lambda.dim > target.dim:
        raise ValueError("index set dimension exceeds target dimension")
    m = points.shape[0]
    A = design_matrix(points, Lambda)
    vals = target(points)
    if vals.ndim == 1:
        vals = vals[:, None]
    noise = np.zeros_like(vals)
    if noise_scale > 0:
        raw = rng_from(seed, 2).standard_normal(vals.shape)
        if gram is None:
            total = float(np.linalg.norm(raw))
        else:
            total = float(math.sqrt(np.sum((raw @ gram) * raw)))
        noise = raw * (noise_scale / total)
    F = (vals + noise) / math.sqrt(m)
    return MeasurementSystem(
        points=points,
        A=A,
        F=F,
        index_set=Lambda,
        seed=seed,
        noise_scale=noise_scale,
        gram=gram,
    )


def discretization_constants(A: np.ndarray, cols) -> tuple[float, float]:
    """Best constants (alpha, beta) of the empirical norm equivalence.

    For the span of the selected columns these are the extreme squared
    singular values of the m x |S| submatrix.  A rank-deficient submatrix
    reports alpha = 0 rather than raising.
    """
    cols = list(cols)
    sub = A[:, cols]
    s = np.linalg.svd(sub, compute_uv=False)
    smin = float(s[-1]) if len(s) == min(sub.shape) else 0.0
    if sub.shape[1] > sub.shape[0]:
        smin = 0.0
    return smin**2, float(s[0]) ** 2


def l2_error(
    target: TargetFunction,
    approx,
    n_mc: int,
    seed: int,
    gram: np.ndarray | None = None,
) -> tuple[float, float]:
    """Monte Carlo estimate of the L2 distance between target and approx.

    Uses a dedicated sample stream independent of training draws; returns
    (estimate, standard_error).  ``approx`` maps point batches to values;
    ``gram`` supplies the V-norm for Hilbert-valued outputs.
    """
    if n_mc < 1:
        raise ValueError("n_mc must be >= 1")
    pts = rng_from(seed, 3).uniform(-1.0, 1.0, size=(n_mc, target.dim))
    diff = np.asarray(target(pts)) - np.asarray(approx(pts))
    if diff.ndim == 1:
        sq = diff**2
    elif gram is None:
        sq = np.sum(diff**2, axis=1)
    else:
        sq = np.sum((diff @ gram) * diff, axis=1)
    mean = float(np.mean(sq))
    est = math.sqrt(max(mean, 0.0))
    se_mean = float(np.std(sq, ddof=1) / math.sqrt(n_mc)) if n_mc > 1 else 0.0
    stderr = se_mean / (2.0 * est) if est > 0 else math.sqrt(se_mean)
    return est, stderr
