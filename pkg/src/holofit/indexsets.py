"""Multi-index sets for tensor Legendre expansions.

Multi-indices are finitely supported exponent vectors; index sets are
finite, deterministically ordered collections of them.  Structured
families (lower, anchored, hyperbolic cross) and the intrinsic weights
of the orthonormal Legendre basis live here.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

__all__ = [
    "MultiIndex",
    "IndexSet",
    "WeightVector",
    "ZERO_INDEX",
    "unit_index",
    "is_lower",
    "is_anchored",
    "hyperbolic_cross",
    "hyperbolic_cross_size",
    "hyperbolic_cross_max_order",
    "intrinsic_weights",
    "weighted_cardinality",
    "max_order",
    "monotone_majorant",
    "random_lower_set",
]


@dataclass(frozen=True)
class MultiIndex:
    """Finitely supported exponent vector.

    Stored sparsely as ``((dim, exponent), ...)`` with 1-based dimensions,
    sorted by dimension, zero exponents never stored.
    """

    entries: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        ent = tuple(sorted((int(d), int(v)) for d, v in self.entries if v != 0))
        for d, v in ent:
            if d < 1:
                raise ValueError(f"dimension indices are 1-based, got {d}")
            if v < 0:
                raise ValueError(f"exponents must be nonnegative, got {v}")
        dims = [d for d, _ in ent]
        if len(set(dims)) != len(dims):
            raise ValueError("duplicate dimension in multi-index")
        object.__setattr__(self, "entries", ent)

    @classmethod
    def from_dense(cls, exps) -> "MultiIndex":
        return cls(tuple((i + 1, int(v)) for i, v in enumerate(exps) if v))

    def to_dense(self, dim: int) -> np.ndarray:
        out = np.zeros(dim, dtype=np.int64)
        for d, v in self.entries:
            if d > dim:
                raise ValueError(f"multi-index active in dim {d} > {dim}")
            out[d - 1] = v
        return out

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(d for d, _ in self.entries)

    @property
    def order(self) -> int:
        """The 1-norm: sum of exponents (exact integer)."""
        return sum(v for _, v in self.entries)

    @property
    def max_dim(self) -> int:
        return self.entries[-1][0] if self.entries else 0

    def exponent(self, dim: int) -> int:
        for d, v in self.entries:
            if d == dim:
                return v
        return 0

    def __le__(self, other: "MultiIndex") -> bool:
        return all(v <= other.exponent(d) for d, v in self.entries)

    def decrement(self, dim: int) -> "MultiIndex":
        """Return the index with one subtracted from ``dim``."""
        v = self.exponent(dim)
        if v == 0:
            raise ValueError(f"cannot decrement zero exponent in dim {dim}")
        return MultiIndex(tuple((d, e - 1 if d == dim else e) for d, e in self.entries))

    def increment(self, dim: int) -> "MultiIndex":
        if self.exponent(dim):
            return MultiIndex(
                tuple((d, e + 1 if d == dim else e) for d, e in self.entries)
            )
        return MultiIndex(self.entries + ((dim, 1),))

    def weight_squared(self) -> int:
        """Squared intrinsic weight, an exact integer: prod(2*nu_k + 1)."""
        return math.prod(2 * v + 1 for _, v in self.entries)

    def sort_key(self, dim: int | None = None):
        # Canonical ("norm-lex") order: 1-norm first, then lexicographic on
        # the dense prefix up to the declared ambient dimension.
        d = dim if dim is not None else self.max_dim
        return (self.order, tuple(self.to_dense(max(d, self.max_dim))))

    def __repr__(self):
        if not self.entries:
            return "MultiIndex(0)"
        return "MultiIndex({" + ", ".join(f"{d}: {v}" for d, v in self.entries) + "})"


ZERO_INDEX = MultiIndex()


def unit_index(dim: int) -> MultiIndex:
    return MultiIndex(((dim, 1),))


@dataclass(frozen=True)
class IndexSet:
    """Finite ordered collection of distinct multi-indices.

    ``ordering == "norm-lex"`` means the canonical deterministic order
    (ascending 1-norm, ties broken lexicographically on the dense prefix).
    ``"given"`` preserves the constructor order, used where alignment with
    external data matters.
    """

    members: tuple[MultiIndex, ...]
    dim: int = 0
    ordering: str = "norm-lex"
    _pos: dict = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        mem = tuple(self.members)
        if len(set(mem)) != len(mem):
            raise ValueError("index set contains duplicates")
        ambient = max((nu.max_dim for nu in mem), default=0)
        dim = max(self.dim, ambient)
        if self.ordering == "norm-lex":
            mem = tuple(sorted(mem, key=lambda nu: nu.sort_key(dim)))
        elif self.ordering != "given":
            raise ValueError(f"unknown ordering tag {self.ordering!r}")
        object.__setattr__(self, "members", mem)
        object.__setattr__(self, "dim", dim)
        object.__setattr__(self, "_pos", {nu: i for i, nu in enumerate(mem)})

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __contains__(self, nu: MultiIndex) -> bool:
        return nu in self._pos

    def __getitem__(self, i: int) -> MultiIndex:
        return self.members[i]

    def position(self, nu: MultiIndex) -> int:
        return self._pos[nu]

    def restrict(self, members) -> "IndexSet":
        """Subset with the same ambient dimension, re-canonicalized."""
        return IndexSet(tuple(members), dim=self.dim)

    def max_degrees(self) -> np.ndarray:
        """Per-dimension maximum exponent over the set (length ``dim``)."""
        out = np.zeros(self.dim, dtype=np.int64)
        for nu in self.members:
            for d, v in nu.entries:
                out[d - 1] = max(out[d - 1], v)
        return out

    def to_json(self) -> str:
        """Serialize as a JSON array of sparse {dim: exponent} maps."""
        return json.dumps(
            [{str(d): v for d, v in nu.entries} for nu in self.members]
        )

    @classmethod
    def from_json(cls, text: str, dim: int = 0, ordering: str = "given") -> "IndexSet":
        data = json.loads(text)
        mem = tuple(
            MultiIndex(tuple((int(d), int(v)) for d, v in entry.items()))
            for entry in data
        )
        return cls(mem, dim=dim, ordering=ordering)


@dataclass(frozen=True)
class WeightVector:
    """Per-index positive weights aligned with an IndexSet enumeration.

    ``squared`` holds exact squared weights (integers for intrinsic
    weights) so weighted cardinalities can be computed without roundoff.
    """

    values: np.ndarray
    squared: tuple = None

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if np.any(vals < 1.0 - 1e-12):
            raise ValueError("weights must satisfy u_nu >= 1")
        object.__setattr__(self, "values", vals)
        if self.squared is not None:
            object.__setattr__(self, "squared", tuple(self.squared))

    def __len__(self):
        return len(self.values)


def is_lower(S: IndexSet) -> bool:
    """True iff S is downward closed under componentwise <=.

    Equivalent to closure under single-coordinate decrements, which is
    what gets checked.
    """
    for nu in S:
        for d in nu.support:
            if nu.decrement(d) not in S:
                return False
    return True


def is_anchored(S: IndexSet) -> bool:
    """True iff S is lower and units present form a contiguous prefix."""
    if not is_lower(S):
        return False
    units = sorted(
        nu.entries[0][0] for nu in S if len(nu.entries) == 1 and nu.entries[0][1] == 1
    )
    return all(unit_index(j) in S for j in range(1, max(units, default=0) + 1))


def hyperbolic_cross(n: int) -> IndexSet:
    """The hyperbolic-cross index set of parameter ``n``.

    Contains every nu supported on dims 1..n-1 with
    prod_k (nu_k + 1) <= n.  Enumerated recursively with an integer
    product budget; for n = 1 this is the singleton {0}.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    members: list[MultiIndex] = []
    entries: list[tuple[int, int]] = []

    def rec(dim: int, budget: int):
        if dim > n - 1 or budget == 1:
            members.append(MultiIndex(tuple(entries)))
            return
        rec(dim + 1, budget)
        v = 1
        while v + 1 <= budget:
            entries.append((dim, v))
            rec(dim + 1, budget // (v + 1))
            entries.pop()
            v += 1

    if n == 1:
        members.append(ZERO_INDEX)
    else:
        rec(1, n)
    return IndexSet(tuple(members), dim=max(1, n - 1))


@lru_cache(maxsize=None)
def _hc_count(dims: int, budget: int) -> int:
    if dims == 0:
        return 1
    total = 0
    v = 0
    while v + 1 <= budget:
        total += _hc_count(dims - 1, budget // (v + 1))
        v += 1
    return total


def hyperbolic_cross_size(n: int) -> int:
    """|hyperbolic_cross(n)| by exact combinatorial counting.

    Avoids enumeration, which is infeasible for n around 64 (the set then
    holds ~1.9e8 indices).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if n == 1:
        return 1
    return _hc_count(n - 1, n)


def hyperbolic_cross_max_order(n: int) -> int:
    """Exact max 1-norm over hyperbolic_cross(n).

    Since sum(nu) <= prod(nu_k + 1) - 1 <= n - 1 with equality attained by
    (n-1)*e_1, the maximum is n - 1.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    return n - 1


def intrinsic_weights(S: IndexSet) -> WeightVector:
    """Sup-norm weights of the orthonormal tensor Legendre basis.

    u_nu = prod_k sqrt(2*nu_k + 1), aligned with S's enumeration; the
    squared weights are exact integers.
    """
    squared = tuple(nu.weight_squared() for nu in S)
    return WeightVector(np.sqrt(np.array(squared, dtype=float)), squared=squared)


def weighted_cardinality(S: IndexSet, u: WeightVector):
    """Sum of squared weights over S.

    With intrinsic weights this equals the worst-case Christoffel value
    of the spanned polynomial space and is returned as an exact integer.
    """
    if len(u) != len(S):
        raise ValueError("weight vector not aligned with index set")
    if u.squared is not None:
        return sum(u.squared)
    return float(np.sum(u.values**2))


def max_order(S: IndexSet) -> int:
    """max over nu in S of the 1-norm; errors on the empty set."""
    if len(S) == 0:
        raise ValueError("max_order undefined for the empty set")
    return max(nu.order for nu in S)


def monotone_majorant(b, p: float) -> tuple[np.ndarray, float]:
    """Minimal monotone majorant and its l^p norm.

    Returns (b_tilde, norm) where b_tilde[i] = sup_{j >= i} |b[j]| (tail
    beyond the finite representation taken as zero) and
    norm = (sum b_tilde[i]**p)**(1/p).
    """
    if not (0.0 < p <= 1.0):
        raise ValueError("p must lie in (0, 1]")
    arr = np.abs(np.asarray(b, dtype=float))
    if arr.size == 0:
        return arr, 0.0
    maj = np.maximum.accumulate(arr[::-1])[::-1]
    norm = float(np.sum(maj**p) ** (1.0 / p))
    return maj, norm


def random_lower_set(
    size: int, dim: int, rng: np.random.Generator, anchored: bool = False
) -> IndexSet:
    """Random lower (optionally anchored) set by admissible growth."""
    members = {ZERO_INDEX}
    while len(members) < size:
        candidates = set()
        for nu in members:
            for d in range(1, dim + 1):
                cand = nu.increment(d)
                if cand in members:
                    continue
                if not all(cand.decrement(k) in members for k in cand.support):
                    continue
                if anchored and cand.order == 1:
                    j = cand.entries[0][0]
                    if not all(unit_index(i) in members for i in range(1, j)):
                        continue
                candidates.add(cand)
        if not candidates:
            break
        pick = sorted(candidates, key=lambda nu: nu.sort_key(dim))
        members.add(pick[rng.integers(len(pick))])
    return IndexSet(tuple(members), dim=dim)
