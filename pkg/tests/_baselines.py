"""Independent oracles used by the tests.

The plain (non-restarted) primal-dual iteration here is deliberately a
separate implementation from the package solver: a fixed-step loop with
no restarts, no certificates and no best-iterate tracking.  With numba
available the million-iteration acceptance baseline runs in seconds;
otherwise a pure numpy fallback is used.
"""

from __future__ import annotations

import itertools

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except Exception:  # pragma: no cover
    HAVE_NUMBA = False


def _plain_cp_numpy(A, b, lam, w, iters):
    m, N = A.shape
    Lop = np.linalg.norm(A, 2)
    tau = sigma = 0.99 / Lop
    x = np.zeros(N)
    xb = x.copy()
    p = np.zeros(m)
    thr = tau * lam * w
    for _ in range(iters):
        p = p + sigma * (A @ xb - b)
        pn = np.sqrt(np.sum(p * p))
        if pn > 1.0:
            p = p / pn
        xn = x - tau * (A.T @ p)
        ax = np.abs(xn)
        xn = np.where(ax <= thr, 0.0, xn * (1.0 - thr / np.maximum(ax, 1e-300)))
        xb = 2.0 * xn - x
        x = xn
    return x, float(lam * np.sum(w * np.abs(x)) + np.linalg.norm(A @ x - b))


if HAVE_NUMBA:

    @njit(cache=True)
    def _plain_cp_jit(A, b, lam, w, iters, Lop):  # pragma: no cover - jitted
        m, N = A.shape
        tau = 0.99 / Lop
        sigma = tau
        x = np.zeros(N)
        xb = np.zeros(N)
        p = np.zeros(m)
        for _ in range(iters):
            r = A @ xb - b
            for i in range(m):
                p[i] += sigma * r[i]
            pn = 0.0
            for i in range(m):
                pn += p[i] * p[i]
            pn = np.sqrt(pn)
            if pn > 1.0:
                for i in range(m):
                    p[i] /= pn
            g = A.T @ p
            for j in range(N):
                xn = x[j] - tau * g[j]
                t = tau * lam * w[j]
                ax = abs(xn)
                if ax <= t:
                    xn = 0.0
                else:
                    xn = xn * (1.0 - t / ax)
                xb[j] = 2.0 * xn - x[j]
                x[j] = xn
        obj = 0.0
        for j in range(N):
            obj += w[j] * abs(x[j])
        obj *= lam
        r = A @ x - b
        rn = 0.0
        for i in range(m):
            rn += r[i] * r[i]
        return x, obj + np.sqrt(rn)


def plain_primal_dual(A, b, lam, w, iters):
    """Fixed-step Chambolle-Pock baseline (scalar targets)."""
    A = np.ascontiguousarray(A, dtype=np.float64)
    b = np.ascontiguousarray(b, dtype=np.float64)
    w = np.ascontiguousarray(w, dtype=np.float64)
    if HAVE_NUMBA:
        x, obj = _plain_cp_jit(A, b, float(lam), w, iters, float(np.linalg.norm(A, 2)))
        return np.asarray(x), float(obj)
    return _plain_cp_numpy(A, b, lam, w, iters)


def brute_force_is_lower(members) -> bool:
    """Direct definition check: every componentwise-smaller index is present."""
    mem = {tuple(sorted(nu)) for nu in members}
    for nu in members:
        dims = [d for d, _ in nu]
        vals = [v for _, v in nu]
        for lower_vals in itertools.product(*(range(v + 1) for v in vals)):
            mu = tuple(sorted((d, v) for d, v in zip(dims, lower_vals) if v))
            if mu not in mem:
                return False
    return True


def brute_force_is_anchored(members) -> bool:
    if not brute_force_is_lower(members):
        return False
    mem = {tuple(sorted(nu)) for nu in members}
    units = [nu[0][0] for nu in mem if len(nu) == 1 and nu[0][1] == 1]
    return all(((j, 1),) in mem for j in range(1, max(units, default=0) + 1))


def brute_force_hyperbolic_cross(n):
    """Support-wise enumeration of the hyperbolic cross (independent of
    the package's budgeted recursion).

    Any member has at most log2(n) nonzero entries, so supports of size
    up to that bound are enumerated directly.
    """
    out = {()}
    max_support = max(1, int(np.log2(n)) + 1)
    dims = range(1, n)
    for k in range(1, max_support + 1):
        for support in itertools.combinations(dims, k):
            for vals in itertools.product(range(1, n), repeat=k):
                prod = 1
                for v in vals:
                    prod *= v + 1
                if prod <= n:
                    out.add(tuple(zip(support, vals)))
    return out
