"""Smith normal form over the local ring Z/p^M and lengths of finite modules.

The elimination kernel is compiled with numba when available; setting the
environment variable ``LOGDRW_NO_NUMBA=1`` selects the pure numpy path.
Entries stay below p^M < 2^31 so int64 products never overflow.
"""

from __future__ import annotations

import os

import numpy as np

__all__ = [
    "USE_NUMBA",
    "snf_local",
    "snf_local_numpy",
    "kernel_local",
    "submodule_length",
    "quotient_invariants",
]


def _snf_impl(A, p, M):
    """In-place elimination.  Returns (valuations, column transform).

    valuations[i] = M marks a zero pivot.
    """
    mod = 1
    for _ in range(M):
        mod *= p
    rows, cols = A.shape
    Q = np.zeros((cols, cols), dtype=np.int64)
    for i in range(cols):
        Q[i, i] = 1
    rank_bound = min(rows, cols)
    vals = np.full(cols, M, dtype=np.int64)
    for k in range(rank_bound):
        best_v = M
        bi = -1
        bj = -1
        for i in range(k, rows):
            for j in range(k, cols):
                a = A[i, j] % mod
                A[i, j] = a
                if a == 0:
                    continue
                v = 0
                while a % p == 0:
                    a //= p
                    v += 1
                if v < best_v:
                    best_v = v
                    bi = i
                    bj = j
                    if v == 0:
                        break
            if best_v == 0:
                break
        if bi < 0:
            break
        if bi != k:
            for j in range(cols):
                t = A[k, j]
                A[k, j] = A[bi, j]
                A[bi, j] = t
        if bj != k:
            for i in range(rows):
                t = A[i, k]
                A[i, k] = A[i, bj]
                A[i, bj] = t
            for i in range(cols):
                t = Q[i, k]
                Q[i, k] = Q[i, bj]
                Q[i, bj] = t
        pv = 1
        for _ in range(best_v):
            pv *= p
        unit = (A[k, k] // pv) % mod
        # inverse of the unit modulo p^M by the extended Euclid algorithm
        r0, r1 = mod, unit
        s0, s1 = 0, 1
        while r1 != 0:
            q = r0 // r1
            r0, r1 = r1, r0 - q * r1
            s0, s1 = s1, s0 - q * s1
        inv = s0 % mod
        for j in range(cols):
            A[k, j] = (A[k, j] * inv) % mod
        for i in range(k + 1, rows):
            a = A[i, k] % mod
            if a == 0:
                continue
            factor = (a // pv) % mod
            for j in range(k, cols):
                A[i, j] = (A[i, j] - factor * A[k, j]) % mod
        for j in range(k + 1, cols):
            a = A[k, j] % mod
            if a == 0:
                continue
            factor = (a // pv) % mod
            A[k, j] = 0
            for i in range(cols):
                Q[i, j] = (Q[i, j] - factor * Q[i, k]) % mod
        vals[k] = best_v
    return vals, Q


def snf_local_numpy(A, p: int, M: int):
    """Vectorized numpy version of the same elimination."""
    mod = p**M
    A = np.array(A, dtype=np.int64) % mod
    rows, cols = A.shape
    Q = np.eye(cols, dtype=np.int64)
    vals = np.full(cols, M, dtype=np.int64)
    for k in range(min(rows, cols)):
        sub = A[k:, k:]
        nz = sub != 0
        if not nz.any():
            break
        v = np.full(sub.shape, M, dtype=np.int64)
        work = sub.copy()
        alive = nz.copy()
        for level in range(M):
            divisible = alive & (work % p == 0)
            v[alive & ~divisible] = np.minimum(v[alive & ~divisible], level)
            work = np.where(divisible, work // p, work)
            alive = divisible
        bi, bj = np.unravel_index(int(np.argmin(v)), v.shape)
        best_v = int(v[bi, bj])
        bi += k
        bj += k
        A[[k, bi], :] = A[[bi, k], :]
        A[:, [k, bj]] = A[:, [bj, k]]
        Q[:, [k, bj]] = Q[:, [bj, k]]
        pv = p**best_v
        unit = int(A[k, k] // pv) % mod
        inv = pow(unit, -1, mod)
        A[k, :] = (A[k, :] * inv) % mod
        factors = (A[k + 1 :, k] // pv) % mod
        A[k + 1 :, k:] = (A[k + 1 :, k:] - np.outer(factors, A[k, k:])) % mod
        col_factors = (A[k, k + 1 :] // pv) % mod
        A[k, k + 1 :] = 0
        Q[:, k + 1 :] = (Q[:, k + 1 :] - np.outer(Q[:, k], col_factors)) % mod
        vals[k] = best_v
    return vals, Q


USE_NUMBA = os.environ.get("LOGDRW_NO_NUMBA", "") not in ("1", "true", "yes")
if USE_NUMBA:
    try:
        from numba import njit

        _snf_kernel = njit(cache=True)(_snf_impl)
    except ImportError:  # pragma: no cover
        USE_NUMBA = False


def snf_local(A, p: int, M: int):
    """Valuations of the Smith invariants of A over Z/p^M and a column transform Q.

    A Q is row-equivalent to diag(p^valuations); valuations[i] == M means zero.
    """
    if p**M >= 2**31:
        raise OverflowError("p^M must stay below 2^31 for the int64 kernel")
    A = np.array(A, dtype=np.int64)
    if A.ndim != 2:
        raise ValueError("expected a matrix")
    if A.shape[0] == 0 or A.shape[1] == 0:
        return np.full(A.shape[1], M, dtype=np.int64), np.eye(A.shape[1], dtype=np.int64)
    if USE_NUMBA:
        return _snf_kernel(A.copy() % p**M, p, M)
    return snf_local_numpy(A, p, M)


def kernel_local(A, p: int, M: int) -> np.ndarray:
    """Generators (as columns) of the kernel of x -> A x on (Z/p^M)^cols."""
    A = np.array(A, dtype=np.int64)
    cols = A.shape[1]
    if cols == 0:
        return np.zeros((0, 0), dtype=np.int64)
    vals, Q = snf_local(A, p, M)
    mod = p**M
    gens = []
    for i in range(cols):
        v = int(vals[i])
        if v == 0:
            continue
        gens.append((Q[:, i] * p ** (M - v)) % mod)
    if not gens:
        return np.zeros((cols, 0), dtype=np.int64)
    return np.stack(gens, axis=1)


def submodule_length(G, p: int, M: int) -> int:
    """Length of the submodule of (Z/p^M)^rows spanned by the columns of G."""
    G = np.array(G, dtype=np.int64)
    if G.size == 0:
        return 0
    vals, _ = snf_local(G, p, M)
    return int(sum(M - min(int(v), M) for v in vals))


def quotient_invariants(Z, B, p: int, M: int) -> list:
    """Elementary divisor exponents of span(Z)/span(B), assuming span(B) within span(Z).

    Uses c_j = len(p^j Z + B) - len(B): the number of cyclic factors of
    order at least p^(j+1) is c_j - c_(j+1).
    Z and B are 2-d arrays of column generators with the same row count.
    """
    Z = np.asarray(Z, dtype=np.int64)
    B = np.asarray(B, dtype=np.int64)
    mod = p**M
    base = submodule_length(B, p, M)
    counts = []
    for j in range(M + 1):
        stacked = np.concatenate([(Z * p**j) % mod, B], axis=1)
        counts.append(submodule_length(stacked, p, M) - base)
    counts.append(0)
    at_least = [counts[j] - counts[j + 1] for j in range(M + 1)]
    exps = []
    for j in range(M):
        exps += [j + 1] * (at_least[j] - at_least[j + 1])
    return sorted(exps, reverse=True)
