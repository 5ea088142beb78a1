"""Dense linear algebra over GF(2) on numpy uint8 arrays."""

from __future__ import annotations

import numpy as np


def as_gf2(M) -> np.ndarray:
    A = np.asarray(M)
    if A.dtype == bool:
        return A.astype(np.uint8)
    return (np.asarray(A, dtype=np.int64) % 2).astype(np.uint8)


def matmul(A, B) -> np.ndarray:
    return (as_gf2(A).astype(np.int64) @ as_gf2(B).astype(np.int64) % 2).astype(np.uint8)


def row_reduce(M) -> tuple[np.ndarray, list[int]]:
    """Reduced row-echelon form and pivot columns."""
    R = as_gf2(M).copy()
    if R.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got shape {R.shape}")
    m, n = R.shape
    pivots: list[int] = []
    row = 0
    for col in range(n):
        if row == m:
            break
        hits = np.nonzero(R[row:, col])[0]
        if hits.size == 0:
            continue
        r = row + hits[0]
        if r != row:
            R[[row, r]] = R[[r, row]]
        others = np.nonzero(R[:, col])[0]
        others = others[others != row]
        R[others] ^= R[row]
        pivots.append(col)
        row += 1
    return R, pivots


def rank(M) -> int:
    A = as_gf2(M)
    if A.size == 0:
        return 0
    return len(row_reduce(A)[1])


def nullspace(M) -> np.ndarray:
    """Basis of {v : M v = 0}, one vector per row."""
    A = as_gf2(M)
    n = A.shape[1]
    if A.shape[0] == 0:
        return np.eye(n, dtype=np.uint8)
    R, pivots = row_reduce(A)
    free = [c for c in range(n) if c not in pivots]
    basis = np.zeros((len(free), n), dtype=np.uint8)
    for k, f in enumerate(free):
        basis[k, f] = 1
        for i, pc in enumerate(pivots):
            basis[k, pc] = R[i, f]
    return basis


def solve(A, b) -> np.ndarray | None:
    """One solution of A x = b, or None when the system is inconsistent."""
    A = as_gf2(A)
    b = as_gf2(b).reshape(-1)
    m, n = A.shape
    if m == 0:
        return np.zeros(n, dtype=np.uint8)
    R, pivots = row_reduce(np.column_stack([A, b]))
    if n in pivots:
        return None
    x = np.zeros(n, dtype=np.uint8)
    for i, pc in enumerate(pivots):
        x[pc] = R[i, n]
    return x
