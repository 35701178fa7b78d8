"""
Dense linear algebra over the prime field GF(p).

Graded pieces of modules are finite dimensional, so Hom pieces, Ext pieces,
pairing ranks and the isomorphism search all come down to matrices over
GF(p). Arrays are galois FieldArrays; callers pass plain nested lists or
integer numpy arrays and get numpy arrays back.
"""

from functools import lru_cache

import galois
import numpy as np


@lru_cache(maxsize=None)
def field(p: int):
    return galois.GF(p)


def as_field_array(matrix, p: int, shape: tuple[int, int] | None = None):
    GF = field(p)
    arr = np.asarray(matrix, dtype=np.int64)
    if shape is not None and arr.size == 0:
        arr = np.zeros(shape, dtype=np.int64)
    return GF(np.mod(arr, p))


def rank(matrix, p: int) -> int:
    arr = np.asarray(matrix, dtype=np.int64)
    if arr.ndim != 2 or arr.size == 0:
        return 0
    return int(np.linalg.matrix_rank(as_field_array(arr, p)))


def nullspace(matrix, p: int, ncols: int | None = None) -> np.ndarray:
    """Basis of {x : matrix @ x = 0}, one basis vector per row."""
    arr = np.asarray(matrix, dtype=np.int64)
    if arr.ndim != 2 or arr.shape[0] == 0:
        n = ncols if ncols is not None else (arr.shape[1] if arr.ndim == 2 else 0)
        return np.eye(n, dtype=np.int64)
    if arr.shape[1] == 0:
        return np.zeros((0, 0), dtype=np.int64)
    basis = as_field_array(arr, p).null_space()
    return np.asarray(basis, dtype=np.int64).reshape(-1, arr.shape[1])


def row_reduce(matrix, p: int) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form and pivot columns."""
    arr = np.asarray(matrix, dtype=np.int64)
    if arr.ndim != 2 or arr.size == 0:
        return arr, []
    rref = np.asarray(as_field_array(arr, p).row_reduce(), dtype=np.int64)
    pivots = []
    for row in rref:
        nz = np.flatnonzero(row)
        if nz.size == 0:
            break
        pivots.append(int(nz[0]))
    return rref, pivots


def solve(matrix, rhs, p: int) -> np.ndarray | None:
    """One solution x of matrix @ x = rhs, or None when inconsistent."""
    arr = np.asarray(matrix, dtype=np.int64)
    b = np.asarray(rhs, dtype=np.int64).reshape(-1)
    rows = b.shape[0]
    ncols = arr.shape[1] if arr.ndim == 2 else 0
    if not np.any(np.mod(b, p)):
        return np.zeros(ncols, dtype=np.int64)
    if ncols == 0:
        return None
    augmented = np.hstack([arr.reshape(rows, ncols), b.reshape(rows, 1)])
    rref, pivots = row_reduce(augmented, p)
    if ncols in pivots:
        return None
    x = np.zeros(ncols, dtype=np.int64)
    for r, c in enumerate(pivots):
        x[c] = rref[r, ncols]
    return x


def in_span(rows, vector, p: int) -> bool:
    vec = np.asarray(vector, dtype=np.int64).reshape(1, -1)
    if not np.any(np.mod(vec, p)):
        return True
    base = np.asarray(rows, dtype=np.int64)
    if base.size == 0:
        return False
    base = base.reshape(-1, vec.shape[1])
    return rank(np.vstack([base, vec]), p) == rank(base, p)


def random_vector(rng: np.random.Generator, length: int, p: int) -> np.ndarray:
    return rng.integers(1, p, size=length, dtype=np.int64)
