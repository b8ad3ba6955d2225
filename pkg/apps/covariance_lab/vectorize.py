"""
Column-wise vectorization of triangles.

lvec takes the lower triangle including the diagonal, column by column:
A11, A21, ..., AM1, A22, ..., AMM. uvec takes the strict upper triangle,
column by column: A12, A13, A23, A14, ....
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np

from array_model.exceptions import DomainError


@lru_cache(maxsize=None)
def lvec_indices(M: int) -> tuple[np.ndarray, np.ndarray]:
    """(rows, cols) of the lvec order, 0-based."""
    # row-major upper triangle, transposed, is the column-major lower triangle
    cols, rows = np.triu_indices(M)
    rows.setflags(write=False)
    cols.setflags(write=False)
    return rows, cols


@lru_cache(maxsize=None)
def uvec_indices(M: int) -> tuple[np.ndarray, np.ndarray]:
    """(rows, cols) of the uvec order, 0-based."""
    cols, rows = np.tril_indices(M, -1)
    rows.setflags(write=False)
    cols.setflags(write=False)
    return rows, cols


def _square(A) -> np.ndarray:
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DomainError(f'Expected a square matrix, got shape {A.shape}.')
    return A


def lvec(A) -> np.ndarray:
    A = _square(A)
    return A[lvec_indices(A.shape[0])]


def uvec(A) -> np.ndarray:
    A = _square(A)
    return A[uvec_indices(A.shape[0])]


def restore_lower(values, M: int) -> np.ndarray:
    """Inverse of lvec; entries above the diagonal are zero."""
    values = np.asarray(values)
    if values.shape != (M * (M + 1) // 2,):
        raise DomainError(f'lvec of an {M} x {M} matrix has {M * (M + 1) // 2} entries, got {values.size}.')
    A = np.zeros((M, M), dtype=values.dtype)
    A[lvec_indices(M)] = values
    return A


def restore_upper(values, M: int) -> np.ndarray:
    """Inverse of uvec; the diagonal and lower triangle are zero."""
    values = np.asarray(values)
    if values.shape != (M * (M - 1) // 2,):
        raise DomainError(f'uvec of an {M} x {M} matrix has {M * (M - 1) // 2} entries, got {values.size}.')
    A = np.zeros((M, M), dtype=values.dtype)
    A[uvec_indices(M)] = values
    return A
