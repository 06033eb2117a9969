"""Small shared linear-algebra helpers.

Vectorization convention (used everywhere in the package): column stacking,
``vec(A)[j*d + i] = A[i, j]``.  The superoperator of the two-sided product
``A -> X A Y`` is then ``kron(Y^T, X)``.
"""

from __future__ import annotations

import numpy as np


def dagger(a: np.ndarray) -> np.ndarray:
    return a.conj().T


def vec(a: np.ndarray) -> np.ndarray:
    """Column-stack a matrix into a vector."""
    return np.asarray(a).T.reshape(-1)


def unvec(v: np.ndarray, dim: int | None = None) -> np.ndarray:
    """Inverse of :func:`vec` for square matrices."""
    v = np.asarray(v).reshape(-1)
    if dim is None:
        dim = int(round(np.sqrt(v.size)))
    return v.reshape(dim, dim).T


def sandwich_matrix(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Matrix of the superoperator ``A -> X A Y`` in the vec convention."""
    return np.kron(np.asarray(y).T, np.asarray(x))


def expm_hermitian(h: np.ndarray, scale: complex) -> np.ndarray:
    """``exp(scale * H)`` for Hermitian ``H`` via eigendecomposition."""
    evals, evecs = np.linalg.eigh(h)
    return (evecs * np.exp(scale * evals)) @ dagger(evecs)


def hermiticity_defect(a: np.ndarray) -> float:
    """Spectral-norm distance from ``A`` to its Hermitian part's mirror."""
    return float(np.linalg.norm(a - dagger(a), 2))
