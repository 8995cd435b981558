"""Dense complex matrix arithmetic and spectral primitives.

Matrices are plain ``numpy.ndarray`` objects with dtype complex128, treated
as immutable by convention.  Validation happens at the boundary via
``as_matrix`` / ``require_square``; everything else assumes clean input.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .config import DEFAULT, Tolerances
from .errors import (
    DimensionMismatch,
    EigenFailure,
    MatrixFileError,
    NotPSD,
    RankDeficient,
    SingularMatrix,
)

__all__ = [
    "EigenSystem",
    "as_matrix",
    "require_square",
    "mul",
    "adjoint",
    "inverse",
    "eigen",
    "psd_sqrt",
    "operator_norm",
    "orthonormalize_within",
    "hermitize",
    "hermitian_defect",
    "normalize_columns",
]


def as_matrix(data, d_rows: int | None = None, d_cols: int | None = None) -> np.ndarray:
    """Coerce to a finite complex128 2-D array, validating shape if given."""
    a = np.asarray(data, dtype=complex)
    if a.ndim != 2:
        raise MatrixFileError(f"expected a 2-D array, got ndim={a.ndim}")
    if a.size == 0:
        raise MatrixFileError("degenerate (empty) matrix rejected")
    if not np.all(np.isfinite(a.real)) or not np.all(np.isfinite(a.imag)):
        raise MatrixFileError("matrix entries must be finite")
    if d_rows is not None and a.shape[0] != d_rows:
        raise MatrixFileError(f"expected {d_rows} rows, got {a.shape[0]}")
    if d_cols is not None and a.shape[1] != d_cols:
        raise MatrixFileError(f"expected {d_cols} columns, got {a.shape[1]}")
    return a


def require_square(a: np.ndarray) -> int:
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"square matrix required, got shape {a.shape}")
    return a.shape[0]


@dataclass(frozen=True)
class EigenSystem:
    """Full spectrum plus a (unitary, upper-triangular) Schur pair."""

    values: np.ndarray   # length d, with multiplicity
    vectors: np.ndarray  # columns are right eigenvectors where they exist
    schur_q: np.ndarray
    schur_t: np.ndarray


def mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if a.shape[1] != b.shape[0]:
        raise DimensionMismatch(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def adjoint(a: np.ndarray) -> np.ndarray:
    """Conjugate transpose."""
    return a.conj().T


def operator_norm(a: np.ndarray) -> float:
    """Largest singular value."""
    if min(a.shape) == 0:
        return 0.0
    return float(np.linalg.norm(a, 2))


def inverse(a: np.ndarray, tol: Tolerances = DEFAULT) -> np.ndarray:
    require_square(a)
    s = np.linalg.svd(a, compute_uv=False)
    if s[-1] <= tol.sing_for(s[0]):
        raise SingularMatrix(
            f"smallest singular value {s[-1]:.3e} below cutoff {tol.sing_for(s[0]):.3e}"
        )
    return np.linalg.inv(a)


def eigen(a: np.ndarray) -> EigenSystem:
    require_square(a)
    try:
        values, vectors = np.linalg.eig(a)
        schur_t, schur_q = scipy.linalg.schur(a, output="complex")
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as exc:  # pragma: no cover
        raise EigenFailure(f"eigendecomposition failed: {exc}") from exc
    return EigenSystem(values=values, vectors=vectors, schur_q=schur_q, schur_t=schur_t)


def hermitize(a: np.ndarray) -> np.ndarray:
    return (a + a.conj().T) / 2.0


def hermitian_defect(a: np.ndarray) -> float:
    """Relative deviation from Hermitian symmetry."""
    scale = max(operator_norm(a), 1.0)
    return operator_norm(a - a.conj().T) / scale


def psd_sqrt(a: np.ndarray, tol: Tolerances = DEFAULT) -> np.ndarray:
    """Hermitian PSD square root via eigendecomposition.

    Eigenvalues in [-tol.psd, 0) are clamped to zero; anything below that
    raises NotPSD.
    """
    require_square(a)
    if hermitian_defect(a) > tol.herm:
        raise NotPSD(f"matrix is not Hermitian within {tol.herm:.1e}")
    w, v = np.linalg.eigh(hermitize(a))
    if w[0] < -tol.psd:
        raise NotPSD(f"eigenvalue {w[0]:.3e} below -{tol.psd:.1e}")
    w = np.maximum(w, 0.0)
    root = (v * np.sqrt(w)) @ v.conj().T
    return hermitize(root)


def orthonormalize_within(vectors: np.ndarray, tol: Tolerances = DEFAULT) -> np.ndarray:
    """Orthonormal basis spanning the same column space, via QR.

    The R-diagonal is made real positive so the result is deterministic.
    """
    v = np.asarray(vectors, dtype=complex)
    if v.ndim == 1:
        v = v[:, None]
    gram = v.conj().T @ v
    det = abs(np.linalg.det(gram))
    if det <= tol.sing_for(max(operator_norm(gram), 1.0)):
        raise RankDeficient(f"Gram determinant {det:.3e} below cutoff")
    q, r = np.linalg.qr(v)
    diag = np.diagonal(r).copy()
    phase = np.where(np.abs(diag) > 0, diag / np.abs(np.where(diag == 0, 1, diag)), 1.0)
    return q * phase.conj()[None, :]


def normalize_columns(a: np.ndarray) -> np.ndarray:
    """Scale every column to unit Euclidean norm."""
    norms = np.linalg.norm(a, axis=0)
    if np.any(norms == 0):
        raise RankDeficient("cannot normalize a zero column")
    return a / norms[None, :]
