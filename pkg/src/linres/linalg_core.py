"""Dense real-matrix primitives.

Every other module goes through these functions instead of calling
LAPACK wrappers directly, so the numerical contracts (tolerances, error
behaviour) live in one place.

Matrices and vectors are plain ``numpy.ndarray`` objects of dtype
float64. :func:`as_matrix` and :func:`as_vector` validate and coerce.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .exceptions import ConditioningError, ConvergenceError, ValidationError

EPS = np.finfo(np.float64).eps

__all__ = [
    "SpectrumSummary",
    "as_matrix",
    "as_vector",
    "spectral_radius",
    "singular_values",
    "max_singular_value",
    "spectrum_summary",
    "default_rank_tol",
    "numerical_rank",
    "nullspace_basis",
    "rank_decomposition",
    "char_poly_negated_coeffs",
    "least_squares",
]


def as_matrix(M, square: bool = False) -> np.ndarray:
    """Coerce ``M`` to a finite 2-D float64 array.

    Raises
    ------
    ValidationError
        If ``M`` is not 2-D, is empty, has non-finite entries, or is not
        square when ``square=True``.
    """
    A = np.asarray(M, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] == 0 or A.shape[1] == 0:
        raise ValidationError(f"expected a non-empty 2-D matrix, got shape {A.shape}")
    if square and A.shape[0] != A.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValidationError("matrix has non-finite entries")
    return A


def as_vector(v) -> np.ndarray:
    """Coerce ``v`` to a finite, non-empty 1-D float64 array."""
    x = np.asarray(v, dtype=np.float64)
    if x.ndim != 1 or x.size == 0:
        raise ValidationError(f"expected a non-empty 1-D vector, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValidationError("vector has non-finite entries")
    return x


def _eigvals(M: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.eigvals(M)
    except np.linalg.LinAlgError as exc:
        # LAPACK geev reports non-convergence of the QR iteration this way
        raise ConvergenceError(
            f"eigenvalue iteration did not converge (LAPACK iteration cap reached): {exc}"
        ) from exc


def spectral_radius(M) -> float:
    """Largest eigenvalue modulus of a square matrix.

    Examples
    --------
    >>> spectral_radius(np.eye(5))
    1.0
    """
    A = as_matrix(M, square=True)
    return float(np.max(np.abs(_eigvals(A))))


def singular_values(M) -> np.ndarray:
    """Singular values of ``M`` in descending order."""
    A = as_matrix(M)
    return np.linalg.svd(A, compute_uv=False)


def max_singular_value(M) -> float:
    return float(singular_values(M)[0])


@dataclass(frozen=True)
class SpectrumSummary:
    """Spectral radius and largest singular value of a matrix."""

    spectral_radius: float
    max_singular_value: float

    def __post_init__(self):
        # rho <= sigma_max holds for every matrix; slack covers eigen-solver error
        tol = 1e-8 * max(1.0, self.max_singular_value)
        if self.spectral_radius > self.max_singular_value + tol:
            raise ValidationError(
                f"spectral radius {self.spectral_radius} exceeds "
                f"max singular value {self.max_singular_value}"
            )


def spectrum_summary(M) -> SpectrumSummary:
    return SpectrumSummary(spectral_radius(M), max_singular_value(M))


def default_rank_tol(sv: np.ndarray, shape: tuple[int, int]) -> float:
    """Conventional cutoff ``sigma_1 * max(m, n) * eps``."""
    if sv.size == 0:
        return 0.0
    return float(sv[0]) * max(shape) * EPS


def _check_tol(tol: Optional[float]) -> None:
    if tol is not None and tol < 0:
        raise ValidationError(f"tolerance must be nonnegative, got {tol}")


def rank_decomposition(M, tol: Optional[float] = None):
    """One SVD giving ``(singular_values, tol, rank, nullspace_basis)``.

    ``tol`` defaults to :func:`default_rank_tol`; the nullspace basis has
    shape ``(cols, cols - rank)``.
    """
    _check_tol(tol)
    A = as_matrix(M)
    _, sv, Vt = np.linalg.svd(A, full_matrices=True)
    if tol is None:
        tol = default_rank_tol(sv, A.shape)
    rank = int(np.count_nonzero(sv > tol))
    return sv, float(tol), rank, Vt[rank:].T.copy()


def numerical_rank(M, tol: Optional[float] = None) -> int:
    """Number of singular values strictly above ``tol``.

    ``tol`` defaults to :func:`default_rank_tol`.
    """
    _check_tol(tol)
    A = as_matrix(M)
    sv = np.linalg.svd(A, compute_uv=False)
    if tol is None:
        tol = default_rank_tol(sv, A.shape)
    return int(np.count_nonzero(sv > tol))


def nullspace_basis(M, tol: Optional[float] = None) -> np.ndarray:
    """Orthonormal basis of the numerical nullspace of ``M``.

    Columns are the right singular vectors whose singular values are at
    or below ``tol``. An empty ``(cols, 0)`` array means full column rank.
    """
    return rank_decomposition(M, tol)[3]


def _leja_order(z: np.ndarray) -> np.ndarray:
    """Reorder points greedily so each maximises its distance product to the previous ones.

    Expanding a polynomial from Leja-ordered roots keeps the intermediate
    coefficients bounded; in eigen-solver order, roots spread around a
    circle build partial products with coefficients near ``2^n``.
    """
    n = z.size
    if n == 0:
        return z
    order = np.empty(n, dtype=np.intp)
    used = np.zeros(n, dtype=bool)
    first = int(np.argmax(np.abs(z)))
    order[0] = first
    used[first] = True
    tiny = np.finfo(np.float64).tiny
    logdist = np.log(np.maximum(np.abs(z - z[first]), tiny))
    for i in range(1, n):
        j = int(np.argmax(np.where(used, -np.inf, logdist)))
        order[i] = j
        used[j] = True
        logdist += np.log(np.maximum(np.abs(z - z[j]), tiny))
    return z[order]


def char_poly_negated_coeffs(M, imag_tol: float = 1e-8) -> np.ndarray:
    """Negated characteristic-polynomial coefficients ``phi_0 .. phi_{n-1}``.

    With ``det(lambda I - M) = lambda^n + a_{n-1} lambda^{n-1} + ... + a_0``
    this returns ``phi_k = -a_k``, so that
    ``M^n = sum_k phi_k M^k`` (Cayley-Hamilton).

    The coefficients are expanded from the eigenvalues, taken in Leja
    order, which is better conditioned than trace recursions.

    Raises
    ------
    ConditioningError
        If the expansion leaves an imaginary residue above ``imag_tol``
        (relative to the coefficient scale), which signals that the
        eigenvalues did not come in clean conjugate pairs.
    """
    A = as_matrix(M, square=True)
    n = A.shape[0]
    if n > 2048:
        raise ValidationError(f"matrix order {n} exceeds the supported 2048")
    lam = _leja_order(_eigvals(A))
    # coeffs[i] multiplies lambda^(n-i); coeffs[0] = 1
    coeffs = np.zeros(n + 1, dtype=np.complex128)
    coeffs[0] = 1.0
    for k, root in enumerate(lam, start=1):
        coeffs[1:k + 1] = coeffs[1:k + 1] - root * coeffs[0:k]
    scale = max(1.0, float(np.max(np.abs(coeffs.real))))
    residue = float(np.max(np.abs(coeffs.imag)))
    if residue > imag_tol * scale:
        raise ConditioningError(
            f"imaginary residue {residue:.3e} in characteristic polynomial "
            f"(threshold {imag_tol:.1e}); the polynomial is ill-conditioned"
        )
    alpha = coeffs.real[1:][::-1]  # alpha[k] multiplies lambda^k
    return -alpha


def least_squares(A, b, ridge: float = 0.0) -> np.ndarray:
    """Minimise ``||A x - b||^2 + ridge * ||x||^2``.

    Solved through one SVD of ``A``. With ``ridge == 0`` singular values
    at or below ``sigma_1 * max(m, n) * eps`` are dropped, which yields the
    minimum-norm solution for rank-deficient ``A``.
    """
    A = as_matrix(A)
    b = as_vector(b)
    if A.shape[0] != b.shape[0]:
        raise ValidationError(f"A has {A.shape[0]} rows but b has length {b.shape[0]}")
    if ridge < 0:
        raise ValidationError(f"ridge must be nonnegative, got {ridge}")
    U, sv, Vt = np.linalg.svd(A, full_matrices=False)
    Utb = U.T @ b
    if ridge == 0:
        cutoff = default_rank_tol(sv, A.shape)
        keep = sv > cutoff
        inv = np.zeros_like(sv)
        inv[keep] = 1.0 / sv[keep]
    else:
        inv = sv / (sv * sv + ridge)
    return Vt.T @ (inv * Utb)
