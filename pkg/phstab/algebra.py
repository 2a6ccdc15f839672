"""Small dense matrix kernel.

Hermitian eigenvalues by cyclic Jacobi rotations, relative-tolerance
definiteness classification, pivoted-QR rank and the boundary-port
transformation ``W_B = W_tilde_B R^{-1}`` with ``R = [[P1, -P1], [I, I]]``.
"""

from __future__ import annotations

from dataclasses import dataclass
import logging

import numpy as np
import scipy.linalg

from ._settings import (
    MAX_MATRIX_DIMENSION,
    HERMITIAN_TOLERANCE,
    JACOBI_OFF_DIAGONAL_TOLERANCE,
    JACOBI_MAX_SWEEPS,
    PSD_TOLERANCE,
    RANK_TOLERANCE,
    MAX_CONDITION_NUMBER,
)

logger = logging.getLogger(__name__)

POSITIVE_DEFINITE = "PositiveDefinite"
POSITIVE_SEMIDEFINITE = "PositiveSemidefinite"
INDEFINITE = "Indefinite"
NEGATIVE_SEMIDEFINITE = "NegativeSemidefinite"
NEGATIVE_DEFINITE = "NegativeDefinite"


@dataclass(frozen=True)
class PsdVerdict:
    classification: str
    min_eigenvalue: float
    max_eigenvalue: float
    band: float = 0.0

    # a zero matrix is classified PositiveSemidefinite but is also <= 0
    @property
    def is_psd(self) -> bool:
        return self.min_eigenvalue > -self.band

    @property
    def is_nsd(self) -> bool:
        return self.max_eigenvalue < self.band


def as_matrix(m, name: str = "matrix") -> np.ndarray:
    """Validate and convert to a complex 2-D array."""
    matrix = np.array(m, dtype=complex)
    if matrix.ndim == 1:
        matrix = matrix.reshape(1, -1)
    if matrix.ndim != 2:
        raise ValueError("%s must be two dimensional, got shape %s" % (name, matrix.shape))
    rows, cols = matrix.shape
    if not (1 <= rows <= MAX_MATRIX_DIMENSION and 1 <= cols <= MAX_MATRIX_DIMENSION):
        raise ValueError(
            "%s dimensions must lie in [1, %d], got %dx%d"
            % (name, MAX_MATRIX_DIMENSION, rows, cols)
        )
    if not np.all(np.isfinite(matrix)):
        raise ValueError("%s has non-finite entries" % name)
    return matrix


def hermitian_part(m) -> np.ndarray:
    matrix = np.asarray(m, dtype=complex)
    return 0.5 * (matrix + matrix.conj().T)


def block_swap(n: int) -> np.ndarray:
    """Sigma = [[0, I], [I, 0]] of size 2n."""
    identity = np.eye(n)
    zero = np.zeros((n, n))
    return np.block([[zero, identity], [identity, zero]]).astype(complex)


def _require_square(matrix: np.ndarray, name: str) -> None:
    if matrix.shape[0] != matrix.shape[1]:
        raise ValueError("%s must be square, got %dx%d" % ((name,) + matrix.shape))


def hermitian_eigenvalues(m) -> np.ndarray:
    """Ascending eigenvalues of a Hermitian matrix."""
    matrix = as_matrix(m)
    _require_square(matrix, "matrix")
    scale = np.linalg.norm(matrix)
    asymmetry = np.linalg.norm(matrix - matrix.conj().T)
    if asymmetry > HERMITIAN_TOLERANCE * max(scale, np.finfo(float).tiny):
        raise ValueError(
            "matrix is not Hermitian: |m - m*| = %.3e, |m| = %.3e" % (asymmetry, scale)
        )
    a = hermitian_part(matrix)
    n = a.shape[0]
    if scale == 0.0:
        return np.zeros(n)

    for sweep in range(JACOBI_MAX_SWEEPS):
        off_diagonal = np.linalg.norm(a - np.diag(np.diag(a)))
        if off_diagonal <= JACOBI_OFF_DIAGONAL_TOLERANCE * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                _rotate(a, p, q)
    else:
        logger.warning(
            "Jacobi iteration stopped after %d sweeps without reaching tolerance",
            JACOBI_MAX_SWEEPS,
        )

    eigenvalues = np.sort(np.real(np.diag(a)))
    trace = np.real(np.trace(matrix))
    if abs(eigenvalues.sum() - trace) > 1e-10 * scale:
        logger.warning(
            "eigenvalue sum %.6e differs from trace %.6e", eigenvalues.sum(), trace
        )
    return eigenvalues


def _rotate(a: np.ndarray, p: int, q: int) -> None:
    """Annihilate a[p, q] in place with a complex Jacobi rotation."""
    apq = a[p, q]
    r = abs(apq)
    if r == 0.0:
        return
    phase = apq / r
    theta = (a[q, q].real - a[p, p].real) / (2.0 * r)
    t = (1.0 if theta >= 0.0 else -1.0) / (abs(theta) + np.sqrt(1.0 + theta * theta))
    c = 1.0 / np.sqrt(1.0 + t * t)
    s = t * c
    rotation = np.array([[c, s], [-s * np.conj(phase), c * np.conj(phase)]])
    index = [p, q]
    a[:, index] = a[:, index] @ rotation
    a[index, :] = rotation.conj().T @ a[index, :]
    a[p, q] = 0.0
    a[q, p] = 0.0
    a[p, p] = a[p, p].real
    a[q, q] = a[q, q].real


def spectral_norm(m) -> float:
    """Largest singular value, through the eigenvalues of m* m."""
    matrix = as_matrix(m)
    gram = matrix.conj().T @ matrix
    return float(np.sqrt(max(hermitian_eigenvalues(hermitian_part(gram))[-1], 0.0)))


def psd_classify(m, tol: float = PSD_TOLERANCE) -> PsdVerdict:
    if tol <= 0:
        raise ValueError("tolerance must be positive, got %s" % tol)
    matrix = hermitian_part(as_matrix(m))
    eigenvalues = hermitian_eigenvalues(matrix)
    lowest, highest = float(eigenvalues[0]), float(eigenvalues[-1])
    band = tol * max(1.0, float(np.max(np.abs(eigenvalues))))
    if lowest > band:
        classification = POSITIVE_DEFINITE
    elif lowest > -band:
        classification = POSITIVE_SEMIDEFINITE
    elif highest < -band:
        classification = NEGATIVE_DEFINITE
    elif highest < band:
        classification = NEGATIVE_SEMIDEFINITE
    else:
        classification = INDEFINITE
    return PsdVerdict(classification, lowest, highest, band)


def rank(m, tol: float = RANK_TOLERANCE) -> int:
    if tol <= 0:
        raise ValueError("tolerance must be positive, got %s" % tol)
    matrix = as_matrix(m)
    triangle, _ = scipy.linalg.qr(matrix, mode="r", pivoting=True)
    diagonal = np.abs(np.diag(triangle))
    if diagonal.size == 0 or diagonal[0] == 0.0:
        return 0
    return int(np.sum(diagonal > tol * diagonal[0]))


def boundary_block_inverse(p1) -> np.ndarray:
    """R^{-1} = 1/2 [[P1^{-1}, I], [-P1^{-1}, I]] for R = [[P1, -P1], [I, I]]."""
    p1 = as_matrix(p1, "P1")
    _require_square(p1, "P1")
    n = p1.shape[0]
    if np.linalg.norm(p1 - p1.conj().T) > HERMITIAN_TOLERANCE * max(
        1.0, np.linalg.norm(p1)
    ):
        raise ValueError("P1 must be Hermitian")
    condition = np.linalg.cond(p1)
    if not np.isfinite(condition) or condition > MAX_CONDITION_NUMBER:
        raise np.linalg.LinAlgError(
            "P1 is singular (condition estimate %.3e)" % condition
        )
    p1_inverse = np.linalg.inv(p1)
    identity = np.eye(n)
    inverse = 0.5 * np.block([[p1_inverse, identity], [-p1_inverse, identity]])
    block = np.block([[p1, -p1], [identity, identity]])
    residual = np.linalg.norm(block @ inverse - np.eye(2 * n))
    if residual > 1e-12 * max(1.0, condition):
        raise np.linalg.LinAlgError(
            "boundary block inverse check failed, |R R^-1 - I| = %.3e" % residual
        )
    return inverse


def _require_boundary_shape(matrix: np.ndarray, n: int, name: str) -> None:
    if matrix.shape != (n, 2 * n):
        raise ValueError(
            "%s must have shape (%d, %d) for n=%d, got %s" % (name, n, 2 * n, n, matrix.shape)
        )


def compute_WB(wtilde, p1) -> np.ndarray:
    wtilde = as_matrix(wtilde, "W_tilde_B")
    p1 = as_matrix(p1, "P1")
    _require_boundary_shape(wtilde, p1.shape[0], "W_tilde_B")
    return wtilde @ boundary_block_inverse(p1)


def wb_sigma_wbstar(wb) -> np.ndarray:
    wb = as_matrix(wb, "W_B")
    cols = wb.shape[1]
    if cols % 2 != 0:
        raise ValueError("W_B must have an even number of columns, got %d" % cols)
    _require_boundary_shape(wb, cols // 2, "W_B")
    product = wb @ block_swap(cols // 2) @ wb.conj().T
    return hermitian_part(product)
