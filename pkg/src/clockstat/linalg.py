"""Dense complex linear algebra for operators and superoperators.

Matrices are plain complex128 numpy arrays; shapes and finiteness are
validated at the boundary.  Eigenproblems are delegated to LAPACK through
scipy.linalg and post-processed into the conventions used throughout the
package: eigenvalues sorted by descending real part, ties broken by
descending imaginary part, and leading left/right eigenvectors normalized
to (left . right) = 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import ConvergenceError, DegeneracyError, DimensionError

MAX_DIM = 1024


def as_complex_matrix(m) -> np.ndarray:
    """Coerce to a finite 2-D complex128 array."""
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise DimensionError(f"expected a 2-D matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a.real)) or not np.all(np.isfinite(a.imag)):
        raise ValueError("matrix entries must be finite")
    return a


def _as_square(m) -> np.ndarray:
    a = as_complex_matrix(m)
    if a.shape[0] != a.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {a.shape}")
    if a.shape[0] > MAX_DIM:
        raise DimensionError(f"dimension {a.shape[0]} exceeds supported maximum {MAX_DIM}")
    return a


def _real_part_order(eigenvalues: np.ndarray) -> np.ndarray:
    # lexsort uses the last key as primary
    return np.lexsort((-eigenvalues.imag, -eigenvalues.real))


@dataclass(frozen=True)
class Spectrum:
    """Full eigendecomposition, ordered by descending real part.

    right_vectors holds right eigenvectors as columns; left_vectors holds
    left row eigenvectors as rows, i.e. left_vectors[i] @ m = lambda_i *
    left_vectors[i].
    """

    dim: int
    eigenvalues: np.ndarray
    right_vectors: np.ndarray | None = None
    left_vectors: np.ndarray | None = None


def eigen_spectrum(m, compute_vectors: bool = True, residual_tol: float = 1e-10) -> Spectrum:
    """Full spectrum of a square complex matrix.

    Parameters
    ----------
    m : array_like, square
    compute_vectors : bool
        Also return right and left eigenvectors.
    residual_tol : float
        Per-pair residual bound ||M v - lambda v|| <= residual_tol * ||M||_F.

    Raises
    ------
    DimensionError
        Non-square input.
    ConvergenceError
        LAPACK failed to converge or a residual exceeds the bound.
    """
    a = _as_square(m)
    try:
        if compute_vectors:
            w, vl, vr = scipy.linalg.eig(a, left=True, right=True)
        else:
            w = scipy.linalg.eigvals(a)
            vl = vr = None
    except (scipy.linalg.LinAlgError, np.linalg.LinAlgError) as exc:
        raise ConvergenceError(f"eigenvalue iteration failed: {exc}") from exc

    order = _real_part_order(w)
    w = w[order]
    if vr is not None:
        vr = vr[:, order]
        vl = vl[:, order]
        norm = np.linalg.norm(a, "fro")
        resid = np.linalg.norm(a @ vr - vr * w[None, :], axis=0)
        if np.any(resid > residual_tol * max(norm, 1e-300)):
            raise ConvergenceError(
                f"eigenpair residual {resid.max():.3e} exceeds {residual_tol:.1e} * ||M||_F"
            )
        # rows of left_vectors are true left eigenvectors: l @ a = lambda * l
        return Spectrum(a.shape[0], w, vr, vl.conj().T)
    return Spectrum(a.shape[0], w)


def max_real_eigenpair(m, gap_tol: float = 1e-9):
    """Eigenvalue with the largest real part, plus its right/left eigenvectors.

    The pair is normalized so that (left . right) = 1 (plain dot product,
    left already conjugated).  The leading eigenvalue must be separated
    from the runner-up by more than gap_tol in real part.

    Returns
    -------
    (eigenvalue, right, left)

    Raises
    ------
    DegeneracyError
        If the two largest real parts are closer than gap_tol.
    """
    spec = eigen_spectrum(m, compute_vectors=True)
    w = spec.eigenvalues
    if spec.dim > 1 and (w[0].real - w[1].real) < gap_tol:
        raise DegeneracyError(
            f"leading eigenvalues {w[0]} and {w[1]} are degenerate within {gap_tol:.1e}",
            candidates=(w[0], w[1]),
        )
    right = spec.right_vectors[:, 0]
    left = spec.left_vectors[0]
    overlap = left @ right
    if overlap == 0:
        raise ConvergenceError("left/right eigenvectors of the leading eigenvalue are orthogonal")
    return w[0], right, left / overlap


def expm_apply(m, t: float, v) -> np.ndarray:
    """Apply the matrix exponential: returns exp(m * t) @ v.

    Uses scipy's Pade scaling-and-squaring.  t must be non-negative and v
    must match the matrix dimension.
    """
    a = _as_square(m)
    vec = np.asarray(v, dtype=complex)
    if vec.shape != (a.shape[0],):
        raise DimensionError(f"vector shape {vec.shape} does not match matrix dim {a.shape[0]}")
    if t < 0:
        raise ValueError("propagation time must be non-negative")
    if t == 0:
        return vec.copy()
    return scipy.linalg.expm(a * t) @ vec
