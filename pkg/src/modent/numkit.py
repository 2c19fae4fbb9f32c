"""Dense complex-matrix kernel.

Hermitian eigendecomposition, spectral functional calculus, support
projections, generalized inverses and tensor-product helpers.  Everything
here works on plain ``numpy`` arrays; nothing is cached or mutated.

All logarithms in the package are natural logarithms.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

HERM_TOL = 1e-10
EIG_TOL = 1e-12
RANK_TOL = 1e-10


class InvariantError(ValueError):
    """Input data violates a structural invariant (not Hermitian, not a state, ...)."""


def as_matrix(A, square: bool = True) -> np.ndarray:
    """Return ``A`` as a finite complex 2-d array, validating shape."""
    M = np.asarray(A, dtype=complex)
    if M.ndim != 2 or M.size == 0:
        raise InvariantError(f"expected a non-empty matrix, got shape {M.shape}")
    if square and M.shape[0] != M.shape[1]:
        raise InvariantError(f"expected a square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise InvariantError("matrix has non-finite entries")
    return M


def dagger(A: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(A, -1, -2))


def is_hermitian(A, tol: float = HERM_TOL) -> bool:
    M = np.asarray(A, dtype=complex)
    scale = 1.0 + np.max(np.abs(M))
    return bool(np.max(np.abs(M - dagger(M))) <= tol * scale)


def check_hermitian(A, tol: float = HERM_TOL) -> np.ndarray:
    """Validate and symmetrize a Hermitian matrix."""
    M = as_matrix(A)
    if not is_hermitian(M, tol):
        raise InvariantError("matrix is not Hermitian within tolerance")
    return 0.5 * (M + dagger(M))


def hs_inner(A: np.ndarray, B: np.ndarray) -> complex:
    """Hilbert-Schmidt inner product tr(A^dagger B)."""
    return complex(np.vdot(A, B))


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues in ascending order and matching eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def dim(self) -> int:
        return len(self.eigenvalues)

    def support_mask(self, rank_tol: float = RANK_TOL) -> np.ndarray:
        lam = self.eigenvalues
        scale = np.max(np.abs(lam)) if lam.size else 0.0
        return np.abs(lam) > rank_tol * scale

    def reconstruct(self, values=None) -> np.ndarray:
        lam = self.eigenvalues if values is None else values
        U = self.eigenvectors
        return (U * lam) @ dagger(U)

    def apply(self, f: Callable, on_support: bool = False,
              rank_tol: float = RANK_TOL) -> np.ndarray:
        lam = self.eigenvalues
        if on_support:
            mask = self.support_mask(rank_tol)
            vals = np.zeros(lam.shape, dtype=complex)
            if np.any(mask):
                vals[mask] = f(lam[mask])
        else:
            with np.errstate(all="ignore"):
                vals = np.asarray(f(lam), dtype=complex)
        if not np.all(np.isfinite(vals)):
            raise ValueError("function is not finite on the spectrum")
        return self.reconstruct(vals)


def eig_hermitian(A) -> SpectralDecomposition:
    """Eigendecomposition of the symmetrized input (A + A^dagger)/2."""
    M = as_matrix(A)
    M = 0.5 * (M + dagger(M))
    lam, U = np.linalg.eigh(M)
    return SpectralDecomposition(lam, U)


def _decomp(A) -> SpectralDecomposition:
    return A if isinstance(A, SpectralDecomposition) else eig_hermitian(A)


def spectral_apply(f: Callable, A, on_support: bool = False,
                   rank_tol: float = RANK_TOL) -> np.ndarray:
    """Compute f(A) = U diag(f(lambda)) U^dagger for Hermitian ``A``.

    With ``on_support`` the function is evaluated only on eigenvalues with
    |lambda| > rank_tol * max|lambda|; the kernel is sent to zero.  This is the
    convention behind 0 log 0 = 0 and the generalized inverse.
    """
    return _decomp(A).apply(f, on_support=on_support, rank_tol=rank_tol)


def range_projection(A, rank_tol: float = RANK_TOL) -> np.ndarray:
    d = _decomp(A)
    U = d.eigenvectors[:, d.support_mask(rank_tol)]
    return U @ dagger(U)


def pinv_on_support(A, rank_tol: float = RANK_TOL) -> np.ndarray:
    return spectral_apply(lambda x: 1.0 / x, A, on_support=True, rank_tol=rank_tol)


def sqrtm_psd(A) -> np.ndarray:
    """Square root of a positive semidefinite matrix (negative round-off clipped)."""
    return spectral_apply(lambda x: np.sqrt(np.clip(x, 0.0, None)), A)


def logm_on_support(A, rank_tol: float = RANK_TOL) -> np.ndarray:
    return spectral_apply(np.log, A, on_support=True, rank_tol=rank_tol)


def powm_on_support(A, t: complex, rank_tol: float = RANK_TOL) -> np.ndarray:
    """A^t restricted to the support of a PSD matrix; complex t allowed."""
    return spectral_apply(lambda x: np.exp(t * np.log(x)), A, on_support=True,
                          rank_tol=rank_tol)


def expm_hermitian(A, scale: complex = 1.0) -> np.ndarray:
    """exp(scale * A) for Hermitian A via its eigendecomposition."""
    return spectral_apply(lambda x: np.exp(scale * x), A)


def min_eig(A) -> float:
    return float(eig_hermitian(A).eigenvalues[0])


def tensor_product(A, B) -> np.ndarray:
    """Kronecker product, row-major block convention."""
    return np.kron(np.asarray(A, dtype=complex), np.asarray(B, dtype=complex))


def partial_trace(X, dims: tuple[int, int], which: int) -> np.ndarray:
    """Trace out tensor factor ``which`` (1 or 2) of a (d1*d2)-square matrix."""
    d1, d2 = dims
    X = np.asarray(X, dtype=complex)
    if X.shape != (d1 * d2, d1 * d2):
        raise InvariantError(f"shape {X.shape} does not match dims {dims}")
    T = X.reshape(d1, d2, d1, d2)
    if which == 1:
        return np.einsum("ijil->jl", T)
    if which == 2:
        return np.einsum("ijkj->ik", T)
    raise ValueError("which must be 1 or 2")


def trace_distance(A, B) -> float:
    lam = eig_hermitian(np.asarray(A) - np.asarray(B)).eigenvalues
    return 0.5 * float(np.sum(np.abs(lam)))
