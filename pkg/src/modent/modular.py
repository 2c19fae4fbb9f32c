"""Standard form of Mat(n) on Hilbert-Schmidt space and its modular data.

Vectorization is column-major: vec(X)[i + n*j] = X[i, j].  With this
convention vec(A X B) = (B^T kron A) vec(X), so left multiplication by A is
``I kron A`` and right multiplication by B is ``B^T kron I``.  The antilinear
conjugation J is never stored as a matrix; it is the map X -> X^dagger.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .algebra import StarAlgebra
from .numkit import (HERM_TOL, RANK_TOL, InvariantError, as_matrix, check_hermitian,
                     dagger, eig_hermitian, logm_on_support, pinv_on_support,
                     powm_on_support, range_projection, sqrtm_psd)

DENSITY_TOL = 1e-10
T_SAMPLES = (0.3, 1.0, 1.7)


class PreconditionError(InvariantError):
    """A theorem's hypothesis does not hold for the given data."""


# --- states -----------------------------------------------------------------

def check_density(rho, normalized: bool = True, tol: float = DENSITY_TOL) -> np.ndarray:
    """Validate a density (or, with ``normalized=False``, a positive matrix)."""
    R = check_hermitian(rho, HERM_TOL)
    lam = np.linalg.eigvalsh(R)
    scale = max(1.0, float(np.max(np.abs(lam))))
    if lam[0] < -tol * scale:
        raise InvariantError(f"matrix is not positive semidefinite (min eigenvalue {lam[0]:.3e})")
    if normalized and abs(np.trace(R).real - 1.0) > tol:
        raise InvariantError(f"trace {np.trace(R).real:.12g} differs from 1")
    if not normalized and np.trace(R).real <= 0:
        raise InvariantError("positive functional must be nonzero")
    return R


@dataclass(frozen=True)
class DensityMatrix:
    matrix: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "matrix", check_density(self.matrix))

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def expect(self, A) -> float:
        return float(np.trace(self.matrix @ A).real)


def is_faithful(rho, rank_tol: float = RANK_TOL) -> bool:
    return bool(np.all(eig_hermitian(rho).support_mask(rank_tol)))


# --- Hilbert-Schmidt representation ------------------------------------------

def vec(X) -> np.ndarray:
    return np.asarray(X, dtype=complex).reshape(-1, order="F")


def unvec(x, n: int) -> np.ndarray:
    return np.asarray(x, dtype=complex).reshape((n, n), order="F")


def left_mult(A) -> np.ndarray:
    A = np.asarray(A, dtype=complex)
    return np.kron(np.eye(A.shape[0]), A)


def right_mult(B) -> np.ndarray:
    B = np.asarray(B, dtype=complex)
    return np.kron(B.T, np.eye(B.shape[0]))


def j_action(x, n: int) -> np.ndarray:
    """J vec(X) = vec(X^dagger)."""
    return vec(dagger(unvec(x, n)))


def conjugate_by_j(Op: np.ndarray, n: int) -> np.ndarray:
    """Matrix of the linear operator J Op J (J antilinear)."""
    # J x = P conj(x) with P the vec-transpose permutation, so J Op J = P conj(Op) P
    perm = np.arange(n * n).reshape(n, n).T.reshape(-1)
    return np.conj(Op)[np.ix_(perm, perm)]


@dataclass(frozen=True)
class StandardFormRep:
    n: int

    def vec(self, X) -> np.ndarray:
        return vec(X)

    def unvec(self, x) -> np.ndarray:
        return unvec(x, self.n)

    def left(self, A) -> np.ndarray:
        return left_mult(A)

    def right(self, B) -> np.ndarray:
        return right_mult(B)

    def J(self, x) -> np.ndarray:
        return j_action(x, self.n)

    def in_cone(self, x, tol: float = DENSITY_TOL) -> bool:
        X = unvec(x, self.n)
        if np.max(np.abs(X - dagger(X))) > tol * (1 + np.max(np.abs(X))):
            return False
        return bool(np.linalg.eigvalsh(0.5 * (X + dagger(X)))[0] >= -tol)


def left_algebra_residual(Op: np.ndarray, n: int) -> float:
    """Distance of an n^2 x n^2 operator from {I kron X} (left multiplications)."""
    blocks = Op.reshape(n, n, n, n)  # [a, i, b, j] for row a*n+i, col b*n+j
    X = np.einsum("aiaj->ij", blocks) / n
    return float(np.linalg.norm(Op - left_mult(X)))


# --- modular data ------------------------------------------------------------

def gns_vector(rho) -> np.ndarray:
    """Omega = rho^(1/2), so that <Omega, A Omega>_HS = tr(rho A)."""
    return sqrtm_psd(check_density(rho, normalized=False))


def tomita_operator_action(A, Omega) -> np.ndarray:
    """S(A Omega) = A^dagger Omega."""
    return dagger(np.asarray(A, dtype=complex)) @ np.asarray(Omega, dtype=complex)


@dataclass(frozen=True)
class ModularData:
    rho: np.ndarray
    Omega: np.ndarray
    Delta: np.ndarray
    log_Delta: np.ndarray

    @property
    def n(self) -> int:
        return self.rho.shape[0]

    def J(self, x) -> np.ndarray:
        return j_action(x, self.n)

    def delta_power(self, t: complex) -> np.ndarray:
        """Delta^t = L(rho^t) R(rho^-t)."""
        return left_mult(powm_on_support(self.rho, t)) @ right_mult(powm_on_support(self.rho, -t))

    def invariant_residuals(self) -> dict[str, float]:
        w = vec(self.Omega)
        n = self.n
        inv = left_mult(pinv_on_support(self.rho)) @ right_mult(self.rho)
        return {
            "delta_omega": float(np.linalg.norm(self.Delta @ w - w)),
            "j_omega": float(np.linalg.norm(self.J(w) - w)),
            "j_delta_j": float(np.linalg.norm(conjugate_by_j(self.Delta, n) - inv)),
        }


def modular_data(rho) -> ModularData:
    """Delta X = rho X rho^-1 and log Delta = L(log rho) - R(log rho)."""
    rho = check_density(rho)
    if not is_faithful(rho):
        raise PreconditionError("modular data of the full algebra needs a faithful state")
    Delta = left_mult(rho) @ right_mult(np.linalg.inv(rho))
    L = logm_on_support(rho)
    log_Delta = left_mult(L) - right_mult(L)
    return ModularData(rho, sqrtm_psd(rho), Delta, log_Delta)


@dataclass(frozen=True)
class RelativeModularData:
    """Delta_{psi,phi} X = rho_psi X rho_phi^+ on HS space."""

    rho_psi: np.ndarray
    rho_phi: np.ndarray
    Delta_rel: np.ndarray
    support_projection: np.ndarray

    @property
    def n(self) -> int:
        return self.rho_psi.shape[0]

    def log_delta(self) -> np.ndarray:
        """log Delta on its support (zero on the kernel)."""
        s_psi = range_projection(self.rho_psi)
        s_phi = range_projection(self.rho_phi)
        return (left_mult(logm_on_support(self.rho_psi)) @ right_mult(s_phi)
                - left_mult(s_psi) @ right_mult(logm_on_support(self.rho_phi)))

    def power(self, t: complex) -> np.ndarray:
        return (left_mult(powm_on_support(self.rho_psi, t))
                @ right_mult(powm_on_support(self.rho_phi, -t)))


def relative_modular(rho_psi, rho_phi, normalized: bool = True) -> RelativeModularData:
    """Relative modular operator of two (possibly non-faithful) states.

    ``normalized=False`` accepts arbitrary nonzero positive matrices, which is
    what the scaling law for positive functionals needs.
    """
    a = check_density(rho_psi, normalized)
    b = check_density(rho_phi, normalized)
    if a.shape != b.shape:
        raise InvariantError("states live on different dimensions")
    D = left_mult(a) @ right_mult(pinv_on_support(b))
    P = left_mult(range_projection(a)) @ right_mult(range_projection(b))
    return RelativeModularData(a, b, D, P)


def relative_modular_vectors(Phi, Psi) -> np.ndarray:
    """Delta_{Phi,Psi} for arbitrary HS vectors: L(Phi Phi^dagger) R((Psi^dagger Psi)^+).

    Phi fixes the state on the left algebra and Psi the state on the
    commutant (right multiplications).
    """
    Phi = as_matrix(Phi)
    Psi = as_matrix(Psi)
    return left_mult(Phi @ dagger(Phi)) @ right_mult(pinv_on_support(dagger(Psi) @ Psi))


# --- Tomita theorem on a subalgebra -------------------------------------------

@dataclass(frozen=True)
class TomitaReport:
    algebra_dim: int
    cyclic_dim: int
    cyclic_on_full_space: bool
    separating: bool
    omega_residual: float
    commutant_residual: float
    commutant_dim_gap: int
    flow_residuals: dict = field(default_factory=dict)
    tol: float = 1e-7

    @property
    def passed(self) -> bool:
        worst = max([self.omega_residual, self.commutant_residual, *self.flow_residuals.values()])
        return self.separating and self.commutant_dim_gap == 0 and worst <= self.tol


def _span_residual(Y: np.ndarray, basis_cols: np.ndarray) -> float:
    y = Y.reshape(-1)
    return float(np.linalg.norm(y - basis_cols @ (dagger(basis_cols) @ y)))


def verify_tomita(M: StarAlgebra, rho, ts=T_SAMPLES, tol: float = 1e-7) -> TomitaReport:
    """Check J pi(M) J commutes with pi(M) and Delta^{it} pi(M) Delta^{-it} = pi(M).

    Everything is computed on the cyclic subspace K = span{B Omega : B in M}
    of HS space, where Omega is cyclic by construction.  Omega must be
    separating (B -> B Omega injective on M).  S is built from its defining
    action on the spanning vectors, then polar-decomposed.
    """
    rho = check_density(rho)
    n = rho.shape[0]
    Omega = gns_vector(rho)
    k = M.dim
    X = np.stack([vec(B @ Omega) for B in M.basis], axis=1)
    Y = np.stack([vec(dagger(B) @ Omega) for B in M.basis], axis=1)
    U, s, _ = np.linalg.svd(X, full_matrices=False)
    rank = int(np.sum(s > RANK_TOL * s[0]))
    if rank < k:
        raise PreconditionError(f"GNS vector is not separating: orbit rank {rank} < dim M = {k}")
    Q = U[:, :rank]
    A = dagger(Q) @ X
    Bm = dagger(Q) @ Y
    # S x = T conj(x) on K coordinates
    T = Bm @ np.conj(np.linalg.inv(A))
    G = np.conj(dagger(T) @ T)
    lam, V = np.linalg.eigh(0.5 * (G + dagger(G)))
    if lam[0] <= 0:
        raise PreconditionError("modular operator is singular on the cyclic subspace")
    W = T @ np.conj((V * lam ** -0.5) @ dagger(V))

    pis = [dagger(Q) @ left_mult(B) @ Q for B in M.basis]
    pis_flat = np.stack([p.reshape(-1) for p in pis], axis=1)
    Qp, sp, _ = np.linalg.svd(pis_flat, full_matrices=False)
    pi_basis = Qp[:, sp > RANK_TOL * sp[0]]

    w = dagger(Q) @ vec(Omega)
    Delta = (V * lam) @ dagger(V)
    omega_res = max(float(np.linalg.norm(Delta @ w - w)),
                    float(np.linalg.norm(W @ np.conj(w) - w)))

    jpj = [W @ np.conj(p) @ np.conj(W) for p in pis]
    comm = 0.0
    for a in jpj:
        for b in pis:
            comm = max(comm, float(np.linalg.norm(a @ b - b @ a)))
    # J pi(M) J should be all of pi(M)' on K, not just inside it
    eye = np.eye(rank)
    blocks = [np.kron(eye, p.T) - np.kron(p, eye) for p in pis]
    sv = np.linalg.svd(np.vstack(blocks), compute_uv=False)
    commutant_dim = int(np.sum(sv <= 1e-10 * max(sv[0], 1.0)))
    jpj_flat = np.stack([a.reshape(-1) for a in jpj], axis=1)
    jpj_rank = int(np.sum(np.linalg.svd(jpj_flat, compute_uv=False) > 1e-10))

    flow = {}
    for t in ts:
        Dt = (V * np.exp(1j * t * np.log(lam))) @ dagger(V)
        res = max(_span_residual(Dt @ p @ dagger(Dt), pi_basis) for p in pis)
        flow[float(t)] = res
    return TomitaReport(k, rank, rank == n * n, True, omega_res, comm,
                        abs(commutant_dim - jpj_rank), flow, tol)
