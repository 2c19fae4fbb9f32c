"""Finite-dimensional *-subalgebras of Mat(n; C).

An algebra is stored as a Hilbert-Schmidt orthonormal basis of its span.
Commutants come from null spaces, centers from principal-subspace
intersections, and restricted states from the HS-orthogonal (trace
preserving) conditional expectation onto the span.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .numkit import (RANK_TOL, as_matrix, dagger, eig_hermitian, range_projection)

SPAN_TOL = 1e-10
ANGLE_TOL = 1e-8


def _orthonormal_extend(basis: list[np.ndarray], candidates, tol: float = SPAN_TOL) -> list[np.ndarray]:
    """Gram-Schmidt in the HS inner product with one re-orthogonalization pass."""
    out = [b.reshape(-1) for b in basis]
    shape = None
    for C in candidates:
        shape = C.shape
        v = np.asarray(C, dtype=complex).reshape(-1).copy()
        for _ in range(2):
            if out:
                Q = np.array(out)
                v -= Q.T @ (Q.conj() @ v)
        nv = np.linalg.norm(v)
        if nv > tol:
            out.append(v / nv)
    if shape is None and basis:
        shape = basis[0].shape
    return [v.reshape(shape) for v in out]


@dataclass(frozen=True)
class StarAlgebra:
    ambient_dim: int
    basis: np.ndarray  # shape (k, n, n), HS-orthonormal

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    @property
    def flat(self) -> np.ndarray:
        """Basis as columns of an (n^2, k) matrix (row-major flattening)."""
        return self.basis.reshape(self.dim, -1).T

    def conditional_expectation(self, X) -> np.ndarray:
        return conditional_expectation(self, X)

    def contains(self, X, tol: float = SPAN_TOL) -> bool:
        X = np.asarray(X, dtype=complex)
        r = np.linalg.norm(X - conditional_expectation(self, X))
        return bool(r <= tol * (1.0 + np.linalg.norm(X)))

    def invariant_residuals(self) -> dict[str, float]:
        n = self.ambient_dim
        B = self.basis
        k = self.dim
        gram = np.einsum("aij,bij->ab", B.conj(), B)
        res = {"orthonormal": float(np.max(np.abs(gram - np.eye(k))))}
        eye = np.eye(n)
        res["identity"] = float(np.linalg.norm(eye - conditional_expectation(self, eye)))
        adj = dagger(B)
        res["adjoint"] = float(max(np.linalg.norm(a - conditional_expectation(self, a)) for a in adj))
        prods = np.einsum("aij,bjk->abik", B, B).reshape(-1, n, n)
        proj = np.einsum("ak,kij->aij", np.einsum("kij,aij->ak", B.conj(), prods), B)
        res["product"] = float(np.max(np.linalg.norm((prods - proj).reshape(len(prods), -1), axis=1)))
        return res

    def is_valid(self, tol: float = SPAN_TOL) -> bool:
        return all(v <= tol for v in self.invariant_residuals().values())


def from_spanning_set(matrices, ambient_dim: int) -> StarAlgebra:
    mats = [as_matrix(M) for M in matrices]
    basis = _orthonormal_extend([], mats)
    if not basis:
        basis_arr = np.zeros((0, ambient_dim, ambient_dim), dtype=complex)
    else:
        basis_arr = np.array(basis)
    return StarAlgebra(ambient_dim, basis_arr)


def generate_star_algebra(generators, ambient_dim: int, max_rounds: int | None = None) -> StarAlgebra:
    """Smallest unital *-closed, product-closed span containing ``generators``."""
    n = ambient_dim
    gens = [as_matrix(G) for G in generators]
    for G in gens:
        if G.shape != (n, n):
            raise ValueError(f"generator has shape {G.shape}, expected {(n, n)}")
    basis = _orthonormal_extend([], [np.eye(n, dtype=complex)] + gens + [dagger(G) for G in gens])
    rounds = 2 * n * n if max_rounds is None else max_rounds
    for _ in range(rounds):
        k = len(basis)
        B = np.array(basis)
        prods = np.einsum("aij,bjk->abik", B, B).reshape(-1, n, n)
        basis = _orthonormal_extend(basis, list(prods) + list(dagger(B)))
        if len(basis) == k:
            break
    return StarAlgebra(n, np.array(basis))


def full_algebra(n: int) -> StarAlgebra:
    basis = np.zeros((n * n, n, n), dtype=complex)
    for idx in range(n * n):
        basis[idx, idx // n, idx % n] = 1.0
    return StarAlgebra(n, basis)


def diagonal_algebra(n: int) -> StarAlgebra:
    basis = np.zeros((n, n, n), dtype=complex)
    for i in range(n):
        basis[i, i, i] = 1.0
    return StarAlgebra(n, basis)


def scalar_algebra(n: int) -> StarAlgebra:
    return StarAlgebra(n, (np.eye(n, dtype=complex) / np.sqrt(n))[None])


def block_diagonal_algebra(sizes) -> StarAlgebra:
    """Mat(s_1) + ... + Mat(s_k) as block-diagonal matrices."""
    n = int(sum(sizes))
    mats = []
    offset = 0
    for s in sizes:
        for i in range(s):
            for j in range(s):
                E = np.zeros((n, n), dtype=complex)
                E[offset + i, offset + j] = 1.0
                mats.append(E)
        offset += s
    return StarAlgebra(n, np.array(mats))


def tensor_factor_algebra(d: int, m: int) -> StarAlgebra:
    """Mat(d) acting on the first factor of C^d (x) C^m, i.e. A (x) I_m."""
    mats = []
    for i in range(d):
        for j in range(d):
            E = np.zeros((d, d), dtype=complex)
            E[i, j] = 1.0
            mats.append(np.kron(E, np.eye(m)) / np.sqrt(m))
    return StarAlgebra(d * m, np.array(mats))


def conjugate_algebra(M: StarAlgebra, U: np.ndarray) -> StarAlgebra:
    """U M U^dagger (orthonormality is preserved by unitary conjugation)."""
    return StarAlgebra(M.ambient_dim, U @ M.basis @ dagger(U))


def conditional_expectation(M: StarAlgebra, X) -> np.ndarray:
    """HS-orthogonal projection sum_i <B_i, X> B_i onto span(M)."""
    X = np.asarray(X, dtype=complex)
    coeffs = np.einsum("kij,ij->k", M.basis.conj(), X)
    return np.einsum("k,kij->ij", coeffs, M.basis)


def _null_space(A: np.ndarray, tol: float = SPAN_TOL) -> np.ndarray:
    if A.shape[0] == 0:
        return np.eye(A.shape[1], dtype=complex)
    _, s, Vh = np.linalg.svd(A)
    scale = s[0] if s.size else 0.0
    rank = int(np.sum(s > tol * max(scale, 1.0)))
    return Vh[rank:].conj().T


def commutant(M: StarAlgebra) -> StarAlgebra:
    """Basis of {X : X B = B X for every basis element B} via a null space."""
    n = M.ambient_dim
    eye = np.eye(n)
    # row-major vec: vec(X B) = (I (x) B^T) vec X, vec(B X) = (B (x) I) vec X
    blocks = [np.kron(eye, B.T) - np.kron(B, eye) for B in M.basis]
    A = np.vstack(blocks) if blocks else np.zeros((0, n * n))
    N = _null_space(A)
    basis = N.T.reshape(-1, n, n)
    return StarAlgebra(n, basis)


def subspace_angle(M1: StarAlgebra, M2: StarAlgebra) -> float:
    """Largest principal angle between span(M1) and span(M2); pi/2 if dims differ."""
    if M1.dim != M2.dim:
        return float(np.pi / 2)
    return float(np.max(scipy.linalg.subspace_angles(M1.flat, M2.flat)))


@dataclass(frozen=True)
class BicommutantReport:
    dim_M: int
    dim_Mcc: int
    subspace_angle: float

    @property
    def passed(self) -> bool:
        return self.dim_M == self.dim_Mcc and self.subspace_angle <= ANGLE_TOL


def bicommutant_check(M: StarAlgebra) -> BicommutantReport:
    Mcc = commutant(commutant(M))
    return BicommutantReport(M.dim, Mcc.dim, subspace_angle(M, Mcc))


def is_subalgebra(M1: StarAlgebra, M2: StarAlgebra, tol: float = SPAN_TOL) -> bool:
    return all(M2.contains(B, tol) for B in M1.basis)


def center(M: StarAlgebra) -> StarAlgebra:
    """span(M) intersected with span(M') from principal vectors at angle ~0."""
    Mc = commutant(M)
    Q1, Q2 = M.flat, Mc.flat
    U, s, _ = np.linalg.svd(Q1.conj().T @ Q2, full_matrices=False)
    keep = s > 1.0 - SPAN_TOL
    Z = Q1 @ U[:, keep]
    n = M.ambient_dim
    basis = _orthonormal_extend([], list(Z.T.reshape(-1, n, n)))
    return StarAlgebra(n, np.array(basis))


@dataclass(frozen=True)
class SupportReport:
    projection: np.ndarray
    value_on_support: float
    total_value: float
    minimal: bool

    @property
    def deficit(self) -> float:
        return self.total_value - self.value_on_support


def support_projection_in(M: StarAlgebra, rho) -> SupportReport:
    """Support of phi = tr(rho .) restricted to M, as a projection in M.

    Minimality is checked against every proper partial sum of spectral
    projections of E_M(rho); none may carry the full mass.
    """
    rho = as_matrix(rho)
    E = conditional_expectation(M, rho)
    dec = eig_hermitian(E)
    P = range_projection(dec)
    total = float(np.trace(rho).real)
    on_supp = float(np.trace(rho @ P).real)
    mask = dec.support_mask()
    U = dec.eigenvectors
    lam = dec.eigenvalues
    minimal = True
    # dropping any nonzero eigenspace of E(rho) must lose mass
    for value in np.unique(np.round(lam[mask], 12)):
        sel = mask & ~np.isclose(lam, value, atol=1e-12, rtol=0)
        Q = U[:, sel] @ dagger(U[:, sel])
        if abs(total - float(np.trace(rho @ Q).real)) <= SPAN_TOL * (1 + abs(total)):
            minimal = False
    return SupportReport(P, on_supp, total, minimal)


@dataclass(frozen=True)
class CyclicSeparatingReport:
    cyclic: bool
    separating: bool
    rank_M: int
    rank_commutant: int


def _orbit_rank(M: StarAlgebra, xi: np.ndarray) -> int:
    V = np.einsum("kij,j->ik", M.basis, xi)
    s = np.linalg.svd(V, compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > RANK_TOL * s[0]))


def cyclic_separating_report(M: StarAlgebra, xi) -> CyclicSeparatingReport:
    xi = np.asarray(xi, dtype=complex).reshape(-1)
    if xi.shape[0] != M.ambient_dim:
        raise ValueError("vector dimension does not match the algebra")
    if np.linalg.norm(xi) == 0:
        raise ValueError("zero vector is neither cyclic nor separating")
    n = M.ambient_dim
    r = _orbit_rank(M, xi)
    rc = _orbit_rank(commutant(M), xi)
    return CyclicSeparatingReport(r == n, rc == n, r, rc)


def random_algebra(n: int, rng: np.random.Generator) -> StarAlgebra:
    """A generated algebra of a randomly chosen block structure, randomly rotated."""
    from .sampling import random_unitary

    kinds = ["full", "abelian"]
    if n >= 2:
        kinds.append("blocks")
    if n % 2 == 0 and n >= 4:
        kinds.append("factor")
    if n >= 3:
        kinds.append("factor_plus")
    kind = kinds[rng.integers(len(kinds))]
    if kind == "full":
        S = full_algebra(n)
    elif kind == "abelian":
        S = diagonal_algebra(n)
    elif kind == "blocks":
        a = int(rng.integers(1, n))
        S = block_diagonal_algebra([a, n - a])
    elif kind == "factor":
        S = tensor_factor_algebra(2, n // 2)
    else:
        # (Mat(1) (x) I_2) + Mat(n-2): blocks of unequal multiplicity
        mats = [np.diag([1.0, 1.0] + [0.0] * (n - 2)).astype(complex)]
        mats += list(block_diagonal_algebra([2, n - 2]).basis[4:])
        S = from_spanning_set(mats, n)
    gens = []
    for _ in range(2):
        c = rng.standard_normal(S.dim) + 1j * rng.standard_normal(S.dim)
        X = np.einsum("k,kij->ij", c, S.basis)
        gens.append(X)
    if kind == "abelian":
        gens = [np.diag(rng.standard_normal(n)).astype(complex)]
    U = random_unitary(n, rng)
    return generate_star_algebra([U @ G @ dagger(U) for G in gens], n)
