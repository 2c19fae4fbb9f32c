"""Schwarz / 2-positive / CP maps between matrix algebras and monotonicity checks.

A ``QuantumMap`` acts on observables, alpha : Mat(dim_in) -> Mat(dim_out),
and its predual carries densities on dim_out back to densities on dim_in,
so that tr(rho alpha(A)) = tr(predual(rho) A).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .algebra import StarAlgebra, conditional_expectation, diagonal_algebra
from .entropy import EntropyValue, umegaki
from .modular import PreconditionError, check_density
from .numkit import InvariantError, dagger, min_eig, powm_on_support, sqrtm_psd
from .sampling import (random_contraction, random_density, random_isometry, random_kraus_unital,
                       random_psd, random_unitary, trial_rng)

MAP_TOL = 1e-10
MARGIN_TOL = 1e-8
KINDS = ("kraus_unital", "isometry", "unitary", "subalgebra_embedding",
         "contraction_hom", "transpose", "identity")

TRANSPOSE_WITNESS = np.array([[2, 0, 0, 2],
                              [0, 1, 1, 0],
                              [0, 1, 1, 0],
                              [2, 0, 0, 2]], dtype=float)


@dataclass(frozen=True)
class QuantumMap:
    """alpha(A) for A in Mat(dim_in) (or in ``algebra`` when it is set).

    payload per kind:
      kraus_unital          K_i of shape (dim_in, dim_out), alpha(A) = sum K_i^+ A K_i
      isometry              V of shape (dim_in, dim_out), alpha(A) = V^+ A V
      unitary               U, alpha(A) = U^+ A U
      subalgebra_embedding  none; alpha is the inclusion of ``algebra``
      contraction_hom       (P, V), alpha(A) = V^+ P A V for A in ``algebra``
      transpose, identity   none
    """

    dim_in: int
    dim_out: int
    kind: str
    payload: tuple = ()
    algebra: StarAlgebra | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown map kind {self.kind!r}")

    def __call__(self, A) -> np.ndarray:
        A = np.asarray(A, dtype=complex)
        k = self.kind
        if k == "kraus_unital":
            return sum(dagger(K) @ A @ K for K in self.payload)
        if k in ("isometry", "unitary"):
            V = self.payload[0]
            return dagger(V) @ A @ V
        if k == "contraction_hom":
            P, V = self.payload
            return dagger(V) @ P @ A @ V
        if k == "transpose":
            return A.T.copy()
        return A.copy()

    def predual(self, rho) -> np.ndarray:
        """Density of rho o alpha on the domain, without trace checks."""
        rho = np.asarray(rho, dtype=complex)
        k = self.kind
        if k == "kraus_unital":
            return sum(K @ rho @ dagger(K) for K in self.payload)
        if k in ("isometry", "unitary"):
            V = self.payload[0]
            return V @ rho @ dagger(V)
        if k == "contraction_hom":
            P, V = self.payload
            out = P @ V @ rho @ dagger(V) @ P
            return conditional_expectation(self.algebra, out) if self.algebra else out
        if k == "transpose":
            return rho.T.copy()
        if k == "subalgebra_embedding":
            return conditional_expectation(self.algebra, rho)
        return rho.copy()

    def random_input(self, rng: np.random.Generator) -> np.ndarray:
        """Random element of the domain algebra."""
        if self.algebra is not None:
            c = rng.standard_normal(self.algebra.dim) + 1j * rng.standard_normal(self.algebra.dim)
            return np.einsum("k,kij->ij", c, self.algebra.basis)
        return rng.standard_normal((self.dim_in,) * 2) + 1j * rng.standard_normal((self.dim_in,) * 2)

    def unital_residual(self) -> float:
        return float(np.linalg.norm(self(np.eye(self.dim_in)) - np.eye(self.dim_out)))

    def validate(self) -> None:
        if self.kind == "contraction_hom":
            return
        if self.kind == "kraus_unital":
            S = sum(dagger(K) @ K for K in self.payload)
            if np.linalg.norm(S - np.eye(self.dim_out)) > MAP_TOL:
                raise InvariantError("Kraus operators do not satisfy sum K^+ K = I")
        if self.unital_residual() > MAP_TOL:
            raise InvariantError("map is not unital")


# --- constructors ------------------------------------------------------------

def identity_map(n: int) -> QuantumMap:
    return QuantumMap(n, n, "identity")


def transpose_map(n: int) -> QuantumMap:
    return QuantumMap(n, n, "transpose")


def unitary_map(U) -> QuantumMap:
    U = np.asarray(U, dtype=complex)
    return QuantumMap(U.shape[0], U.shape[0], "unitary", (U,))


def isometry_map(V) -> QuantumMap:
    """alpha(A) = V^+ A V for V : C^m -> C^N with V^+ V = I_m."""
    V = np.asarray(V, dtype=complex)
    if np.linalg.norm(dagger(V) @ V - np.eye(V.shape[1])) > MAP_TOL:
        raise PreconditionError("V is not an isometry")
    return QuantumMap(V.shape[0], V.shape[1], "isometry", (V,))


def kraus_map(kraus) -> QuantumMap:
    ks = tuple(np.asarray(K, dtype=complex) for K in kraus)
    m = QuantumMap(ks[0].shape[0], ks[0].shape[1], "kraus_unital", ks)
    m.validate()
    return m


def partial_trace_map(d1: int, d2: int) -> QuantumMap:
    """alpha(A) = A kron I_{d2}; its predual traces out the second factor."""
    eye = np.eye(d2)
    ks = [np.kron(np.eye(d1), eye[k][None, :]) for k in range(d2)]
    return kraus_map(ks)


def subalgebra_embedding(M: StarAlgebra) -> QuantumMap:
    return QuantumMap(M.ambient_dim, M.ambient_dim, "subalgebra_embedding", (), M)


def pinching_map(n: int) -> QuantumMap:
    return subalgebra_embedding(diagonal_algebra(n))


def contraction_hom_map(M1: StarAlgebra, P, V) -> QuantumMap:
    """alpha(A) = V^+ P A V with P a projection commuting with M1."""
    P = np.asarray(P, dtype=complex)
    V = np.asarray(V, dtype=complex)
    if np.linalg.norm(P @ P - P) > MAP_TOL or np.linalg.norm(P - dagger(P)) > MAP_TOL:
        raise PreconditionError("P is not an orthogonal projection")
    if max(np.linalg.norm(P @ B - B @ P) for B in M1.basis) > MAP_TOL:
        raise PreconditionError("P does not commute with M1, so A -> PA is not a homomorphism")
    if np.linalg.norm(V, 2) > 1 + MAP_TOL:
        raise PreconditionError("V is not a contraction")
    return QuantumMap(M1.ambient_dim, V.shape[1], "contraction_hom", (P, V), M1)


# --- positivity checks ---------------------------------------------------------

@dataclass(frozen=True)
class PositivityReport:
    trials: int
    min_eig_worst: float
    witness_spectrum: tuple | None = None
    tol: float = MARGIN_TOL

    @property
    def passed(self) -> bool:
        return self.min_eig_worst >= -self.tol


def schwarz_check(alpha: QuantumMap, trials: int = 50, seed: int = 0) -> PositivityReport:
    """min-eig(alpha(A^+ A) - alpha(A)^+ alpha(A)) over random A."""
    worst = np.inf
    for k in range(trials):
        rng = trial_rng(seed, k)
        A = alpha.random_input(rng)
        A = A / np.linalg.norm(A)
        a = alpha(A)
        worst = min(worst, min_eig(alpha(dagger(A) @ A) - dagger(a) @ a))
    return PositivityReport(trials, float(worst))


def amplify(alpha: QuantumMap, X) -> np.ndarray:
    """(id_2 kron alpha) applied to a 2x2 block matrix over the domain."""
    n = alpha.dim_in
    X = np.asarray(X, dtype=complex)
    blocks = [[alpha(X[i * n:(i + 1) * n, j * n:(j + 1) * n]) for j in range(2)] for i in range(2)]
    return np.block(blocks)


def transpose_witness() -> tuple[np.ndarray, np.ndarray]:
    """Spectra of the PSD witness and of its blockwise transpose."""
    out = amplify(transpose_map(2), TRANSPOSE_WITNESS)
    return np.linalg.eigvalsh(TRANSPOSE_WITNESS), np.linalg.eigvalsh(out)


def _random_psd_block(alpha: QuantumMap, rng) -> np.ndarray:
    """Random PSD element of Mat(2) kron (domain algebra)."""
    if alpha.algebra is None:
        G = random_psd(2 * alpha.dim_in, rng)
    else:
        # X X^+ with X a 2x2 block matrix over the algebra
        X = np.block([[alpha.random_input(rng) for _ in range(2)] for _ in range(2)])
        G = X @ dagger(X)
    return G / np.trace(G).real


def two_positive_check(alpha: QuantumMap, trials: int = 50, seed: int = 0) -> PositivityReport:
    """min-eig of (id_2 kron alpha)(X) over random PSD X; transpose adds the witness."""
    worst = np.inf
    wit = None
    for k in range(trials):
        X = _random_psd_block(alpha, trial_rng(seed, k))
        worst = min(worst, min_eig(amplify(alpha, X)))
    if alpha.kind == "transpose" and alpha.dim_in == 2:
        _, out = transpose_witness()
        wit = tuple(float(x) for x in np.sort(out)[::-1])
        worst = min(worst, float(out[0]))
    return PositivityReport(trials, float(worst), wit)


# --- monotonicity ----------------------------------------------------------------

def apply_predual(alpha: QuantumMap, rho, tol: float = 1e-8) -> np.ndarray:
    """Density of the state rho o alpha; raises if the trace is not preserved."""
    out = alpha.predual(rho)
    tin = np.trace(rho).real
    tout = np.trace(out).real
    if abs(tin - tout) > tol * max(1.0, abs(tin)):
        raise InvariantError(f"predual lost trace ({tin:.12g} -> {tout:.12g}); map misconfigured")
    return 0.5 * (out + dagger(out))


@dataclass(frozen=True)
class MonotonicityReport:
    S_in: EntropyValue
    S_out: EntropyValue
    margin: float | None
    tol: float = MARGIN_TOL

    @property
    def passed(self) -> bool:
        return self.S_out.leq(self.S_in, self.tol)


def monotonicity_report(rho_psi, rho_phi, alpha: QuantumMap) -> MonotonicityReport:
    """S(psi o alpha, phi o alpha) <= S(psi, phi) for states on the codomain."""
    a = check_density(rho_psi)
    b = check_density(rho_phi)
    s_in = umegaki(a, b)
    s_out = umegaki(apply_predual(alpha, a), apply_predual(alpha, b))
    return MonotonicityReport(s_in, s_out, s_out.margin_to(s_in))


# --- vector-level monotonicity -----------------------------------------------------

VECTOR_MODES = ("isometry", "partial_isometry", "unitary", "contraction_hom", "subalgebra")


def vector_entropy(M: StarAlgebra, xi, eta) -> EntropyValue:
    """R_M(xi, eta): relative entropy of the vector functionals restricted to M."""
    xi = np.asarray(xi, dtype=complex).reshape(-1)
    eta = np.asarray(eta, dtype=complex).reshape(-1)
    a = conditional_expectation(M, np.outer(xi, xi.conj()))
    b = conditional_expectation(M, np.outer(eta, eta.conj()))
    return umegaki(0.5 * (a + dagger(a)), 0.5 * (b + dagger(b)), normalized=False)


def _orbit_full_rank(M: StarAlgebra, xi) -> bool:
    V = np.einsum("kij,j->ik", M.basis, xi)
    s = np.linalg.svd(V, compute_uv=False)
    return bool(s.size and np.sum(s > 1e-10 * s[0]) == M.ambient_dim)


def _maps_into(M1: StarAlgebra, M2: StarAlgebra, f) -> bool:
    return all(M2.contains(f(B), 1e-9) for B in M1.basis)


@dataclass(frozen=True)
class VectorMonotonicityReport:
    mode: str
    lhs: EntropyValue
    rhs: EntropyValue
    margin: float | None
    cyclic: dict = field(default_factory=dict)
    equality_expected: bool = False
    tol: float = MARGIN_TOL

    @property
    def passed(self) -> bool:
        if not self.lhs.leq(self.rhs, self.tol):
            return False
        if self.equality_expected:
            return self.rhs.leq(self.lhs, self.tol)
        return True


def vector_monotonicity_report(mode: str, M1: StarAlgebra, M2: StarAlgebra, V, Omega, Phi,
                               P=None) -> VectorMonotonicityReport:
    """Check the vector-level monotonicity inequality of the given mode.

    isometry          R_M1(V Omega, V Phi) <= R_M2(Omega, Phi); V^+ V = I and V^+ M1 V in M2
    partial_isometry  same, with V^+ V a projection and Omega in its range
    unitary           R_M1(Omega, Phi) <= R_M2(U Omega, U Phi); U in M2, M1 in M2
                      (equality when M1 = M2)
    contraction_hom   R_M1(V Omega, V Phi) <= R_M2(Omega, Phi) with rho(A) = P A
    subalgebra        R_M1(Omega, Phi) <= R_M2(Omega, Phi); M1 in M2
    """
    if mode not in VECTOR_MODES:
        raise ValueError(f"unknown mode {mode!r}")
    Omega = np.asarray(Omega, dtype=complex).reshape(-1)
    Phi = np.asarray(Phi, dtype=complex).reshape(-1)
    V = None if V is None else np.asarray(V, dtype=complex)
    eq = False

    if mode == "subalgebra":
        if not _maps_into(M1, M2, lambda B: B):
            raise PreconditionError("M1 is not contained in M2")
        lhs, rhs = vector_entropy(M1, Omega, Phi), vector_entropy(M2, Omega, Phi)
        cyc = {"Omega_M1": _orbit_full_rank(M1, Omega)}
    elif mode == "unitary":
        n = V.shape[0]
        if V.shape != (n, n) or np.linalg.norm(dagger(V) @ V - np.eye(n)) > MAP_TOL:
            raise PreconditionError("U is not unitary")
        if not M2.contains(V, 1e-9):
            raise PreconditionError("U is not an element of M2")
        if not _maps_into(M1, M2, lambda B: B):
            raise PreconditionError("M1 is not contained in M2")
        lhs = vector_entropy(M1, Omega, Phi)
        rhs = vector_entropy(M2, V @ Omega, V @ Phi)
        eq = M1.dim == M2.dim
        cyc = {"Omega_M1": _orbit_full_rank(M1, Omega)}
    else:
        E = dagger(V) @ V
        m = V.shape[1]
        if mode == "isometry":
            if np.linalg.norm(E - np.eye(m)) > MAP_TOL:
                raise PreconditionError("V is not an isometry")
            f = lambda B: dagger(V) @ B @ V  # noqa: E731
        elif mode == "partial_isometry":
            if np.linalg.norm(E @ E - E) > MAP_TOL:
                raise PreconditionError("V^+ V is not a projection")
            if np.linalg.norm(E @ Omega - Omega) > 1e-8 * max(1.0, np.linalg.norm(Omega)):
                raise PreconditionError("Omega is not in the initial subspace of V")
            f = lambda B: dagger(V) @ B @ V  # noqa: E731
        else:
            if P is None:
                raise PreconditionError("contraction_hom mode needs the projection P")
            P = np.asarray(P, dtype=complex)
            contraction_hom_map(M1, P, V)
            if np.linalg.norm(E - np.eye(m)) > MAP_TOL:
                raise PreconditionError("V is not an isometry")
            if not _maps_into(M1, M2, lambda B: P @ B):
                raise PreconditionError("A -> PA does not map M1 into M2")
            f = lambda B: dagger(V) @ P @ B @ V  # noqa: E731
        if not _maps_into(M1, M2, f):
            raise PreconditionError("alpha(M1) is not contained in M2")
        lhs = vector_entropy(M1, V @ Omega, V @ Phi)
        rhs = vector_entropy(M2, Omega, Phi)
        cyc = {"VOmega_M1": _orbit_full_rank(M1, V @ Omega),
               "Omega_M2": _orbit_full_rank(M2, Omega)}
    return VectorMonotonicityReport(mode, lhs, rhs, lhs.margin_to(rhs), cyc, eq)


# --- operator inequalities ----------------------------------------------------------

T_VALUES = (0.25, 0.5, 0.75)


def loewner_heinz_margin(A, B, t: float) -> float:
    """min-eig(A^t - B^t) for A >= B >= 0."""
    return min_eig(powm_on_support(A, t) - powm_on_support(B, t))


def hjp_margin(A, K, t: float) -> float:
    """min-eig(f_t(K^+ A K) - K^+ f_t(A) K), f_t(x) = x^t."""
    return min_eig(powm_on_support(dagger(K) @ A @ K, t) - dagger(K) @ powm_on_support(A, t) @ K)


def interpolation_instance(n1: int, n2: int, rng: np.random.Generator):
    """(A1, A2, T) with T^+ A2^2 T <= ||T||^2 A1^2 by construction."""
    A2 = sqrtm_psd(random_psd(n2, rng) / n2)
    T = (rng.standard_normal((n2, n1)) + 1j * rng.standard_normal((n2, n1))) / np.sqrt(2 * n1)
    tn = np.linalg.norm(T, 2)
    noise = random_psd(n1, rng, rank=int(rng.integers(1, n1 + 1))) * rng.uniform(0.0, 0.5) / n1
    A1 = sqrtm_psd(dagger(T) @ A2 @ A2 @ T / tn ** 2 + noise)
    return A1, A2, T


def interpolation_margin(A1, A2, T, t: float) -> float:
    """min-eig(||T||^2 A1^{2t} - T^+ A2^{2t} T)."""
    tn = np.linalg.norm(T, 2)
    return min_eig(tn ** 2 * powm_on_support(A1, 2 * t) - dagger(T) @ powm_on_support(A2, 2 * t) @ T)


@dataclass(frozen=True)
class OperatorInequalityReport:
    trials: int
    worst: dict
    worst_trial: dict
    tol: float = MARGIN_TOL

    @property
    def passed(self) -> bool:
        return all(v >= -self.tol for v in self.worst.values())


def loewner_heinz_hjp_suite(trials: int = 200, dims=(2, 3, 4, 5, 6), seed: int = 0,
                            ts=T_VALUES) -> OperatorInequalityReport:
    worst = {"loewner_heinz": np.inf, "hjp": np.inf, "interpolation": np.inf}
    where = {k: -1 for k in worst}
    dims = list(dims)
    for k in range(trials):
        rng = trial_rng(seed, k)
        n = dims[k % len(dims)]
        B = random_psd(n, rng) / n
        A = B + random_psd(n, rng, rank=int(rng.integers(1, n + 1))) / n
        K = random_contraction(n, rng)
        C = random_psd(n, rng) / n
        n1 = dims[(k // len(dims)) % len(dims)]
        A1, A2, T = interpolation_instance(n1, n, rng)
        for t in ts:
            vals = {"loewner_heinz": loewner_heinz_margin(A, B, t),
                    "hjp": hjp_margin(C, K, t),
                    "interpolation": interpolation_margin(A1, A2, T, t)}
            for name, v in vals.items():
                if v < worst[name]:
                    worst[name], where[name] = v, k
    return OperatorInequalityReport(trials, {k: float(v) for k, v in worst.items()}, where)


# --- random maps for batteries -----------------------------------------------------

def random_dpi_instance(family: str, n: int, rng: np.random.Generator):
    """(rho, sigma, alpha) with states on the codomain of alpha."""
    if family == "partial_trace":
        d1, d2 = (2, n // 2) if n % 2 == 0 and n >= 4 else (n, 2)
        alpha = partial_trace_map(d1, d2)
    elif family == "pinching":
        alpha = pinching_map(n)
    elif family == "kraus":
        m = int(rng.integers(2, n + 1))
        n_ops = max(int(rng.integers(1, 4)), -(-n // m))
        alpha = kraus_map(random_kraus_unital(m, n, n_ops, rng))
    elif family == "isometry":
        m = int(rng.integers(n, n + 3))
        alpha = isometry_map(random_isometry(m, n, rng))
    elif family == "unitary":
        alpha = unitary_map(random_unitary(n, rng))
    else:
        raise ValueError(f"unknown DPI family {family!r}")
    rho = random_density(alpha.dim_out, rng)
    sigma = random_density(alpha.dim_out, rng)
    return rho, sigma, alpha


DPI_FAMILIES = ("partial_trace", "pinching", "kraus", "isometry")

