"""Finite quantum systems: Gibbs/KMS states, standard Liouvillian, bounded perturbations.

Dynamics tau_t(A) = e^{itH} A e^{-itH}.  On Hilbert-Schmidt space the
standard Liouvillian is L X = H X - X H, the GNS vector of the Gibbs state
is Omega = e^{-beta H/2} / sqrt(Z), and a bounded perturbation V gives
Omega_V = e^{-beta(L + V)/2} Omega = e^{-beta(H+V)/2} / sqrt(Z).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .entropy import araki_spectral
from .modular import (conjugate_by_j, j_action, left_mult, modular_data,
                      relative_modular, right_mult, vec)
from .numkit import (InvariantError, check_hermitian, dagger, eig_hermitian, expm_hermitian,
                     spectral_apply)
from .sampling import random_density, trial_rng

KMS_TOL = 1e-9
PERTURB_TOL = 1e-8
IDENTITY_TOL = 1e-7


@dataclass(frozen=True)
class FiniteQuantumSystem:
    H: np.ndarray
    beta: float
    log_Z: float
    rho_beta: np.ndarray
    energies: np.ndarray
    eigvecs: np.ndarray

    @property
    def n(self) -> int:
        return self.H.shape[0]

    @property
    def Z(self) -> float:
        return float(np.exp(self.log_Z))

    def expect(self, A) -> float:
        return float(np.trace(self.rho_beta @ A).real)

    def evolve(self, A, z: complex) -> np.ndarray:
        """tau_z(A) = e^{izH} A e^{-izH}, computed in the energy eigenbasis."""
        U, E = self.eigvecs, self.energies
        At = dagger(U) @ np.asarray(A, dtype=complex) @ U
        phase = np.exp(1j * z * (E[:, None] - E[None, :]))
        return U @ (At * phase) @ dagger(U)


def log_partition(H, beta: float) -> float:
    E = eig_hermitian(H).eigenvalues
    e0 = E[0]
    return float(-beta * e0 + np.log(np.sum(np.exp(-beta * (E - e0)))))


def gibbs_state(H, beta: float) -> FiniteQuantumSystem:
    """rho = e^{-beta H} / Z, evaluated with a ground-energy shift."""
    if not np.isfinite(beta) or beta <= 0:
        raise InvariantError(f"beta must be positive, got {beta}")
    H = check_hermitian(H)
    d = eig_hermitian(H)
    E = d.eigenvalues
    w = np.exp(-beta * (E - E[0]))
    s = w.sum()
    rho = (d.eigenvectors * (w / s)) @ dagger(d.eigenvectors)
    log_Z = float(-beta * E[0] + np.log(s))
    return FiniteQuantumSystem(H, float(beta), log_Z, 0.5 * (rho + dagger(rho)), E, d.eigenvectors)


@dataclass(frozen=True)
class KMSReport:
    trials: int
    max_residual: float
    converse_residual: float
    tol: float = KMS_TOL
    converse_threshold: float = 1e-4

    @property
    def passed(self) -> bool:
        return self.max_residual <= self.tol and self.converse_residual > self.converse_threshold


def kms_residual(sys: FiniteQuantumSystem, rho, A, B) -> float:
    """|tr(rho A tau_{i beta}(B)) - tr(rho B A)| / (1 + ||A|| ||B||)."""
    lhs = np.trace(rho @ A @ sys.evolve(B, 1j * sys.beta))
    rhs = np.trace(rho @ B @ A)
    return float(abs(lhs - rhs) / (1 + np.linalg.norm(A) * np.linalg.norm(B)))


def kms_boundary_check(sys: FiniteQuantumSystem, trials: int = 100, seed: int = 0) -> KMSReport:
    """KMS boundary identity for the Gibbs state, and its failure for a random state."""
    n = sys.n
    worst = 0.0
    converse = 0.0
    sigma = random_density(n, trial_rng(seed, 10 ** 9))
    for k in range(trials):
        rng = trial_rng(seed, k)
        A = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / n
        B = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / n
        worst = max(worst, kms_residual(sys, sys.rho_beta, A, B))
        if n > 1:
            converse = max(converse, kms_residual(sys, sigma, A, B))
    return KMSReport(trials, worst, converse if n > 1 else np.inf)


# --- Liouvillian -----------------------------------------------------------------

@dataclass(frozen=True)
class LiouvillianRep:
    L: np.ndarray
    Omega: np.ndarray  # vec(rho^(1/2))

    def invariant_residuals(self, n: int) -> dict[str, float]:
        return {"L_omega": float(np.linalg.norm(self.L @ self.Omega)),
                "JL_plus_LJ": float(np.linalg.norm(conjugate_by_j(self.L, n) + self.L))}


def liouvillian_matrix(H) -> np.ndarray:
    return left_mult(H) - right_mult(H)


def standard_liouvillian(sys: FiniteQuantumSystem) -> LiouvillianRep:
    Omega = (sys.eigvecs * np.sqrt(np.exp(-sys.beta * sys.energies - sys.log_Z))) @ dagger(sys.eigvecs)
    return LiouvillianRep(liouvillian_matrix(sys.H), vec(Omega))


def modular_flow_residual(sys: FiniteQuantumSystem) -> tuple[float, float]:
    """(absolute, relative) Frobenius residual of Delta_Omega - e^{-beta L}."""
    D = modular_data(sys.rho_beta).Delta
    E = expm_hermitian(liouvillian_matrix(sys.H), -sys.beta)
    r = float(np.linalg.norm(D - E))
    return r, r / float(np.linalg.norm(E))


def kms_vector_residual(sys: FiniteQuantumSystem, A) -> float:
    """||e^{-beta L/2} vec(A Omega) - J vec(A^+ Omega)||."""
    n = sys.n
    rep = standard_liouvillian(sys)
    Om = np.reshape(rep.Omega, (n, n), order="F")
    lhs = expm_hermitian(rep.L, -sys.beta / 2) @ vec(A @ Om)
    rhs = j_action(vec(dagger(A) @ Om), n)
    return float(np.linalg.norm(lhs - rhs))


# --- perturbations -----------------------------------------------------------------

@dataclass(frozen=True)
class PerturbationResult:
    V: np.ndarray
    Omega_V: np.ndarray
    omega_V: np.ndarray
    L_V: np.ndarray
    norm_sq: float
    log_norm_sq: float
    dual_path_residual: float
    gibbs_residual: float
    norm_sq_expm: float = float("nan")

    def invariant_residuals(self) -> dict[str, float]:
        x = vec(self.Omega_V) / np.sqrt(self.norm_sq)
        lam = np.linalg.eigvalsh(0.5 * (self.Omega_V + dagger(self.Omega_V)))
        return {"cone": float(max(0.0, -lam[0])),
                "hermitian": float(np.linalg.norm(self.Omega_V - dagger(self.Omega_V))),
                "L_V_invariance": float(np.linalg.norm(self.L_V @ x)),
                "dual_path": self.dual_path_residual,
                "gibbs": self.gibbs_residual}


def perturb_state(sys: FiniteQuantumSystem, V, check: bool = True) -> PerturbationResult:
    """Perturbed vector, state and Liouvillian; two independent paths for Omega_V.

    Path (a) exponentiates the n^2 x n^2 generator -beta(L + V_left)/2 with a
    general dense expm.  Path (b) is the closed form e^{-beta(H+V)/2}/sqrt(Z).
    """
    V = check_hermitian(V)
    n = sys.n
    if V.shape != (n, n):
        raise InvariantError(f"V has shape {V.shape}, expected {(n, n)}")
    beta = sys.beta
    K = sys.H + V
    dK = eig_hermitian(K)
    # closed form, shifted by the ground energy of H + V for stability
    e0 = dK.eigenvalues[0]
    half = np.exp(-beta * (dK.eigenvalues - e0) / 2 - (beta * e0 + sys.log_Z) / 2)
    Omega_b = (dK.eigenvectors * half) @ dagger(dK.eigenvectors)
    log_norm_sq = log_partition(K, beta) - sys.log_Z

    rep = standard_liouvillian(sys)
    gen = -beta * (rep.L + left_mult(V)) / 2
    Omega_a = np.reshape(scipy.linalg.expm(gen) @ rep.Omega, (n, n), order="F")
    scale = 1.0 + np.linalg.norm(Omega_b)
    dual = float(np.linalg.norm(Omega_a - Omega_b) / scale)

    norm_sq = float(np.exp(log_norm_sq))
    omega_V = Omega_b @ dagger(Omega_b) / norm_sq
    omega_V = 0.5 * (omega_V + dagger(omega_V))
    ref = gibbs_state(K, beta).rho_beta
    gres = float(np.max(np.abs(omega_V - ref)))
    L_V = rep.L + left_mult(V) - right_mult(V)
    res = PerturbationResult(V, Omega_b, omega_V, L_V, norm_sq, log_norm_sq, dual, gres,
                             float(np.linalg.norm(Omega_a) ** 2))
    if check and dual > PERTURB_TOL:
        raise InvariantError(f"Omega_V paths disagree by {dual:.3e}")
    return res


@dataclass(frozen=True)
class PerturbationEntropyReport:
    S_fwd: float
    S_bwd: float
    identities_residual: dict
    tol: float = IDENTITY_TOL

    @property
    def passed(self) -> bool:
        return all(v <= self.tol for v in self.identities_residual.values())


def perturbation_entropy_report(sys: FiniteQuantumSystem, V) -> PerturbationEntropyReport:
    """Entropy identities of the perturbed state and the log-modular identities.

    S(omega, omega_V) = ln||Omega_V||^2 + beta omega(V)
    S(omega_V, omega) = -ln||Omega_V||^2 - beta omega_V(V)
    log Delta_{Omega_V, Omega} = log Delta_Omega - beta V_left
    log Delta_{Omega, Omega_V} = log Delta_{Omega_V} + beta V_left
    log Delta_{Omega_V} = -beta L_V
    """
    pr = perturb_state(sys, V)
    beta = sys.beta
    rho = sys.rho_beta
    s_fwd = araki_spectral(rho, pr.omega_V).value
    s_bwd = araki_spectral(pr.omega_V, rho).value
    id_fwd = pr.log_norm_sq + beta * sys.expect(pr.V)
    id_bwd = -pr.log_norm_sq - beta * float(np.trace(pr.omega_V @ pr.V).real)

    sv = pr.Omega_V @ dagger(pr.Omega_V)  # unnormalized functional of Omega_V
    log_d_omega = relative_modular(rho, rho).log_delta()
    log_d_v = relative_modular(sv, sv, normalized=False).log_delta()
    log_d_v_omega = relative_modular(sv, rho, normalized=False).log_delta()
    log_d_omega_v = relative_modular(rho, sv, normalized=False).log_delta()
    Vl = left_mult(pr.V)
    res = {
        "entropy_fwd": abs(s_fwd - id_fwd),
        "entropy_bwd": abs(s_bwd - id_bwd),
        "log_delta_V_Omega": float(np.max(np.abs(log_d_v_omega - (log_d_omega - beta * Vl)))),
        "log_delta_Omega_V": float(np.max(np.abs(log_d_omega_v - (log_d_v + beta * Vl)))),
        "log_delta_V": float(np.max(np.abs(log_d_v + beta * pr.L_V))),
    }
    return PerturbationEntropyReport(float(s_fwd), float(s_bwd), res)


# --- expansional and Trotter ----------------------------------------------------------

GL_NODES = 16


@dataclass(frozen=True)
class ExpansionalReport:
    t: float
    closed_form: np.ndarray
    partial_sums: list
    truncation_errors: list
    unitarity_residual: float


def expansional_closed_form(sys: FiniteQuantumSystem, V, t: float) -> np.ndarray:
    """E(t) = e^{it(H+V)} e^{-itH}."""
    return expm_hermitian(sys.H + V, 1j * t) @ expm_hermitian(sys.H, -1j * t)


def dyson_terms(sys: FiniteQuantumSystem, V, t: float, order: int, nodes: int = GL_NODES) -> list:
    """Terms E_k(t), k = 0..order, with E_k(t) = i int_0^t E_{k-1}(s) tau_s(V) ds.

    Iterated integrals use nested Gauss-Legendre quadrature, ``nodes`` points per level.
    """
    x, w = np.polynomial.legendre.leggauss(nodes)
    n = sys.n
    V = np.asarray(V, dtype=complex)

    def term(k: int, s: float) -> np.ndarray:
        if k == 0:
            return np.eye(n, dtype=complex)
        pts = 0.5 * s * (x + 1)
        acc = np.zeros((n, n), dtype=complex)
        for p, wt in zip(pts, w):
            acc += wt * term(k - 1, p) @ sys.evolve(V, p)
        return 1j * 0.5 * s * acc

    return [term(k, t) for k in range(order + 1)]


def expansional(sys: FiniteQuantumSystem, V, t: float, dyson_order: int = 3) -> ExpansionalReport:
    if dyson_order < 1:
        raise ValueError("dyson_order must be at least 1")
    if dyson_order > 4:
        raise ValueError("nested quadrature is limited to dyson_order <= 4")
    V = check_hermitian(V)
    E = expansional_closed_form(sys, V, t)
    terms = dyson_terms(sys, V, t, dyson_order)
    sums = list(np.cumsum(np.array(terms), axis=0))
    errs = [float(np.linalg.norm(S - E, 2)) for S in sums]
    unit = float(np.linalg.norm(dagger(E) @ E - np.eye(sys.n)))
    return ExpansionalReport(float(t), E, sums, errs, unit)


@dataclass(frozen=True)
class TrotterReport:
    n_list: tuple
    errors: tuple
    ratios: tuple
    band: tuple = (1.7, 2.3)

    @property
    def passed(self) -> bool:
        lo, hi = self.band
        return all(lo <= r <= hi for r in self.ratios)


def trotter_error(A, B, t: float, n: int) -> float:
    A = np.asarray(A, dtype=complex)
    B = np.asarray(B, dtype=complex)
    step = scipy.linalg.expm(1j * t / n * A) @ scipy.linalg.expm(1j * t / n * B)
    exact = scipy.linalg.expm(1j * t * (A + B))
    return float(np.linalg.norm(np.linalg.matrix_power(step, n) - exact, 2))


def trotter_check(A, B, t: float, n_list=(8, 16, 32, 64)) -> TrotterReport:
    """Errors of the Lie-Trotter product and ratios e_n / e_{2n} for doubled n."""
    A = check_hermitian(A)
    B = check_hermitian(B)
    n_list = tuple(int(n) for n in n_list)
    if any(b <= a for a, b in zip(n_list, n_list[1:])):
        raise ValueError("n_list must be increasing")
    errs = tuple(trotter_error(A, B, t, n) for n in n_list)
    pos = {n: e for n, e in zip(n_list, errs)}
    ratios = tuple(pos[n] / pos[2 * n] for n in n_list if 2 * n in pos and pos[2 * n] > 0)
    return TrotterReport(n_list, errs, ratios)


# --- trace inequalities ------------------------------------------------------------------

@dataclass(frozen=True)
class GTPBReport:
    gt_lhs: float
    gt_rhs: float
    pb_lhs: float
    pb_rhs: float
    tol: float = 1e-9

    @property
    def gt_slack(self) -> float:
        return (self.gt_rhs - self.gt_lhs) / self.gt_rhs

    @property
    def pb_slack(self) -> float:
        return (self.pb_rhs - self.pb_lhs) / self.pb_rhs

    @property
    def passed(self) -> bool:
        return self.gt_slack >= -self.tol and self.pb_slack >= -self.tol


def golden_thompson_peierls_report(sys: FiniteQuantumSystem, V) -> GTPBReport:
    """tr e^{-beta(H+V)} <= tr(e^{-beta H} e^{-beta V}) and e^{-beta omega(V)} <= ||Omega_V||^2.

    Both sides of GT are divided by Z, i.e. compared as ||Omega_V||^2 against
    ||e^{-beta V/2} Omega||^2 = omega(e^{-beta V}).
    """
    V = check_hermitian(V)
    beta = sys.beta
    norm_sq = float(np.exp(log_partition(sys.H + V, beta) - sys.log_Z))
    gt_rhs = sys.expect(expm_hermitian(V, -beta))
    pb_lhs = float(np.exp(-beta * sys.expect(V)))
    return GTPBReport(norm_sq, gt_rhs, pb_lhs, norm_sq)


def spectral_truncation(V, cutoff: float) -> np.ndarray:
    """V_n = 1_{[-n, n]}(V) V."""
    if cutoff < 0:
        raise ValueError("cutoff must be non-negative")
    return spectral_apply(lambda x: np.where(np.abs(x) <= cutoff, x, 0.0), check_hermitian(V))


def roundtrip_residual(sys: FiniteQuantumSystem, V) -> float:
    """Perturb by V, then the H+V system by -V; distance to the original Gibbs state."""
    pr = perturb_state(sys, V)
    sys_v = gibbs_state(sys.H + pr.V, sys.beta)
    back = perturb_state(sys_v, -pr.V)
    return float(np.max(np.abs(back.omega_V - sys.rho_beta)))
