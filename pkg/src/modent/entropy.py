"""Relative entropy: Kullback-Leibler, Umegaki, Araki spectral form, Uhlmann limit.

The Araki value S(psi, phi) = -<Psi, log Delta_{Phi,Psi} Psi> is evaluated
in the joint eigenbasis of the relative modular operator.  If rho_phi has
eigenpairs (lambda_i, u_i) and rho_psi has (mu_j, v_j), then vec(u_i v_j^+)
are eigenvectors of Delta_{Phi,Psi} with eigenvalue lambda_i / mu_j and Psi
has weight mu_j |<u_i, v_j>|^2 on each of them.  This is the same finite
spectral sum as diagonalizing the n^2 x n^2 operator, at O(n^3) cost.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import StarAlgebra, conditional_expectation
from .modular import PreconditionError, check_density, relative_modular, vec
from .numkit import (RANK_TOL, InvariantError, dagger, eig_hermitian, expm_hermitian,
                     logm_on_support, range_projection, sqrtm_psd)

SUPPORT_TOL = 1e-8
PROB_TOL = 1e-10
DEFAULT_T = tuple(2.0 ** -k for k in range(21))


@dataclass(frozen=True)
class EntropyValue:
    """Extended-real entropy value; ``value is None`` encodes +infinity."""

    value: float | None
    support_condition_met: bool
    warning: str | None = None

    @property
    def is_infinite(self) -> bool:
        return self.value is None

    def __float__(self) -> float:
        return float("inf") if self.value is None else self.value

    def leq(self, other: "EntropyValue", tol: float = 0.0) -> bool:
        if other.is_infinite:
            return True
        if self.is_infinite:
            return False
        return self.value <= other.value + tol

    def margin_to(self, other: "EntropyValue") -> float | None:
        """other - self; None when both are infinite."""
        if self.is_infinite and other.is_infinite:
            return None
        if self.is_infinite:
            return float("-inf")
        if other.is_infinite:
            return float("inf")
        return other.value - self.value


INFINITE = EntropyValue(None, False)


def kl_divergence(p, q) -> EntropyValue:
    """sum_i p_i ln(p_i / q_i) with 0 ln 0 = 0."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape or p.ndim != 1:
        raise InvariantError("probability vectors must be 1-d and of equal length")
    for name, v in (("p", p), ("q", q)):
        if not np.all(np.isfinite(v)) or np.any(v < -PROB_TOL):
            raise InvariantError(f"{name} has negative or non-finite entries")
        if abs(v.sum() - 1.0) > PROB_TOL:
            raise InvariantError(f"{name} does not sum to 1")
    if np.any((p > RANK_TOL) & (q <= RANK_TOL)):
        return INFINITE
    m = (p > 0) & (q > 0)
    return EntropyValue(float(np.sum(p[m] * np.log(p[m] / q[m]))), True)


def support_condition(rho_psi, rho_phi, tol: float = SUPPORT_TOL) -> bool:
    """s(psi) <= s(phi), tested as ||(I - P_phi) P_psi|| <= tol."""
    P_psi = range_projection(rho_psi)
    P_phi = range_projection(rho_phi)
    n = P_psi.shape[0]
    return bool(np.linalg.norm((np.eye(n) - P_phi) @ P_psi, 2) <= tol)


def _conditioning_warning(*mats) -> str | None:
    for R in mats:
        lam = np.abs(eig_hermitian(R).eigenvalues)
        scale = lam.max()
        near = (lam > 0.1 * RANK_TOL * scale) & (lam <= 10 * RANK_TOL * scale)
        if np.any(near):
            return "eigenvalue near the rank threshold; value is ill-conditioned"
    return None


def umegaki(rho, sigma, normalized: bool = True) -> EntropyValue:
    """tr rho (log rho - log sigma), logs taken on supports."""
    rho = check_density(rho, normalized)
    sigma = check_density(sigma, normalized)
    warn = _conditioning_warning(rho, sigma)
    if not support_condition(rho, sigma):
        return EntropyValue(None, False, warn)
    val = np.trace(rho @ (logm_on_support(rho) - logm_on_support(sigma))).real
    return EntropyValue(float(val), True, warn)


@dataclass(frozen=True)
class ModularSpectrum:
    """Eigenvalues of Delta_{Phi,Psi} on its support and the weights of Psi."""

    log_ratio: np.ndarray  # ln(lambda_i / mu_j) on supported pairs
    weight: np.ndarray     # |<e_ij, Psi>|^2
    leaked_weight: float   # weight of Psi outside the support of Delta


def modular_spectrum(rho_psi, rho_phi) -> ModularSpectrum:
    dphi = eig_hermitian(rho_phi)
    dpsi = eig_hermitian(rho_psi)
    mphi = dphi.support_mask()
    mpsi = dpsi.support_mask()
    lam = dphi.eigenvalues[mphi]
    mu = dpsi.eigenvalues[mpsi]
    U = dphi.eigenvectors
    V = dpsi.eigenvectors[:, mpsi]
    overlap = np.abs(dagger(U) @ V) ** 2 * mu[None, :]
    inside = overlap[mphi]
    leaked = float(overlap[~mphi].sum())
    log_ratio = np.log(lam)[:, None] - np.log(mu)[None, :]
    return ModularSpectrum(log_ratio.ravel(), inside.ravel(), leaked)


def araki_spectral(rho_psi, rho_phi, normalized: bool = True) -> EntropyValue:
    """S(psi, phi) = -<Psi, log(Delta_{Phi,Psi}) Psi> with Psi = rho_psi^(1/2)."""
    a = check_density(rho_psi, normalized)
    b = check_density(rho_phi, normalized)
    warn = _conditioning_warning(a, b)
    if not support_condition(a, b):
        return EntropyValue(None, False, warn)
    spec = modular_spectrum(a, b)
    return EntropyValue(float(-np.sum(spec.weight * spec.log_ratio)), True, warn)


def araki_dense(rho_psi, rho_phi) -> EntropyValue:
    """Same quantity from the assembled n^2 x n^2 log Delta (for cross-checks)."""
    a = check_density(rho_psi, normalized=False)
    b = check_density(rho_phi, normalized=False)
    if not support_condition(a, b):
        return INFINITE
    Psi = vec(sqrtm_psd(a))
    log_delta = relative_modular(b, a, normalized=False).log_delta()
    return EntropyValue(float(-np.vdot(Psi, log_delta @ Psi).real), True)


def araki_on_subalgebra(M: StarAlgebra, rho_psi, rho_phi) -> EntropyValue:
    """Entropy of the restrictions to M, via the conditional-expectation densities.

    E_M(rho) represents tr(rho .) on M and lies in M; the relative entropy of
    the restricted functionals equals the Umegaki entropy of these densities.
    """
    a = check_density(rho_psi)
    b = check_density(rho_phi)
    Ea = check_density(conditional_expectation(M, a))
    Eb = check_density(conditional_expectation(M, b))
    return umegaki(Ea, Eb)


def uhlmann_limit(rho_psi, rho_phi, t_list=DEFAULT_T) -> np.ndarray:
    """F(t) = -(||Delta^{t/2} Psi||^2 - ||Psi||^2) / t for each t.

    F is non-decreasing as t decreases and tends to S(psi, phi).
    """
    t = np.asarray(t_list, dtype=float)
    if t.ndim != 1 or t.size == 0 or np.any(t <= 0) or np.any(t > 1):
        raise ValueError("t_list must be a non-empty list in (0, 1]")
    if np.any(np.diff(t) >= 0):
        raise ValueError("t_list must be strictly decreasing")
    a = check_density(rho_psi, normalized=False)
    b = check_density(rho_phi, normalized=False)
    if not support_condition(a, b):
        raise PreconditionError("support condition fails; the limit diverges")
    spec = modular_spectrum(a, b)
    # sum w (lambda^t - 1) including leaked weight (lambda^t = 0 off support)
    vals = np.array([np.sum(spec.weight * np.expm1(s * spec.log_ratio)) - spec.leaked_weight
                     for s in t])
    return -vals / t


def uhlmann_dense(rho_psi, rho_phi, t: float) -> float:
    """F(t) from the assembled Delta^{t/2} acting on vec(Psi)."""
    a = check_density(rho_psi, normalized=False)
    b = check_density(rho_phi, normalized=False)
    Psi = vec(sqrtm_psd(a))
    D = relative_modular(b, a, normalized=False).power(t / 2)
    return float(-(np.linalg.norm(D @ Psi) ** 2 - np.linalg.norm(Psi) ** 2) / t)


def entropy_lower_bound(rho_psi, rho_phi) -> float:
    """-psi(1) ln(phi(s(psi)) / psi(1))."""
    a = check_density(rho_psi, normalized=False)
    b = check_density(rho_phi, normalized=False)
    m = np.trace(a).real
    return float(-m * np.log(np.trace(b @ range_projection(a)).real / m))


def center_bound(rho_psi, rho_phi, A) -> float:
    """psi(A) - ln phi(e^A) for self-adjoint A."""
    a = check_density(rho_psi)
    b = check_density(rho_phi)
    return float(np.trace(a @ A).real - np.log(np.trace(b @ expm_hermitian(A)).real))
