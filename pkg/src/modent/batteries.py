"""Seeded property batteries behind ``modent suite``.

Each property maps (rng, trial index) to a margin; a trial passes when
margin >= -tol.  Residual checks report margin = -residual, inequality
checks report the raw slack.  Trial k always draws from trial_rng(seed, k),
so any single trial can be replayed in isolation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import algebra, bogoliubov, entropy, kms, modular, monotone
from .sampling import (random_commuting_pair, random_density, random_hermitian, random_psd,
                       random_contraction, random_kraus_unital, trial_rng)


@dataclass(frozen=True)
class Property:
    module: str
    name: str
    fn: Callable[[np.random.Generator, int], float]
    tol: float
    max_trials: int | None = None

    @property
    def key(self) -> str:
        return f"{self.module}.{self.name}"


@dataclass
class PropertyResult:
    module: str
    name: str
    trials: int
    worst_margin: float
    passed: bool
    failures: list = field(default_factory=list)


def run_property(prop: Property, seed: int, trials: int, only_trial: int | None = None,
                 inject_bug: bool = False) -> PropertyResult:
    n = trials if prop.max_trials is None else min(trials, prop.max_trials)
    idx = [only_trial] if only_trial is not None else list(range(n))
    worst = np.inf
    failures = []
    for k in idx:
        m = float(prop.fn(trial_rng(seed, k), k))
        if inject_bug and prop.key == INJECT_TARGET:
            m = -m - 1.0
        worst = min(worst, m)
        if not m >= -prop.tol:
            failures.append(k)
    return PropertyResult(prop.module, prop.name, len(idx), float(worst), not failures, failures)


# --- entropy ----------------------------------------------------------------------

def _dim(rng, lo, hi) -> int:
    return int(rng.integers(lo, hi + 1))


def p_araki_umegaki(rng, k):
    n = _dim(rng, 2, 8)
    a, b = random_density(n, rng), random_density(n, rng)
    s1 = entropy.araki_spectral(a, b).value
    s2 = entropy.umegaki(a, b).value
    return -abs(s1 - s2) / (1 + abs(s2))


def p_kl_commuting(rng, k):
    n = _dim(rng, 2, 8)
    a, b = random_commuting_pair(n, rng)
    # pair the spectra through the common eigenbasis
    w, U = np.linalg.eigh(a)
    pb = np.real(np.diag(U.conj().T @ b @ U))
    return -abs(entropy.araki_spectral(a, b).value - entropy.kl_divergence(w, pb / pb.sum()).value)


def p_nonnegativity(rng, k):
    n = _dim(rng, 2, 8)
    return entropy.araki_spectral(random_density(n, rng), random_density(n, rng)).value


def p_uhlmann_monotone(rng, k):
    n = _dim(rng, 2, 6)
    F = entropy.uhlmann_limit(random_density(n, rng), random_density(n, rng))
    return float(np.min(np.diff(F)))


def p_uhlmann_limit(rng, k):
    n = _dim(rng, 2, 6)
    a, b = random_density(n, rng), random_density(n, rng)
    F = entropy.uhlmann_limit(a, b)
    return -abs(F[-1] - entropy.araki_spectral(a, b).value)


# --- algebra / modular ----------------------------------------------------------------

def p_bicommutant(rng, k):
    M = algebra.random_algebra(_dim(rng, 2, 6), rng)
    rep = algebra.bicommutant_check(M)
    return -rep.subspace_angle if rep.dim_M == rep.dim_Mcc else -1.0


def p_tomita_polar(rng, k):
    n = _dim(rng, 2, 5)
    md = modular.modular_data(random_density(n, rng))
    D_half = md.delta_power(0.5)
    worst = 0.0
    for _ in range(5):
        A = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        lhs = md.J(D_half @ modular.vec(A @ md.Omega))
        rhs = modular.vec(A.conj().T @ md.Omega)
        worst = max(worst, float(np.linalg.norm(lhs - rhs)) / (1 + np.linalg.norm(A)))
    return -worst


def p_modular_invariants(rng, k):
    md = modular.modular_data(random_density(_dim(rng, 2, 5), rng))
    return -max(md.invariant_residuals().values())


# --- monotone -----------------------------------------------------------------------

def p_dpi(rng, k):
    fam = monotone.DPI_FAMILIES[k % len(monotone.DPI_FAMILIES)]
    rho, sigma, alpha = monotone.random_dpi_instance(fam, _dim(rng, 2, 6), rng)
    return monotone.monotonicity_report(rho, sigma, alpha).margin


def p_unitary_invariance(rng, k):
    rho, sigma, alpha = monotone.random_dpi_instance("unitary", _dim(rng, 2, 6), rng)
    return -abs(monotone.monotonicity_report(rho, sigma, alpha).margin)


def p_schwarz(rng, k):
    n_in, n_out = _dim(rng, 2, 4), _dim(rng, 2, 4)
    n_ops = max(int(rng.integers(1, 4)), -(-n_out // n_in))
    alpha = monotone.kraus_map(random_kraus_unital(n_in, n_out, n_ops, rng))
    return monotone.schwarz_check(alpha, trials=5, seed=int(rng.integers(2 ** 31))).min_eig_worst


def p_operator_inequalities(rng, k):
    n = _dim(rng, 2, 6)
    B = random_psd(n, rng) / n
    A = B + random_psd(n, rng, rank=int(rng.integers(1, n + 1))) / n
    K = random_contraction(n, rng)
    C = random_psd(n, rng) / n
    A1, A2, T = monotone.interpolation_instance(_dim(rng, 2, 6), n, rng)
    return min(min(monotone.loewner_heinz_margin(A, B, t), monotone.hjp_margin(C, K, t),
                   monotone.interpolation_margin(A1, A2, T, t)) for t in monotone.T_VALUES)


# --- kms ------------------------------------------------------------------------

def _unit_hamiltonian(n, rng):
    H = random_hermitian(n, rng)
    return H / np.linalg.norm(H, 2)


def _system(rng, lo=1, hi=5):
    n = _dim(rng, lo, hi)
    return kms.gibbs_state(_unit_hamiltonian(n, rng), rng.uniform(0.1, 5.0))


def p_kms_boundary(rng, k):
    sys = _system(rng)
    return -kms.kms_boundary_check(sys, trials=10, seed=int(rng.integers(2 ** 31))).max_residual


def p_modular_flow(rng, k):
    return -kms.modular_flow_residual(_system(rng))[1]


def p_perturbation_identities(rng, k):
    sys = _system(rng, 2, 4)
    V = random_hermitian(sys.n, rng, scale=0.5)
    pr = kms.perturb_state(sys, V, check=False)
    rep = kms.perturbation_entropy_report(sys, V)
    return -max(pr.dual_path_residual, pr.gibbs_residual, *rep.identities_residual.values())


def p_golden_thompson(rng, k):
    sys = _system(rng)
    return kms.golden_thompson_peierls_report(sys, random_hermitian(sys.n, rng)).gt_slack


def p_peierls_bogoliubov(rng, k):
    sys = _system(rng)
    return kms.golden_thompson_peierls_report(sys, random_hermitian(sys.n, rng)).pb_slack


TROTTER_A = np.array([[1.0, 0.0], [0.0, -1.0]])
TROTTER_B = np.array([[0.0, 1.0], [1.0, 0.0]])


def p_trotter(rng, k):
    rep = kms.trotter_check(TROTTER_A, TROTTER_B, 1.0, (16, 32, 64))
    lo, hi = rep.band
    return min(min(r - lo, hi - r) for r in rep.ratios)


# --- bogoliubov ------------------------------------------------------------------

def p_sandwich(rng, k):
    rep = bogoliubov.bogoliubov_report(bogoliubov.random_partitioned_system(rng))
    return min(rep.margins.values())


def p_free_energy_paths(rng, k):
    return -bogoliubov.free_energy_paths(bogoliubov.random_partitioned_system(rng)).spread


def p_proof_identities(rng, k):
    rep = bogoliubov.bogoliubov_report(bogoliubov.random_partitioned_system(rng))
    return -max(rep.identity_residuals.values())


def p_dv_upper(rng, k):
    sys = bogoliubov.random_partitioned_system(rng, max_dim=8)
    rep = bogoliubov.donsker_varadhan_sup(sys, bogoliubov.DVConfig(grid=11))
    return rep.delta_F - rep.max_value


PROPERTIES = (
    Property("entropy", "araki_vs_umegaki", p_araki_umegaki, 1e-8),
    Property("entropy", "kl_commuting", p_kl_commuting, 1e-10),
    Property("entropy", "nonnegativity", p_nonnegativity, 1e-12),
    Property("entropy", "uhlmann_monotone", p_uhlmann_monotone, 1e-9),
    Property("entropy", "uhlmann_limit", p_uhlmann_limit, 1e-3),
    Property("algebra", "bicommutant", p_bicommutant, 1e-8),
    Property("modular", "tomita_polar", p_tomita_polar, 1e-8),
    Property("modular", "modular_invariants", p_modular_invariants, 1e-8),
    Property("monotone", "dpi", p_dpi, 1e-8),
    Property("monotone", "unitary_invariance", p_unitary_invariance, 1e-8),
    Property("monotone", "schwarz_unital_cp", p_schwarz, 1e-8),
    Property("monotone", "operator_inequalities", p_operator_inequalities, 1e-8),
    Property("kms", "kms_boundary", p_kms_boundary, 1e-9),
    Property("kms", "modular_flow", p_modular_flow, 1e-7),
    Property("kms", "perturbation_identities", p_perturbation_identities, 1e-7),
    Property("kms", "golden_thompson", p_golden_thompson, 1e-9),
    Property("kms", "peierls_bogoliubov", p_peierls_bogoliubov, 1e-9),
    Property("kms", "trotter_ratio", p_trotter, 0.0, max_trials=1),
    Property("bogoliubov", "sandwich", p_sandwich, 1e-8),
    Property("bogoliubov", "free_energy_paths", p_free_energy_paths, 1e-8),
    Property("bogoliubov", "proof_identities", p_proof_identities, 1e-8),
    Property("bogoliubov", "dv_upper_bound", p_dv_upper, 1e-8),
)

INJECT_TARGET = "monotone.dpi"


def select(only: str | None = None) -> tuple[Property, ...]:
    if not only:
        return PROPERTIES
    keys = set(only.split(","))
    chosen = tuple(p for p in PROPERTIES if p.key in keys or p.module in keys)
    if not chosen:
        raise KeyError(f"no property matches {only!r}")
    return chosen
