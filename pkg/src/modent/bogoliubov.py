"""Relative free energy of partitioned systems and the two-sided Bogoliubov inequality.

H = H0 + U with H0 a sum of local terms.  The relative free energy
Delta F = -beta^-1 ln(Z / Z0) is sandwiched as

    omega_U(U) <= Delta F <= omega_0(U),

and is both the infimum of the Gibbs variational functional
gamma -> tr(gamma U) + beta^-1 S(gamma, rho0) and the supremum of the
Donsker-Varadhan functional over positive perturbations V.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
import scipy.optimize

from .entropy import araki_spectral
from .kms import PERTURB_TOL, gibbs_state, log_partition, perturb_state
from .numkit import InvariantError, check_hermitian, dagger, eig_hermitian, expm_hermitian, min_eig
from .sampling import random_hermitian

MAX_DIM = 64
PATH_TOL = 1e-8
BOUND_TOL = 1e-8

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def embed_local(op, k: int, dims) -> np.ndarray:
    """I (x) ... (x) op (x) ... (x) I with op on factor k."""
    out = np.eye(1, dtype=complex)
    for j, d in enumerate(dims):
        out = np.kron(out, op if j == k else np.eye(d))
    return out


@dataclass(frozen=True)
class PartitionedSystem:
    block_hamiltonians: tuple
    coupling: np.ndarray
    beta: float
    dims: tuple
    H0: np.ndarray
    H: np.ndarray
    log_Z: float
    log_Z0: float

    @property
    def n(self) -> int:
        return self.H.shape[0]

    @property
    def Z(self) -> float:
        return float(np.exp(self.log_Z))

    @property
    def Z0(self) -> float:
        return float(np.exp(self.log_Z0))

    @property
    def rho(self) -> np.ndarray:
        return gibbs_state(self.H, self.beta).rho_beta

    @property
    def rho0(self) -> np.ndarray:
        return gibbs_state(self.H0, self.beta).rho_beta


def assemble(blocks, U, beta: float) -> PartitionedSystem:
    blocks = tuple(check_hermitian(b) for b in blocks)
    dims = tuple(b.shape[0] for b in blocks)
    n = int(np.prod(dims))
    if n > MAX_DIM:
        raise InvariantError(f"total dimension {n} exceeds {MAX_DIM}")
    if not np.isfinite(beta) or beta <= 0:
        raise InvariantError(f"beta must be positive, got {beta}")
    U = check_hermitian(U)
    if U.shape != (n, n):
        raise InvariantError(f"coupling has shape {U.shape}, expected {(n, n)}")
    H0 = sum(embed_local(b, k, dims) for k, b in enumerate(blocks))
    H = H0 + U
    return PartitionedSystem(blocks, U, float(beta), dims, H0, H,
                             log_partition(H, beta), log_partition(H0, beta))


@dataclass
class ModelSpec:
    """Builder name plus parameters for ``build_partitioned_model``."""

    name: str = "ising2"
    beta: float = 1.0
    sites: int = 2
    field: float = 1.0
    coupling: float = 0.5
    energies: tuple = (1.0, 1.5)
    blocks: tuple = ()
    U: np.ndarray | None = None


def ising_chain(sites: int, h: float, J: float, beta: float) -> PartitionedSystem:
    """Local terms -h X on each site, coupling J sum Z_i Z_{i+1}."""
    dims = (2,) * sites
    U = sum(J * embed_local(PAULI_Z, i, dims) @ embed_local(PAULI_Z, i + 1, dims)
            for i in range(sites - 1)) if sites > 1 else np.zeros((2, 2))
    return assemble([-h * PAULI_X] * sites, U, beta)


def build_partitioned_model(spec: ModelSpec) -> PartitionedSystem:
    name = spec.name
    if name == "ising_chain":
        if 2 ** spec.sites > MAX_DIM:
            raise InvariantError(f"total dimension {2 ** spec.sites} exceeds {MAX_DIM}")
        return ising_chain(spec.sites, spec.field, spec.coupling, spec.beta)
    if name == "ising2":
        return ising_chain(2, spec.field, spec.coupling, spec.beta)
    if name == "two_level_pair":
        e1, e2 = spec.energies
        U = spec.coupling * np.kron(PAULI_X, PAULI_X)
        return assemble([np.diag([0.0, e1]), np.diag([0.0, e2])], U, spec.beta)
    if name == "heisenberg_pair":
        U = spec.coupling * sum(np.kron(P, P) for P in (PAULI_X, PAULI_Y, PAULI_Z))
        return assemble([-spec.field * PAULI_Z] * 2, U, spec.beta)
    if name == "uncoupled":
        return assemble([-spec.field * PAULI_X] * 2, np.zeros((4, 4)), spec.beta)
    if name == "custom":
        if spec.U is None or not spec.blocks:
            raise InvariantError("custom model needs blocks and U")
        return assemble(spec.blocks, spec.U, spec.beta)
    raise InvariantError(f"unknown model builder {name!r}")


def random_partitioned_system(rng: np.random.Generator, max_dim: int = 16,
                              beta_range=(0.1, 5.0)) -> PartitionedSystem:
    layouts = [d for d in ((2, 2), (2, 3), (3, 3), (2, 2, 2), (2, 4), (4, 4), (2, 2, 2, 2), (2, 8))
               if np.prod(d) <= max_dim]
    dims = layouts[rng.integers(len(layouts))]
    n = int(np.prod(dims))
    blocks = [random_hermitian(d, rng, scale=1.0 / np.sqrt(d)) for d in dims]
    U = random_hermitian(n, rng, scale=rng.uniform(0.1, 1.0) / np.sqrt(n))
    return assemble(blocks, U, rng.uniform(*beta_range))


# --- free energy ---------------------------------------------------------------------

def gibbs_relative_entropy(sys_a, sys_b) -> float:
    """S(rho_a, rho_b) for Gibbs states, using the exact logs -beta H - ln Z.

    Stays finite when beta * spread(H) pushes eigenvalues below the rank
    threshold, where the generic spectral routine would report +inf.
    """
    n = sys_a.n
    log_a = -sys_a.beta * sys_a.H - sys_a.log_Z * np.eye(n)
    log_b = -sys_b.beta * sys_b.H - sys_b.log_Z * np.eye(n)
    return float(np.trace(sys_a.rho_beta @ (log_a - log_b)).real)


def _entropy(sys_a, sys_b) -> float:
    e = araki_spectral(sys_a.rho_beta, sys_b.rho_beta)
    if e.is_infinite or e.warning:
        return gibbs_relative_entropy(sys_a, sys_b)
    return e.value


@dataclass(frozen=True)
class FreeEnergyPaths:
    partition: float
    perturbed_vector: float
    entropy: float
    vector_route: str = "expm"

    @property
    def spread(self) -> float:
        v = (self.partition, self.perturbed_vector, self.entropy)
        return max(v) - min(v)


def free_energy_paths(sys: PartitionedSystem) -> FreeEnergyPaths:
    beta = sys.beta
    dF_i = -(sys.log_Z - sys.log_Z0) / beta
    sys0 = gibbs_state(sys.H0, beta)
    pr = perturb_state(sys0, sys.coupling, check=False)
    # ||Omega_U||^2 from the dense generator exponential; that route loses
    # precision like e^{beta spread}, so fall back to the closed-form vector
    if pr.dual_path_residual <= PERTURB_TOL:
        route, nsq = "expm", pr.norm_sq_expm
    else:
        route, nsq = "closed_form", float(np.linalg.norm(pr.Omega_V) ** 2)
    dF_ii = -np.log(nsq) / beta
    rho = pr.omega_V
    S = _entropy(gibbs_state(sys.H, beta), sys0)
    dF_iii = float(np.trace(rho @ sys.coupling).real) + S / beta
    return FreeEnergyPaths(float(dF_i), float(dF_ii), float(dF_iii), route)


def relative_free_energy(sys: PartitionedSystem, tol: float = PATH_TOL) -> float:
    """Delta F = -beta^-1 ln(Z/Z0), cross-checked against two other routes."""
    p = free_energy_paths(sys)
    if p.spread > tol * (1 + abs(p.partition)):
        raise InvariantError(f"free-energy paths disagree by {p.spread:.3e}")
    return p.partition + 0.0  # no negative zero


@dataclass(frozen=True)
class BogoliubovReport:
    lower: float
    delta_F: float
    upper: float
    gt_lower: float
    S_0_rho: float
    S_rho_0: float
    identity_residuals: dict
    tol: float = BOUND_TOL

    @property
    def margins(self) -> dict:
        return {"lower": self.delta_F - self.lower,
                "upper": self.upper - self.delta_F,
                "gt_lower": self.delta_F - self.gt_lower}

    @property
    def passed(self) -> bool:
        return (all(m >= -self.tol for m in self.margins.values())
                and all(r <= self.tol for r in self.identity_residuals.values()))


def bogoliubov_report(sys: PartitionedSystem) -> BogoliubovReport:
    beta = sys.beta
    dF = relative_free_energy(sys)
    g, g0 = gibbs_state(sys.H, beta), gibbs_state(sys.H0, beta)
    rho, rho0 = g.rho_beta, g0.rho_beta
    U = sys.coupling
    lower = float(np.trace(rho @ U).real)
    upper = float(np.trace(rho0 @ U).real)
    gt_lower = float(-np.log(np.trace(rho0 @ expm_hermitian(U, -beta)).real) / beta)
    s0 = _entropy(g0, g)
    s1 = _entropy(g, g0)
    res = {"S_0_rho": abs(s0 - (beta * upper - beta * dF)),
           "S_rho_0": abs(s1 - (-beta * lower + beta * dF))}
    return BogoliubovReport(lower, dF, upper, gt_lower, float(s0), float(s1), res)


# --- Gibbs variational principle -----------------------------------------------------------

@dataclass
class VariationalConfig:
    init: str = "cold"          # cold: A = 0, warm: A = -beta H, random
    max_iter: int = 5000
    conv_tol: float = 1e-4
    grad_tol: float = 1e-7
    gradient: str = "analytic"  # or "fd"
    fd_step: float = 1e-5
    fd_check_tol: float = 1e-4
    armijo: float = 1e-4
    seed: int = 0
    time_limit: float = 60.0


@dataclass
class VariationalReport:
    best_value: float
    best_state: np.ndarray
    trajectory: list
    delta_F: float
    iterations: int
    status: str
    fd_mismatch: float
    min_gap: float
    elapsed: float = 0.0
    conv_tol: float = 1e-4
    extra: dict = field(default_factory=dict)

    @property
    def gap(self) -> float:
        return self.best_value - self.delta_F

    @property
    def converged(self) -> bool:
        return self.status != "gradient_mismatch" and self.gap <= self.conv_tol


def _gibbs_objective(A, H, beta: float, log_Z0: float):
    """Value, state and gradient of f(A) = tr(gamma U) + beta^-1 S(gamma, rho0)."""
    d = eig_hermitian(A)
    a = d.eigenvalues
    W = d.eigenvectors
    amax = a[-1]
    ea = np.exp(a - amax)
    Zs = ea.sum()
    p = ea / Zs
    gamma = (W * p) @ dagger(W)
    log_tr = amax + np.log(Zs)
    K = (A + beta * H) / beta
    Kt = dagger(W) @ K @ W
    trgK = float(np.sum(p * np.diag(Kt).real))
    value = (beta * trgK - log_tr + log_Z0) / beta
    # divided differences of exp in the eigenbasis of A (scaled by e^{-amax}/Zs)
    da = a[:, None] - a[None, :]
    same = np.abs(da) < 1e-12
    with np.errstate(divide="ignore", invalid="ignore"):
        dd = np.where(same, 0.5 * (ea[:, None] + ea[None, :]),
                      (ea[:, None] - ea[None, :]) / np.where(same, 1.0, da))
    G = W @ (Kt * dd / Zs) @ dagger(W) - trgK * gamma
    G = 0.5 * (G + dagger(G))
    return float(value), gamma, G


def _fd_gradient(A, H, beta, log_Z0, h):
    n = A.shape[0]
    G = np.zeros((n, n), dtype=complex)
    for i in range(n):
        for j in range(i, n):
            for phase in ((1.0,) if i == j else (1.0, 1j)):
                X = np.zeros((n, n), dtype=complex)
                X[i, j] = phase
                X[j, i] = np.conj(phase)
                fp = _gibbs_objective(A + h * X, H, beta, log_Z0)[0]
                fm = _gibbs_objective(A - h * X, H, beta, log_Z0)[0]
                dirder = (fp - fm) / (2 * h)
                # <G, X> = 2 Re(conj(G_ij) phase) off-diagonal, G_ii on the diagonal
                if i == j:
                    G[i, i] += dirder
                elif phase == 1.0:
                    G[i, j] += dirder / 2
                    G[j, i] += dirder / 2
                else:
                    G[i, j] += 1j * dirder / 2
                    G[j, i] += -1j * dirder / 2
    return G


def gradient_mismatch(A, H, beta: float, log_Z0: float, rng, h: float = 1e-5) -> float:
    """Relative mismatch of analytic vs central-difference directional derivatives."""
    n = A.shape[0]
    worst = 0.0
    _, _, G = _gibbs_objective(A, H, beta, log_Z0)
    gnorm = np.linalg.norm(G)
    for _ in range(3):
        X = random_hermitian(n, rng)
        X /= np.linalg.norm(X)
        fp = _gibbs_objective(A + h * X, H, beta, log_Z0)[0]
        fm = _gibbs_objective(A - h * X, H, beta, log_Z0)[0]
        fd = (fp - fm) / (2 * h)
        an = float(np.vdot(G, X).real)
        worst = max(worst, abs(fd - an) / max(abs(an), gnorm, 1e-3))
    return worst


def gibbs_variational_inf(sys: PartitionedSystem, config: VariationalConfig | None = None) -> VariationalReport:
    """Minimize tr(gamma U) + beta^-1 S(gamma, rho0) over gamma = e^A / tr e^A.

    Gradient descent in the Hilbert-Schmidt metric; Barzilai-Borwein trial
    steps, then Armijo backtracking, so the values decrease monotonically.
    Every iterate is a faithful state, so its value is an upper bound on Delta F.
    """
    cfg = config or VariationalConfig()
    beta, H, n = sys.beta, sys.H, sys.n
    dF = relative_free_energy(sys)
    rng = np.random.default_rng(cfg.seed)
    if cfg.init == "cold":
        A = np.zeros((n, n), dtype=complex)
    elif cfg.init == "warm":
        A = -beta * H.astype(complex)
    elif cfg.init == "random":
        A = random_hermitian(n, rng)
    else:
        raise ValueError(f"unknown init {cfg.init!r}")
    t0 = time.perf_counter()
    mismatch = gradient_mismatch(A, H, beta, sys.log_Z0, rng, cfg.fd_step)
    if mismatch > cfg.fd_check_tol:
        f0, g0, _ = _gibbs_objective(A, H, beta, sys.log_Z0)
        return VariationalReport(f0, g0, [f0], dF, 0, "gradient_mismatch", mismatch,
                                 f0 - dF, 0.0, cfg.conv_tol)

    def grad(A):
        f, g, G = _gibbs_objective(A, H, beta, sys.log_Z0)
        if cfg.gradient == "fd":
            G = _fd_gradient(A, H, beta, sys.log_Z0, cfg.fd_step)
        return f, g, G

    f, gamma, G = grad(A)
    traj = [f]
    step = 1.0
    status = "max_iter"
    it = 0
    for it in range(1, cfg.max_iter + 1):
        g2 = float(np.vdot(G, G).real)
        if np.sqrt(g2) <= cfg.grad_tol:
            status = "converged"
            it -= 1
            break
        if time.perf_counter() - t0 > cfg.time_limit:
            status = "time_limit"
            break
        while True:
            A_new = A - step * G
            f_new, gamma_new, G_new = grad(A_new)
            if f_new <= f - cfg.armijo * step * g2 or step < 1e-14:
                break
            step *= 0.5
        if f_new > f:
            status = "stalled"
            break
        # Barzilai-Borwein trial step for the next line search
        dA, dG = A_new - A, G_new - G
        curv = float(np.vdot(dA, dG).real)
        step = float(np.vdot(dA, dA).real) / curv if curv > 0 else 2.0 * step
        step = min(max(step, 1e-10), 1e6)
        A, f, gamma, G = A_new, f_new, gamma_new, G_new
        traj.append(f)
    end_mismatch = gradient_mismatch(A, H, beta, sys.log_Z0, rng, cfg.fd_step)
    mismatch = max(mismatch, end_mismatch)
    if mismatch > cfg.fd_check_tol:
        status = "gradient_mismatch"
    elapsed = time.perf_counter() - t0
    return VariationalReport(min(traj), gamma, traj, dF, it, status, mismatch,
                             float(min(traj) - dF), elapsed, cfg.conv_tol)


# --- Donsker-Varadhan principle ---------------------------------------------------------

@dataclass
class DVConfig:
    s_min: float = 0.0
    s_max: float = 2.0
    grid: int = 41
    refine_xtol: float = 1e-10


@dataclass
class DVReport:
    best_value: float
    best_s: float
    best_c: float
    best_V: np.ndarray
    value_at_s1: float
    trajectory: list
    delta_F: float

    @property
    def max_value(self) -> float:
        return max(v for _, _, v in self.trajectory)


def dv_value(sys: PartitionedSystem, V) -> float:
    """E_rho[U - V] - beta^-1 ln tr exp(ln rho0 - beta V)."""
    beta = sys.beta
    log_rho0 = -beta * sys.H0 - sys.log_Z0 * np.eye(sys.n)
    X = log_rho0 - beta * np.asarray(V)
    lam = eig_hermitian(X).eigenvalues
    lmax = lam[-1]
    log_tr = lmax + np.log(np.sum(np.exp(lam - lmax)))
    rho = sys.rho
    return float(np.trace(rho @ (sys.coupling - V)).real - log_tr / beta)


def admissible_shift(sys: PartitionedSystem, s: float) -> float:
    """Smallest c >= 0 with s U + c I >= 0."""
    return max(0.0, -s * min_eig(sys.coupling))


def donsker_varadhan_sup(sys: PartitionedSystem, config: DVConfig | None = None) -> DVReport:
    """Maximize the DV functional over V = s U + c I >= 0: grid scan, then bounded refinement."""
    cfg = config or DVConfig()
    dF = relative_free_energy(sys)
    n = sys.n
    traj = []

    def evaluate(s: float) -> float:
        c = admissible_shift(sys, s)
        v = dv_value(sys, s * sys.coupling + c * np.eye(n))
        traj.append((float(s), float(c), v))
        return v

    grid = np.linspace(cfg.s_min, cfg.s_max, cfg.grid)
    vals = [evaluate(s) for s in grid]
    k = int(np.argmax(vals))
    lo = grid[max(k - 1, 0)]
    hi = grid[min(k + 1, len(grid) - 1)]
    if hi > lo:
        scipy.optimize.minimize_scalar(lambda s: -evaluate(s), bounds=(lo, hi), method="bounded",
                                       options={"xatol": cfg.refine_xtol})
    v1 = evaluate(1.0)
    s_best, c_best, v_best = max(traj, key=lambda r: r[2])
    V_best = s_best * sys.coupling + c_best * np.eye(n)
    return DVReport(v_best, s_best, c_best, V_best, v1, traj, dF)
