"""Seeded random instances: states, unitaries, contractions, channels."""

from __future__ import annotations

import numpy as np

from .numkit import dagger


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Independent stream for trial ``trial`` of a run seeded with ``seed``."""
    return np.random.default_rng([int(seed) & 0xFFFFFFFFFFFFFFFF, int(trial)])


def ginibre(n: int, m: int | None, rng: np.random.Generator) -> np.ndarray:
    m = n if m is None else m
    return (rng.standard_normal((n, m)) + 1j * rng.standard_normal((n, m))) / np.sqrt(2)


def random_hermitian(n: int, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    G = ginibre(n, n, rng)
    return scale * 0.5 * (G + dagger(G))


def random_psd(n: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    G = ginibre(n, n if rank is None else rank, rng)
    return G @ dagger(G)


def random_density(n: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """rho = G G^dagger / tr(G G^dagger) with complex Gaussian G."""
    P = random_psd(n, rng, rank)
    return P / np.trace(P).real


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    Q, R = np.linalg.qr(ginibre(n, n, rng))
    d = np.diag(R)
    return Q * (d / np.abs(d))


def random_isometry(n_out: int, n_in: int, rng: np.random.Generator) -> np.ndarray:
    """V with V^dagger V = I, shape (n_out, n_in)."""
    if n_out < n_in:
        raise ValueError("isometry needs n_out >= n_in")
    return random_unitary(n_out, rng)[:, :n_in]


def random_contraction(n: int, rng: np.random.Generator) -> np.ndarray:
    """Gaussian matrix with singular values clipped at 1."""
    U, s, Vh = np.linalg.svd(ginibre(n, n, rng))
    return (U * np.minimum(s, 1.0)) @ Vh


def random_unit_vector(n: int, rng: np.random.Generator) -> np.ndarray:
    v = ginibre(n, 1, rng)[:, 0]
    return v / np.linalg.norm(v)


def random_kraus_unital(n_in: int, n_out: int, n_ops: int,
                        rng: np.random.Generator) -> list[np.ndarray]:
    """Kraus operators K_i of shape (n_in, n_out) with sum K_i^dagger K_i = I_out."""
    V = random_isometry(n_in * n_ops, n_out, rng)
    return [V[i * n_in:(i + 1) * n_in, :] for i in range(n_ops)]


def random_commuting_pair(n: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Two faithful densities diagonal in one random eigenbasis."""
    U = random_unitary(n, rng)
    p = rng.dirichlet(np.ones(n))
    q = rng.dirichlet(np.ones(n))
    return (U * p) @ dagger(U), (U * q) @ dagger(U)
