import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from modent.algebra import block_diagonal_algebra, diagonal_algebra, full_algebra, random_algebra
from modent.modular import (PreconditionError, StandardFormRep, check_density, conjugate_by_j,
                            gns_vector, j_action, left_algebra_residual, left_mult, modular_data,
                            relative_modular, relative_modular_vectors, right_mult, tomita_operator_action, unvec, vec,
                            verify_tomita)
from modent.numkit import InvariantError
from modent.sampling import random_density, random_psd, random_unitary
from tests.strategies import rng_from, seeds


def test_vec_conventions():
    rng = rng_from(0)
    A, B, Xm = (rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3)) for _ in range(3))
    assert np.allclose(left_mult(A) @ vec(Xm), vec(A @ Xm))
    assert np.allclose(right_mult(B) @ vec(Xm), vec(Xm @ B))
    assert np.allclose(unvec(vec(Xm), 3), Xm)
    assert np.allclose(j_action(vec(Xm), 3), vec(Xm.conj().T))
    # J L(A) J = R(A^+)
    assert np.allclose(conjugate_by_j(left_mult(A), 3), right_mult(A.conj().T))
    assert left_algebra_residual(left_mult(A), 3) <= 1e-12
    assert left_algebra_residual(right_mult(A), 3) > 1e-3


def test_density_validation():
    with pytest.raises(InvariantError):
        check_density(np.diag([1.2, -0.2]))
    with pytest.raises(InvariantError):
        check_density(np.diag([0.5, 0.6]))
    assert check_density(np.diag([2.0, 1.0]), normalized=False).shape == (2, 2)


def test_gns_examples():
    assert np.allclose(gns_vector(np.eye(3) / 3), np.eye(3) / np.sqrt(3))
    assert np.allclose(gns_vector(np.diag([0.75, 0.25])), np.diag([np.sqrt(3) / 2, 0.5]))
    rho = random_density(4, rng_from(1))
    O = gns_vector(rho)
    assert np.linalg.norm(O @ O - rho) <= 1e-10
    assert StandardFormRep(4).in_cone(vec(O))


def test_tomita_action_examples():
    O = gns_vector(random_density(3, rng_from(2)))
    assert np.allclose(tomita_operator_action(np.eye(3), O), O)
    U = random_unitary(3, rng_from(3))
    assert np.allclose(tomita_operator_action(U, np.eye(3) / np.sqrt(3)), U.conj().T / np.sqrt(3))


def test_modular_data_examples():
    md = modular_data(np.eye(3) / 3)
    assert np.allclose(md.Delta, np.eye(9), atol=1e-14)
    p = 0.3
    lam = np.sort(np.linalg.eigvals(modular_data(np.diag([p, 1 - p])).Delta).real)
    assert np.allclose(lam, np.sort([1, 1, p / (1 - p), (1 - p) / p]))
    with pytest.raises(PreconditionError):
        modular_data(np.diag([1.0, 0.0]))


def test_relative_modular_examples():
    rho = random_density(3, rng_from(4))
    assert np.allclose(relative_modular(rho, rho).Delta_rel, modular_data(rho).Delta, atol=1e-10)
    D = relative_modular(np.diag([1.0, 0.0]), np.eye(2) / 2).Delta_rel
    Xm = rng_from(5).standard_normal((2, 2))
    assert np.allclose(unvec(D @ vec(Xm), 2), 2 * np.diag([1.0, 0.0]) @ Xm)


def test_unitary_covariance():
    # U in the commutant image acts by right multiplication
    rng = rng_from(6)
    a, b = random_density(3, rng), random_density(3, rng)
    U = random_unitary(3, rng)
    Ur = right_mult(U)
    Phi, Psi = gns_vector(a), gns_vector(b)
    D = relative_modular_vectors(Phi, Psi)
    D_rot = relative_modular_vectors(Phi @ U, Psi @ U)
    assert np.allclose(D_rot, Ur @ D @ Ur.conj().T, atol=1e-10)


@pytest.mark.parametrize("M_factory,rho", [
    (lambda: full_algebra(2), np.array([[0.7, 0.2], [0.2, 0.3]])),
    (lambda: diagonal_algebra(3), np.diag([0.5, 0.3, 0.2])),
    (lambda: full_algebra(3), np.eye(3) / 3),
    (lambda: block_diagonal_algebra([1, 2]), None),
])
def test_verify_tomita_examples(M_factory, rho):
    if rho is None:
        rho = random_density(3, rng_from(7))
    rep = verify_tomita(M_factory(), rho)
    assert rep.passed, rep


def test_tracial_state_j_implements_commutant():
    md = modular_data(np.eye(2) / 2)
    A = rng_from(8).standard_normal((2, 2))
    JAJ = conjugate_by_j(left_mult(A), 2)
    assert np.allclose(JAJ, right_mult(A.conj().T))
    assert np.allclose(md.Delta, np.eye(4))


@given(seeds, st.integers(2, 6))
def test_polar_identity(seed, n):
    rng = rng_from(seed)
    md = modular_data(random_density(n, rng))
    D_half = md.delta_power(0.5)
    A = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    lhs = md.J(D_half @ vec(A @ md.Omega))
    assert np.linalg.norm(lhs - vec(A.conj().T @ md.Omega)) <= 1e-8 * (1 + np.linalg.norm(A))


@given(seeds, st.integers(2, 5))
def test_delta_inverse_is_j_delta_j(seed, n):
    md = modular_data(random_density(n, rng_from(seed)))
    res = md.invariant_residuals()
    assert max(res.values()) <= 1e-8


@given(seeds, st.integers(2, 5), st.sampled_from([0.3, 1.0, 1.7]))
def test_delta_it_preserves_cone(seed, n, t):
    rng = rng_from(seed)
    md = modular_data(random_density(n, rng))
    P = random_psd(n, rng)
    Y = unvec(md.delta_power(1j * t) @ vec(P), n)
    assert np.linalg.norm(Y - Y.conj().T) <= 1e-8 * np.linalg.norm(P)
    assert np.linalg.eigvalsh(0.5 * (Y + Y.conj().T))[0] >= -1e-8 * np.linalg.norm(P)


@given(seeds, st.integers(2, 5), st.floats(0.1, 5.0), st.floats(0.1, 5.0))
def test_relative_modular_scaling(seed, n, mu, lam):
    rng = rng_from(seed)
    a, b = random_density(n, rng), random_density(n, rng)
    D = relative_modular(a, b).Delta_rel
    Ds = relative_modular(mu * a, lam * b, normalized=False).Delta_rel
    assert np.max(np.abs(Ds - (mu / lam) * D)) <= 1e-12 * max(1.0, np.max(np.abs(Ds)))


@given(seeds, st.integers(2, 5))
def test_tomita_on_random_subalgebras(seed, n):
    rng = rng_from(seed)
    M = random_algebra(n, rng)
    assert verify_tomita(M, random_density(n, rng)).passed
