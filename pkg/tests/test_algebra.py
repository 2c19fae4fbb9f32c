import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from modent.algebra import (bicommutant_check, block_diagonal_algebra, center, commutant,
                            conditional_expectation, cyclic_separating_report, diagonal_algebra,
                            full_algebra, generate_star_algebra, is_subalgebra, random_algebra,
                            scalar_algebra, subspace_angle, support_projection_in)
from modent.sampling import random_density, random_hermitian, random_psd, random_unit_vector
from tests.strategies import rng_from, seeds

PX = np.array([[0, 1], [1, 0]], dtype=complex)
PZ = np.diag([1.0, -1.0]).astype(complex)


def test_generate_examples():
    assert generate_star_algebra([], 3).dim == 1
    D = generate_star_algebra([np.diag([1.0, 2.0])], 2)
    assert D.dim == 2 and subspace_angle(D, diagonal_algebra(2)) <= 1e-10
    assert generate_star_algebra([PX, PZ], 2).dim == 4


def test_generator_shape_checked():
    with pytest.raises(ValueError):
        generate_star_algebra([np.eye(3)], 2)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_commutant_examples(n):
    assert commutant(full_algebra(n)).dim == 1
    assert commutant(scalar_algebra(n)).dim == n * n
    D = diagonal_algebra(n)
    assert subspace_angle(commutant(D), D) <= 1e-10


def test_bicommutant_examples():
    r = bicommutant_check(full_algebra(2))
    assert (r.dim_M, r.dim_Mcc) == (4, 4) and r.subspace_angle <= 1e-10
    assert bicommutant_check(diagonal_algebra(3)).passed
    H = np.diag([0.1, 0.7, 1.9])
    assert bicommutant_check(generate_star_algebra([H], 3)).passed


def test_conditional_expectation_examples():
    rng = rng_from(0)
    Xm = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    assert np.allclose(conditional_expectation(diagonal_algebra(3), Xm), np.diag(np.diag(Xm)))
    B = block_diagonal_algebra([1, 2])
    Y = np.einsum("k,kij->ij", rng.standard_normal(B.dim), B.basis)
    assert np.linalg.norm(conditional_expectation(B, Y) - Y) <= 1e-10


def test_support_examples():
    rho = random_density(3, rng_from(1))
    assert np.allclose(support_projection_in(full_algebra(3), rho).projection, np.eye(3), atol=1e-10)
    r = support_projection_in(diagonal_algebra(2), np.diag([1.0, 0.0]))
    assert np.allclose(r.projection, np.diag([1.0, 0.0])) and r.minimal
    assert np.allclose(support_projection_in(scalar_algebra(3), np.diag([1.0, 0, 0])).projection, np.eye(3))


def test_center_examples():
    assert center(full_algebra(3)).dim == 1
    assert center(diagonal_algebra(3)).dim == 3
    Z = center(block_diagonal_algebra([2, 2]))
    assert Z.dim == 2
    P = np.diag([1.0, 1, 0, 0])
    assert Z.contains(P) and Z.contains(np.eye(4) - P)


def test_cyclic_separating_examples():
    xi = random_unit_vector(3, rng_from(2))
    r = cyclic_separating_report(full_algebra(3), xi)
    assert r.cyclic and not r.separating
    r = cyclic_separating_report(scalar_algebra(3), xi)
    assert not r.cyclic and r.separating
    r = cyclic_separating_report(diagonal_algebra(2), np.ones(2) / np.sqrt(2))
    assert r.cyclic and r.separating
    with pytest.raises(ValueError):
        cyclic_separating_report(full_algebra(2), np.zeros(2))


@given(seeds, st.integers(2, 6))
def test_bicommutant_property(seed, n):
    M = random_algebra(n, rng_from(seed))
    assert M.is_valid()
    assert bicommutant_check(M).passed


@given(seeds, st.integers(2, 5))
def test_commutant_order_reversing(seed, n):
    rng = rng_from(seed)
    M2 = random_algebra(n, rng)
    # a subalgebra: generated by one element of M2
    c = rng.standard_normal(M2.dim)
    M1 = generate_star_algebra([np.einsum("k,kij->ij", c, M2.basis)], n)
    assert is_subalgebra(M1, M2, 1e-9)
    assert is_subalgebra(commutant(M2), commutant(M1), 1e-9)


@given(seeds, st.integers(2, 5))
def test_conditional_expectation_properties(seed, n):
    rng = rng_from(seed)
    M = random_algebra(n, rng)
    P = random_psd(n, rng)
    E = conditional_expectation(M, P)
    assert np.linalg.eigvalsh(0.5 * (E + E.conj().T))[0] >= -1e-10
    assert np.allclose(conditional_expectation(M, np.eye(n)), np.eye(n), atol=1e-10)
    assert abs(np.trace(E) - np.trace(P)) <= 1e-10 * (1 + abs(np.trace(P)))
    assert np.linalg.norm(conditional_expectation(M, E) - E) <= 1e-10 * (1 + np.linalg.norm(E))
    rho = random_density(n, rng)
    A = np.einsum("k,kij->ij", rng.standard_normal(M.dim) + 1j * rng.standard_normal(M.dim), M.basis)
    assert abs(np.trace(rho @ A) - np.trace(conditional_expectation(M, rho) @ A)) <= 1e-10


@given(seeds, st.integers(2, 5))
def test_cyclic_iff_separating_for_commutant(seed, n):
    rng = rng_from(seed)
    M = random_algebra(n, rng)
    xi = random_unit_vector(n, rng)
    if rng.random() < 0.5:
        # a vector supported on a proper subspace, often not cyclic
        xi[: n // 2] = 0
        xi /= np.linalg.norm(xi)
    r = cyclic_separating_report(M, xi)
    rc = cyclic_separating_report(commutant(M), xi)
    assert r.cyclic == rc.separating
    assert r.separating == rc.cyclic


@given(seeds, st.integers(2, 5))
def test_invariants_of_generated_algebra(seed, n):
    rng = rng_from(seed)
    M = generate_star_algebra([random_hermitian(n, rng)], n)
    assert M.is_valid()
    assert M.dim == n  # distinct eigenvalues: maximal abelian
