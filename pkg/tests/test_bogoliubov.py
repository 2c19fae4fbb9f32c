import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from modent import bogoliubov as bg
from modent.bogoliubov import (DVConfig, ModelSpec, VariationalConfig, bogoliubov_report,
                               build_partitioned_model, donsker_varadhan_sup, dv_value,
                               free_energy_paths, gibbs_variational_inf, random_partitioned_system,
                               relative_free_energy)
from modent.kms import gibbs_state, perturbation_entropy_report
from modent.numkit import InvariantError
from tests.strategies import rng_from, seeds

PX = np.array([[0.0, 1.0], [1.0, 0.0]])
PZ = np.diag([1.0, -1.0])
I2 = np.eye(2)


def commuting_fixture(beta=1.3):
    h1, h2 = np.diag([0.0, 0.8]), np.diag([0.2, -0.5])
    u = np.array([0.3, -0.1, 0.5, 0.05])
    spec = ModelSpec(name="custom", beta=beta, blocks=(h1, h2), U=np.diag(u))
    h = np.add.outer(np.diag(h1), np.diag(h2)).ravel()
    dF = -np.log(np.sum(np.exp(-beta * (h + u))) / np.sum(np.exp(-beta * h))) / beta
    return build_partitioned_model(spec), dF


def test_uncoupled():
    sys = build_partitioned_model(ModelSpec(name="uncoupled"))
    assert abs(sys.Z - sys.Z0) <= 1e-12 * sys.Z
    assert relative_free_energy(sys) == 0.0
    rep = bogoliubov_report(sys)
    assert max(abs(rep.lower), abs(rep.delta_F), abs(rep.upper)) <= 1e-12


def test_ising_assembly():
    h, J = 0.9, 0.4
    sys = build_partitioned_model(ModelSpec(name="ising_chain", sites=2, field=h, coupling=J))
    H = -h * (np.kron(PX, I2) + np.kron(I2, PX)) + J * np.kron(PZ, PZ)
    assert np.allclose(sys.H, H) and np.allclose(sys.coupling, J * np.kron(PZ, PZ))
    assert abs(sys.Z - np.trace(gibbs_exp(H, sys.beta))) <= 1e-10 * sys.Z


def gibbs_exp(H, beta):
    lam, U = np.linalg.eigh(H)
    return (U * np.exp(-beta * lam)) @ U.conj().T


def test_builders_and_errors():
    for name in ("two_level_pair", "heisenberg_pair", "ising2"):
        assert build_partitioned_model(ModelSpec(name=name)).n == 4
    assert build_partitioned_model(ModelSpec(name="ising_chain", sites=6)).n == 64
    with pytest.raises(InvariantError):
        build_partitioned_model(ModelSpec(name="ising_chain", sites=7))
    with pytest.raises(InvariantError):
        build_partitioned_model(ModelSpec(name="nope"))
    with pytest.raises(InvariantError):
        build_partitioned_model(ModelSpec(name="ising2", beta=0.0))
    with pytest.raises(InvariantError):
        build_partitioned_model(ModelSpec(name="custom", blocks=(I2,), U=np.eye(3)))


def test_commuting_diagonal_analytic():
    sys, dF = commuting_fixture()
    assert abs(relative_free_energy(sys) - dF) <= 1e-10


def test_constant_coupling():
    c = 0.37
    sys = build_partitioned_model(ModelSpec(name="custom", beta=0.9, blocks=(PX, np.diag([0.0, 1.0])),
                                            U=c * np.eye(4)))
    rep = bogoliubov_report(sys)
    assert max(abs(rep.lower - c), abs(rep.delta_F - c), abs(rep.upper - c)) <= 1e-12


def test_ising_fixture_report():
    sys = build_partitioned_model(ModelSpec())
    rep = bogoliubov_report(sys)
    assert rep.passed
    assert rep.gt_lower <= rep.delta_F <= rep.upper


def test_low_temperature_paths():
    sys = build_partitioned_model(ModelSpec(name="ising2", beta=60.0))
    p = free_energy_paths(sys)
    assert p.vector_route == "closed_form" and p.spread <= 1e-8
    assert bogoliubov_report(sys).passed


def test_consistency_with_kms():
    sys = build_partitioned_model(ModelSpec(name="heisenberg_pair", beta=0.8, coupling=0.3))
    rep = bogoliubov_report(sys)
    pe = perturbation_entropy_report(gibbs_state(sys.H0, sys.beta), sys.coupling)
    assert abs(pe.S_fwd - rep.S_0_rho) <= 1e-10
    assert abs(pe.S_bwd - rep.S_rho_0) <= 1e-10
    beta = sys.beta
    assert abs(pe.S_fwd - beta * (rep.upper - rep.delta_F)) <= 1e-8
    assert abs(pe.S_bwd - beta * (rep.delta_F - rep.lower)) <= 1e-8


def test_gibbs_variational_warm_start():
    sys = build_partitioned_model(ModelSpec())
    r = gibbs_variational_inf(sys, VariationalConfig(init="warm"))
    assert abs(r.trajectory[0] - r.delta_F) <= 1e-9
    assert r.converged


def test_gibbs_variational_cold_start():
    sys = build_partitioned_model(ModelSpec())
    r = gibbs_variational_inf(sys, VariationalConfig(init="cold"))
    assert r.converged and r.gap <= 1e-4 and r.iterations <= 5000
    assert min(r.trajectory) - r.delta_F >= -1e-8
    assert np.all(np.diff(r.trajectory) <= 1e-15)
    assert abs(np.trace(r.best_state) - 1) <= 1e-12


def test_gibbs_variational_fd_gradient():
    sys = build_partitioned_model(ModelSpec(name="two_level_pair"))
    r = gibbs_variational_inf(sys, VariationalConfig(gradient="fd", max_iter=300))
    assert r.gap <= 1e-4


def test_gibbs_variational_deterministic():
    sys = build_partitioned_model(ModelSpec())
    cfg = VariationalConfig(init="random", seed=3)
    assert gibbs_variational_inf(sys, cfg).trajectory == gibbs_variational_inf(sys, cfg).trajectory


def test_gradient_mismatch_fails_run(monkeypatch):
    real = bg._gibbs_objective

    def broken(A, H, beta, log_Z0):
        f, g, G = real(A, H, beta, log_Z0)
        return f, g, 1.5 * G

    monkeypatch.setattr(bg, "_gibbs_objective", broken)
    sys = build_partitioned_model(ModelSpec())
    r = gibbs_variational_inf(sys)
    assert r.status == "gradient_mismatch" and not r.converged


def test_dv_examples():
    sys = build_partitioned_model(ModelSpec())
    rho = sys.rho
    assert abs(dv_value(sys, np.zeros((4, 4))) - np.trace(rho @ sys.coupling).real) <= 1e-12
    c = np.linalg.norm(sys.coupling, 2)
    dF = relative_free_energy(sys)
    assert abs(dv_value(sys, sys.coupling + c * np.eye(4)) - dF) <= 1e-9
    r = donsker_varadhan_sup(sys)
    assert abs(r.best_s - 1.0) <= 1e-6
    assert abs(r.value_at_s1 - dF) <= 1e-9
    assert r.max_value <= dF + 1e-8
    grid = [(s, v) for s, _, v in r.trajectory[:DVConfig().grid]]
    assert max(grid, key=lambda p: p[1])[0] == 1.0


@given(seeds)
def test_bogoliubov_sandwich(seed):
    sys = random_partitioned_system(rng_from(seed))
    rep = bogoliubov_report(sys)
    assert rep.passed
    assert rep.lower - 1e-8 <= rep.delta_F <= rep.upper + 1e-8
    assert rep.gt_lower - 1e-8 <= rep.delta_F
    assert abs(rep.S_0_rho + rep.S_rho_0 - sys.beta * (rep.upper - rep.lower)) <= 1e-8


@given(seeds)
def test_triple_path(seed):
    sys = random_partitioned_system(rng_from(seed))
    p = free_energy_paths(sys)
    assert p.spread <= 1e-8 * (1 + abs(p.partition))


@given(seeds, st.floats(0.0, 2.0))
def test_variational_sandwich(seed, s):
    sys = random_partitioned_system(rng_from(seed), max_dim=8)
    dF = relative_free_energy(sys)
    c = bg.admissible_shift(sys, s)
    assert dv_value(sys, s * sys.coupling + c * np.eye(sys.n)) <= dF + 1e-8
    r = gibbs_variational_inf(sys, VariationalConfig(max_iter=50))
    assert r.min_gap >= -1e-8
