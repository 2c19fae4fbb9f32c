import json
import subprocess
import sys

import numpy as np
from hypothesis import given

from modent.cli import SUITE_HEADER, main, matrix_from_json, matrix_to_json
from modent.sampling import random_density, random_hermitian
from tests.strategies import dims, rng_from, seeds


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def write(path, A):
    path.write_text(json.dumps(matrix_to_json(A)))
    return str(path)


def test_entropy_same_state(tmp_path, capsys):
    a = write(tmp_path / "a.json", random_density(3, rng_from(0)))
    code, out, _ = run(capsys, "entropy", "--rho", a, "--sigma", a)
    rep = json.loads(out)
    assert code == 0 and rep["schema"] == 1
    assert abs(rep["umegaki"]["value"]) <= 1e-12 and abs(rep["araki"]["value"]) <= 1e-12


def test_entropy_pure_vs_mixed(tmp_path, capsys):
    code, _, _ = run(capsys, "gen", "pure0", "--n", "2", "--out", str(tmp_path / "p.json"))
    assert code == 0
    m = write(tmp_path / "m.json", np.eye(2) / 2)
    code, out, _ = run(capsys, "entropy", "--rho", str(tmp_path / "p.json"), "--sigma", m)
    rep = json.loads(out)
    assert code == 0
    assert abs(rep["araki"]["value"] - np.log(2)) <= 1e-14
    assert abs(rep["kl"]["value"] - np.log(2)) <= 1e-14
    assert len(rep["uhlmann"]) == 21


def test_entropy_infinite_is_null(tmp_path, capsys):
    p = write(tmp_path / "p.json", np.diag([1.0, 0.0]))
    m = write(tmp_path / "m.json", np.eye(2) / 2)
    code, out, _ = run(capsys, "entropy", "--rho", m, "--sigma", p)
    rep = json.loads(out)
    assert code == 0 and rep["araki"]["value"] is None and rep["araki"]["infinite"]


def test_entropy_subalgebra(tmp_path, capsys):
    rng = rng_from(1)
    a = write(tmp_path / "a.json", random_density(3, rng))
    b = write(tmp_path / "b.json", random_density(3, rng))
    alg = tmp_path / "alg.json"
    alg.write_text(json.dumps({"schema": 1, "generators": [matrix_to_json(np.diag([0.0, 1.0, 2.0]))]}))
    code, out, _ = run(capsys, "entropy", "--rho", a, "--sigma", b, "--algebra", str(alg))
    rep = json.loads(out)
    assert code == 0 and rep["subalgebra"]["dim"] == 3
    assert rep["subalgebra"]["araki"]["value"] <= rep["araki"]["value"] + 1e-12


def test_entropy_errors(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"re": [[1, 0], [0')
    m = write(tmp_path / "m.json", np.eye(2) / 2)
    code, _, err = run(capsys, "entropy", "--rho", str(bad), "--sigma", m)
    assert code == 2 and "line 1 column" in err
    ragged = tmp_path / "ragged.json"
    ragged.write_text('{"schema": 1, "n": 2, "re": [[1, 0], [0]], "im": [[0, 0], [0, 0]]}')
    assert run(capsys, "entropy", "--rho", str(ragged), "--sigma", m)[0] == 2
    h = write(tmp_path / "h.json", np.diag([1.5, -0.5]))
    assert run(capsys, "entropy", "--rho", h, "--sigma", m)[0] == 3
    assert run(capsys, "entropy", "--rho", m)[0] == 2
    assert run(capsys, "entropy", "--rho", str(tmp_path / "missing.json"), "--sigma", m)[0] == 2
    assert run(capsys, "nope")[0] == 2


def test_bogoliubov_commands(capsys):
    code, out, _ = run(capsys, "bogoliubov", "--model", "ising2", "--beta", "1.0")
    rep = json.loads(out)
    assert code == 0 and rep["lower"] <= rep["delta_F"] <= rep["upper"]
    code, out, _ = run(capsys, "bogoliubov", "--model", "uncoupled")
    rep = json.loads(out)
    assert code == 0 and rep["lower"] == rep["upper"] == rep["delta_F"] == 0.0
    assert run(capsys, "bogoliubov", "--beta", "-1")[0] == 2
    assert run(capsys, "bogoliubov", "--model", "custom")[0] == 2


def test_bogoliubov_variational(capsys):
    code, out, _ = run(capsys, "bogoliubov", "--variational")
    rep = json.loads(out)
    assert code == 0
    assert rep["gibbs_variational"]["gap"] <= 1e-4
    assert rep["gibbs_variational"]["log"][0]["iter"] == 0


def test_bogoliubov_custom(tmp_path, capsys):
    h1 = write(tmp_path / "h1.json", np.diag([0.0, 1.0]))
    h2 = write(tmp_path / "h2.json", np.array([[0.0, 1.0], [1.0, 0.0]]))
    u = write(tmp_path / "u.json", 0.2 * np.eye(4))
    code, out, _ = run(capsys, "bogoliubov", "--model", "custom", "--blocks", h1, h2, "--coupling-file", u)
    assert code == 0 and abs(json.loads(out)["delta_F"] - 0.2) <= 1e-12


def test_kms_commands(tmp_path, capsys):
    h0 = write(tmp_path / "h0.json", np.zeros((3, 3)))
    code, out, _ = run(capsys, "kms", "--H", h0, "--beta", "2.0")
    rep = json.loads(out)
    assert code == 0 and rep["kms_boundary"]["max_residual"] <= 1e-15
    code, out, _ = run(capsys, "kms", "--random", "3", "--seed", "4", "--trotter")
    rep = json.loads(out)
    assert code == 0 and max(rep["perturbation"]["identities"].values()) <= 1e-7
    assert all(1.7 <= r <= 2.3 for r in rep["trotter"]["ratios"])
    assert run(capsys, "kms", "--random", "3", "--beta", "0")[0] == 2


def test_suite_deterministic(capsys):
    first = run(capsys, "suite", "--seed", "7", "--trials", "1")
    second = run(capsys, "suite", "--seed", "7", "--trials", "1")
    assert first == second and first[0] == 0
    lines = first[1].splitlines()
    assert lines[0] == ",".join(SUITE_HEADER)
    assert all(line.endswith(",pass") for line in lines[1:])


def test_suite_env_seed(capsys, monkeypatch, tmp_path):
    monkeypatch.setenv("MODENT_SEED", "11")
    a = run(capsys, "suite", "--trials", "2", "--only", "entropy")
    b = run(capsys, "suite", "--seed", "11", "--trials", "2", "--only", "entropy", "--out", str(tmp_path / "r.csv"))
    assert a == b
    assert (tmp_path / "r.csv").read_text() == a[1]
    monkeypatch.setenv("MODENT_SEED", "x")
    assert run(capsys, "suite", "--trials", "1")[0] == 2


def test_suite_injected_bug_and_replay(capsys):
    code, out, _ = run(capsys, "suite", "--seed", "5", "--trials", "3", "--only", "monotone", "--inject-bug")
    assert code == 1
    replays = [line for line in out.splitlines() if line.startswith("# replay:")]
    assert replays and "--only monotone.dpi" in replays[0]
    argv = replays[0].split("modent ", 1)[1].split() + ["--inject-bug"]
    code, out, _ = run(capsys, *argv)
    assert code == 1 and "monotone,dpi,1," in out
    assert run(capsys, "suite", "--only", "nothing")[0] == 2
    assert run(capsys, "suite", "--trials", "0")[0] == 2


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "modent", "suite", "--seed", "1", "--trials", "1",
                        "--only", "kms.trotter_ratio"], capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout.startswith("module,property")


@given(seeds, dims)
def test_matrix_roundtrip(seed, n):
    A = random_hermitian(n, rng_from(seed)) + 1j * rng_from(seed + 1).standard_normal((n, n))
    B = matrix_from_json(json.loads(json.dumps(matrix_to_json(A))))
    assert np.max(np.abs(A - B)) <= 1e-15
