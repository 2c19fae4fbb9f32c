"""Command-line front end.

Exit codes: 0 pass, 1 property failure, 2 usage or parse error,
3 data invariant violation (for example a non-density input).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import batteries, bogoliubov, entropy, kms
from .algebra import generate_star_algebra
from .numkit import InvariantError, check_hermitian
from .sampling import random_density, random_hermitian, trial_rng

SCHEMA = 1
EXIT_PASS, EXIT_FAIL, EXIT_USAGE, EXIT_INVARIANT = 0, 1, 2, 3
SUITE_HEADER = ("module", "property", "trials", "worst_margin", "pass")


class UsageError(Exception):
    pass


# --- matrix files ---------------------------------------------------------------------

def matrix_to_json(A) -> dict:
    A = np.asarray(A, dtype=complex)
    return {"schema": SCHEMA, "n": int(A.shape[0]),
            "re": A.real.tolist(), "im": A.imag.tolist()}


def matrix_from_json(obj, where: str = "<matrix>") -> np.ndarray:
    if not isinstance(obj, dict) or "re" not in obj:
        raise UsageError(f"{where}: expected an object with 're' (and optional 'im')")
    if obj.get("schema", SCHEMA) != SCHEMA:
        raise UsageError(f"{where}: unsupported schema {obj.get('schema')!r}")
    try:
        re = np.array(obj["re"], dtype=float)
        im = np.array(obj.get("im", np.zeros_like(re)), dtype=float)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"{where}: arrays must be rectangular and numeric ({exc})") from None
    n = obj.get("n", re.shape[0] if re.ndim else 0)
    if re.ndim != 2 or re.shape != (n, n) or im.shape != re.shape:
        raise UsageError(f"{where}: expected {n}x{n} 're' and 'im' arrays")
    if not (np.all(np.isfinite(re)) and np.all(np.isfinite(im))):
        raise UsageError(f"{where}: non-finite entries")
    return re + 1j * im


def load_json(path: str):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"{path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None


def read_matrix(path: str) -> np.ndarray:
    return matrix_from_json(load_json(path), path)


def write_matrix(A, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(matrix_to_json(A), fh)
        fh.write("\n")


def emit(report: dict, out: str | None) -> None:
    text = json.dumps(report, indent=2) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    sys.stdout.write(text)


def _num(x) -> float | None:
    """JSON-safe float; +inf entropies are written as null."""
    if x is None:
        return None
    x = float(x)
    return x if np.isfinite(x) else None


def resolve_seed(seed: int | None) -> int:
    if seed is not None:
        return seed
    env = os.environ.get("MODENT_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"MODENT_SEED must be an integer, got {env!r}") from None


def _positive_beta(beta: float) -> float:
    if not np.isfinite(beta) or beta <= 0:
        raise UsageError(f"--beta must be positive, got {beta}")
    return beta


# --- entropy ---------------------------------------------------------------------

def _entropy_value(e: entropy.EntropyValue) -> dict:
    return {"value": _num(e.value), "infinite": e.is_infinite,
            "support_condition": e.support_condition_met, "warning": e.warning}


def cmd_entropy(args) -> int:
    seed = resolve_seed(args.seed)
    if args.random:
        rng = trial_rng(seed, 0)
        rho, sigma = random_density(args.random, rng), random_density(args.random, rng)
    elif args.rho and args.sigma:
        rho, sigma = read_matrix(args.rho), read_matrix(args.sigma)
    else:
        raise UsageError("give --rho and --sigma, or --random N")
    if rho.shape != sigma.shape:
        raise UsageError(f"shape mismatch {rho.shape} vs {sigma.shape}")
    um = entropy.umegaki(rho, sigma)
    ar = entropy.araki_spectral(rho, sigma)
    report = {"schema": SCHEMA, "command": "entropy", "n": int(rho.shape[0]),
              "umegaki": _entropy_value(um), "araki": _entropy_value(ar)}
    ok = um.is_infinite == ar.is_infinite
    if not um.is_infinite:
        diff = abs(um.value - ar.value)
        report["araki_umegaki_diff"] = diff
        ok = ok and diff <= 1e-8 * (1 + abs(um.value))
    if np.linalg.norm(rho @ sigma - sigma @ rho) <= 1e-12:
        w, U = np.linalg.eigh(rho)
        q = np.clip(np.real(np.diag(U.conj().T @ sigma @ U)), 0.0, None)
        report["kl"] = _entropy_value(entropy.kl_divergence(np.clip(w, 0.0, None) / np.clip(w, 0.0, None).sum(),
                                                            q / q.sum()))
    if args.algebra:
        obj = load_json(args.algebra)
        gens = [matrix_from_json(g, f"{args.algebra}[{i}]") for i, g in enumerate(obj.get("generators", []))]
        M = generate_star_algebra(gens, rho.shape[0])
        report["subalgebra"] = {"dim": M.dim,
                                "araki": _entropy_value(entropy.araki_on_subalgebra(M, rho, sigma))}
    if not um.is_infinite:
        ts = entropy.DEFAULT_T
        F = entropy.uhlmann_limit(rho, sigma, ts)
        report["uhlmann"] = [{"t": t, "F": float(f)} for t, f in zip(ts, F)]
        ok = ok and bool(np.all(np.diff(F) >= -1e-9))
    report["pass"] = bool(ok)
    emit(report, args.out)
    return EXIT_PASS if ok else EXIT_FAIL


# --- bogoliubov ---------------------------------------------------------------------

def _model(args) -> bogoliubov.PartitionedSystem:
    beta = _positive_beta(args.beta)
    if args.model == "custom":
        if not args.blocks or not args.coupling_file:
            raise UsageError("custom model needs --blocks and --coupling-file")
        spec = bogoliubov.ModelSpec(name="custom", beta=beta,
                                    blocks=tuple(read_matrix(p) for p in args.blocks),
                                    U=read_matrix(args.coupling_file))
    else:
        spec = bogoliubov.ModelSpec(name=args.model, beta=beta, sites=args.sites,
                                    field=args.field, coupling=args.coupling)
    return bogoliubov.build_partitioned_model(spec)


def cmd_bogoliubov(args) -> int:
    sys_ = _model(args)
    rep = bogoliubov.bogoliubov_report(sys_)
    paths = bogoliubov.free_energy_paths(sys_)
    report = {"schema": SCHEMA, "command": "bogoliubov", "model": args.model,
              "beta": sys_.beta, "n": sys_.n,
              "lower": rep.lower, "delta_F": rep.delta_F, "upper": rep.upper,
              "gt_lower": rep.gt_lower, "margins": rep.margins,
              "free_energy_paths": {"partition": paths.partition,
                                    "perturbed_vector": paths.perturbed_vector,
                                    "entropy": paths.entropy},
              "identity_residuals": rep.identity_residuals}
    ok = rep.passed
    if args.variational:
        cfg = bogoliubov.VariationalConfig(init=args.init, max_iter=args.max_iter, seed=resolve_seed(args.seed))
        g = bogoliubov.gibbs_variational_inf(sys_, cfg)
        d = bogoliubov.donsker_varadhan_sup(sys_)
        stride = max(1, len(g.trajectory) // 50)
        report["gibbs_variational"] = {
            "best_value": g.best_value, "gap": g.gap, "iterations": g.iterations,
            "status": g.status, "fd_mismatch": g.fd_mismatch,
            "log": [{"iter": i, "value": g.trajectory[i]} for i in range(0, len(g.trajectory), stride)]}
        report["donsker_varadhan"] = {
            "best_value": d.best_value, "best_s": d.best_s, "best_c": d.best_c,
            "value_at_s1": d.value_at_s1, "max_value": d.max_value}
        ok = ok and g.converged and g.min_gap >= -1e-8 and d.max_value <= rep.delta_F + 1e-8
    report["pass"] = bool(ok)
    emit(report, args.out)
    return EXIT_PASS if ok else EXIT_FAIL


# --- kms --------------------------------------------------------------------------

def cmd_kms(args) -> int:
    beta = _positive_beta(args.beta)
    rng = trial_rng(resolve_seed(args.seed), 0)
    if args.H:
        H = read_matrix(args.H)
    elif args.random:
        H = random_hermitian(args.random, rng)
        H /= np.linalg.norm(H, 2)
    else:
        raise UsageError("give --H FILE or --random N")
    H = check_hermitian(H)
    sys_ = kms.gibbs_state(H, beta)
    V = check_hermitian(read_matrix(args.V)) if args.V else random_hermitian(sys_.n, rng, scale=0.5)
    kb = kms.kms_boundary_check(sys_, trials=args.trials, seed=resolve_seed(args.seed))
    flow_abs, flow_rel = kms.modular_flow_residual(sys_)
    pr = kms.perturb_state(sys_, V, check=False)
    pe = kms.perturbation_entropy_report(sys_, V) if pr.dual_path_residual <= kms.PERTURB_TOL else None
    gt = kms.golden_thompson_peierls_report(sys_, V)
    report = {"schema": SCHEMA, "command": "kms", "n": sys_.n, "beta": beta,
              "kms_boundary": {"trials": kb.trials, "max_residual": kb.max_residual,
                               "converse_residual": _num(kb.converse_residual), "pass": kb.passed},
              "modular_flow": {"absolute": flow_abs, "relative": flow_rel, "pass": flow_rel <= 1e-7},
              "perturbation": {"dual_path": pr.dual_path_residual, "gibbs": pr.gibbs_residual,
                               "identities": pe.identities_residual if pe else None,
                               "pass": bool(pe and pe.passed and pr.gibbs_residual <= 1e-9)},
              "golden_thompson": {"gt_slack": gt.gt_slack, "pb_slack": gt.pb_slack, "pass": gt.passed}}
    checks = [report[k]["pass"] for k in ("modular_flow", "perturbation", "golden_thompson")]
    checks.append(kb.max_residual <= kb.tol)
    if args.trotter:
        A = H
        B = V
        tr = kms.trotter_check(A, B, 1.0, (8, 16, 32, 64))
        report["trotter"] = {"n": list(tr.n_list), "errors": list(tr.errors),
                             "ratios": list(tr.ratios), "pass": tr.passed}
        checks.append(tr.passed)
    ok = all(checks)
    report["pass"] = bool(ok)
    emit(report, args.out)
    return EXIT_PASS if ok else EXIT_FAIL


# --- suite -------------------------------------------------------------------------

@dataclass
class SuiteConfig:
    seed: int = 0
    trials: int = 20
    only: str | None = None
    trial: int | None = None
    out: str | None = None
    inject_bug: bool = False


def run_suite(cfg: SuiteConfig) -> tuple[list, str]:
    rows = [batteries.run_property(p, cfg.seed, cfg.trials, cfg.trial, cfg.inject_bug)
            for p in batteries.select(cfg.only)]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SUITE_HEADER)
    for r in rows:
        w.writerow([r.module, r.name, r.trials, f"{r.worst_margin:.6e}", "pass" if r.passed else "fail"])
    return rows, buf.getvalue()


def cmd_suite(args) -> int:
    if args.trials < 1:
        raise UsageError("--trials must be at least 1")
    cfg = SuiteConfig(resolve_seed(args.seed), args.trials, args.only, args.trial, args.out, args.inject_bug)
    try:
        rows, text = run_suite(cfg)
    except KeyError as exc:
        raise UsageError(str(exc.args[0])) from None
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text)
    sys.stdout.write(text)
    for r in rows:
        for k in r.failures:
            sys.stdout.write(f"# replay: modent suite --seed {cfg.seed} --only {r.module}.{r.name} --trial {k}\n")
    return EXIT_PASS if all(r.passed for r in rows) else EXIT_FAIL


# --- gen ----------------------------------------------------------------------------

def cmd_gen(args) -> int:
    rng = trial_rng(resolve_seed(args.seed), 0)
    if args.kind == "density":
        A = random_density(args.n, rng)
    elif args.kind == "hermitian":
        A = random_hermitian(args.n, rng)
    elif args.kind == "maximally_mixed":
        A = np.eye(args.n) / args.n
    else:
        A = np.zeros((args.n, args.n))
        A[0, 0] = 1.0
    text = json.dumps(matrix_to_json(A)) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_PASS


# --- parser ------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="modent", description="Relative entropy and modular theory checks.")
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("entropy", help="KL, Umegaki and Araki entropies of two states")
    e.add_argument("--rho", help="MatrixFile of the first state")
    e.add_argument("--sigma", help="MatrixFile of the second state")
    e.add_argument("--random", type=int, metavar="N", help="draw two random N x N states")
    e.add_argument("--algebra", help="JSON with 'generators': [MatrixFile, ...]")
    e.add_argument("--seed", type=int)
    e.add_argument("--out")
    e.set_defaults(func=cmd_entropy)

    b = sub.add_parser("bogoliubov", help="free-energy bounds for a partitioned model")
    b.add_argument("--model", default="ising2",
                   choices=["ising2", "ising_chain", "two_level_pair", "heisenberg_pair", "uncoupled", "custom"])
    b.add_argument("--beta", type=float, default=1.0)
    b.add_argument("--sites", type=int, default=2)
    b.add_argument("--field", type=float, default=1.0)
    b.add_argument("--coupling", type=float, default=0.5)
    b.add_argument("--blocks", nargs="+", help="MatrixFiles of the local Hamiltonians (custom)")
    b.add_argument("--coupling-file", help="MatrixFile of U (custom)")
    b.add_argument("--variational", action="store_true")
    b.add_argument("--init", default="cold", choices=["cold", "warm", "random"])
    b.add_argument("--max-iter", type=int, default=5000)
    b.add_argument("--seed", type=int)
    b.add_argument("--out")
    b.set_defaults(func=cmd_bogoliubov)

    k = sub.add_parser("kms", help="KMS, perturbation and trace-inequality checks")
    k.add_argument("--H", help="MatrixFile of the Hamiltonian")
    k.add_argument("--random", type=int, metavar="N", help="random unit-norm N x N Hamiltonian")
    k.add_argument("--V", help="MatrixFile of the perturbation")
    k.add_argument("--beta", type=float, default=1.0)
    k.add_argument("--trials", type=int, default=100)
    k.add_argument("--trotter", action="store_true")
    k.add_argument("--seed", type=int)
    k.add_argument("--out")
    k.set_defaults(func=cmd_kms)

    s = sub.add_parser("suite", help="run the property batteries")
    s.add_argument("--seed", type=int, help="defaults to $MODENT_SEED, then 0")
    s.add_argument("--trials", type=int, default=20)
    s.add_argument("--only", help="comma-separated module or module.property names")
    s.add_argument("--trial", type=int, help="replay a single trial index")
    s.add_argument("--out", help="also write the CSV report here")
    s.add_argument("--inject-bug", action="store_true", help=argparse.SUPPRESS)
    s.set_defaults(func=cmd_suite)

    g = sub.add_parser("gen", help="write a MatrixFile")
    g.add_argument("kind", choices=["density", "hermitian", "maximally_mixed", "pure0"])
    g.add_argument("--n", type=int, default=2)
    g.add_argument("--seed", type=int)
    g.add_argument("--out")
    g.set_defaults(func=cmd_gen)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_PASS
    try:
        return args.func(args)
    except UsageError as exc:
        sys.stderr.write(f"modent: error: {exc}\n")
        return EXIT_USAGE
    except InvariantError as exc:
        sys.stderr.write(f"modent: invariant violation: {exc}\n")
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
