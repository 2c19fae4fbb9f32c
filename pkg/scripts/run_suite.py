"""Run the property suite over several seeds and summarize the worst margins."""

import argparse
import time

from modent.cli import SuiteConfig, run_suite


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2])
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--only", default=None)
    args = p.parse_args()
    worst = {}
    failed = 0
    for seed in args.seeds:
        t0 = time.perf_counter()
        rows, _ = run_suite(SuiteConfig(seed=seed, trials=args.trials, only=args.only))
        for r in rows:
            key = f"{r.module}.{r.name}"
            worst[key] = min(worst.get(key, float("inf")), r.worst_margin)
            failed += not r.passed
        print(f"seed {seed}: {sum(r.passed for r in rows)}/{len(rows)} pass in {time.perf_counter() - t0:.1f}s")
    for key, m in worst.items():
        print(f"{key:40s} {m: .3e}")
    raise SystemExit(1 if failed else 0)


if __name__ == "__main__":
    main()
