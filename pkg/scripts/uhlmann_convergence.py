"""Print F(t_k), t_k = 2^-k, against the relative entropy for a few random pairs."""

import argparse

import numpy as np

from modent.entropy import araki_spectral, uhlmann_limit
from modent.sampling import random_density, trial_rng


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--n", type=int, default=4)
    p.add_argument("--pairs", type=int, default=3)
    p.add_argument("--kmax", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()
    ts = tuple(2.0 ** -k for k in range(args.kmax + 1))
    for j in range(args.pairs):
        rng = trial_rng(args.seed, j)
        a, b = random_density(args.n, rng), random_density(args.n, rng)
        S = araki_spectral(a, b).value
        F = uhlmann_limit(a, b, ts)
        print(f"# pair {j}: S = {S:.12f}")
        print("k,t,F,S-F")
        for k, (t, f) in enumerate(zip(ts, F)):
            print(f"{k},{t:.3e},{f:.12f},{S - f:.3e}")
        assert np.all(np.diff(F) >= 0)


if __name__ == "__main__":
    main()
