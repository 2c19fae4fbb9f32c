"""Lie-Trotter error e_n and the ratios e_n / e_2n for the Z/X fixture."""

import argparse

from modent.batteries import TROTTER_A, TROTTER_B
from modent.kms import trotter_check


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--n", type=int, nargs="+", default=[4, 8, 16, 32, 64, 128, 256])
    args = p.parse_args()
    rep = trotter_check(TROTTER_A, TROTTER_B, args.t, args.n)
    print("n,error")
    for n, e in zip(rep.n_list, rep.errors):
        print(f"{n},{e:.6e}")
    print("ratios:", " ".join(f"{r:.4f}" for r in rep.ratios))


if __name__ == "__main__":
    main()
