"""Scan beta for a builder model and print the two-sided Bogoliubov bounds."""

import argparse

import numpy as np

from modent.bogoliubov import ModelSpec, bogoliubov_report, build_partitioned_model


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--model", default="ising2")
    p.add_argument("--sites", type=int, default=2)
    p.add_argument("--betas", type=float, nargs=3, default=[0.1, 10.0, 25], metavar=("LO", "HI", "NUM"))
    args = p.parse_args()
    lo, hi, num = args.betas
    print("beta,gt_lower,lower,delta_F,upper,passed")
    for beta in np.geomspace(lo, hi, int(num)):
        sys = build_partitioned_model(ModelSpec(name=args.model, beta=float(beta), sites=args.sites))
        r = bogoliubov_report(sys)
        print(f"{beta:.4f},{r.gt_lower:.10f},{r.lower:.10f},{r.delta_F:.10f},{r.upper:.10f},{r.passed}")


if __name__ == "__main__":
    main()
