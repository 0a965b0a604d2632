"""Density oscillation and velocity divergence against epsilon.

Starts from well-prepared data, takes a fixed number of steps per epsilon and
fits the log-log slope of the density oscillation.

    python3 scripts/ap_sweep.py --n 64 --steps 10 --epsilons 1e-2 1e-3 1e-4
"""

import argparse

from lowmach.cli import COMMAND_DEFAULTS, cmd_ap_sweep, parse_config


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=64)
    ap.add_argument("--steps", type=int, default=10)
    ap.add_argument("--epsilons", type=float, nargs="+", default=[1e-2, 1e-3, 1e-4])
    ap.add_argument("--tableau", default="DP2-A(2,4,2)")
    ap.add_argument("--out", default="results/ap_sweep")
    args = ap.parse_args()

    cfg = parse_config(None, {"n": args.n, "tableau": args.tableau, "out": args.out},
                       COMMAND_DEFAULTS["ap-sweep"])
    rows, slope = cmd_ap_sweep(cfg, args.epsilons, steps=args.steps)
    print(f"{'eps':>8} {'rho_osc':>11} {'max|div u|':>11}")
    for eps, osc, div in rows:
        print(f"{eps:>8.0e} {osc:>11.3e} {div:>11.3e}")
    if slope is not None:
        print(f"density oscillation ~ eps^{slope:.3f}")


if __name__ == "__main__":
    main()
