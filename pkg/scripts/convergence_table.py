"""Traveling-vortex error tables with experimental orders of convergence.

Writes one ``convergence_eps<eps>.csv`` per Mach number into ``--out`` and
prints the tables.

    python3 scripts/convergence_table.py --grids 20 40 80 160 --epsilons 1e-2 1e-3
"""

import argparse
import logging

from lowmach.cli import COMMAND_DEFAULTS, cmd_convergence, parse_config


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--grids", type=int, nargs="+", default=[20, 40, 80, 160])
    ap.add_argument("--epsilons", type=float, nargs="+", default=[1e-2, 1e-3, 1e-4, 1e-5])
    ap.add_argument("--tableau", default="DP2-A(2,4,2)")
    ap.add_argument("--limiter", default="none")
    ap.add_argument("--cfl", type=float, default=0.45)
    ap.add_argument("--t-end", type=float, default=0.1)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--out", default="results/convergence")
    args = ap.parse_args()
    logging.basicConfig(level=logging.WARNING)

    flags = {"tableau": args.tableau, "limiter": args.limiter, "cfl": args.cfl,
             "t_end": args.t_end, "out": args.out}
    cfg = parse_config(None, flags, COMMAND_DEFAULTS["convergence"])
    tables = cmd_convergence(cfg, args.grids, args.epsilons, args.jobs)
    for eps, rows in tables.items():
        print(f"\neps = {eps:.0e}")
        print(f"{'N':>5} {'err_u1':>11} {'eoc':>7} {'err_u2':>11} {'eoc':>7}")
        for r in rows:
            e1 = "" if r.eoc_u1 is None else f"{r.eoc_u1:.4f}"
            e2 = "" if r.eoc_u2 is None else f"{r.eoc_u2:.4f}"
            print(f"{r.n:>5} {r.err_u1:>11.3e} {e1:>7} {r.err_u2:>11.3e} {e2:>7}")


if __name__ == "__main__":
    main()
