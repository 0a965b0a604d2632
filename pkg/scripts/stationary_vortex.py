"""Stationary-vortex runs across Mach numbers.

Reports the relative kinetic-energy change, the relative L2 change of the
local Mach number and the step count for each epsilon.

    python3 scripts/stationary_vortex.py --n 64 --t-end 1 --epsilons 1e-1 1e-2 1e-4 1e-6
"""

import argparse

import numpy as np

from lowmach import GridSpec, ModelParams, StepConfig, run
from lowmach.diagnostics import l2_error, mach_field
from lowmach.problems import init_stationary_vortex


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=64)
    ap.add_argument("--t-end", type=float, default=1.0)
    ap.add_argument("--epsilons", type=float, nargs="+", default=[1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6])
    ap.add_argument("--tableau", default="DP2-A(2,4,2)")
    ap.add_argument("--limiter", default="none")
    ap.add_argument("--cfl", type=float, default=0.45)
    args = ap.parse_args()

    grid = GridSpec.square(args.n)
    config = StepConfig(cfl=args.cfl, tableau=args.tableau, limiter=args.limiter)
    print(f"{'eps':>8} {'steps':>6} {'dKE/KE0':>11} {'Mach change':>12}")
    for eps in args.epsilons:
        model = ModelParams(eps, 2.0)
        s0 = init_stationary_vortex(grid, model)
        s1, rec = run(s0, config, model, grid, args.t_end)
        m0, m1 = mach_field(s0, model, grid), mach_field(s1, model, grid)
        change = l2_error(m1, m0, grid) / l2_error(m0, np.zeros_like(m0), grid)
        print(f"{eps:>8.0e} {len(rec.dt_history):>6} {rec.rel_ke_change[-1]:>11.3e} {change:>12.2%}")


if __name__ == "__main__":
    main()
