"""Grid over the residual-filter window and step size of the optimizer update.

The window is given as a fraction of the reconstruction window rule
(default_k0) and the step as a multiple of the nominal step. Each cell runs the
rectangle at 16/64/202 angles and the thin annulus at 202 angles and reports
the best error and the iteration where 0 was first reached.

    python3 scripts/sweep_update.py --windows 0.2 0.25 0.3 --steps 0.75 1 1.25
"""
import argparse
import csv
import sys

from calitho.core import AngleGrid
from calitho.optimize import OptimizeConfig, optimize
from calitho.presets import annulus_target, rectangle_target
from calitho.transform import default_k0

CASES = [("rect16", rectangle_target, 16, 50), ("rect64", rectangle_target, 64, 50),
         ("rect202", rectangle_target, 202, 50), ("ring202", annulus_target, 202, 200)]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--windows", type=float, nargs="+", default=[0.15, 0.2, 0.25, 0.3, 0.5])
    ap.add_argument("--steps", type=float, nargs="+", default=[0.5, 0.75, 1.0, 1.25])
    ap.add_argument("--n", type=int, default=128)
    args = ap.parse_args()

    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["window", "step", "case", "best_error", "iter_to_zero"])
    for frac in args.windows:
        for step in args.steps:
            for label, make, count, iters in CASES:
                grid = AngleGrid(count)
                cfg = OptimizeConfig(grid, step_size=step, max_iters=iters,
                                     update_k0=frac * default_k0(args.n, grid))
                res = optimize(make(args.n), cfg)
                w.writerow([frac, step, label, f"{res.error:.6f}", res.iterations_to(0.0)])
                sys.stdout.flush()


if __name__ == "__main__":
    main()
