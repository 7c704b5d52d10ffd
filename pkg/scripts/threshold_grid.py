#!/usr/bin/env python3
"""Load thresholds c* along the equal-budget interpolation: for a fixed
retrieval budget beta, sweep the interpolation parameter x and print
the resulting class mix and its threshold.

Usage: python scripts/threshold_grid.py [--beta 2.0] [--steps 21]
"""

import argparse
import sys

from sichash.phf import class_fractions
from sichash.thresholds import ClassMix, solve_threshold


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--beta", type=float, default=2.0)
    ap.add_argument("--steps", type=int, default=21)
    args = ap.parse_args()

    print("beta,x,p1,p2,p3,d_bar,c_star")
    for i in range(args.steps):
        x = i / (args.steps - 1) if args.steps > 1 else 0.0
        p1, p2, p3 = class_fractions(args.beta, x)
        mix = ClassMix(p1, p2, p3)
        sol = solve_threshold(mix)
        print(
            f"{args.beta},{x:.3f},{p1:.4f},{p2:.4f},{p3:.4f},"
            f"{mix.d_bar:.4f},{sol.c_star:.6f}"
        )
    return 0


if __name__ == "__main__":
    sys.exit(main())
