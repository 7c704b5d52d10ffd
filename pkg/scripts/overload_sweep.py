#!/usr/bin/env python3
"""Sweep the incremental overload experiment over table sizes and the
named equal-budget configurations; emits a CSV of load quartiles.

Usage: python scripts/overload_sweep.py [--trials 99] [--seed 0] \
           [--sizes 100,500,1000,5000,20000]
"""

import argparse
import sys

from sichash.cli import OVERLOAD_CONFIGS
from sichash.cuckoo import incremental_load_experiment, summarize_loads


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--trials", type=int, default=99)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--sizes", default="100,500,1000,5000,20000")
    args = ap.parse_args()

    sizes = [int(s) for s in args.sizes.split(",")]
    print("config,m,min,q1,median,q3,max")
    for name, fractions in OVERLOAD_CONFIGS.items():
        for m in sizes:
            loads = incremental_load_experiment(
                m, fractions, args.trials, seed=args.seed
            )
            s = summarize_loads(loads)
            print(
                f"{name},{m},{s['min']:.4f},{s['q1']:.4f},"
                f"{s['median']:.4f},{s['q3']:.4f},{s['max']:.4f}"
            )
            sys.stdout.flush()
    return 0


if __name__ == "__main__":
    sys.exit(main())
