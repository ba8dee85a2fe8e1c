#!/usr/bin/env python3
"""Scaling sweep: per-method growth exponents over synthetic datasets.

Each (method, N) cell runs in its own child process pinned to one BLAS
thread; user+sys seconds and peak RSS come from the trampoline's wait4.
Writes the full cell table as CSV and prints fitted log-log slopes.

    python scripts/run_scaling.py --methods kmeans agglo \
        --sizes 5000 10000 20000 --out runs/scaling.csv
"""

import argparse
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from conceptmine.bench import scaling_sweep, write_csv


def parse_args(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--methods", nargs="+", default=["kmeans"],
                   choices=("kmeans", "agglo", "agglomerative", "leaders"))
    p.add_argument("--sizes", nargs="+", type=int, required=True,
                   help="at least three dataset sizes")
    p.add_argument("--dim", type=int, default=64)
    p.add_argument("--k", type=int, default=600)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--components", type=int, default=64)
    p.add_argument("--separation", type=float, default=6.0)
    p.add_argument("--workdir", default="runs/scaling")
    p.add_argument("--out", default="runs/scaling.csv")
    p.add_argument("--kmeans-flags", default="",
                   help="extra cluster flags, space separated, quoted")
    p.add_argument("--agglo-flags", default="")
    p.add_argument("--leaders-flags", default="--tau 1.0")
    return p.parse_args(argv)


def main(argv=None):
    args = parse_args(argv)
    flags = {"kmeans": tuple(args.kmeans_flags.split()),
             "agglomerative": tuple(args.agglo_flags.split()),
             "leaders": tuple(args.leaders_flags.split())}
    records, exponents = scaling_sweep(
        args.methods, args.sizes, args.workdir, dim=args.dim, k=args.k,
        seed=args.seed, n_components=args.components,
        separation=args.separation, method_flags=flags)
    os.makedirs(os.path.dirname(args.out) or ".", exist_ok=True)
    write_csv(args.out, records)
    for r in records:
        print(f"{r.method:14s} n={r.n:<8d} cpu={r.runtime_user_sys_s:8.2f}s "
              f"peak={r.peak_mem_bytes / 1e6:9.1f}MB {r.status}")
    for method, slope in exponents.items():
        print(f"exponent[{method}] = {slope:.3f}")
    print(f"cells -> {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
