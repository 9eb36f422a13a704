#!/usr/bin/env python3
"""Benchmark the compiled trajectory kernel against the pure-Python fallback.

Run:  python benchmarks/bench_kernels.py [--steps N] [--repeats K]

Both backends consume identical random streams, so the check column also
re-verifies that their outputs agree bit for bit on every workload.
"""

import argparse
import time

import numpy as np

from budgetlab import _kernels_py
from budgetlab._backend import spec_codes
from budgetlab.fitness import FitnessSpec
from budgetlab.heuristics import AlgorithmSpec

try:
    from budgetlab import _kernels_cy
except ImportError:
    _kernels_cy = None

WORKLOADS = [
    ("rls / binval n=100", AlgorithmSpec.rls(), FitnessSpec.binval(100)),
    ("ea  / binval n=100", AlgorithmSpec.ea(), FitnessSpec.binval(100)),
    ("ea  / leadingones n=100", AlgorithmSpec.ea(), FitnessSpec.leadingones(100)),
    ("sa  / zigzag n=100", AlgorithmSpec.sa(), FitnessSpec.zigzag(100)),
    ("ea  / linear n=100", AlgorithmSpec.ea(),
     FitnessSpec.linear(np.random.default_rng(0).uniform(0.01, 1, 100))),
]


def run_one(kernels, algo, spec, steps, seed):
    from budgetlab._backend import algo_codes
    kind, coeffs = spec_codes(spec)
    code, param = algo_codes(algo, spec.n)
    bg = np.random.PCG64(np.random.SeedSequence(seed))
    t0 = time.perf_counter()
    errs, bits = kernels.run_trajectory(code, param, kind, spec.n, coeffs,
                                        None, steps, bg)
    return time.perf_counter() - t0, errs, bits


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--steps", type=int, default=20000)
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args()

    if _kernels_cy is None:
        print("compiled kernel not available; nothing to compare")
        return

    print(f"{'workload':28s} {'python':>12s} {'cython':>12s} {'speedup':>9s}  identical")
    for name, algo, spec in WORKLOADS:
        t_py = min(run_one(_kernels_py, algo, spec, args.steps, 42)[0]
                   for _ in range(args.repeats))
        t_cy = min(run_one(_kernels_cy, algo, spec, args.steps, 42)[0]
                   for _ in range(args.repeats))
        e1, b1 = run_one(_kernels_py, algo, spec, args.steps, 42)[1:]
        e2, b2 = run_one(_kernels_cy, algo, spec, args.steps, 42)[1:]
        same = np.array_equal(e1, e2) and np.array_equal(b1, b2)
        rate_py = args.steps / t_py
        rate_cy = args.steps / t_cy
        print(f"{name:28s} {rate_py:10.0f}/s {rate_cy:10.0f}/s {t_py / t_cy:8.1f}x  {same}")


if __name__ == "__main__":
    main()
