"""Benchmark the rank-weighted force kernels: compiled extension vs numpy.

Usage:
    python3 benchmarks/bench_force.py --sizes 256 1024 4096 --dims 1 2 --repeats 3
"""

import argparse
import time

import numpy as np

from topoflock import ParticleEnsemble, Kernel, topological_rhs
from topoflock.forces import available_backends, use_backend


def time_rhs(ens, kernel, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        topological_rhs(ens, kernel)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", type=int, nargs="+", default=[256, 1024, 4096])
    parser.add_argument("--dims", type=int, nargs="+", default=[1, 2])
    parser.add_argument("--repeats", type=int, default=3)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    kernel = Kernel.exponential(1.0, 2.0)
    backends = available_backends()
    print(f"backends: {', '.join(backends)}")
    print(f"{'n':>8} {'d':>3} " + " ".join(f"{b:>12}" for b in backends) + f" {'speedup':>9}")

    mismatches = 0
    worst_gap = 0.0
    for d in args.dims:
        for n in args.sizes:
            ens = ParticleEnsemble(rng.normal(size=(n, d)), rng.normal(size=(n, d)))
            times, outputs = {}, {}
            for b in backends:
                prev = use_backend(b)
                try:
                    outputs[b] = topological_rhs(ens, kernel)
                    times[b] = time_rhs(ens, kernel, args.repeats)
                finally:
                    use_backend(prev)
            ref = outputs[backends[0]]
            scale = max(1.0, float(np.abs(ref).max()))
            gap = max(
                (float(np.abs(outputs[b] - ref).max()) / scale for b in backends[1:]),
                default=0.0,
            )
            worst_gap = max(worst_gap, gap)
            agree = gap <= 1e-12
            mismatches += not agree
            row = f"{n:>8} {d:>3} " + " ".join(f"{times[b]:>11.4f}s" for b in backends)
            if "compiled" in times and "python" in times:
                row += f" {times['python'] / times['compiled']:>8.1f}x"
            if not agree:
                row += f"  MISMATCH ({gap:.2e})"
            print(row)
    if len(backends) > 1:
        print(f"worst relative gap between backends: {worst_gap:.2e}"
              + ("" if mismatches == 0 else f"; {mismatches} case(s) above 1e-12"))
    return 1 if mismatches else 0


if __name__ == "__main__":
    raise SystemExit(main())
