#!/usr/bin/env python3
"""Benchmark the compiled reduction kernels against the numpy fallback.

Shapes mirror real workloads: ``logc_sum_axis`` rows are quadrature slices,
``osc_reduce`` is the inner loop of the STFT/Wigner transforms (rows =
output positions, columns = integration nodes, xi = output frequencies).

Usage: python benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import time

import numpy as np

from phasequant import _kernels


def timeit(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    cases = {
        "logc_sum_axis 512x2048": lambda be: be.logc_sum_axis(
            rng.uniform(-800, 800, (512, 2048)), rng.uniform(-3, 3, (512, 2048))
        ),
        "logc_sum_axis 4096x257": lambda be: be.logc_sum_axis(
            rng.uniform(-100, 100, (4096, 257)), rng.uniform(-3, 3, (4096, 257))
        ),
        "osc_reduce 257x1024x129": lambda be: be.osc_reduce(
            rng.uniform(-200, 0, (257, 1024)),
            rng.uniform(-3, 3, (257, 1024)),
            np.linspace(-8, 8, 1024),
            np.linspace(-8, 8, 129),
        ),
        "osc_reduce 481x4001x65": lambda be: be.osc_reduce(
            rng.uniform(-400, 0, (481, 4001)),
            rng.uniform(-3, 3, (481, 4001)),
            np.linspace(-30, 30, 4001),
            np.linspace(-8, 8, 65),
        ),
    }

    backends = _kernels.available_backends()
    print(f"available backends: {', '.join(backends)}")
    header = f"{'case':<28}" + "".join(f"{b:>14}" for b in backends)
    if len(backends) == 2:
        header += f"{'speedup':>10}"
    print(header)
    print("-" * len(header))
    for name, fn in cases.items():
        times = {}
        for b in backends:
            be = _kernels.get_backend(b)
            times[b] = timeit(lambda: fn(be), args.repeat)
        row = f"{name:<28}" + "".join(f"{times[b] * 1e3:>12.1f}ms" for b in backends)
        if len(backends) == 2:
            row += f"{times['python'] / times['compiled']:>9.2f}x"
        print(row)


if __name__ == "__main__":
    main()
