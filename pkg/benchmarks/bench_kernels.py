"""Time the numba kernels against their numpy twins.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Both backends are imported in the same process, so the comparison does not
depend on INEQFAIR_DISABLE_NUMBA. The first numba call (compilation) is
excluded from the timings.
"""
import argparse
import timeit

import numpy as np

from ineqfair import _accel, kernels


def _decompose_case(n, groups, seed=0):
    rng = np.random.default_rng(seed)
    values = rng.random(n) * 3 + 0.01
    labels = np.unique(rng.integers(0, groups, n), return_inverse=True)[1].astype(np.int64)
    return values, labels, int(labels.max()) + 1, 2.0


def _enumerate_case(n, seed=0):
    rng = np.random.default_rng(seed)
    y = rng.integers(0, 2, n).astype(np.int64)
    cell = np.arange(n, dtype=np.int64)
    group = rng.integers(0, 2, n).astype(np.int64)
    return y, cell, group, n, 2, 2.0


def _time(fn, args, repeat):
    fn(*args)
    return min(timeit.repeat(lambda: fn(*args), number=1, repeat=repeat))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if not _accel.NUMBA_AVAILABLE:
        print("numba is not installed; only the numpy backend can run")
        return
    cases = [
        ("group_decompose n=1e5 g=8", kernels.group_decompose_np, kernels.group_decompose_nb,
         _decompose_case(100_000, 8)),
        ("group_decompose n=1e6 g=64", kernels.group_decompose_np, kernels.group_decompose_nb,
         _decompose_case(1_000_000, 64)),
        ("enumerate_cells n=12", kernels.enumerate_cells_np, kernels.enumerate_cells_nb, _enumerate_case(12)),
        ("enumerate_cells n=16", kernels.enumerate_cells_np, kernels.enumerate_cells_nb, _enumerate_case(16)),
    ]
    print(f"{'case':<30}{'numpy [ms]':>12}{'numba [ms]':>12}{'speedup':>10}")
    for name, f_np, f_nb, case in cases:
        t_np = _time(f_np, case, args.repeat) * 1e3
        t_nb = _time(f_nb, case, args.repeat) * 1e3
        print(f"{name:<30}{t_np:>12.2f}{t_nb:>12.2f}{t_np / t_nb:>9.1f}x")


if __name__ == "__main__":
    main()
