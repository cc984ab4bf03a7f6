"""Benchmark the numba kernels against the pure-numpy fallbacks.

Times the hot kernels on synthetic inputs sized like a large desk run
and prints one table row per kernel.  The numba side includes a warmup
call so JIT compilation is not billed.

    python benchmarks/bench_backends.py [--atoms 64] [--grid 64] [--repeat 5]
"""

import argparse
import time

import numpy as np

from pathflow import _accel_np as np_impl

try:
    from pathflow import _accel_nb as nb_impl
except ImportError:
    nb_impl = None


def brownian_angles(rng, atoms, grid, dim):
    xi = rng.standard_normal((atoms, grid, dim)) / np.sqrt(grid)
    walk = np.concatenate([np.zeros((atoms, 1, dim)), np.cumsum(xi, axis=1)], axis=1)
    return np_impl.wrap_angles(walk)


def best_time(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--atoms", type=int, default=64)
    parser.add_argument("--grid", type=int, default=64)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    n, grid = args.atoms, args.grid
    w = np.full(grid + 1, 1.0 / grid)
    w[0] = w[-1] = 0.5 / grid

    src_t = brownian_angles(rng, n, grid, 3)
    tgt_t = brownian_angles(rng, n, grid, 3)

    coords = rng.standard_normal((n * (grid + 1), 3))
    rots = np_impl.so3_exp_batch(coords)
    src_r = np_impl.so3_exp_batch(
        rng.standard_normal((n * (grid + 1), 3))
    ).reshape(n, grid + 1, 3, 3)
    tgt_r = np_impl.so3_exp_batch(
        rng.standard_normal((n * (grid + 1), 3))
    ).reshape(n, grid + 1, 3, 3)

    cost = np_impl.torus_cost_matrix(src_t, tgt_t, w, 2.0)
    a = np.full(n, 1.0 / n)
    f0 = np.zeros(n)

    cases = [
        ("torus_cost_matrix", lambda impl: impl.torus_cost_matrix(src_t, tgt_t, w, 2.0)),
        ("so3_cost_matrix", lambda impl: impl.so3_cost_matrix(src_r, tgt_r, w, 2.0)),
        ("so3_exp_batch", lambda impl: impl.so3_exp_batch(coords)),
        ("so3_log_batch", lambda impl: impl.so3_log_batch(rots)),
        (
            "sinkhorn_log (500 it)",
            lambda impl: impl.sinkhorn_log(cost, a, a, 0.05, 500, 0.0, f0, f0),
        ),
    ]

    print(f"atoms={n} grid={grid} repeat={args.repeat} (best of)")
    header = f"{'kernel':<24}{'numpy [ms]':>12}{'numba [ms]':>12}{'speedup':>10}"
    print(header)
    print("-" * len(header))
    for name, call in cases:
        t_np = best_time(lambda: call(np_impl), args.repeat)
        if nb_impl is None:
            print(f"{name:<24}{t_np * 1e3:>12.2f}{'n/a':>12}{'n/a':>10}")
            continue
        call(nb_impl)  # warmup / JIT
        t_nb = best_time(lambda: call(nb_impl), args.repeat)
        print(
            f"{name:<24}{t_np * 1e3:>12.2f}{t_nb * 1e3:>12.2f}"
            f"{t_np / t_nb:>9.1f}x"
        )


if __name__ == "__main__":
    main()
