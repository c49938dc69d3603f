"""Compare the numba and numpy kernel backends.

Run: python3 benchmarks/bench_kernels.py --repeats 20
"""
import argparse
import time

import numpy as np

from hedscore import _numba_kernels as nb
from hedscore import _numpy_kernels as npk


def cases(rng, horizon, resamples):
    post = rng.uniform(size=horizon - horizon // 4 + 1)
    b = max(1, round(horizon ** (1 / 3)))
    n_blocks = -(-post.size // b)
    starts = rng.integers(0, post.size - b + 1, size=(resamples, n_blocks))
    disc = np.exp(-0.14 * np.arange(post.size))
    y = rng.normal(size=horizon)
    lt = np.log(np.array([[0.9, 0.1], [0.1, 0.9]]))
    slds = (y, lt, np.array([0.0, 3.0]), np.array([1.25, 1.25]), np.log(np.array([0.5, 0.5])))
    return {
        "neumaier_sum": (rng.normal(size=horizon * 50),),
        "block_hed_batch": (post, starts, b, 0.2, disc, float(post.size - 1)),
        "slds_filter": slds,
        "ewma": (y * y, 0.05, 1.0),
        "linear_recursion": (y, 0.5, 0.0),
    }


def best_of(fn, args, repeats):
    fn(*args)  # warm-up; triggers compilation on first use
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        times.append(time.perf_counter() - t0)
    return min(times) * 1e3


def main():
    p = argparse.ArgumentParser()
    p.add_argument("--horizon", type=int, default=2000)
    p.add_argument("--resamples", type=int, default=2000)
    p.add_argument("--repeats", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()

    rng = np.random.default_rng(args.seed)
    print(f"horizon={args.horizon} resamples={args.resamples} repeats={args.repeats}")
    print(f"{'kernel':<18}{'numpy ms':>12}{'numba ms':>12}{'speedup':>10}")
    for name, fargs in cases(rng, args.horizon, args.resamples).items():
        t_np = best_of(getattr(npk, name), fargs, args.repeats)
        t_nb = best_of(getattr(nb, name), fargs, args.repeats)
        print(f"{name:<18}{t_np:>12.3f}{t_nb:>12.3f}{t_np / max(t_nb, 1e-9):>9.1f}x")


if __name__ == "__main__":
    main()
