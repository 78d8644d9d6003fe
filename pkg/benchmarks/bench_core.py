"""Benchmark the compiled kernels against the pure-Python fallback.

Usage: python benchmarks/bench_core.py [--repeat N]
"""

import argparse
import math
import time

import numpy as np

from dyadnav.core import _kernels_py as py

try:
    from dyadnav.core import _kernels as c
except ImportError:
    c = None


def timeit(fn, repeat):
    best = math.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench(name, make_args, call, repeat):
    args = make_args()
    t_py = timeit(lambda: call(py, *args), repeat)
    row = f"{name:<24} python {t_py * 1e3:9.3f} ms"
    if c is not None:
        t_c = timeit(lambda: call(c, *args), repeat)
        row += f"   compiled {t_c * 1e3:9.3f} ms   speedup {t_py / t_c:7.1f}x"
    print(row)


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    rng = np.random.default_rng(0)

    grid = (rng.random((200, 200)) < 0.08).astype(np.uint8)
    angles = np.linspace(-math.pi, math.pi, 72, endpoint=False)
    pts = rng.normal(size=(128, 2))
    hull = py.convex_hull(rng.uniform(-2, 2, size=(128, 2)))
    T = 2000
    theta = np.cumsum(rng.uniform(-0.1, 0.1, T))
    robot = np.column_stack([np.cumsum(0.1 * np.cos(theta)),
                             np.cumsum(0.1 * np.sin(theta)), theta])
    h0 = np.array([-0.9, 0.0, 0.0])

    print(f"compiled backend available: {c is not None}")
    bench("raycast 72 beams", lambda: (grid, 0.0, 0.0, 0.05, 5.0, 5.0, angles, 10.0),
          lambda m, *a: m.raycast(*a), args.repeat)
    bench("disc_collides x1000",
          lambda: (grid,),
          lambda m, g: [m.disc_collides(g, 0.0, 0.0, 0.05, 5.0, 5.0, 0.4)
                        for _ in range(1000)],
          args.repeat)
    bench("convex_hull 128 pts x100", lambda: (pts,),
          lambda m, p: [m.convex_hull(p) for _ in range(100)], args.repeat)
    bench("hull_thresholds 72 beams x100", lambda: (hull, angles),
          lambda m, h, a: [m.hull_thresholds(h, 0.0, 0.0, a)
                           for _ in range(100)],
          args.repeat)
    bench("rollout_delayed T=2000", lambda: (robot, h0),
          lambda m, r, h: m.rollout_delayed(r, -0.8, -0.2, 0.05, 0.8, h),
          args.repeat)
    bench("rollout_rod T=2000", lambda: (robot, h0),
          lambda m, r, h: m.rollout_rod(r, 0.9, 0.0, 0.0, h), args.repeat)


if __name__ == "__main__":
    main()
