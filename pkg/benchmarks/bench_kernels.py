"""Benchmark the numba kernels against their numpy fallbacks.

Run: python benchmarks/bench_kernels.py [--repeat 5]

Each kernel is called once untimed (compilation), then timed ``repeat``
times per backend; the table also reports the max deviation between the
two backends.
"""
import argparse
import time

import numpy as np

from thinguide import kernels
from thinguide._accel import HAS_NUMBA


def _cases():
    rng = np.random.default_rng(0)
    x = np.linspace(-10, 10, 20001)
    f = np.exp(-x**2) * (1 + 0.3 * np.sin(3 * x))
    s = np.sort(rng.uniform(0, 1, 801))
    c = rng.standard_normal(801) + 1j * rng.standard_normal(801)
    xg = np.linspace(-40, 40, 4001)
    yg = xg[np.abs(xg + 10) < 6]
    cg = np.exp(-(yg + 10) ** 2 + 10j * yg)
    n = 20000
    v = -np.pi**2 * np.ones(n)
    theta = np.linspace(0, 1.9 * np.pi, 5000)
    cx, cy = np.cos(theta) * (1 + 0.1 * theta), np.sin(theta) * (1 + 0.1 * theta)
    return {
        "green_sweep (N=20001)": lambda u: kernels.green_sweep(f, x[1] - x[0], 1j, use_numba=u),
        "exp_sum (2001 x 801)": lambda u: kernels.exp_sum(x[::10], s, c, 1 + 1j, use_numba=u),
        "propagate_sum (4001 x 601)": lambda u: kernels.propagate_sum(xg, yg, cg, 0.5, 0.6, 0.4,
                                                                     use_numba=u),
        "rk4_shoot (20000 steps)": lambda u: kernels.rk4_shoot(v, v, v, 1.0 / n, 1.0, 0.0,
                                                               use_numba=u),
        "first_crossing (5000 pts)": lambda u: kernels.first_crossing(cx, cy, use_numba=u),
    }


def _deviation(a, b):
    if isinstance(a, tuple) and isinstance(a[0], int):
        return 0.0 if a == b else np.inf
    if isinstance(a, tuple):
        return max(float(np.max(np.abs(np.asarray(p) - np.asarray(q)))) for p, q in zip(a, b))
    return float(np.max(np.abs(a - b)))


def _best(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def run(repeat=5):
    if not HAS_NUMBA:
        print("numba not available; only the numpy path can run")
        return []
    rows = []
    print(f"{'kernel':30s} {'numba [ms]':>11s} {'numpy [ms]':>11s} {'speedup':>8s} {'max dev':>10s}")
    for name, fn in _cases().items():
        a, b = fn(True), fn(False)
        t_nb = _best(lambda: fn(True), repeat)
        t_np = _best(lambda: fn(False), repeat)
        dev = _deviation(a, b)
        rows.append((name, t_nb, t_np, dev))
        print(f"{name:30s} {1e3 * t_nb:11.3f} {1e3 * t_np:11.3f} {t_np / t_nb:8.1f} {dev:10.2e}")
    return rows


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    run(ap.parse_args().repeat)
