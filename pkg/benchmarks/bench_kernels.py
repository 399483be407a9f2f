"""Time the numba and numpy backends of each hot kernel against each other.

Usage::

    python3 benchmarks/bench_kernels.py [--repeat 5] [--points 2000] [--nmax 400]

The first numba call of each kernel (compilation, or loading from the
on-disk cache) is excluded from the timings and reported separately.
Results are also checked for agreement so a fast but wrong backend shows up.
"""

import argparse
import statistics
import time

import numpy as np

from jmk import kernels
from jmk._accel import HAVE_NUMBA


def _cases(points, nmax):
    rng = np.random.default_rng(20240611)
    x = np.sort(rng.uniform(0.0, 4.0 * nmax, points))
    logpref = 2.0 * np.log(x) - 0.5 * x
    coef = rng.standard_normal(nmax) / np.arange(1, nmax + 1)
    z = np.sort(rng.uniform(0.0, 200.0, points))
    steps = 20 * points
    h = 40.0 / steps
    r = h * np.arange(1, steps + 1)
    w = 2.0 / r ** 2 - 1.0
    w_mid = 2.0 / (r + 0.5 * h) ** 2 - 1.0
    w_end = 2.0 / (r + h) ** 2 - 1.0
    return {
        "laguerre_table": lambda b: kernels.laguerre_table(nmax, 5.0, x, logpref, backend=b),
        "laguerre_sum": lambda b: kernels.laguerre_sum(coef, 5.0, x, logpref, backend=b),
        "spherical_j": lambda b: kernels.spherical_j_table(8, z, backend=b),
        "rk4_radial": lambda b: np.array(kernels.rk4_radial(h, h * h, 2 * h, w, w_mid, w_end, backend=b)),
    }


def _time(fn, repeat):
    samples = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        samples.append(time.perf_counter() - t0)
    return statistics.median(samples)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--points", type=int, default=2000)
    parser.add_argument("--nmax", type=int, default=400)
    args = parser.parse_args(argv)

    backends = ["numpy"] + (["numba"] if HAVE_NUMBA else [])
    if not HAVE_NUMBA:
        print("numba is not installed; timing the numpy backend only")
    print(f"{'kernel':<16}{'numpy [ms]':>12}{'numba [ms]':>12}{'speedup':>10}{'first call [ms]':>17}{'max rel diff':>14}")
    for name, fn in _cases(args.points, args.nmax).items():
        timings, results, first = {}, {}, float("nan")
        for b in backends:
            t0 = time.perf_counter()
            results[b] = fn(b)
            if b == "numba":
                first = 1e3 * (time.perf_counter() - t0)
            timings[b] = 1e3 * _time(lambda fn=fn, b=b: fn(b), args.repeat)
        if len(backends) == 2:
            ref = results["numpy"]
            diff = np.max(np.abs(results["numba"] - ref)) / max(np.max(np.abs(ref)), 1e-300)
            speedup = timings["numpy"] / timings["numba"]
            print(f"{name:<16}{timings['numpy']:>12.2f}{timings['numba']:>12.2f}{speedup:>10.1f}{first:>17.1f}{diff:>14.1e}")
        else:
            print(f"{name:<16}{timings['numpy']:>12.2f}{'-':>12}{'-':>10}{'-':>17}{'-':>14}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
