"""Time the float64 f_n scan: numba against numpy.

Usage: python3 benchmarks/bench_kernels.py [--points 2000] [--repeat 5]
"""

import argparse
import time

import numpy as np

from pcfbounds import _kernels
from pcfbounds import integral as ig
from pcfbounds.numerics.context import PrecisionContext


def setup(lam, n, points):
    ctx = PrecisionContext(digits=30)
    sd = ig.saddle(lam, ctx)
    k = ig.cauchy_kernel(n)
    exps, coefs = k.arrays()
    svals = np.geomspace(1e-3, 1e3, points)
    return svals, (float(sd.lam), float(sd.s_minus), float(sd.w0), float(sd.A), exps, coefs, k.qpow, k.ppow, 128)


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--points", type=int, default=2000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    print(f"{'lambda':>8} {'n':>2} {'numpy [s]':>10} {'numba [s]':>10} {'speedup':>8} {'max diff':>10}")
    for lam in (0.0, 1.0, 25.0):
        for n in (1, 3):
            svals, rest = setup(lam, n, args.points)
            t_np = best_of(lambda: _kernels._fn_scan_numpy(svals, *rest), args.repeat)
            ref = _kernels._fn_scan_numpy(svals, *rest)
            if _kernels.HAVE_NUMBA:
                jit = _kernels._jitted()
                jit(svals[:2], *rest)  # compile outside the timing
                t_nb = best_of(lambda: jit(svals, *rest), args.repeat)
                diff = float(np.max(np.abs(jit(svals, *rest) - ref)))
                print(f"{lam:8.1f} {n:2d} {t_np:10.4f} {t_nb:10.4f} {t_np / t_nb:8.1f} {diff:10.2e}")
            else:
                print(f"{lam:8.1f} {n:2d} {t_np:10.4f} {'n/a':>10} {'n/a':>8} {'n/a':>10}")


if __name__ == "__main__":
    main()
