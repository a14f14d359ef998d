"""Timing comparison of the compiled kernels against the numpy fallback.

Each workload calls both backends with identical arguments and checks that
the integer outputs (counts) agree exactly before reporting times.  Float
aggregates are allowed to differ in the last bits, so only counts gate.

Run from the repo root after an editable install:

    python3 benchmarks/bench_kernels.py
    python3 benchmarks/bench_kernels.py --repeat 5 --t 11
"""

import argparse
import math
import time

import numpy as np

from diophcurve._kernels import pyfallback
from diophcurve.approx import PowerLog
from diophcurve.curve import catalog

try:
    from diophcurve._kernels import _ckernels
except ImportError:
    _ckernels = None


def _params(curve):
    kind, coeffs, _, a, b, c1, _ = curve.kernel_params()
    return kind, coeffs, a, b, curve.f(a), curve.f(b), c1, curve.d2_sign()


def _best_of(fn, repeat):
    best = math.inf
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def workloads(t, q_near, grid, samples):
    cur = catalog()["parabola"]
    kind, coeffs, a, b, fa, fb, c1, d2s = _params(cur)
    psi = PowerLog(1, 2, 0)
    q_lo, q_hi = 1 << t, (1 << (t + 1)) - 1
    psi_t = psi.eval(float(q_lo))
    gamma = math.ldexp(math.sqrt(2.0 * psi_t), -t)
    w = 2.0 * t * psi_t / q_lo
    s_vals = np.array([0.8, 0.5])

    xs = np.linspace(a, b, grid)
    th1 = np.ascontiguousarray(PowerLog(1, 0.5, 0).eval_array(
        np.arange(1, (1 << 12) + 1, dtype=np.int64)))
    th_mc = np.ascontiguousarray(
        PowerLog(1, 0.5, 0).eval_array(np.arange(1, 10001, dtype=np.int64))[None, :]
        .repeat(2, axis=0))

    return [
        ("near_count  Q=%d" % q_near,
         lambda k: k.near_count_chunk(kind, coeffs, a, b, 1, q_near, 1e-5, False),
         lambda r: r[0]),
        ("rect_mult   t=%d m=[-6,6]" % t,
         lambda k: k.rect_cover_mult_chunk(kind, coeffs, a, b, fa, fb, c1, d2s,
                                           cur.d2_max_abs(), q_lo, q_hi, gamma,
                                           -6, 6, s_vals, False),
         lambda r: r[0]),
        ("strip       t=%d" % t,
         lambda k: k.strip_cover_chunk(kind, coeffs, a, b, fa, fb, c1, d2s,
                                       q_lo, q_hi, w, s_vals, False),
         lambda r: r[0]),
        ("rect_sim    t=%d" % t,
         lambda k: k.rect_cover_sim_chunk(kind, coeffs, a, b, fa, fb, c1, d2s,
                                          q_lo, q_hi, psi_t / q_lo,
                                          psi_t / q_lo, s_vals, False),
         lambda r: r[0]),
        ("measure     grid=%d Q=%d" % (grid, 1 << 12),
         lambda k: k.measure_chunk(kind, coeffs, xs, 1, 1 << 12, th1, th1, True),
         lambda r: r),
        ("mc          n=%d Q=%d" % (samples, 10000),
         lambda k: k.mc_chunk(12345, 0, samples, 2, 1, 10000, th_mc, False),
         lambda r: r),
        ("unit_coords n=%d" % (samples * 2),
         lambda k: k.unit_coords(7, 0, samples, 2),
         lambda r: r.shape),
    ]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--t", type=int, default=10, help="dyadic block index")
    ap.add_argument("--q-near", type=int, default=3000)
    ap.add_argument("--grid", type=int, default=2000)
    ap.add_argument("--samples", type=int, default=20000)
    args = ap.parse_args()

    if _ckernels is None:
        print("compiled backend not built (DIOPH_NO_EXT?); timing numpy only")

    rows = []
    for name, call, key in workloads(args.t, args.q_near, args.grid, args.samples):
        t_np, r_np = _best_of(lambda: call(pyfallback), args.repeat)
        if _ckernels is not None:
            t_cy, r_cy = _best_of(lambda: call(_ckernels), args.repeat)
            assert key(r_np) == key(r_cy), (name, key(r_np), key(r_cy))
            rows.append((name, t_np, t_cy))
        else:
            rows.append((name, t_np, None))

    print()
    print("%-28s %10s %10s %8s" % ("workload", "numpy", "cython", "speedup"))
    for name, t_np, t_cy in rows:
        if t_cy is None:
            print("%-28s %9.4fs %10s %8s" % (name, t_np, "-", "-"))
        else:
            print("%-28s %9.4fs %9.4fs %7.1fx" % (name, t_np, t_cy, t_np / t_cy))


if __name__ == "__main__":
    main()
