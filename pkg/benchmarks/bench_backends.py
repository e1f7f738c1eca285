"""Timing comparison of the compiled kernel core against the numpy fallback.

Both backends expose the same flat evaluation functions (kernel values,
normal derivatives, gradients, Cauchy-Riemann blocks); this script times
them head to head on random well-separated point clouds and prints a small
table of per-call medians and the speedup factor.

Usage: python benchmarks/bench_backends.py [--sizes 64 256 1024] [--repeats 7]
"""

import argparse
import time

import numpy as np

from mfskit import _core_py

try:
    from mfskit import _core
except ImportError:
    _core = None

EPS2 = 1e-24


def make_points(rng, n, ndim):
    """Evaluation points in the unit ball, sources on a shell outside it."""
    x = rng.standard_normal((n, ndim))
    x *= 0.9 * rng.uniform(0.1, 1.0, n)[:, None] / np.linalg.norm(x, axis=1)[:, None]
    y = rng.standard_normal((n, ndim))
    y *= rng.uniform(2.0, 3.0, n)[:, None] / np.linalg.norm(y, axis=1)[:, None]
    nu = rng.standard_normal((n, ndim))
    nu /= np.linalg.norm(nu, axis=1)[:, None]
    return x, y, nu


def cases(rng, n):
    x2, y2, nu2 = make_points(rng, n, 2)
    x3, y3, nu3 = make_points(rng, n, 3)
    return [
        ("lap2_val", lambda m: m.lap2_val(x2, y2, EPS2)),
        ("lap3_val", lambda m: m.lap3_val(x3, y3, EPS2)),
        ("lap2_dn", lambda m: m.lap2_dn(x2, nu2, y2, EPS2)),
        ("lap3_dn", lambda m: m.lap3_dn(x3, nu3, y3, EPS2)),
        ("lap2_grad", lambda m: m.lap2_grad(x2, y2, EPS2)),
        ("lap3_grad", lambda m: m.lap3_grad(x3, y3, EPS2)),
        ("cr_val", lambda m: m.cr_val(x2, y2, EPS2)),
        ("cr_dz", lambda m: m.cr_dz(x2, y2, EPS2)),
    ]


def median_time(fn, repeats):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return float(np.median(times))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[64, 256, 1024])
    ap.add_argument("--repeats", type=int, default=7)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    if _core is None:
        print("compiled core not built; timing the python backend alone")
    rng = np.random.default_rng(args.seed)
    print(f"{'case':<12}{'n':>6}{'python [ms]':>14}{'compiled [ms]':>15}{'speedup':>9}")
    for n in args.sizes:
        for name, call in cases(rng, n):
            t_py = median_time(lambda: call(_core_py), args.repeats)
            line = f"{name:<12}{n:>6}{1e3 * t_py:>14.3f}"
            if _core is not None:
                t_c = median_time(lambda: call(_core), args.repeats)
                line += f"{1e3 * t_c:>15.3f}{t_py / t_c:>9.2f}"
                out_py = call(_core_py)
                out_c = call(_core)
                # entries near zero (nu almost tangential) carry no relative
                # accuracy; the absolute floor covers them
                if not np.allclose(out_py, out_c, rtol=1e-10, atol=1e-14):
                    line += "  MISMATCH"
            print(line)


if __name__ == "__main__":
    main()
