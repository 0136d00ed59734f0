"""Time the compiled kernels against their pure-numpy counterparts.

Usage: python benchmarks/bench_kernels.py [--repeat N]

Both paths are called directly, so one process covers both; the
BSRLAB_DISABLE_NUMBA flag only changes which one the dispatchers pick.
"""
import argparse
import timeit

import numpy as np

from bsrlab import kernels as K
from bsrlab.sphere import build_quadrature


def cases(rng):
    quad = build_quadrature(400, 802)
    nodes, w = quad.nodes, quad.weights
    vals = rng.standard_normal(quad.size) + 1j * rng.standard_normal(quad.size)
    theta = np.array([0.0, 0.6, 0.8])
    x = rng.uniform(-1, 1, 5000)
    xs = np.cos(np.linspace(0.01, 3.13, 240))
    a = rng.standard_normal(300) + 1j * rng.standard_normal(300)
    b = rng.standard_normal(300) + 1j * rng.standard_normal(300)
    pts = rng.standard_normal((300, 3))
    pts /= np.linalg.norm(pts, axis=1)[:, None]
    return {
        "legendre_table (l<=70, 240 polar nodes)": (
            lambda: K.legendre_table_numpy(70, xs), lambda: K.legendre_table_loop(70, xs)),
        "legendre_table (l<=60, 5000 pts)": (
            lambda: K.legendre_table_numpy(60, x), lambda: K.legendre_table_loop(60, x)),
        "addition_double_sum (300 nodes, l=20)": (
            lambda: K.addition_double_sum_numpy(pts, a, b, 20),
            lambda: K.addition_double_sum_loop(pts, a, b, 20)),
        f"oscillatory_sum ({quad.size} nodes)": (
            lambda: K.oscillatory_sum_numpy(nodes, w, vals, theta, 50.0),
            lambda: K.oscillatory_sum_loop(nodes, w, vals, theta, 50.0)),
        "spherical_jn_complex (l<=200, z=40+i)": (
            lambda: K.spherical_jn_complex_numpy(200, 40 + 1j),
            lambda: K.spherical_jn_complex_loop(200, 40 + 1j)),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    print(f"{'kernel':42s} {'numpy [ms]':>11s} {'numba [ms]':>11s} {'speedup':>8s}")
    for name, (fn_np, fn_nb) in cases(rng).items():
        fn_nb()  # compile outside the timing
        t_np = min(timeit.repeat(fn_np, number=1, repeat=args.repeat)) * 1e3
        t_nb = min(timeit.repeat(fn_nb, number=1, repeat=args.repeat)) * 1e3
        print(f"{name:42s} {t_np:11.3f} {t_nb:11.3f} {t_np / t_nb:8.2f}")


if __name__ == "__main__":
    main()
