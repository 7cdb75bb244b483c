"""Compiled vs pure-Python kernels: orbit propagation, event location, Jacobi.

    python3 benchmarks/bench_kernels.py [--repeat 3] [--jacobi-n 129]
"""

import argparse
import timeit

import numpy as np

from periodmap import _pykernels

try:
    from periodmap import _kernels
except ImportError:
    _kernels = None

L_K3_B2 = 4.68568033658708


def cases(mod, jacobi_n):
    y0 = np.array([2.0, 0.0])
    y5 = np.array([2.0, 0.0, -0.1, 0.0, 0.0])
    grid = np.linspace(0, 2 * L_K3_B2, 4097)[1:]
    rng = np.random.default_rng(0)
    X = rng.standard_normal((jacobi_n, jacobi_n))
    A = np.ascontiguousarray(X + X.T)
    return {
        "propagate orbit (2048 outputs)": lambda: mod.propagate(y0, 3.0, 0, 0, np.ascontiguousarray(grid[::2]), 1e-13, 1e-13),
        "propagate ybar, 2 periods": lambda: mod.propagate(y5, 3.0, 1, 1, grid, 1e-13, 1e-13),
        "half_period event": lambda: mod.half_period(y0, 3.0, 1e-13, 1e-13, 0.02, 1e4),
        f"jacobi_eigh n={jacobi_n}": lambda: mod.jacobi_eigh(A, 1e-14, 100),
    }


def best(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=3)
    p.add_argument("--jacobi-n", type=int, default=129, help="129 is the even block at N = 256")
    args = p.parse_args()
    if _kernels is None:
        print("compiled kernels not built; only timing the fallback")
    py_cases = cases(_pykernels, args.jacobi_n)
    c_cases = cases(_kernels, args.jacobi_n) if _kernels else {}
    print(f"{'kernel':34s} {'compiled [s]':>13s} {'python [s]':>11s} {'speedup':>8s}")
    for name, fn in py_cases.items():
        t_py = best(fn, args.repeat)
        if name in c_cases:
            t_c = best(c_cases[name], args.repeat)
            print(f"{name:34s} {t_c:13.4f} {t_py:11.4f} {t_py / t_c:8.1f}")
        else:
            print(f"{name:34s} {'-':>13s} {t_py:11.4f}")


if __name__ == "__main__":
    main()
