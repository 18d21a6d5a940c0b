"""Time the compiled and numpy kernel backends side by side.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--size 400]
"""
import argparse
import timeit

import numpy as np

from hilfspline import _backend, fracint, specfun
from hilfspline.experiments import linear_problem
from hilfspline.solver import SolverConfig, solve, uniform_knots


def bench_inc_beta(mod, size):
    rng = np.random.default_rng(0)
    z = rng.uniform(0, 1, size * 250)
    a = rng.uniform(0.5, 10, z.size)
    b = np.full(z.size, 0.5)
    B = np.asarray(specfun.beta_fn(a, b))
    return lambda: mod.inc_beta_vec(z, 1 - z, a, b, B)


def bench_tensor(mod, size):
    bp = np.linspace(0.0, 10.0, size + 1)
    pts = np.linspace(0.0, 10.0, 2 * size)

    def run():
        fracint.kernels = mod
        fracint.integration_tensor_array(bp[:-1], bp[1:], 2, 0.5, pts)

    return run


def bench_solve(mod, size):
    prob = linear_problem(T=15.0)
    knots = uniform_knots(0.0, 15.0, 15.0 / size)

    def run():
        fracint.kernels = mod
        specfun.kernels = mod
        solve(prob, SolverConfig(q=1), knots)

    return run


CASES = {"inc_beta": bench_inc_beta, "J tensor": bench_tensor, "linear solve": bench_solve}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--size", type=int, default=400, help="number of intervals")
    args = ap.parse_args()
    backends = _backend.available_backends()
    saved = fracint.kernels, specfun.kernels
    print(f"{'case':<14}" + "".join(f"{name:>12}" for name in backends) + f"{'speedup':>10}")
    try:
        for case, make in CASES.items():
            times = {}
            for name, mod in backends.items():
                fn = make(mod, args.size)
                fn()  # warm up
                times[name] = min(timeit.repeat(fn, number=1, repeat=args.repeat))
            row = f"{case:<14}" + "".join(f"{t * 1e3:>10.2f}ms" for t in times.values())
            if len(times) == 2:
                row += f"{times['python'] / times['cython']:>9.1f}x"
            print(row)
    finally:
        fracint.kernels, specfun.kernels = saved


if __name__ == "__main__":
    main()
