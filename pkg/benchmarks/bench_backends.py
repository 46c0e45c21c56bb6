"""Time the compiled kernel backend against the pure-numpy fallback.

Runs each hot kernel (shrinkage prox loops, the half-quadratic ridge pass,
the squared-loss ridge step) and two end-to-end solves under both backends
and prints per-row speedups.  With numba unavailable (or disabled through
MRARC_NO_NUMBA=1) only the numpy column is reported.

Usage: python3 benchmarks/bench_backends.py [--repeats N] [--m M] [--n N]
"""

import argparse
import time

import numpy as np

from mrarc import kernels
from mrarc.atomic import AtomicSet
from mrarc.modal import ModalLoss
from mrarc.solver import SolverConfig, solve_ar_squared, solve_mrar


def best_of(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def kernel_cases(m, n):
    rng = np.random.default_rng(0)
    z = rng.standard_normal(n) * 2.0
    order = rng.permutation(n).astype(np.int64)
    bounds = np.linspace(0, n, 9).astype(np.int64)
    Z = rng.standard_normal((n, 4))
    X = rng.standard_normal((m, n))
    X /= np.linalg.norm(X, axis=0)
    Xt = np.ascontiguousarray(X.T)
    XXt = X @ Xt
    y = rng.standard_normal(m)
    v = rng.standard_normal(n)
    L = np.linalg.cholesky(XXt + 0.05 * np.eye(m))
    b = rng.standard_normal(n)
    return [
        ("soft_threshold", lambda impl: impl.soft_threshold(z, 0.3)),
        ("block_shrink", lambda impl: impl.block_shrink(z, order, bounds, 0.3)),
        ("row_shrink", lambda impl: impl.row_shrink(Z, 0.3)),
        (
            "hq_inner",
            lambda impl: impl.hq_inner(
                X, Xt, XXt, y, v, 0.1, 0.5, np.zeros(n), 1e-8, 10, True
            ),
        ),
        ("squared_zstep", lambda impl: impl.squared_zstep(L, X, Xt, b, 0.1, True)),
    ]


def solve_cases(m, n):
    rng = np.random.default_rng(1)
    X = rng.standard_normal((m, n))
    X /= np.linalg.norm(X, axis=0)
    y = rng.standard_normal(m)
    modal_cfg = SolverConfig(
        lam=1e-3, epsilon=1e-12, max_iter=100, loss=ModalLoss.adaptive()
    )
    squared_cfg = SolverConfig(lam=1e-3, epsilon=1e-12, max_iter=100)
    return [
        ("solve_mrar (100 it)", lambda: solve_mrar(X, y, AtomicSet.sparse(), modal_cfg)),
        (
            "solve_ar_squared (100 it)",
            lambda: solve_ar_squared(X, y, AtomicSet.sparse(), squared_cfg),
        ),
    ]


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=20)
    parser.add_argument("--m", type=int, default=100)
    parser.add_argument("--n", type=int, default=300)
    args = parser.parse_args()

    names = kernels.available_backends()
    kernels.warm_up()
    print(f"backends: {', '.join(names)}   problem: m={args.m}, n={args.n}")
    header = f"{'case':28s}" + "".join(f"{b:>12s}" for b in names)
    if len(names) > 1:
        header += f"{'speedup':>10s}"
    print(header)

    for label, call in kernel_cases(args.m, args.n):
        times = []
        for backend in names:
            impl = kernels.get_backend(backend)
            call(impl)  # one untimed pass
            times.append(best_of(lambda: call(impl), args.repeats))
        row = f"{label:28s}" + "".join(f"{t * 1e6:10.1f}us" for t in times)
        if len(times) > 1:
            row += f"{times[0] / times[-1]:9.1f}x"
        print(row)

    for label, call in solve_cases(args.m, args.n):
        times = []
        for backend in names:
            with kernels.use_backend(backend):
                call()
                times.append(best_of(call, max(args.repeats // 4, 2)))
        row = f"{label:28s}" + "".join(f"{t * 1e3:10.2f}ms" for t in times)
        if len(times) > 1:
            row += f"{times[0] / times[-1]:9.1f}x"
        print(row)


if __name__ == "__main__":
    main()
