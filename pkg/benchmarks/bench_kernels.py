"""Timings for the hot kernels: numba twin vs pure numpy.

Runs the batched RK4 propagator and the resolvent quadrature sum at the
problem sizes the eigenvalue scan actually produces (small n, many lambdas,
a few hundred steps) and prints best-of-``--repeat`` wall times plus the
speedup.  Numbers are from whatever machine this runs on; the point is the
ratio, not the absolute times.

    python3 benchmarks/bench_kernels.py
    python3 benchmarks/bench_kernels.py --sizes 2 8 --lams 64 --repeat 7
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from cauchykit import _accel


def _coefficient_tables(rng, n, nsteps):
    # smooth-ish random fields on the half-step grid, like propagation builds
    xs = np.linspace(0.0, 1.0, 2 * nsteps + 1)
    base_a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    base_b = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    a = np.empty((2 * nsteps + 1, n, n), dtype=np.complex128)
    b = np.empty_like(a)
    for k, x in enumerate(xs):
        a[k] = np.cos(2.3 * x) * base_a
        b[k] = np.sin(1.7 * x + 0.4) * base_b
    return a, b


def _best_of(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_rk4(rng, n, nsteps, nlam, repeat):
    a, b = _coefficient_tables(rng, n, nsteps)
    lams = np.linspace(-8.0, 8.0, nlam).astype(np.complex128)
    h = 1.0 / nsteps

    t_np = _best_of(lambda: _accel.rk4_propagate_numpy(a, b, lams, h), repeat)
    if _accel.rk4_propagate_numba is None:
        return t_np, None, 0.0
    _accel.rk4_propagate_numba(a, b, lams, h)  # compile outside the clock
    t_nb = _best_of(lambda: _accel.rk4_propagate_numba(a, b, lams, h), repeat)
    gap = np.max(np.abs(_accel.rk4_propagate_numpy(a, b, lams, h)
                        - _accel.rk4_propagate_numba(a, b, lams, h)))
    return t_np, t_nb, gap


def bench_resolvent(rng, n, nodes, repeat):
    b0 = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    zs = 3.0 * np.exp(2j * np.pi * np.arange(nodes) / nodes)
    ws = np.full(nodes, 1.0 / nodes, dtype=np.complex128)

    t_np = _best_of(lambda: _accel.resolvent_sum_numpy(b0, zs, ws), repeat)
    if _accel.resolvent_sum_numba is None:
        return t_np, None, 0.0
    _accel.resolvent_sum_numba(b0, zs, ws)
    t_nb = _best_of(lambda: _accel.resolvent_sum_numba(b0, zs, ws), repeat)
    gap = np.max(np.abs(_accel.resolvent_sum_numpy(b0, zs, ws)
                        - _accel.resolvent_sum_numba(b0, zs, ws)))
    return t_np, t_nb, gap


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[2, 4, 8])
    ap.add_argument("--steps", type=int, default=256)
    ap.add_argument("--lams", type=int, default=48)
    ap.add_argument("--nodes", type=int, default=512)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    rng = np.random.default_rng(args.seed)
    print(f"numba available: {_accel.HAVE_NUMBA}   active backend: {_accel.backend()}")
    print()
    hdr = f"{'kernel':<26}{'numpy':>10}{'numba':>10}{'speedup':>9}{'max gap':>11}"
    print(hdr)
    print("-" * len(hdr))
    for n in args.sizes:
        t_np, t_nb, gap = bench_rk4(rng, n, args.steps, args.lams, args.repeat)
        label = f"rk4 n={n} x{args.lams} lams"
        if t_nb is None:
            print(f"{label:<26}{t_np * 1e3:>8.2f}ms{'-':>10}{'-':>9}{'-':>11}")
        else:
            print(f"{label:<26}{t_np * 1e3:>8.2f}ms{t_nb * 1e3:>8.2f}ms"
                  f"{t_np / t_nb:>8.1f}x{gap:>11.1e}")
    for n in args.sizes:
        t_np, t_nb, gap = bench_resolvent(rng, n, args.nodes, args.repeat)
        label = f"resolvent n={n} x{args.nodes}"
        if t_nb is None:
            print(f"{label:<26}{t_np * 1e3:>8.2f}ms{'-':>10}{'-':>9}{'-':>11}")
        else:
            print(f"{label:<26}{t_np * 1e3:>8.2f}ms{t_nb * 1e3:>8.2f}ms"
                  f"{t_np / t_nb:>8.1f}x{gap:>11.1e}")


if __name__ == "__main__":
    main()
