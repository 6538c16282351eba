"""Fundamental solutions of u' = (lambda J^{-1} W - B) u on subintervals.

The workhorse is classical RK4 on a fixed grid with step-doubling: the grid
is doubled until two consecutive answers agree to the local certificate
tolerance.  Coefficient tables on the half-step grid are cached per
(x0, x1, nsteps) on the system, and whole batches of lambda share them.
Segments too stiff for that budget fall back to an exponential midpoint
product (exact for constant coefficients), also under step doubling.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

from ._accel import rk4_propagate
from .errors import StepControlError
from .systems import IntervalSystem

LOCAL_TOL = 1e-10
MAX_STEPS = 1 << 16
MAGNUS_MAX_STEPS = 1 << 12
STIFF_PRODUCT = 60.0


def _store(cache: dict, key, value):
    cache[key] = value
    # keep the cache from growing without bound across window scans
    if len(cache) > 64:
        for k in list(cache):
            if k[0] in ("tables", "shift") and k != key:
                del cache[k]
                break


def _tables(system: IntervalSystem, x0: float, x1: float, nsteps: int):
    key = ("tables", float(x0), float(x1), int(nsteps))
    hit = system._cache.get(key)
    if hit is not None:
        return hit
    xs = x0 + (x1 - x0) * np.arange(2 * nsteps + 1) / (2 * nsteps)
    if system.shift_parent is not None:
        # base + t*C: reuse the base tables, only the B table gets an axpy
        base, t, direction = system.shift_parent
        a, b0 = _tables(base, x0, x1, nsteps)
        inc_key = ("shift", direction, float(x0), float(x1), int(nsteps))
        inc = base._cache.get(inc_key)
        if inc is None:
            inc = np.empty((xs.size, base.n, base.n), dtype=np.complex128)
            for i, x in enumerate(xs):
                inc[i] = np.linalg.solve(
                    base.j(x), np.asarray(direction(x), dtype=np.complex128))
            _store(base._cache, inc_key, inc)
        tab = (a, b0 + t * inc)
        _store(system._cache, key, tab)
        return tab
    n = system.n
    a = np.empty((xs.size, n, n), dtype=np.complex128)
    b = np.empty_like(a)
    unweighted = not system.weighted
    for i, x in enumerate(xs):
        jm = system.j(x)
        a[i] = np.linalg.inv(jm) if unweighted else np.linalg.solve(jm, system.w(x))
        b[i] = system.b(x)
    _store(system._cache, key, (a, b))
    return a, b


def _coefficient_scale(system: IntervalSystem, x0: float, x1: float):
    key = ("scale", float(x0), float(x1))
    hit = system._cache.get(key)
    if hit is not None:
        return hit
    xs = np.linspace(x0, x1, 17)
    amax = 0.0
    bmax = 0.0
    for x in xs:
        jm = system.j(x)
        if system.weighted:
            am = np.linalg.solve(jm, system.w(x))
        else:
            am = np.linalg.inv(jm)
        amax = max(amax, float(np.linalg.norm(am, 2)))
        bmax = max(bmax, float(np.linalg.norm(system.b(x), 2)))
    system._cache[key] = (amax, bmax)
    return amax, bmax


def _magnus(system: IntervalSystem, lam: complex, x0: float, x1: float,
            tol: float) -> np.ndarray:
    prev = None
    nsteps = 4
    while nsteps <= MAGNUS_MAX_STEPS:
        h = (x1 - x0) / nsteps
        phi = np.eye(system.n, dtype=np.complex128)
        for k in range(nsteps):
            xm = x0 + (k + 0.5) * h
            jm = system.j(xm)
            a = np.linalg.solve(jm, system.w(xm)) if system.weighted \
                else np.linalg.inv(jm)
            g = lam * a - system.b(xm)
            phi = scipy.linalg.expm(h * g) @ phi
        if prev is not None:
            scale = max(1.0, float(np.linalg.norm(phi, 2)))
            if np.linalg.norm(phi - prev, 2) <= tol * scale:
                return phi
        prev = phi
        nsteps *= 2
    raise StepControlError(
        f"exponential stepping failed to certify on [{x0:g}, {x1:g}]"
    )


def fundamental_solution_batch(system: IntervalSystem, lams, x0: float = 0.0,
                               x1: float = 1.0,
                               tol: float = LOCAL_TOL) -> np.ndarray:
    """Phi_lambda(x1, x0) for a batch of spectral parameters, shape (L, n, n)."""
    lams = np.atleast_1d(np.asarray(lams, dtype=np.complex128))
    out = np.empty((lams.size, system.n, system.n), dtype=np.complex128)
    if x1 == x0:
        out[:] = np.eye(system.n)
        return out
    span = abs(x1 - x0)
    amax, bmax = _coefficient_scale(system, x0, x1)
    growth = (np.abs(lams) * amax + bmax) * span

    stiff = growth > STIFF_PRODUCT
    for i in np.nonzero(stiff)[0]:
        out[i] = _magnus(system, complex(lams[i]), x0, x1, tol)
    todo = np.nonzero(~stiff)[0]
    if todo.size == 0:
        return out

    gmax = float(growth[todo].max())
    nsteps = 8
    while nsteps < 2.0 * gmax:
        nsteps *= 2
    # start near the step count that certified the last comparable batch
    hints = system._cache.setdefault(("nhint", float(x0), float(x1), float(tol)), {})
    bucket = int(np.ceil(np.log2(max(gmax, 1.0))))
    hint = hints.get(bucket)
    if hint is not None:
        nsteps = max(nsteps, hint // 2)
    h = (x1 - x0) / nsteps
    a, b = _tables(system, x0, x1, nsteps)
    prev = rk4_propagate(a, b, lams[todo], h)
    pending = np.arange(todo.size)
    while pending.size and nsteps < MAX_STEPS:
        nsteps *= 2
        h = (x1 - x0) / nsteps
        a, b = _tables(system, x0, x1, nsteps)
        cur = rk4_propagate(a, b, lams[todo[pending]], h)
        done = []
        for k, idx in enumerate(pending):
            scale = max(1.0, float(np.linalg.norm(cur[k], 2)))
            if np.linalg.norm(cur[k] - prev[idx], 2) <= tol * scale:
                out[todo[idx]] = cur[k]
                done.append(idx)
            prev[idx] = cur[k]
        pending = np.array([i for i in pending if i not in set(done)], dtype=int)
        if pending.size == 0:
            hints[bucket] = max(hints.get(bucket, 0), nsteps)
    for idx in pending:
        # the fixed-grid budget ran out; hand the stragglers to the
        # exponential integrator before giving up
        out[todo[idx]] = _magnus(system, complex(lams[todo[idx]]), x0, x1, tol)
    return out


def fundamental_solution(system: IntervalSystem, lam: complex = 0.0,
                         x0: float = 0.0, x1: float = 1.0,
                         tol: float = LOCAL_TOL) -> np.ndarray:
    return fundamental_solution_batch(system, [lam], x0, x1, tol)[0]


def propagate_grid(system: IntervalSystem, lam: complex, xs) -> np.ndarray:
    """Phi(xs[k], xs[0]) along an increasing grid, by segment products."""
    xs = np.asarray(xs, dtype=float)
    n = system.n
    out = np.empty((xs.size, n, n), dtype=np.complex128)
    out[0] = np.eye(n)
    for k in range(1, xs.size):
        seg = fundamental_solution(system, lam, xs[k - 1], xs[k])
        out[k] = seg @ out[k - 1]
    return out
