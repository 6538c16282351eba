"""Hot numeric kernels with a numba backend and a pure-numpy twin.

Backend selection:

* ``CAUCHYKIT_NUMBA=0``  force the numpy implementations
* ``CAUCHYKIT_NUMBA=1``  require numba (ImportError propagates)
* unset / ``auto``       use numba when it imports, numpy otherwise

Both twins share signatures and are exposed under ``*_numba`` / ``*_numpy``
names so the benchmark and the parity tests can compare them directly.
"""

from __future__ import annotations

import os

import numpy as np

_flag = os.environ.get("CAUCHYKIT_NUMBA", "auto").strip().lower()
if _flag in ("0", "false", "off", "numpy"):
    _want_numba = False
elif _flag in ("1", "true", "on", "numba"):
    _want_numba = True
else:
    _want_numba = None  # auto

HAVE_NUMBA = False
if _want_numba is not False:
    try:
        from numba import njit

        HAVE_NUMBA = True
    except ImportError:
        if _want_numba is True:
            raise

USE_NUMBA = HAVE_NUMBA and _want_numba is not False


def backend() -> str:
    return "numba" if USE_NUMBA else "numpy"


# ---------------------------------------------------------------------------
# RK4 propagation of Phi' = (lam * a(x) - b(x)) Phi over a fixed step grid.
#
# ``a_half``/``b_half`` hold coefficient samples on the half-step grid
# x0 + k*h/2 for k = 0..2N, so one RK4 step k uses rows 2k, 2k+1, 2k+2.
# ``h`` may be negative (backward sweeps).  Output: one propagator per lam.


def rk4_propagate_numpy(a_half: np.ndarray, b_half: np.ndarray,
                        lams: np.ndarray, h: float) -> np.ndarray:
    nsteps = (a_half.shape[0] - 1) // 2
    n = a_half.shape[1]
    lam = np.asarray(lams, dtype=np.complex128).reshape(-1, 1, 1)
    nlam = lam.shape[0]
    phi = np.broadcast_to(np.eye(n, dtype=np.complex128), (nlam, n, n)).copy()
    for k in range(nsteps):
        g0 = lam * a_half[2 * k] - b_half[2 * k]
        g1 = lam * a_half[2 * k + 1] - b_half[2 * k + 1]
        g2 = lam * a_half[2 * k + 2] - b_half[2 * k + 2]
        k1 = g0 @ phi
        k2 = g1 @ (phi + (0.5 * h) * k1)
        k3 = g1 @ (phi + (0.5 * h) * k2)
        k4 = g2 @ (phi + h * k3)
        phi = phi + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return phi


def resolvent_sum_numpy(b0: np.ndarray, nodes: np.ndarray,
                        weights: np.ndarray) -> np.ndarray:
    """sum_k weights[k] * (nodes[k] I - b0)^{-1} (weights carry all factors)."""
    n = b0.shape[0]
    eye = np.eye(n, dtype=np.complex128)
    shifted = nodes.reshape(-1, 1, 1) * eye - b0
    inv = np.linalg.inv(shifted)
    return np.einsum("k,kij->ij", weights, inv)


if HAVE_NUMBA:

    # the propagation matrices are tiny (n rarely above 8), so explicit loops
    # beat BLAS dispatch by an order of magnitude inside the jit

    @njit(cache=True, inline="always")
    def _mm(a, b, out):  # pragma: no cover - jitted
        n = a.shape[0]
        for i in range(n):
            for j in range(n):
                s = 0.0 + 0.0j
                for p in range(n):
                    s += a[i, p] * b[p, j]
                out[i, j] = s

    @njit(cache=True)
    def _rk4_propagate_nb(a_half, b_half, lams, h):  # pragma: no cover - jitted
        nsteps = (a_half.shape[0] - 1) // 2
        n = a_half.shape[1]
        nlam = lams.shape[0]
        out = np.empty((nlam, n, n), dtype=np.complex128)
        g0 = np.empty((n, n), dtype=np.complex128)
        g1 = np.empty((n, n), dtype=np.complex128)
        g2 = np.empty((n, n), dtype=np.complex128)
        k1 = np.empty((n, n), dtype=np.complex128)
        k2 = np.empty((n, n), dtype=np.complex128)
        k3 = np.empty((n, n), dtype=np.complex128)
        k4 = np.empty((n, n), dtype=np.complex128)
        tmp = np.empty((n, n), dtype=np.complex128)
        phi = np.empty((n, n), dtype=np.complex128)
        for m in range(nlam):
            lam = lams[m]
            for i in range(n):
                for j in range(n):
                    phi[i, j] = 1.0 if i == j else 0.0
            for k in range(nsteps):
                r = 2 * k
                for i in range(n):
                    for j in range(n):
                        g0[i, j] = lam * a_half[r, i, j] - b_half[r, i, j]
                        g1[i, j] = lam * a_half[r + 1, i, j] - b_half[r + 1, i, j]
                        g2[i, j] = lam * a_half[r + 2, i, j] - b_half[r + 2, i, j]
                _mm(g0, phi, k1)
                for i in range(n):
                    for j in range(n):
                        tmp[i, j] = phi[i, j] + (0.5 * h) * k1[i, j]
                _mm(g1, tmp, k2)
                for i in range(n):
                    for j in range(n):
                        tmp[i, j] = phi[i, j] + (0.5 * h) * k2[i, j]
                _mm(g1, tmp, k3)
                for i in range(n):
                    for j in range(n):
                        tmp[i, j] = phi[i, j] + h * k3[i, j]
                _mm(g2, tmp, k4)
                for i in range(n):
                    for j in range(n):
                        phi[i, j] = phi[i, j] + (h / 6.0) * (
                            k1[i, j] + 2.0 * k2[i, j] + 2.0 * k3[i, j] + k4[i, j])
            out[m] = phi
        return out

    @njit(cache=True)
    def _resolvent_sum_nb(b0, nodes, weights):  # pragma: no cover - jitted
        n = b0.shape[0]
        eye = np.zeros((n, n), dtype=np.complex128)
        for i in range(n):
            eye[i, i] = 1.0
        acc = np.zeros((n, n), dtype=np.complex128)
        for k in range(nodes.shape[0]):
            acc += weights[k] * np.linalg.solve(nodes[k] * eye - b0, eye)
        return acc

    def rk4_propagate_numba(a_half, b_half, lams, h):
        return _rk4_propagate_nb(
            np.ascontiguousarray(a_half, dtype=np.complex128),
            np.ascontiguousarray(b_half, dtype=np.complex128),
            np.ascontiguousarray(lams, dtype=np.complex128),
            float(h),
        )

    def resolvent_sum_numba(b0, nodes, weights):
        return _resolvent_sum_nb(
            np.ascontiguousarray(b0, dtype=np.complex128),
            np.ascontiguousarray(nodes, dtype=np.complex128),
            np.ascontiguousarray(weights, dtype=np.complex128),
        )

else:
    rk4_propagate_numba = None
    resolvent_sum_numba = None


if USE_NUMBA:
    rk4_propagate = rk4_propagate_numba
    resolvent_sum = resolvent_sum_numba
else:
    rk4_propagate = rk4_propagate_numpy
    resolvent_sum = resolvent_sum_numpy
