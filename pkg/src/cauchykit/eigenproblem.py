"""Eigenvalues of realized symmetric systems and discrete cross-checks.

A realization pairs a symmetric system with a Lagrangian domain in its trace
space.  lambda is an eigenvalue exactly when the lambda-Cauchy-data space
meets the domain, i.e. when the relative unitary U(lambda) has eigenvalue 1,
so the window scan tracks eigenangle branches of U over lambda and bisects
their zero passages; multiplicity is the number of passages clustering at
one root.

Two independent discretizations back this up: a midpoint (box) finite
difference generalized eigensolver on the same boundary condition, and a
square collocation matrix used for graph-projection gaps.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np
import scipy.sparse
import scipy.sparse.linalg

from . import linalg
from .calderon import green_form
from .errors import CauchyKitError, RefinementBudgetError
from .propagation import fundamental_solution_batch, _coefficient_scale
from .symplectic import (ANGLE_SNAP, LagrangianFrame, _eigenangles,
                         _match_circular)
from .systems import IntervalSystem

ANGLE_STEP = 0.35      # max eigenangle motion per lambda step before refining
LAM_TOL = 1e-8         # scan roots are bisected to this absolute width
CLUSTER_TOL = 1e-6     # roots closer than this merge into one multiplicity
SCAN_ODE_TOL = 1e-8    # bracketing needs sign fidelity, not full accuracy
BISECT_ODE_TOL = 1e-9  # root polishing and membership checks run tighter
RESIDUAL_RTOL = 1e-8   # discrete eigenpair acceptance
IMAG_RTOL = 1e-6


@dataclass(eq=False)
class RealizedOperator:
    """Symmetric system together with a Lagrangian boundary condition."""

    system: IntervalSystem
    domain: LagrangianFrame
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not isinstance(self.domain, LagrangianFrame):
            self.domain = LagrangianFrame.from_columns(self.domain)
        if not self.system.symmetric:
            raise CauchyKitError("realizations require a symmetric system")
        if not self.space.is_lagrangian(self.domain):
            raise CauchyKitError("domain frame is not Lagrangian for this system")

    @property
    def space(self):
        if "space" not in self._cache:
            self._cache["space"] = green_form(self.system)
        return self._cache["space"]

    @property
    def w_dom_inv(self) -> np.ndarray:
        if "w_dom_inv" not in self._cache:
            w = self.space.lagrangian_unitary(self.domain)
            self._cache["w_dom_inv"] = w.conj().T
        return self._cache["w_dom_inv"]

    def amax(self) -> float:
        if "amax" not in self._cache:
            self._cache["amax"] = _coefficient_scale(self.system, 0.0, 1.0)[0]
        return self._cache["amax"]


def _graph_angles(op: RealizedOperator, phis: np.ndarray) -> list:
    """Eigenangles of U(lambda) for a batch of propagators."""
    std = op.space.standard_form()
    n = op.system.n
    top = std.s_inv[:, :n]
    bot = std.s_inv[:, n:]
    out = []
    for phi in phis:
        g = top + bot @ phi
        gp, gm = g[: std.p], g[std.p:]
        w = gm @ np.linalg.inv(gp)
        u, _, vh = np.linalg.svd(w)
        out.append(_eigenangles((u @ vh) @ op.w_dom_inv))
    return out


def _phi_batch(op: RealizedOperator, lams, tol=SCAN_ODE_TOL):
    return fundamental_solution_batch(op.system, np.asarray(lams, float),
                                      0.0, 1.0, tol=tol)


def _scan_count(width: float, amax: float, n: int) -> int:
    est = int(np.ceil(width * max(amax, 1e-3) / ANGLE_STEP)) + 9
    return int(np.clip(est, 17, 1024))


def find_eigenvalues(op: RealizedOperator, window: Tuple[float, float],
                     scan: Optional[int] = None,
                     cluster_tol: float = CLUSTER_TOL) -> np.ndarray:
    """Eigenvalues (with multiplicity) inside a closed real window."""
    lo, hi = float(window[0]), float(window[1])
    if not hi > lo:
        raise CauchyKitError("window must be a nondegenerate interval")
    if scan is None:
        scan = _scan_count(hi - lo, op.amax(), op.system.n)
    lams = list(np.linspace(lo, hi, scan))
    angles = _graph_angles(op, _phi_batch(op, lams))

    # refine lambda steps whose eigenangle motion is too large to bracket
    j = 0
    guard = 0
    while j + 1 < len(lams):
        _, disp = _match_circular(angles[j], angles[j + 1])
        if np.max(np.abs(disp)) <= 2.0 * ANGLE_STEP:
            j += 1
            continue
        guard += 1
        if guard > 8 * scan:
            raise RefinementBudgetError(
                f"window scan refinement stalled near lambda={lams[j]:.6g}"
            )
        mid = 0.5 * (lams[j] + lams[j + 1])
        lams.insert(j + 1, mid)
        angles.insert(j + 1, _graph_angles(op, _phi_batch(op, [mid]))[0])

    # roots sitting on a scan node have their eigenangle snapped to exact
    # zero already; count them directly, and keep the crossing brackets
    # strictly outside the snap band so node hits, crossings and arrivals
    # stay mutually exclusive (each root is counted exactly once)
    roots = []
    for j, lam in enumerate(lams):
        roots.extend([lam] * int(np.sum(angles[j] == 0.0)))
    brackets = []
    for j in range(len(lams) - 1):
        _, disp = _match_circular(angles[j], angles[j + 1])
        alpha = angles[j]
        up = (alpha < 0.0) & (disp > 0.0) & (alpha + disp > ANGLE_SNAP)
        dn = (alpha > 0.0) & (disp < 0.0) & (alpha + disp < -ANGLE_SNAP)
        for i in np.nonzero(up | dn)[0]:
            brackets.append({"lo": lams[j], "hi": lams[j + 1],
                             "th": alpha[i], "th_hi": alpha[i] + disp[i],
                             "sign": 1 if up[i] else -1})

    # batched bisection across all brackets; the tracked branch is found at
    # each midpoint by its interpolated angle, never the stale endpoint value:
    # parallel branches can drift by more than their separation across one
    # half step and nearest-to-stale would hop onto a neighbour
    active = [b for b in brackets]
    while active:
        mids = [0.5 * (b["lo"] + b["hi"]) for b in active]
        mid_angles = _graph_angles(op, _phi_batch(op, mids, tol=BISECT_ODE_TOL))
        still = []
        for b, tm, ang in zip(active, mids, mid_angles):
            expect = 0.5 * (b["th"] + b["th_hi"])
            rel = np.mod(ang - expect + np.pi, 2 * np.pi) - np.pi
            i = int(np.argmin(np.abs(rel)))
            th_m = expect + rel[i]
            crossed = (th_m >= 0.0) if b["sign"] > 0 else (th_m <= 0.0)
            if crossed and abs(rel[i]) < 0.5 * np.pi:
                b["hi"], b["th_hi"] = tm, th_m
            else:
                b["lo"], b["th"] = tm, th_m
            if b["hi"] - b["lo"] <= LAM_TOL:
                roots.append(0.5 * (b["lo"] + b["hi"]))
            else:
                still.append(b)
        active = still

    roots = sorted(roots)
    clustered = []
    for r in roots:
        if clustered and r - clustered[-1][-1] <= cluster_tol:
            clustered[-1].append(r)
        else:
            clustered.append([r])
    values = []
    for group in clustered:
        center = float(np.mean(group))
        values.extend([center] * len(group))
    if values:
        _verify_roots(op, sorted(set(float(np.mean(g)) for g in clustered)))
    return np.asarray(values)


def _verify_roots(op: RealizedOperator, roots, angle_tol: float = 1e-4):
    """Independent membership check: Cauchy data must meet the domain."""
    phis = _phi_batch(op, roots, tol=BISECT_ODE_TOL)
    n = op.system.n
    for r, phi in zip(roots, phis):
        frame = np.vstack([np.eye(n, dtype=np.complex128), phi])
        angle = linalg.smallest_principal_angle(frame, op.domain.frame)
        if angle > angle_tol:
            raise CauchyKitError(
                f"scan root {r:.9g} fails the intersection check "
                f"(angle {angle:.2e})"
            )


# ---------------------------------------------------------------------------
# midpoint (box) finite differences: the independent discrete route


def _fd_pencil(op: RealizedOperator, cells: int):
    system = op.system
    n = system.n
    h = 1.0 / cells
    size = n * (cells + 1)
    rows_g, cols_g, vals_g = [], [], []
    rows_h, cols_h, vals_h = [], [], []

    def put(bucket, r0, c0, block):
        rows, cols, vals = bucket
        rr, cc = np.nonzero(np.ones_like(block, dtype=bool))
        rows.extend((r0 + rr).tolist())
        cols.extend((c0 + cc).tolist())
        vals.extend(block[rr, cc].tolist())

    eye = np.eye(n, dtype=np.complex128)
    for i in range(cells):
        xm = (i + 0.5) * h
        jm = system.j(xm)
        bm = system.b(xm)
        wm = system.w(xm)
        left = jm @ (-eye / h + 0.5 * bm)
        right = jm @ (eye / h + 0.5 * bm)
        put((rows_g, cols_g, vals_g), i * n, i * n, left)
        put((rows_g, cols_g, vals_g), i * n, (i + 1) * n, right)
        put((rows_h, cols_h, vals_h), i * n, i * n, 0.5 * wm)
        put((rows_h, cols_h, vals_h), i * n, (i + 1) * n, 0.5 * wm)

    # bordering rows: the trace must lie in the domain subspace
    f = op.domain.frame
    u, _, _ = np.linalg.svd(f, full_matrices=True)
    q_perp = u[:, n:]
    border = q_perp.conj().T  # n x 2n
    r0 = cells * n
    put((rows_g, cols_g, vals_g), r0, 0, border[:, :n])
    put((rows_g, cols_g, vals_g), r0, cells * n, border[:, n:])

    g = scipy.sparse.csc_matrix(
        (vals_g, (rows_g, cols_g)), shape=(size, size))
    hmat = scipy.sparse.csc_matrix(
        (vals_h, (rows_h, cols_h)), shape=(size, size))
    return g, hmat


def fd_eigenvalues(op: RealizedOperator, window: Tuple[float, float],
                   cells: int = 400, k: int = 16,
                   sigma: Optional[float] = None) -> np.ndarray:
    """Box-scheme generalized eigenvalues in the window (second order)."""
    lo, hi = float(window[0]), float(window[1])
    g, hmat = _fd_pencil(op, cells)
    size = g.shape[0]
    if sigma is None:
        sigma = lo + 0.61803398875 * (hi - lo)
    lu = scipy.sparse.linalg.splu((g - sigma * hmat).tocsc())
    shifted = scipy.sparse.linalg.LinearOperator(
        (size, size), matvec=lambda x: lu.solve(hmat @ x), dtype=np.complex128)
    k = min(k, size - 2)
    v0 = np.ones(size, dtype=np.complex128) / np.sqrt(size)
    mus, vecs = scipy.sparse.linalg.eigs(shifted, k=k, which="LM", v0=v0)
    out = []
    for mu, vec in zip(mus, vecs.T):
        if abs(mu) < 1e-12:
            continue
        lam = sigma + 1.0 / mu
        if abs(lam.imag) > IMAG_RTOL * (1.0 + abs(lam.real)):
            continue
        lam_r = float(lam.real)
        if not (lo <= lam_r <= hi):
            continue
        num = np.linalg.norm(g @ vec - lam * (hmat @ vec))
        den = np.linalg.norm(g @ vec) + abs(lam) * np.linalg.norm(hmat @ vec)
        if num > RESIDUAL_RTOL * max(den, 1e-300):
            continue
        out.append(lam_r)
    return np.asarray(sorted(out))


def fd_order(op: RealizedOperator, window: Tuple[float, float],
             cells: Sequence[int] = (200, 400, 800), k: int = 16):
    """Richardson convergence orders across three nested grids."""
    lists = [fd_eigenvalues(op, window, cells=c, k=k) for c in cells]
    counts = [len(v) for v in lists]
    if len(set(counts)) != 1 or counts[0] == 0:
        raise CauchyKitError(
            f"grids disagree on the eigenvalue count in the window: {counts}"
        )
    l1, l2, l3 = lists
    d1 = np.abs(l1 - l2)
    d2 = np.abs(l2 - l3)
    ok = (d1 > 1e-14) & (d2 > 1e-14)
    orders = np.full(counts[0], np.inf)
    orders[ok] = np.log2(d1[ok] / d2[ok])
    return orders, lists


# ---------------------------------------------------------------------------
# square collocation graphs and their projection gaps


def _collocation_operator(system: IntervalSystem, nodes: int) -> np.ndarray:
    n = system.n
    m = n * nodes
    h = 1.0 / (nodes - 1)
    a = np.zeros((m, m), dtype=np.complex128)
    for i in range(nodes):
        x = i * h
        jm = system.j(x)
        bm = system.b(x)
        r = slice(i * n, (i + 1) * n)
        if i == 0:
            stencil = [(0, -1.5), (1, 2.0), (2, -0.5)]
        elif i == nodes - 1:
            stencil = [(i, 1.5), (i - 1, -2.0), (i - 2, 0.5)]
        else:
            stencil = [(i - 1, -0.5), (i + 1, 0.5)]
        for node, coef in stencil:
            a[r, node * n:(node + 1) * n] += (coef / h) * jm
        a[r, i * n:(i + 1) * n] += jm @ bm
    return a


def _domain_nullspace(domain: LagrangianFrame, nodes: int) -> np.ndarray:
    n = domain.dim // 2
    m = n * nodes
    k = np.zeros((m, m - n), dtype=np.complex128)
    f = domain.frame
    k[:n, :n] = f[:n]
    k[m - n:, :n] = f[n:]
    k[n:m - n, n:] = np.eye(m - 2 * n)
    return k


@dataclass(frozen=True)
class GraphGapResult:
    gap: float
    eig_distance: Optional[float]
    counts: Optional[Tuple[int, int]]


def graph_gap(op1: RealizedOperator, op2: RealizedOperator,
              cells: int = 64, window: Optional[Tuple[float, float]] = None
              ) -> GraphGapResult:
    """Operator-norm gap between discrete graph projections.

    Both realizations are collocated on the same fixed grid, so grid error
    cancels in comparisons such as continuity moduli; the optional window
    adds a matched-eigenvalue distance through the scan route.
    """
    nodes = cells + 1
    projections = []
    for op in (op1, op2):
        a = _collocation_operator(op.system, nodes)
        k = _domain_nullspace(op.domain, nodes)
        graph = np.vstack([k, a @ k])
        q, _ = linalg.orth_columns(graph)
        projections.append(q @ q.conj().T)
    gap = linalg.spectral_norm(projections[0] - projections[1])
    if window is None:
        return GraphGapResult(gap=gap, eig_distance=None, counts=None)
    e1 = find_eigenvalues(op1, window)
    e2 = find_eigenvalues(op2, window)
    counts = (len(e1), len(e2))
    dist = float(np.max(np.abs(e1 - e2))) if counts[0] == counts[1] and counts[0] \
        else None
    return GraphGapResult(gap=gap, eig_distance=dist, counts=counts)
