"""Spectral flow of one-parameter families of real eigenvalue lists.

A family supplies, for each parameter t, the eigenvalues inside a symmetric
window [-L, L]: either as the full spectrum of a hermitian matrix or through
a locator callback (t, lo, hi) -> sorted values.  Branches are tracked by
order-preserving alignment of consecutive sorted snapshots with adaptive
parameter refinement; the flow counts signed zero crossings.

Counting conventions (frozen; see CONVENTIONS.md):

* an eigenvalue passing from < 0 to >= 0 counts +1, the reverse -1,
* events are counted for t in [t0, t1): a zero at the initial parameter
  counts with its outgoing direction, a zero reached exactly at the final
  parameter does not count,
* a branch tangent to zero is resolved by shifting the family by -1e-7 and
  +1e-7; the two shifted counts must agree, otherwise the crossing is
  reported as degenerate.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np

from .errors import (
    CauchyKitError,
    DegenerateCrossingError,
    IdenticallyZeroError,
    RefinementBudgetError,
    WindowError,
)

ZERO_BAND = 1e-7        # |value| below this counts as sitting on zero
SHIFT_DELTA = 1e-7      # two-sided shift used to resolve tangencies
PARAM_TOL = 1e-8        # zero crossings are bisected to this * span
DISP_FLOOR = 1e-6       # refinement stops once motion per step is this small
ZERO_RUN_SPAN = 0.02    # zero samples spanning more than this * span -> error
REFINE_DEPTH = 26


@dataclass(frozen=True)
class EigenFamily:
    """Eigenvalues-in-a-window as a function of one real parameter."""

    t0: float
    t1: float
    matrix_fn: Optional[Callable[[float], np.ndarray]] = None
    locator_fn: Optional[Callable[[float, float, float], np.ndarray]] = None
    window: Optional[float] = None
    label: str = ""

    def __post_init__(self):
        if (self.matrix_fn is None) == (self.locator_fn is None):
            raise CauchyKitError("provide exactly one of matrix_fn, locator_fn")
        if self.locator_fn is not None and self.window is None:
            raise WindowError("locator families require an explicit window")
        if not self.t1 > self.t0:
            raise CauchyKitError("parameter interval must be nondegenerate")

    @classmethod
    def from_matrices(cls, fn, t0: float, t1: float, window: Optional[float] = None,
                      label: str = "") -> "EigenFamily":
        return cls(t0=t0, t1=t1, matrix_fn=fn, window=window, label=label)

    @classmethod
    def from_locator(cls, fn, t0: float, t1: float, window: float,
                     label: str = "") -> "EigenFamily":
        return cls(t0=t0, t1=t1, locator_fn=fn, window=window, label=label)

    def eval(self, t: float, window: float) -> np.ndarray:
        if self.matrix_fn is not None:
            m = np.asarray(self.matrix_fn(t), dtype=np.complex128)
            scale = max(1.0, float(np.abs(m).max()))
            if np.abs(m - m.conj().T).max() > 1e-10 * scale:
                raise CauchyKitError("family matrix is not hermitian")
            w = np.linalg.eigvalsh(m)
        else:
            w = np.sort(np.asarray(self.locator_fn(t, -window, window), dtype=float))
        return w[np.abs(w) <= window]

    def locate_near(self, t: float, center: float, radius: float,
                    window: float) -> np.ndarray:
        """Eigenvalues within radius of center, for bisection refinement."""
        if self.matrix_fn is not None:
            w = self.eval(t, window)
        else:
            w = np.sort(np.asarray(
                self.locator_fn(t, center - radius, center + radius), dtype=float))
        return w[np.abs(w - center) <= radius]


@dataclass
class Branch:
    label: int
    idx: List[int]
    vals: List[float]

    def times(self, ts: np.ndarray) -> np.ndarray:
        return ts[np.asarray(self.idx, dtype=int)]


@dataclass
class Trajectories:
    ts: np.ndarray
    branches: List[Branch]
    window: float
    family: EigenFamily = field(repr=False)


@dataclass(frozen=True)
class Crossing:
    t: float
    direction: int
    label: int


@dataclass
class FlowResult:
    flow: int
    crossings: List[Crossing]
    trajectories: Trajectories
    window: float

    def __int__(self) -> int:
        return self.flow


def _align(prev: np.ndarray, nxt: np.ndarray) -> int:
    """Offset o such that prev[i] continues as nxt[i + o]."""
    if prev.size == 0 or nxt.size == 0:
        return 0
    reach = abs(prev.size - nxt.size) + 3
    best = None
    for o in range(-reach, reach + 1):
        lo = max(0, -o)
        hi = min(prev.size, nxt.size - o)
        if hi <= lo:
            continue
        mean = float(np.abs(nxt[lo + o: hi + o] - prev[lo: hi]).mean())
        unmatched = (prev.size - (hi - lo)) + (nxt.size - (hi - lo))
        key = (mean, unmatched, abs(o))
        if best is None or key < best[0]:
            best = (key, o)
    return best[1]


def _min_gap(vals: np.ndarray) -> float:
    if vals.size < 2:
        return np.inf
    return float(np.diff(vals).min())


def _step_needs_refinement(prev: np.ndarray, nxt: np.ndarray, scale: float) -> bool:
    if prev.size == 0 and nxt.size == 0:
        return False
    o = _align(prev, nxt)
    lo = max(0, -o)
    hi = min(prev.size, nxt.size - o)
    if hi <= lo:
        return prev.size > 0 and nxt.size > 0
    p = prev[lo:hi]
    n = nxt[lo + o: hi + o]
    d = n - p
    maxd = float(np.abs(d).max())
    floor_ = DISP_FLOOR * scale
    if maxd > max(0.5 * min(_min_gap(prev), _min_gap(nxt)), floor_):
        return True
    # same-sign pair close to zero relative to its motion may hide a dip
    same = np.sign(p) == np.sign(n)
    risky = same & (np.minimum(np.abs(p), np.abs(n)) < 0.75 * np.abs(d)) \
        & (np.abs(d) > floor_)
    return bool(risky.any())


class _Tracker:
    def __init__(self, family: EigenFamily, window: float, num: int):
        self.family = family
        self.window = window
        self.scale = max(1.0, window)
        ts = np.linspace(family.t0, family.t1, num)
        self.ts = list(ts)
        self.snaps = [family.eval(t, window) for t in ts]
        self.edge_violation = False

    def refine(self):
        orig = np.asarray(self.ts)
        depth_used = {}
        j = 0
        while j + 1 < len(self.ts):
            if not _step_needs_refinement(self.snaps[j], self.snaps[j + 1], self.scale):
                j += 1
                continue
            key = int(np.searchsorted(orig, self.ts[j], side="right")) - 1
            used = depth_used.get(key, 0)
            if used >= REFINE_DEPTH:
                raise RefinementBudgetError(
                    f"eigenvalue tracking stalled near t={self.ts[j]:.6g}"
                )
            depth_used[key] = used + 1
            tm = 0.5 * (self.ts[j] + self.ts[j + 1])
            self.ts.insert(j + 1, tm)
            self.snaps.insert(j + 1, self.family.eval(tm, self.window))

    def build_branches(self) -> List[Branch]:
        branches: List[Branch] = []
        live: List[Branch] = []
        counter = 0
        for col, v in enumerate(self.snaps[0]):
            b = Branch(label=counter, idx=[0], vals=[float(v)])
            counter += 1
            branches.append(b)
            live.append(b)
        for j in range(1, len(self.ts)):
            prev, nxt = self.snaps[j - 1], self.snaps[j]
            o = _align(prev, nxt)
            maxd = 0.0
            lo = max(0, -o)
            hi = min(prev.size, nxt.size - o)
            if hi > lo:
                maxd = float(np.abs(nxt[lo + o: hi + o] - prev[lo: hi]).max())
            slack = max(0.1 * self.window, 4.0 * maxd)
            nxt_live: List[Optional[Branch]] = [None] * nxt.size
            for i, b in enumerate(live):
                tgt = i + o
                if 0 <= tgt < nxt.size:
                    b.idx.append(j)
                    b.vals.append(float(nxt[tgt]))
                    nxt_live[tgt] = b
                else:
                    if abs(b.vals[-1]) < self.window - slack:
                        self.edge_violation = True
            for tgt in range(nxt.size):
                if nxt_live[tgt] is None:
                    if abs(nxt[tgt]) < self.window - slack:
                        self.edge_violation = True
                    b = Branch(label=counter, idx=[j], vals=[float(nxt[tgt])])
                    counter += 1
                    branches.append(b)
                    nxt_live[tgt] = b
            live = [b for b in nxt_live if b is not None]
        return branches


def track_eigenvalues(family: EigenFamily, num: int = 33,
                      window: Optional[float] = None) -> Trajectories:
    """Track ordered eigenvalue branches across the parameter interval."""
    if window is None:
        window = family.window
    if window is not None:
        tr = _Tracker(family, window, num)
        tr.refine()
        branches = tr.build_branches()
        if tr.edge_violation:
            raise WindowError(
                "an eigenvalue appeared or vanished away from the window edge"
            )
        return Trajectories(ts=np.asarray(tr.ts), branches=branches,
                            window=window, family=family)
    # matrix family without an explicit window: grow until nothing leaves
    w0 = family.eval(family.t0, np.inf)
    lam = 4.0 * max(1e-3, float(np.abs(w0).max()) if w0.size else 0.0)
    for _ in range(8):
        tr = _Tracker(family, lam, num)
        tr.refine()
        branches = tr.build_branches()
        full = [b for b in branches if len(b.idx) == len(tr.ts)]
        if len(full) == len(branches) and not tr.edge_violation:
            return Trajectories(ts=np.asarray(tr.ts), branches=branches,
                                window=lam, family=family)
        lam *= 2.0
    raise WindowError("automatic window selection failed to stabilize")


def _strict_signs(vals: np.ndarray, band: float) -> np.ndarray:
    return np.where(vals > band, 1, np.where(vals < -band, -1, 0))


def _bisect_zero(family: EigenFamily, window: float, t_lo: float, v_lo: float,
                 t_hi: float, v_hi: float, span: float) -> float:
    """Root of one branch between samples of opposite strict sign."""
    radius0 = 1.2 * max(abs(v_lo), abs(v_hi)) + 10 * ZERO_BAND
    lo, hi, vlo, vhi = t_lo, t_hi, v_lo, v_hi
    for _ in range(60):
        if hi - lo <= PARAM_TOL * max(1.0, span):
            break
        tm = 0.5 * (lo + hi)
        pred = vlo + (vhi - vlo) * 0.5
        cand = family.locate_near(tm, 0.0, radius0, window)
        if cand.size == 0:
            cand = family.eval(tm, window)
        if cand.size == 0:
            break
        vm = float(cand[np.argmin(np.abs(cand - pred))])
        if (vm >= 0) == (vhi >= 0):
            hi, vhi = tm, vm
        else:
            lo, vlo = tm, vm
    return 0.5 * (lo + hi)


def _branch_events(family, window, ts, branch: Branch, span, band=ZERO_BAND):
    """Signed zero crossings of one tracked branch, honoring endpoint rules."""
    times = branch.times(ts)
    vals = np.asarray(branch.vals)
    s = _strict_signs(vals, band)
    events = []
    nz = np.nonzero(s)[0]
    if nz.size == 0:
        raise IdenticallyZeroError(
            f"branch {branch.label} stays within {band:g} of zero"
        )
    first = nz[0]
    if first > 0:
        if times[first - 1] - times[0] > ZERO_RUN_SPAN * span:
            raise IdenticallyZeroError(
                f"branch {branch.label} sits on zero over a subinterval"
            )
        if abs(times[0] - ts[0]) > PARAM_TOL * max(1.0, span):
            raise WindowError(
                "a branch entered the window sitting on zero away from the start"
            )
        events.append(Crossing(t=float(times[0]), direction=int(s[first]),
                               label=branch.label))
    last = nz[-1]
    if last < len(s) - 1:
        run = times[-1] - times[last + 1]
        if run > ZERO_RUN_SPAN * span:
            raise IdenticallyZeroError(
                f"branch {branch.label} sits on zero over a subinterval"
            )
        # trailing zeros: arrival at the final parameter, not an event
    prev_i = first
    for i in nz[1:]:
        # the run is the zero samples strictly between the nonzero flanks
        if i - prev_i > 1 and times[i - 1] - times[prev_i + 1] > ZERO_RUN_SPAN * span:
            raise IdenticallyZeroError(
                f"branch {branch.label} sits on zero over a subinterval"
            )
        if s[i] != s[prev_i]:
            t_star = _bisect_zero(family, window, float(times[prev_i]),
                                  float(vals[prev_i]), float(times[i]),
                                  float(vals[i]), span)
            events.append(Crossing(t=t_star, direction=int(s[i]),
                                   label=branch.label))
        elif i - prev_i > 1:
            # zero samples between equal signs: a tangency candidate
            _resolve_touch(vals[prev_i: i + 1], branch.label)
        prev_i = i
    return events


def _resolve_touch(segment: np.ndarray, label: int):
    """Shift the segment both ways; the net counts must agree (and vanish)."""
    for shift in (-SHIFT_DELTA, SHIFT_DELTA):
        w = segment + shift
        sg = np.sign(w[np.abs(w) > 1e-10])
        if sg.size >= 2 and sg[0] != sg[-1]:
            raise DegenerateCrossingError(
                f"tangential zero of branch {label} does not resolve consistently"
            )


def spectral_flow(family: EigenFamily, num: int = 33,
                  window: Optional[float] = None) -> FlowResult:
    """Net signed count of eigenvalue crossings through zero on [t0, t1)."""
    traj = track_eigenvalues(family, num=num, window=window)
    span = float(family.t1 - family.t0)
    events: List[Crossing] = []
    for b in traj.branches:
        events.extend(_branch_events(family, traj.window, traj.ts, b, span))
    events.sort(key=lambda c: c.t)
    flow = int(sum(c.direction for c in events))
    return FlowResult(flow=flow, crossings=events, trajectories=traj,
                      window=traj.window)
