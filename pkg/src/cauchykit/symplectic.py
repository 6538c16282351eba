"""Hermitian symplectic linear algebra on C^(2n).

A space carries an invertible skew-adjoint form matrix Omega with
omega(x, y) = <x, Omega y> (conjugate-linear in the first slot).  After the
basis change S with S* (i Omega) S = diag(I_p, -I_q) a subspace is Lagrangian
exactly when it is the graph of a unitary from the plus block to the minus
block; paths of Lagrangians are compared against a reference through the
relative unitary U_t = W_t W_ref*.

Counting conventions (frozen; see CONVENTIONS.md):

* a crossing of the path with the reference corresponds to the eigenvalue 1
  of U_t; passages are counted on the half-open parameter interval [a, b),
* a counterclockwise passage counts +1,
* a crossing sitting exactly at the initial parameter counts with its
  outgoing direction, one at the final parameter does not count,
* the crossing-form cross-check uses the finite difference of
  omega(v, P_{L_t} v) on the intersection; its contribution is minus the
  signature of that form.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import linalg
from .errors import (
    DegenerateCrossingError,
    DimensionMismatchError,
    RankDeficiencyError,
    RefinementBudgetError,
    SignatureError,
    UndersampledPathError,
    CauchyKitError,
)

LAGRANGIAN_TOL = 1e-8
ANGLE_SNAP = 1e-9          # eigenangles closer to 0 than this sit on the crossing
MAX_STEP_ANGLE = 0.6       # refine until eigenangle motion per step stays below
DEGENERATE_FORM_TOL = 1e-6
PARAM_TOL = 1e-8
REFINE_BUDGET = 40         # bisections per original sample interval
CROSSING_ORIENTATION = -1  # crossing contribution = ORIENTATION * signature(form)


def _frame_array(frame) -> np.ndarray:
    if isinstance(frame, LagrangianFrame):
        return frame.frame
    return linalg.as_complex_matrix(frame)


@dataclass(frozen=True, eq=False)
class LagrangianFrame:
    """Column-orthonormal frame spanning a subspace of C^(2n)."""

    frame: np.ndarray

    def __post_init__(self):
        q, _ = linalg.orth_columns(self.frame)
        object.__setattr__(self, "frame", q)

    @classmethod
    def from_columns(cls, cols) -> "LagrangianFrame":
        return cls(linalg.as_complex_matrix(cols))

    @property
    def dim(self) -> int:
        return self.frame.shape[0]

    @property
    def k(self) -> int:
        return self.frame.shape[1]


@dataclass(frozen=True)
class StandardForm:
    s: np.ndarray
    s_inv: np.ndarray
    p: int
    q: int


@dataclass(frozen=True, eq=False)
class HermitianSymplecticSpace:
    """C^(2n) with an invertible skew-adjoint form matrix."""

    omega: np.ndarray
    _std: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        om = linalg.as_complex_matrix(self.omega)
        if om.shape[0] != om.shape[1]:
            raise DimensionMismatchError("form matrix must be square")
        scale = linalg.spectral_norm(om)
        if scale == 0.0 or linalg.spectral_norm(om + om.conj().T) > 1e-10 * scale:
            raise CauchyKitError("form matrix is not skew-adjoint")
        s = np.linalg.svd(om, compute_uv=False)
        if s[-1] <= linalg.RANK_RTOL * s[0]:
            raise RankDeficiencyError("form matrix is numerically singular")
        object.__setattr__(self, "omega", om)

    @property
    def dim(self) -> int:
        return self.omega.shape[0]

    def form(self, x, y) -> complex:
        x = np.asarray(x, dtype=np.complex128)
        y = np.asarray(y, dtype=np.complex128)
        return complex(x.conj() @ self.omega @ y)

    def standard_form(self) -> StandardForm:
        """Basis S with S*(i Omega)S = diag(I_p, -I_q), plus block first."""
        if "std" not in self._std:
            h = linalg.herm(1j * self.omega)
            ev, vec = np.linalg.eigh(h)
            order = np.argsort(-ev)
            ev, vec = ev[order], vec[:, order]
            scale = np.abs(ev[0])
            if np.any(np.abs(ev) <= linalg.RANK_RTOL * scale):
                raise RankDeficiencyError("i*Omega has a numerically zero eigenvalue")
            p = int(np.sum(ev > 0))
            q = self.dim - p
            s = vec / np.sqrt(np.abs(ev))
            s_inv = (vec * np.sqrt(np.abs(ev))).conj().T
            self._std["std"] = StandardForm(s=s, s_inv=s_inv, p=p, q=q)
        return self._std["std"]

    def is_lagrangian(self, frame, tol: float = LAGRANGIAN_TOL) -> bool:
        f = _frame_array(frame)
        if f.shape[0] != self.dim:
            raise DimensionMismatchError("frame does not live in this space")
        if 2 * f.shape[1] != self.dim:
            return False
        q, rank = linalg.orth_columns(f)
        if rank < f.shape[1]:
            return False
        residual = linalg.spectral_norm(q.conj().T @ self.omega @ q)
        return residual <= tol * linalg.spectral_norm(self.omega)

    def lagrangian_unitary(self, frame) -> np.ndarray:
        """The unitary whose graph (in the standard basis) is span(frame)."""
        std = self.standard_form()
        if std.p != std.q:
            raise SignatureError(
                f"signature ({std.p}, {std.q}) admits no Lagrangian subspaces"
            )
        f = _frame_array(frame)
        if f.shape[1] != std.p:
            raise DimensionMismatchError("frame has wrong number of columns")
        g = std.s_inv @ f
        gp, gm = g[: std.p], g[std.p :]
        sv = np.linalg.svd(gp, compute_uv=False)
        if sv[-1] <= 1e-12 * max(1.0, sv[0]):
            raise RankDeficiencyError("frame is not a graph over the plus block")
        w = gm @ np.linalg.inv(gp)
        u, _, vh = np.linalg.svd(w)  # snap onto the unitary group
        return u @ vh


def is_lagrangian(space: HermitianSymplecticSpace, frame, tol: float = LAGRANGIAN_TOL) -> bool:
    return space.is_lagrangian(frame, tol)


def pair_indices(l_frame, m_frame, rtol: float = linalg.RANK_RTOL):
    """(dim of intersection, defect of the sum) for two subspaces."""
    lf = _frame_array(l_frame)
    mf = _frame_array(m_frame)
    if lf.shape[0] != mf.shape[0]:
        raise DimensionMismatchError("subspaces live in different ambient spaces")
    rank = linalg.numerical_rank(np.hstack([lf, mf]), rtol)
    kl = linalg.numerical_rank(lf, rtol)
    km = linalg.numerical_rank(mf, rtol)
    return kl + km - rank, lf.shape[0] - rank


# ---------------------------------------------------------------------------
# paths of Lagrangians and the index machinery


@dataclass(eq=False)
class LagrangianPath:
    """Sampled path of Lagrangian subspaces with a fixed reference.

    ``generator`` (parameter -> frame) enables adaptive refinement; purely
    discrete paths must already be sampled densely enough.
    """

    space: HermitianSymplecticSpace
    ts: np.ndarray
    frames: list
    reference: LagrangianFrame
    generator: Optional[Callable[[float], LagrangianFrame]] = None

    def __post_init__(self):
        self.ts = np.asarray(self.ts, dtype=float)
        if self.ts.size < 2 or np.any(np.diff(self.ts) <= 0):
            raise CauchyKitError("path needs at least two strictly increasing samples")
        self.frames = [
            f if isinstance(f, LagrangianFrame) else LagrangianFrame.from_columns(f)
            for f in self.frames
        ]
        if len(self.frames) != self.ts.size:
            raise DimensionMismatchError("one frame per parameter sample required")
        for f in self.frames + [self.reference]:
            if not self.space.is_lagrangian(f):
                raise CauchyKitError("path and reference must consist of Lagrangians")

    @classmethod
    def from_callable(cls, space, fn, t0: float, t1: float, reference,
                      num: int = 33) -> "LagrangianPath":
        ts = np.linspace(t0, t1, num)
        frames = [fn(t) for t in ts]
        ref = reference if isinstance(reference, LagrangianFrame) else (
            LagrangianFrame.from_columns(reference))
        return cls(space=space, ts=ts, frames=frames, reference=ref, generator=fn)

    @classmethod
    def from_frames(cls, space, ts, frames, reference) -> "LagrangianPath":
        ref = reference if isinstance(reference, LagrangianFrame) else (
            LagrangianFrame.from_columns(reference))
        return cls(space=space, ts=np.asarray(ts, float), frames=list(frames),
                   reference=ref)

    def frame_at(self, t: float) -> LagrangianFrame:
        idx = np.searchsorted(self.ts, t)
        if idx < self.ts.size and abs(self.ts[idx] - t) < 1e-15:
            return self.frames[idx]
        if self.generator is None:
            raise UndersampledPathError(
                "discrete path cannot be evaluated between samples"
            )
        f = self.generator(t)
        return f if isinstance(f, LagrangianFrame) else LagrangianFrame.from_columns(f)


def _snap(angles: np.ndarray) -> np.ndarray:
    out = np.sort(angles)
    out[np.abs(out) <= ANGLE_SNAP] = 0.0
    return out


def _eigenangles(u: np.ndarray) -> np.ndarray:
    return _snap(np.angle(np.linalg.eigvals(u)))


def _match_circular(prev: np.ndarray, nxt: np.ndarray):
    """Order-preserving circular matching of two sorted angle lists.

    Returns (shift, displacements) where prev[i] pairs with
    nxt[(i + shift) % m] and displacements live in [-pi, pi).
    """
    m = prev.size
    best = None
    idx = np.arange(m)
    for s in range(m):
        d = nxt[(idx + s) % m] - prev
        d = np.mod(d + np.pi, 2.0 * np.pi) - np.pi
        score = float(np.abs(d).sum())
        if best is None or score < best[0] - 1e-15:
            best = (score, s, d)
    return best[1], best[2]


def _passage_signs(alpha: np.ndarray, disp: np.ndarray) -> np.ndarray:
    """Per-branch signed passages through angle 0 on one matched step.

    Arrival at 0 is attributed to the arriving step, departure from 0 is
    not counted (the half-open rule at sample points).
    """
    out = np.zeros(alpha.size, dtype=int)
    # arrivals are detected up to ANGLE_SNAP: the matched displacement is
    # assembled through mod-2pi arithmetic and lands a few ulp off the
    # snapped angle it points at
    up = (alpha < 0.0) & (disp > 0.0) & (alpha + disp >= -ANGLE_SNAP)
    dn = (alpha > 0.0) & (disp < 0.0) & (alpha + disp <= ANGLE_SNAP)
    out[up] = 1
    out[dn] = -1
    return out


class _UnitaryPath:
    """Refined samples of U_t = W_t W_ref* along a Lagrangian path."""

    def __init__(self, path: LagrangianPath):
        self.path = path
        self.w_ref = path.space.lagrangian_unitary(path.reference)
        self.ts = list(path.ts)
        self.angles = [self._angles_for(f) for f in path.frames]
        self._budgets = {}  # original interval index -> splits used

    def _angles_for(self, frame) -> np.ndarray:
        w = self.path.space.lagrangian_unitary(frame)
        return _eigenangles(w @ self.w_ref.conj().T)

    def angles_at(self, t: float) -> np.ndarray:
        return self._angles_for(self.path.frame_at(t))

    def refine(self):
        orig = np.asarray(self.ts)
        j = 0
        budget_key = lambda t: int(np.searchsorted(orig, t, side="right")) - 1
        while j + 1 < len(self.ts):
            _, disp = _match_circular(self.angles[j], self.angles[j + 1])
            if np.max(np.abs(disp)) <= MAX_STEP_ANGLE:
                j += 1
                continue
            if self.path.generator is None:
                raise UndersampledPathError(
                    "eigenangle motion exceeds the step bound and the path "
                    "cannot be refined"
                )
            key = budget_key(self.ts[j])
            used = self._budgets.get(key, 0)
            if used >= REFINE_BUDGET:
                raise RefinementBudgetError(
                    f"refinement budget exhausted near parameter {self.ts[j]:.6g}"
                )
            self._budgets[key] = used + 1
            tm = 0.5 * (self.ts[j] + self.ts[j + 1])
            self.ts.insert(j + 1, tm)
            self.angles.insert(j + 1, self.angles_at(tm))


def _followed_direction(up: _UnitaryPath, start_index: int, branch: int) -> int:
    """Outgoing direction of a branch sitting at angle 0 at a sample."""
    theta = 0.0
    idx = branch
    for j in range(start_index, len(up.ts) - 1):
        shift, disp = _match_circular(up.angles[j], up.angles[j + 1])
        theta += disp[idx]
        if abs(theta) > 1e-6:
            return 1 if theta > 0 else -1
        idx = (idx + shift) % up.angles[j].size
    raise DegenerateCrossingError(
        "eigenangle stays on the crossing for the whole path"
    )


def _winding_and_events(up: _UnitaryPath):
    """Total signed passages plus located crossing parameters per step."""
    total = 0
    events = []  # (t_lo, t_hi, branch_at_lo, sign)
    nsteps = len(up.ts) - 1
    for j in range(nsteps):
        shift, disp = _match_circular(up.angles[j], up.angles[j + 1])
        alpha = up.angles[j]
        signs = _passage_signs(alpha, disp)
        for i in np.nonzero(signs)[0]:
            total += int(signs[i])
            events.append((up.ts[j], up.ts[j + 1], int(i), int(signs[i])))
        if np.any((alpha == 0.0) & (alpha + disp == 0.0)):
            raise DegenerateCrossingError(
                "eigenangle pinned at the crossing across a whole step"
            )
    # initial-endpoint crossings count with their outgoing direction
    for i in np.nonzero(up.angles[0] == 0.0)[0]:
        d = _followed_direction(up, 0, int(i))
        total += d
        events.append((up.ts[0], up.ts[0], int(i), d))
    # final-endpoint crossings were counted by arrival; undo them (same
    # ANGLE_SNAP band as the passage test, so count and undo always pair up)
    if nsteps >= 1:
        shift, disp = _match_circular(up.angles[-2], up.angles[-1])
        alpha = up.angles[-2]
        arrived = (alpha != 0.0) & (disp != 0.0) \
            & (np.abs(alpha + disp) <= ANGLE_SNAP)
        for i in np.nonzero(arrived)[0]:
            s = 1 if disp[i] > 0 else -1
            total -= s
            events = [e for e in events
                      if not (e[0] == up.ts[-2] and e[2] == int(i))]
    return total, events


def _locate_event(up: _UnitaryPath, t_lo, t_hi, branch, sign, span) -> float:
    """Bisect the passage of one eigenangle branch through 0."""
    if t_lo == t_hi:
        return t_lo
    if up.path.generator is None:
        return 0.5 * (t_lo + t_hi)
    a_lo = None
    for j, t in enumerate(up.ts):
        if t == t_lo:
            a_lo = up.angles[j][branch]
            break
    lo, hi = t_lo, t_hi
    theta_lo = a_lo
    for _ in range(60):
        if hi - lo <= PARAM_TOL * max(1.0, span):
            break
        tm = 0.5 * (lo + hi)
        ang = up.angles_at(tm)
        # the branch value is the angle closest to the bracket side we track
        i = int(np.argmin(np.abs(np.mod(ang - theta_lo + np.pi, 2 * np.pi) - np.pi)))
        theta_m = ang[i]
        crossed = (theta_m >= 0.0) if sign > 0 else (theta_m <= 0.0)
        if crossed and theta_m != theta_lo and abs(theta_m - theta_lo) < np.pi / 2:
            hi = tm
        else:
            lo, theta_lo = tm, theta_m
    return 0.5 * (lo + hi)


def _crossing_form(space, path, t_star, t0, t1, span):
    """Finite-difference crossing form on the intersection at t_star."""
    ref = path.reference.frame
    frame0 = path.frame_at(t_star).frame
    basis = linalg.intersection_basis(frame0, ref, angle_tol=1e-4)
    if basis.shape[1] == 0:
        return None, basis

    def qmat(t):
        f = path.frame_at(t).frame
        proj = f @ (f.conj().T @ basis)
        return basis.conj().T @ space.omega @ proj

    h = max(1e-4 * max(1.0, span), 1e-7)
    prev = None
    cur = None
    for _ in range(6):
        lo = max(t0, t_star - h)
        hi = min(t1, t_star + h)
        if hi - lo <= 0:
            break
        cur = (qmat(hi) - qmat(lo)) / (hi - lo)
        cur = linalg.herm(cur)
        if prev is not None:
            scale = max(linalg.spectral_norm(cur), 1e-30)
            if linalg.spectral_norm(cur - prev) <= 2e-2 * scale:
                break
        prev = cur
        h *= 0.5
    if cur is None:
        raise DegenerateCrossingError("cannot form a difference quotient at the crossing")
    return cur, basis


def maslov_index(path: LagrangianPath, cross_check: bool = True) -> int:
    """Maslov index of the path against its reference.

    The primary computation counts signed passages of the eigenvalues of the
    relative unitary; when the path carries a generator every detected
    crossing is re-derived through the finite-difference crossing form and a
    disagreement raises.
    """
    std = path.space.standard_form()
    if std.p != std.q:
        raise SignatureError("space signature does not admit Lagrangians")
    up = _UnitaryPath(path)
    up.refine()
    total, events = _winding_and_events(up)

    if cross_check and path.generator is not None and events:
        span = float(path.ts[-1] - path.ts[0])
        located = [
            (_locate_event(up, t_lo, t_hi, br, sg, span), sg)
            for (t_lo, t_hi, br, sg) in events
        ]
        located.sort()
        clusters = []
        for t_star, sg in located:
            if clusters and t_star - clusters[-1][0][-1] <= 1e-5 * max(1.0, span):
                clusters[-1][0].append(t_star)
                clusters[-1][1].append(sg)
            else:
                clusters.append(([t_star], [sg]))
        check_total = 0
        for times, sgs in clusters:
            t_star = float(np.mean(times))
            form, basis = _crossing_form(path.space, path, t_star,
                                         path.ts[0], path.ts[-1], span)
            if form is None:
                raise CauchyKitError(
                    f"winding reports a crossing near t={t_star:.8g} but the "
                    "subspaces do not intersect there"
                )
            ev = np.linalg.eigvalsh(form)
            scale = linalg.spectral_norm(path.space.omega)
            if np.any(np.abs(ev) < DEGENERATE_FORM_TOL * scale):
                raise DegenerateCrossingError(
                    f"degenerate crossing form at t={t_star:.8g}"
                )
            sig = int(np.sum(ev > 0) - np.sum(ev < 0))
            contribution = CROSSING_ORIENTATION * sig
            if contribution != int(np.sum(sgs)):
                raise CauchyKitError(
                    "crossing-form and winding methods disagree at "
                    f"t={t_star:.8g}: {contribution} vs {int(np.sum(sgs))}"
                )
            check_total += contribution
        if check_total != total:
            raise CauchyKitError(
                f"crossing-form total {check_total} != winding total {total}"
            )
    return total
