"""Parameter experiments tying the eigenvalue and boundary-geometry routes.

An operator path shifts a base symmetric system by t times a hermitian
multiplication direction.  Along such a path the spectral flow through zero
and the Maslov index of the Cauchy-data path against the domain are computed
by entirely different machinery and must agree; that comparison is the
central consistency experiment of the package.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
import scipy.linalg

from . import linalg
from .calderon import cauchy_data_space, green_form
from .eigenproblem import RealizedOperator, find_eigenvalues, graph_gap
from .spectral_flow import EigenFamily, FlowResult, spectral_flow
from .symplectic import LagrangianFrame, LagrangianPath, maslov_index
from .systems import Coefficient, IntervalSystem

_OP_CACHE_CAP = 16


@dataclass(eq=False)
class OperatorPath:
    """t -> A + t C for a fixed hermitian multiplication direction C."""

    base: IntervalSystem
    direction: Coefficient
    t0: float = 0.0
    t1: float = 1.0
    _cache: dict = field(default_factory=dict, repr=False)

    def at(self, t: float) -> IntervalSystem:
        key = float(t)
        if key not in self._cache:
            if len(self._cache) >= _OP_CACHE_CAP:
                self._cache.pop(next(iter(self._cache)))
            self._cache[key] = self.base.with_shift(key, self.direction)
        return self._cache[key]

    def direction_scale(self) -> float:
        return max(linalg.spectral_norm(self.direction(x))
                   for x in np.linspace(0.0, 1.0, 9))


def default_window(path: OperatorPath, margin: float = 3.0) -> float:
    tmax = max(abs(path.t0), abs(path.t1))
    return margin + 1.5 * path.direction_scale() * tmax


@dataclass
class SfMasResult:
    flow: FlowResult
    maslov: int
    window: float
    agree: bool
    angle_samples: Optional[tuple] = None

    def __repr__(self):
        return (f"SfMasResult(flow={self.flow.flow}, maslov={self.maslov}, "
                f"agree={self.agree}, window={self.window:g})")


def sf_mas_experiment(path: OperatorPath, domain, window: Optional[float] = None,
                      samples: int = 17, cross_check: bool = True,
                      include_angles: bool = False) -> SfMasResult:
    """Spectral flow vs Maslov index along one operator path."""
    dom = domain if isinstance(domain, LagrangianFrame) \
        else LagrangianFrame.from_columns(domain)
    if window is None:
        window = default_window(path)
    space = green_form(path.base)

    ops = {}

    def op_at(t: float) -> RealizedOperator:
        key = float(t)
        if key not in ops:
            if len(ops) >= _OP_CACHE_CAP:
                ops.pop(next(iter(ops)))
            ops[key] = RealizedOperator(path.at(key), dom)
        return ops[key]

    family = EigenFamily.from_locator(
        lambda t, lo, hi: find_eigenvalues(op_at(t), (lo, hi)),
        path.t0, path.t1, window=window, label=path.base.label)
    flow = spectral_flow(family, num=samples)

    lag_path = LagrangianPath.from_callable(
        space, lambda t: cauchy_data_space(path.at(float(t))),
        path.t0, path.t1, reference=dom, num=2 * samples - 1)
    mas = maslov_index(lag_path, cross_check=cross_check)

    angle_samples = None
    if include_angles:
        ts = np.linspace(path.t0, path.t1, 65)
        angles = [linalg.smallest_principal_angle(
            cauchy_data_space(path.at(float(t))).frame, dom.frame) for t in ts]
        angle_samples = (ts, np.asarray(angles))

    return SfMasResult(flow=flow, maslov=mas, window=window,
                       agree=(flow.flow == mas), angle_samples=angle_samples)


@dataclass(frozen=True)
class RotationGaps:
    eps: Sequence[float]
    gaps: Sequence[float]
    slope: float


def rotation_gaps(op: RealizedOperator,
                  eps: Sequence[float] = (1e-1, 1e-2, 1e-3, 1e-4),
                  seed: int = 7, cells: int = 64) -> RotationGaps:
    """Graph-projection gap under form-preserving rotations of the domain.

    The rotation generator Omega^{-1} H (H hermitian) keeps every rotated
    domain Lagrangian, and both realizations share one collocation grid, so
    the gap should scale linearly in the rotation parameter.
    """
    rng = np.random.default_rng(seed)
    omega = op.space.omega
    h = linalg.random_hermitian(rng, omega.shape[0])
    gen = np.linalg.solve(omega, h)
    gaps = []
    for e in eps:
        frame = scipy.linalg.expm(e * gen) @ op.domain.frame
        op_e = RealizedOperator(op.system, LagrangianFrame.from_columns(frame))
        gaps.append(graph_gap(op, op_e, cells=cells).gap)
    slope = float(np.polyfit(np.log(np.asarray(eps)),
                             np.log(np.maximum(gaps, 1e-300)), 1)[0])
    return RotationGaps(eps=tuple(eps), gaps=tuple(gaps), slope=slope)
