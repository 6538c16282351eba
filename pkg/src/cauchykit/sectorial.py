"""Spectral projections of matrices with no purely imaginary eigenvalues.

The positive sectorial family Q_plus(x) = exp(-x B) P_plus is evaluated as a
resolvent contour integral over a rectangle enclosing the right-half-plane
spectrum, with node counts doubled until a two-grid certificate passes.  The
rectangle sides are reparametrized so the node density vanishes to high
order at the corners; this keeps the trapezoid sums superalgebraically
convergent despite the kinks in the contour.

An independent route through a sorted complex Schur factorization serves as
the oracle the quadrature is tested against.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np
import scipy.linalg

from . import linalg
from ._accel import resolvent_sum
from .errors import (
    CauchyKitError,
    DimensionMismatchError,
    QuadratureError,
    SpectralMarginError,
)

MARGIN_FLOOR = 1e-10
QUAD_TOL = 1e-10
START_NODES = 64
MAX_NODES = 4096
ORACLE_CONDITION_CAP = 1e8
PLATEAU = 0.25


@dataclass(frozen=True, eq=False)
class TangentialMatrix:
    """Square matrix whose spectrum avoids the imaginary axis."""

    b0: np.ndarray
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        m = linalg.as_complex_matrix(self.b0)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionMismatchError("tangential matrix must be square")
        object.__setattr__(self, "b0", m)
        if self.margin <= MARGIN_FLOOR:
            raise SpectralMarginError(
                f"spectrum touches the imaginary axis (margin {self.margin:.3e})"
            )

    @property
    def n(self) -> int:
        return self.b0.shape[0]

    @property
    def eigenvalues(self) -> np.ndarray:
        if "eigs" not in self._cache:
            self._cache["eigs"] = np.linalg.eigvals(self.b0)
        return self._cache["eigs"]

    @property
    def margin(self) -> float:
        return float(np.abs(self.eigenvalues.real).min())

    def reflected(self) -> "TangentialMatrix":
        if "reflected" not in self._cache:
            self._cache["reflected"] = TangentialMatrix(-self.b0)
        return self._cache["reflected"]


@dataclass(frozen=True)
class QuadratureCertificate:
    nodes_per_side: List[int]
    errors: List[float]
    converged: bool
    tol: float


@dataclass(frozen=True)
class SectorialResult:
    value: np.ndarray
    certificate: QuadratureCertificate


def _plus_rectangle(tm: TangentialMatrix):
    """Corners of a positively oriented rectangle around the RHP spectrum."""
    lam = tm.eigenvalues
    delta = tm.margin
    plus = lam[lam.real > 0]
    re_hi = (float(plus.real.max()) if plus.size else delta) + delta
    im_hi = (float(np.abs(plus.imag).max()) if plus.size else 1.0) + max(delta, 0.5)
    re_lo = 0.5 * delta
    return [
        complex(re_lo, -im_hi),
        complex(re_hi, -im_hi),
        complex(re_hi, +im_hi),
        complex(re_lo, +im_hi),
    ]


def _side_rule(k: int):
    # interior trapezoid nodes under the corner-flattening map; the map's
    # derivative vanishes like sin^4 at the ends, so corner nodes drop out
    s = np.arange(1, k) / k
    phi = s - (2.0 / (3.0 * np.pi)) * np.sin(2 * np.pi * s) \
        + (1.0 / (12.0 * np.pi)) * np.sin(4 * np.pi * s)
    dphi = 1.0 - (4.0 / 3.0) * np.cos(2 * np.pi * s) \
        + (1.0 / 3.0) * np.cos(4 * np.pi * s)
    return phi, dphi / k


def _contour_nodes(corners, k: int):
    phi, w = _side_rule(k)
    nodes, weights = [], []
    for a, b in zip(corners, corners[1:] + corners[:1]):
        nodes.append(a + (b - a) * phi)
        weights.append((b - a) * w)
    lam = np.concatenate(nodes)
    wgt = np.concatenate(weights) / (2j * np.pi)
    return lam, wgt


def sectorial_projection(tm: TangentialMatrix, x: float = 0.0,
                         tol: float = QUAD_TOL, start: int = START_NODES,
                         max_per_side: int = MAX_NODES) -> SectorialResult:
    """Q_plus(x) by certified contour quadrature."""
    key = ("qplus", float(x), tol)
    if key in tm._cache:
        return tm._cache[key]
    corners = _plus_rectangle(tm)
    counts, errors = [], []
    k = start
    lam, wgt = _contour_nodes(corners, k)
    prev = resolvent_sum(tm.b0, lam, wgt * np.exp(-x * lam))
    value = prev
    converged = False
    while k < max_per_side:
        k *= 2
        lam, wgt = _contour_nodes(corners, k)
        value = resolvent_sum(tm.b0, lam, wgt * np.exp(-x * lam))
        err = linalg.spectral_norm(value - prev) / max(1.0, linalg.spectral_norm(value))
        counts.append(k)
        errors.append(err)
        if err < tol:
            converged = True
            break
        prev = value
    if not converged:
        raise QuadratureError(
            f"contour quadrature did not certify at {max_per_side} nodes per side"
        )
    result = SectorialResult(
        value=value,
        certificate=QuadratureCertificate(nodes_per_side=counts, errors=errors,
                                          converged=converged, tol=tol),
    )
    tm._cache[key] = result
    return result


def p_plus(tm: TangentialMatrix, tol: float = QUAD_TOL) -> np.ndarray:
    return sectorial_projection(tm, 0.0, tol=tol).value


def q_plus(tm: TangentialMatrix, x: float, tol: float = QUAD_TOL) -> np.ndarray:
    return sectorial_projection(tm, x, tol=tol).value


def q_minus(tm: TangentialMatrix, x: float, tol: float = QUAD_TOL) -> np.ndarray:
    """exp(x B) P_minus, through the reflected matrix."""
    return sectorial_projection(tm.reflected(), x, tol=tol).value


def p_minus(tm: TangentialMatrix, tol: float = QUAD_TOL) -> np.ndarray:
    """Complement of p_plus; the reflected contour provides the cross-check."""
    return np.eye(tm.n, dtype=np.complex128) - p_plus(tm, tol=tol)


@dataclass(frozen=True)
class OracleResult:
    p: Optional[np.ndarray]
    q: Optional[Callable[[float], np.ndarray]]
    condition: float
    skipped: bool


def eigenprojection_oracle(b0) -> OracleResult:
    """Schur-route spectral projector onto the right-half-plane subspace.

    Skipped (with the condition number reported) when the block-diagonalizing
    similarity is too ill conditioned to trust as a reference.
    """
    m = b0.b0 if isinstance(b0, TangentialMatrix) else linalg.as_complex_matrix(b0)
    n = m.shape[0]
    t, z, sdim = scipy.linalg.schur(
        m, output="complex", sort=lambda lam: lam.real > 0)
    if sdim == 0:
        p = np.zeros((n, n), dtype=np.complex128)
        cond = 1.0
    elif sdim == n:
        p = np.eye(n, dtype=np.complex128)
        cond = 1.0
    else:
        t11 = t[:sdim, :sdim]
        t12 = t[:sdim, sdim:]
        t22 = t[sdim:, sdim:]
        y = scipy.linalg.solve_sylvester(t11, -t22, -t12)
        s = np.block([
            [np.eye(sdim), y],
            [np.zeros((n - sdim, sdim)), np.eye(n - sdim)],
        ])
        cond = float(linalg.spectral_norm(s) ** 2)
        if cond > ORACLE_CONDITION_CAP:
            return OracleResult(p=None, q=None, condition=cond, skipped=True)
        pt = np.zeros((n, n), dtype=np.complex128)
        pt[:sdim, :sdim] = np.eye(sdim)
        pt[:sdim, sdim:] = -y
        p = z @ pt @ z.conj().T

    def q(x: float) -> np.ndarray:
        return scipy.linalg.expm(-x * m) @ p

    return OracleResult(p=p, q=q, condition=cond, skipped=False)


def cutoff(x: float, plateau: float = PLATEAU) -> float:
    """C^2 plateau cutoff: 1 on [0, a], 0 beyond 2a, quintic ramp between."""
    if x <= plateau:
        return 1.0
    if x >= 2.0 * plateau:
        return 0.0
    u = (x - plateau) / plateau
    return 1.0 - (6.0 * u**5 - 15.0 * u**4 + 10.0 * u**3)


def approx_poisson(tm: TangentialMatrix, xi, x: float,
                   plateau: float = PLATEAU) -> np.ndarray:
    """Cutoff decaying solution of u' + B u = 0 with initial value P_plus xi."""
    if x < 0:
        raise CauchyKitError("approximate Poisson data lives on x >= 0")
    xi = np.asarray(xi, dtype=np.complex128)
    return cutoff(x, plateau) * (q_plus(tm, x) @ xi)


def approx_poisson_pair(tm: TangentialMatrix, coupling, xi, x: float,
                        plateau: float = PLATEAU):
    """Decaying component and its coupled reflected partner at offset x."""
    if x < 0:
        raise CauchyKitError("approximate Poisson data lives on x >= 0")
    xi = np.asarray(xi, dtype=np.complex128)
    t = linalg.as_complex_matrix(coupling)
    if t.shape != (tm.n, tm.n):
        raise DimensionMismatchError("coupling has the wrong shape")
    c = cutoff(x, plateau)
    left = c * (q_plus(tm, x) @ xi)
    right = c * (t @ (q_minus(tm, x) @ xi))
    return left, right
