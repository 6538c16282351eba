"""Signature obstruction of boundary symbol pairs.

A pair (j0, b0) consists of an invertible skew-adjoint form and a matrix
whose generalized eigenspace for purely imaginary eigenvalues carries the
hermitian form <v, i j0 v>; the signature of that restricted form is the
obstruction.  Pairs extracted from the two endpoints of one interval system
(with the orientation flip at x = 1) bound, and their obstruction vanishes.

Eigenvalue classification is deliberately brittle: real parts inside
(1e-10, 1e-8) are neither imaginary nor safely off-axis and raise instead
of being silently rounded.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Tuple

import numpy as np
import scipy.linalg

from . import linalg
from .errors import ClassificationError, DimensionMismatchError, RankDeficiencyError
from .systems import IntervalSystem

IMAG_HARD = 1e-10   # |Re| at or below this is imaginary
IMAG_SOFT = 1e-8    # |Re| below this but above the hard band is ambiguous
ZERO_EV_TOL = 1e-8  # form eigenvalues below this (times scale) are excluded


@dataclass(frozen=True, eq=False)
class BoundarySymbolPair:
    j0: np.ndarray
    b0: np.ndarray
    label: str = ""

    def __post_init__(self):
        jm = linalg.as_complex_matrix(self.j0)
        bm = linalg.as_complex_matrix(self.b0)
        if jm.shape != bm.shape or jm.shape[0] != jm.shape[1]:
            raise DimensionMismatchError("pair matrices must be square, same size")
        scale = max(1.0, linalg.spectral_norm(jm))
        if linalg.spectral_norm(jm + jm.conj().T) > 1e-10 * scale:
            raise RankDeficiencyError("form matrix must be skew-adjoint")
        s = np.linalg.svd(jm, compute_uv=False)
        if s[-1] <= linalg.RANK_RTOL * s[0]:
            raise RankDeficiencyError("form matrix must be invertible")
        object.__setattr__(self, "j0", jm)
        object.__setattr__(self, "b0", bm)

    @property
    def n(self) -> int:
        return self.j0.shape[0]

    def transformed(self, s) -> "BoundarySymbolPair":
        """Consistent change of variables x -> S x."""
        s = linalg.as_complex_matrix(s)
        return BoundarySymbolPair(
            j0=s.conj().T @ self.j0 @ s,
            b0=np.linalg.solve(s, self.b0 @ s),
            label=self.label,
        )

    def __add__(self, other: "BoundarySymbolPair") -> "BoundarySymbolPair":
        z01 = np.zeros((self.n, other.n))
        j = np.block([[self.j0, z01], [z01.T, other.j0]])
        b = np.block([[self.b0, z01], [z01.T, other.b0]])
        return BoundarySymbolPair(j0=j, b0=b,
                                  label=f"{self.label}+{other.label}")


def boundary_pair_from_system(system: IntervalSystem) -> BoundarySymbolPair:
    """Endpoint extraction blockdiag(J(0), -J(1)), blockdiag(B(0), -B(1))."""
    n = system.n
    z = np.zeros((n, n))
    j = np.block([[system.j(0.0), z], [z, -system.j(1.0)]])
    b = np.block([[system.b(0.0), z], [z, -system.b(1.0)]])
    return BoundarySymbolPair(j0=j, b0=b, label=system.label + ":boundary")


def imaginary_generalized_eigenspace(b0) -> Tuple[np.ndarray, np.ndarray]:
    """Orthonormal basis of the invariant subspace for imaginary eigenvalues.

    Returns (basis, eigenvalues of the restriction).  Eigenvalues with
    0 < 1e-10 < |Re| < 1e-8 raise ClassificationError.
    """
    m = linalg.as_complex_matrix(b0)
    eigs = np.linalg.eigvals(m)
    gray = (np.abs(eigs.real) > IMAG_HARD) & (np.abs(eigs.real) < IMAG_SOFT)
    if gray.any():
        raise ClassificationError(
            "eigenvalue real parts inside the ambiguous band: "
            + ", ".join(f"{v:.3e}" for v in eigs.real[gray])
        )
    t, z, sdim = scipy.linalg.schur(
        m, output="complex", sort=lambda lam: abs(lam.real) <= IMAG_HARD)
    basis = z[:, :sdim]
    restricted = np.diag(t)[:sdim]
    return basis, restricted


@dataclass(frozen=True)
class ObstructionDetails:
    signature: int
    space_dim: int
    positive: int
    negative: int
    zeros_excluded: int
    form_eigenvalues: np.ndarray


def obstruction_details(pair: BoundarySymbolPair) -> ObstructionDetails:
    basis, _ = imaginary_generalized_eigenspace(pair.b0)
    if basis.shape[1] == 0:
        return ObstructionDetails(signature=0, space_dim=0, positive=0,
                                  negative=0, zeros_excluded=0,
                                  form_eigenvalues=np.empty(0))
    form = basis.conj().T @ (1j * pair.j0) @ basis
    ev = np.linalg.eigvalsh(linalg.herm(form))
    thr = ZERO_EV_TOL * max(1.0, linalg.spectral_norm(pair.j0))
    pos = int(np.sum(ev > thr))
    neg = int(np.sum(ev < -thr))
    zeros = int(ev.size - pos - neg)
    return ObstructionDetails(signature=pos - neg, space_dim=basis.shape[1],
                              positive=pos, negative=neg, zeros_excluded=zeros,
                              form_eigenvalues=ev)


def signature_obstruction(pair: BoundarySymbolPair) -> int:
    """Signature of <v, i j0 v> on the imaginary generalized eigenspace."""
    details = obstruction_details(pair)
    if details.zeros_excluded:
        warnings.warn(
            f"{details.zeros_excluded} near-zero form eigenvalue(s) excluded "
            "from the obstruction signature",
            stacklevel=2,
        )
    return details.signature
