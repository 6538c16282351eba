"""Dense linear-algebra helpers used throughout the package.

Everything here operates on small complex matrices (n <= a few dozen) and
favours clarity plus deterministic behaviour over raw speed.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionMismatchError, RankDeficiencyError

# Relative rank tolerance used everywhere a numerical rank decision is made.
RANK_RTOL = 1e-10


def as_complex_matrix(a) -> np.ndarray:
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim == 1:
        a = a.reshape(-1, 1)
    if a.ndim != 2:
        raise DimensionMismatchError(f"expected a matrix, got shape {a.shape}")
    return a


def herm(a: np.ndarray) -> np.ndarray:
    """Hermitian part (a + a*)/2."""
    return 0.5 * (a + a.conj().T)


def spectral_norm(a) -> float:
    a = np.atleast_2d(np.asarray(a))
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a, 2))


def numerical_rank(a, rtol: float = RANK_RTOL) -> int:
    a = as_complex_matrix(a)
    s = np.linalg.svd(a, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > rtol * s[0]))


def orth_columns(a, rtol: float = RANK_RTOL, require_full_rank: bool = True):
    """Orthonormal basis of the column span of ``a`` via SVD.

    Returns (q, rank).  With ``require_full_rank`` a rank drop below the
    number of supplied columns raises ``RankDeficiencyError``.
    """
    a = as_complex_matrix(a)
    u, s, _ = np.linalg.svd(a, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        rank = 0
    else:
        rank = int(np.sum(s > rtol * s[0]))
    if require_full_rank and rank < a.shape[1]:
        raise RankDeficiencyError(
            f"frame has numerical rank {rank} < {a.shape[1]} columns"
        )
    return u[:, :rank], rank


def principal_angles(a, b, rtol: float = RANK_RTOL) -> np.ndarray:
    """Principal angles between the column spans, ascending, in radians."""
    qa, _ = orth_columns(a, rtol)
    qb, _ = orth_columns(b, rtol)
    if qa.shape[0] != qb.shape[0]:
        raise DimensionMismatchError("subspaces live in different ambient spaces")
    sigma = np.linalg.svd(qa.conj().T @ qb, compute_uv=False)
    sigma = np.clip(sigma, -1.0, 1.0)
    return np.sort(np.arccos(sigma))


def smallest_principal_angle(a, b) -> float:
    ang = principal_angles(a, b)
    return float(ang[0]) if ang.size else np.pi / 2


def intersection_basis(a, b, angle_tol: float = 1e-8):
    """Orthonormal basis of (an approximation to) span(a) & span(b).

    Vectors are singular directions whose principal angle is below
    ``angle_tol``; an empty (m, 0) array signals trivial intersection.
    """
    qa, _ = orth_columns(a)
    qb, _ = orth_columns(b)
    u, s, _ = np.linalg.svd(qa.conj().T @ qb)
    s = np.clip(s, -1.0, 1.0)
    keep = np.arccos(s) < angle_tol
    return qa @ u[:, keep]


def subspace_gap(a, b) -> float:
    """Operator-norm distance between the orthogonal projections."""
    qa, _ = orth_columns(a)
    qb, _ = orth_columns(b)
    pa = qa @ qa.conj().T
    pb = qb @ qb.conj().T
    return spectral_norm(pa - pb)


def projector_onto_along(n_frame, w_frame) -> np.ndarray:
    """Projection of the ambient space onto span(n) along span(w).

    Requires the two spans to be complementary; near-degenerate input
    raises ``RankDeficiencyError``.
    """
    n_frame = as_complex_matrix(n_frame)
    w_frame = as_complex_matrix(w_frame)
    dim = n_frame.shape[0]
    if w_frame.shape[0] != dim or n_frame.shape[1] + w_frame.shape[1] != dim:
        raise DimensionMismatchError("spans do not form a complementary pair")
    full = np.hstack([n_frame, w_frame])
    s = np.linalg.svd(full, compute_uv=False)
    if s[-1] <= RANK_RTOL * s[0]:
        raise RankDeficiencyError("spans are not transversal")
    selector = np.zeros((dim, dim), dtype=np.complex128)
    k = n_frame.shape[1]
    selector[:, :k] = n_frame
    return selector @ np.linalg.inv(full)


def gauss_legendre(npts: int, a: float, b: float):
    """Gauss-Legendre nodes and weights on [a, b]."""
    x, w = np.polynomial.legendre.leggauss(npts)
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    return mid + half * x, half * w


# ---------------------------------------------------------------------------
# seeded random building blocks for tests and randomized suites


def ginibre(rng: np.random.Generator, m: int, n: int) -> np.ndarray:
    return rng.standard_normal((m, n)) + 1j * rng.standard_normal((m, n))


def random_unitary(rng: np.random.Generator, n: int) -> np.ndarray:
    q, r = np.linalg.qr(ginibre(rng, n, n))
    # fix phases so the draw is Haar distributed
    return q * (np.diagonal(r) / np.abs(np.diagonal(r)))


def random_hermitian(rng: np.random.Generator, n: int, scale: float = 1.0) -> np.ndarray:
    g = ginibre(rng, n, n)
    return scale * herm(g) / np.sqrt(n)


def random_skew_adjoint_invertible(
    rng: np.random.Generator, n: int, min_ev: float = 0.4, max_ev: float = 1.6
) -> np.ndarray:
    """Random J with J* = -J and singular values in [min_ev, max_ev]."""
    v = random_unitary(rng, n)
    ev = rng.uniform(min_ev, max_ev, size=n) * rng.choice([-1.0, 1.0], size=n)
    return 1j * (v @ np.diag(ev) @ v.conj().T)
