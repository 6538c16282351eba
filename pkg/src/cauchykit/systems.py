"""First-order operators J(x)(d/dx + B(x)) on the unit interval.

Coefficients are callables of x in [0, 1] returning n x n complex matrices;
J must be invertible throughout.  A system may carry a hermitian positive
semidefinite weight W for eigenvalue problems A u = lambda W u, and the
``symmetric`` flag asserts the pair (J skew-adjoint, J' = JB + B*J) that
makes the operator formally self-adjoint.

The generator-style constructor for random symmetric systems parametrizes
B = J^{-1}(S + J'/2) with S(x) hermitian, which satisfies the compatibility
identity for any S.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import linalg
from .errors import (
    CauchyKitError,
    CouplingPositivityError,
    DimensionMismatchError,
    RankDeficiencyError,
)

Coefficient = Callable[[float], np.ndarray]

_VALIDATION_GRID = 33
_COND_CAP = 1e8
_SYMMETRY_TOL = 1e-6


def _fd_derivative(fn: Coefficient, x: float, h: float = 5e-4) -> np.ndarray:
    """Fourth-order difference staying inside [0, 1]."""
    if x - 2 * h < 0.0:
        pts, wts = [0, 1, 2, 3, 4], [-25, 48, -36, 16, -3]
        base, step = x, h
    elif x + 2 * h > 1.0:
        pts, wts = [0, -1, -2, -3, -4], [25, -48, 36, -16, 3]
        base, step = x, h
    else:
        pts, wts = [-2, -1, 1, 2], [1, -8, 8, -1]
        base, step = x, h
    acc = sum(w * np.asarray(fn(base + p * step), dtype=np.complex128)
              for p, w in zip(pts, wts))
    return acc / (12.0 * step)


@dataclass(eq=False)
class IntervalSystem:
    n: int
    j_fn: Coefficient
    b_fn: Coefficient
    dj_fn: Optional[Coefficient] = None
    w_fn: Optional[Coefficient] = None
    symmetric: bool = False
    label: str = ""
    _trusted: bool = False
    _cache: dict = field(default_factory=dict, repr=False)
    # (base, t, direction) when this system is base + t * direction; lets the
    # propagator rebuild coefficient tables as one axpy on the base's tables
    shift_parent: Optional[tuple] = field(default=None, repr=False)

    def __post_init__(self):
        if not self._trusted:
            self._validate()

    # -- coefficient access ------------------------------------------------
    def j(self, x: float) -> np.ndarray:
        return np.asarray(self.j_fn(x), dtype=np.complex128)

    def b(self, x: float) -> np.ndarray:
        return np.asarray(self.b_fn(x), dtype=np.complex128)

    def dj(self, x: float) -> np.ndarray:
        if self.dj_fn is not None:
            return np.asarray(self.dj_fn(x), dtype=np.complex128)
        return _fd_derivative(self.j_fn, x)

    def w(self, x: float) -> np.ndarray:
        if self.w_fn is None:
            return np.eye(self.n, dtype=np.complex128)
        return np.asarray(self.w_fn(x), dtype=np.complex128)

    @property
    def weighted(self) -> bool:
        return self.w_fn is not None

    # -- validation ----------------------------------------------------------
    def _validate(self):
        xs = np.linspace(0.0, 1.0, _VALIDATION_GRID)
        for x in xs:
            jm = self.j(x)
            if jm.shape != (self.n, self.n):
                raise DimensionMismatchError("J(x) has the wrong shape")
            sv = np.linalg.svd(jm, compute_uv=False)
            if sv[-1] <= 0 or sv[0] / sv[-1] > _COND_CAP:
                raise RankDeficiencyError(
                    f"J({x:.3g}) is singular or too ill conditioned"
                )
            if self.b(x).shape != (self.n, self.n):
                raise DimensionMismatchError("B(x) has the wrong shape")
            if self.w_fn is not None:
                wm = self.w(x)
                if np.abs(wm - wm.conj().T).max() > 1e-10 * max(1.0, np.abs(wm).max()):
                    raise CauchyKitError("weight W(x) must be hermitian")
                if np.linalg.eigvalsh(linalg.herm(wm)).min() < -1e-10:
                    raise CauchyKitError("weight W(x) must be positive semidefinite")
        if self.symmetric:
            for x in xs:
                jm = self.j(x)
                scale = max(1.0, linalg.spectral_norm(jm))
                if linalg.spectral_norm(jm + jm.conj().T) > 1e-8 * scale:
                    raise CauchyKitError("symmetric systems need skew-adjoint J")
                bm = self.b(x)
                res = self.dj(x) - jm @ bm - bm.conj().T @ jm
                if linalg.spectral_norm(res) > _SYMMETRY_TOL * max(
                        1.0, linalg.spectral_norm(jm @ bm)):
                    raise CauchyKitError(
                        f"J' = JB + B*J fails at x={x:.3g} "
                        f"(residual {linalg.spectral_norm(res):.2e})"
                    )

    # -- derived systems -----------------------------------------------------
    def formal_adjoint(self) -> "IntervalSystem":
        """System of the formal adjoint: -J* v' + (B*J* - (J*)') v."""
        jf, bf, djf = self.j_fn, self.b_fn, self.dj_fn

        def j_t(x):
            return -np.asarray(jf(x), dtype=np.complex128).conj().T

        def b_t(x):
            js = np.asarray(jf(x), dtype=np.complex128).conj().T
            bs = np.asarray(bf(x), dtype=np.complex128).conj().T
            djs = self.dj(x).conj().T
            return np.linalg.solve(js, djs - bs @ js)

        dj_t = (lambda x, f=djf: -np.asarray(f(x), np.complex128).conj().T) \
            if djf is not None else None
        return IntervalSystem(n=self.n, j_fn=j_t, b_fn=b_t, dj_fn=dj_t,
                              w_fn=self.w_fn, symmetric=False,
                              label=self.label + "~", _trusted=True)

    def with_shift(self, t: float, direction: Coefficient) -> "IntervalSystem":
        """System of A + t C for a hermitian multiplication direction C."""
        jf, bf = self.j_fn, self.b_fn

        def b_shift(x):
            jm = np.asarray(jf(x), dtype=np.complex128)
            c = np.asarray(direction(x), dtype=np.complex128)
            return np.asarray(bf(x), dtype=np.complex128) + t * np.linalg.solve(jm, c)

        return IntervalSystem(n=self.n, j_fn=jf, b_fn=b_shift, dj_fn=self.dj_fn,
                              w_fn=self.w_fn, symmetric=self.symmetric,
                              label=f"{self.label}+{t:g}C", _trusted=True,
                              shift_parent=(self, float(t), direction))


# ---------------------------------------------------------------------------
# coupling of a system with its formal adjoint across the two endpoints


@dataclass(frozen=True, eq=False)
class DoubleCoupling:
    """Invertible endpoint couplings (T0, T1) between a system and its adjoint."""

    t0: np.ndarray
    t1: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "t0", linalg.as_complex_matrix(self.t0))
        object.__setattr__(self, "t1", linalg.as_complex_matrix(self.t1))

    @classmethod
    def default(cls, system: IntervalSystem) -> "DoubleCoupling":
        j0 = system.j(0.0)
        j1 = system.j(1.0)
        return cls(t0=np.linalg.inv(-j0.conj().T), t1=np.linalg.inv(j1.conj().T))

    def validate(self, system: IntervalSystem):
        """Positivity gate making the coupled double operator invertible."""
        g0 = linalg.herm(system.j(0.0) @ self.t0)
        g1 = linalg.herm(-system.j(1.0) @ self.t1)
        for name, g in (("x=0", g0), ("x=1", g1)):
            if np.linalg.eigvalsh(g).min() <= 1e-10:
                raise CouplingPositivityError(
                    f"coupling positivity fails at {name}"
                )


# ---------------------------------------------------------------------------
# builders


def constant_system(j, b, w=None, symmetric: bool = False,
                    label: str = "const") -> IntervalSystem:
    jm = linalg.as_complex_matrix(j)
    bm = linalg.as_complex_matrix(b)
    wm = linalg.as_complex_matrix(w) if w is not None else None
    n = jm.shape[0]
    return IntervalSystem(
        n=n, j_fn=lambda x: jm, b_fn=lambda x: bm,
        dj_fn=lambda x: np.zeros_like(jm),
        w_fn=(lambda x: wm) if wm is not None else None,
        symmetric=symmetric, label=label)


def scalar_shift_system(t: float) -> IntervalSystem:
    """-i d/dx + t, written as J(d/dx + B) with J = -i."""
    return constant_system([[-1j]], [[1j * t]], symmetric=True,
                           label=f"shift{t:g}")


def sl_companion_system(length: float, offset: float = 0.0,
                        potential: Optional[Callable[[float], float]] = None,
                        label: str = "sl") -> IntervalSystem:
    """-(1/L^2) u'' + (q - offset) u = lambda u as a weighted 2x2 system.

    The second-order problem on [0, L] is pulled back to the unit interval
    through y = (u, u'/L); the weight diag(L, 0) carries the eigenvalue
    coupling, which only sees the first component.
    """
    ell = float(length)
    jm = np.array([[0.0, -1.0], [1.0, 0.0]], dtype=np.complex128)

    def b_fn(x):
        q = potential(x) if potential is not None else 0.0
        return np.array([[0.0, -ell], [-ell * (q - offset), 0.0]],
                        dtype=np.complex128)

    wm = np.array([[ell, 0.0], [0.0, 0.0]], dtype=np.complex128)
    return IntervalSystem(n=2, j_fn=lambda x: jm, b_fn=b_fn,
                          dj_fn=lambda x: np.zeros((2, 2), np.complex128),
                          w_fn=lambda x: wm, symmetric=True, label=label)


def random_hermitian_field(rng: np.random.Generator, n: int,
                           scale: float = 1.0, variable: bool = True):
    """x -> S(x) hermitian, smooth in x."""
    s0 = linalg.random_hermitian(rng, n, scale=scale)
    if not variable:
        return lambda x: s0
    s1 = linalg.random_hermitian(rng, n, scale=0.6 * scale)
    s2 = linalg.random_hermitian(rng, n, scale=0.6 * scale)

    def fn(x):
        return s0 + np.sin(2 * np.pi * x) * s1 + (x * (1.0 - x)) * s2

    return fn


def random_symmetric_system(rng: np.random.Generator, n: int,
                            variable: bool = True, variable_j: bool = False,
                            scale: float = 1.0,
                            label: str = "rand-sym") -> IntervalSystem:
    s_fn = random_hermitian_field(rng, n, scale=scale, variable=variable)
    if not variable_j:
        jm = linalg.random_skew_adjoint_invertible(rng, n)

        def j_fn(x):
            return jm

        def dj_fn(x):
            return np.zeros((n, n), dtype=np.complex128)

        def b_fn(x):
            return np.linalg.solve(jm, s_fn(x))
    else:
        h0 = linalg.random_hermitian(rng, n)
        ev, vec = np.linalg.eigh(h0)
        ev = np.sign(ev) * np.maximum(np.abs(ev), 0.8)
        h0 = (vec * ev) @ vec.conj().T
        h1 = linalg.random_hermitian(rng, n, scale=1.0)
        h1 *= 1.0 / max(1.0, linalg.spectral_norm(h1))

        def j_fn(x):
            return 1j * (h0 + 0.3 * np.sin(np.pi * x) * h1)

        def dj_fn(x):
            return 1j * (0.3 * np.pi * np.cos(np.pi * x)) * h1

        def b_fn(x):
            return np.linalg.solve(j_fn(x), s_fn(x) + 0.5 * dj_fn(x))

    return IntervalSystem(n=n, j_fn=j_fn, b_fn=b_fn, dj_fn=dj_fn,
                          symmetric=True, label=label)


def random_system(rng: np.random.Generator, n: int, variable: bool = True,
                  label: str = "rand") -> IntervalSystem:
    """Generic (non-symmetric) system with skew-adjoint constant J."""
    jm = linalg.random_skew_adjoint_invertible(rng, n)
    b0 = linalg.ginibre(rng, n, n) / np.sqrt(n)
    if variable:
        b1 = 0.5 * linalg.ginibre(rng, n, n) / np.sqrt(n)

        def b_fn(x):
            return b0 + np.cos(np.pi * x) * b1
    else:
        def b_fn(x):
            return b0

    return IntervalSystem(n=n, j_fn=lambda x: jm, b_fn=b_fn,
                          dj_fn=lambda x: np.zeros((n, n), np.complex128),
                          label=label)


def random_direction(rng: np.random.Generator, n: int,
                     scale: float = 2.5) -> Coefficient:
    """Constant hermitian multiplication direction for operator paths."""
    c = linalg.random_hermitian(rng, n, scale=scale)
    return lambda x: c
