"""Boundary data of kernels: Green form, Cauchy data, Calderon projections.

For A = J(d/dx + B) with skew-adjoint J the boundary form on traces
rho(u) = (u(0), u(1)) is Omega = blockdiag(-J(0), J(1)), and integration by
parts gives  <u, Av> - <Au, v> = omega(rho u, rho v)  exactly when
J' = JB + B*J.  The Cauchy data space (traces of the kernel) is then a
Lagrangian; see CONVENTIONS.md for the orientation bookkeeping.

Calderon projections onto the Cauchy data space are computed two ways, a
complement-projection route and a jump-decomposition route through the
kernel matrix of the coupled double, and the two must agree.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from . import linalg
from .errors import CauchyKitError, DoubleDegenerateError
from .propagation import fundamental_solution, propagate_grid
from .sectorial import TangentialMatrix, p_plus
from .systems import DoubleCoupling, IntervalSystem
from .symplectic import HermitianSymplecticSpace, LagrangianFrame

METHOD_AGREE_TOL = 1e-6
UCP_CONDITION_FLOOR = 1e-12


def green_form(system: IntervalSystem) -> HermitianSymplecticSpace:
    """Boundary form blockdiag(-J(0), J(1)) on trace space C^(2n)."""
    n = system.n
    omega = np.zeros((2 * n, 2 * n), dtype=np.complex128)
    omega[:n, :n] = -system.j(0.0)
    omega[n:, n:] = system.j(1.0)
    return HermitianSymplecticSpace(omega)


def green_form_defect(system: IntervalSystem, trials: int = 4,
                      seed: int = 0, degree: int = 3,
                      quad_nodes: int = 40) -> float:
    """Max residual of the trace identity over random polynomial sections."""
    rng = np.random.default_rng(seed)
    n = system.n
    xs, ws = linalg.gauss_legendre(quad_nodes, 0.0, 1.0)
    omega = green_form(system).omega

    def apply_a(coeffs, x):
        powers = x ** np.arange(degree + 1)
        u = coeffs @ powers
        dpowers = np.arange(degree + 1) * x ** np.concatenate(
            [[0], np.arange(degree)])
        du = coeffs @ dpowers
        return system.j(x) @ (du + system.b(x) @ u), u

    worst = 0.0
    for _ in range(trials):
        cu = linalg.ginibre(rng, n, degree + 1)
        cv = linalg.ginibre(rng, n, degree + 1)
        inner_uav = 0.0 + 0.0j
        inner_auv = 0.0 + 0.0j
        for x, w in zip(xs, ws):
            au, u = apply_a(cu, x)
            av, v = apply_a(cv, x)
            inner_uav += w * (u.conj() @ av)
            inner_auv += w * (au.conj() @ v)
        rho_u = np.concatenate([cu @ (0.0 ** np.arange(degree + 1)),
                                cu @ np.ones(degree + 1)])
        rho_v = np.concatenate([cv @ (0.0 ** np.arange(degree + 1)),
                                cv @ np.ones(degree + 1)])
        boundary = rho_u.conj() @ omega @ rho_v
        worst = max(worst, abs(boundary - (inner_uav - inner_auv)))
    return worst


def cauchy_data_space(system: IntervalSystem, lam: complex = 0.0,
                      phi: Optional[np.ndarray] = None) -> LagrangianFrame:
    """Traces of the lambda-kernel: span of (a, Phi_lambda(1,0) a)."""
    if phi is None:
        phi = fundamental_solution(system, lam)
    n = system.n
    cols = np.vstack([np.eye(n, dtype=np.complex128), phi])
    return LagrangianFrame.from_columns(cols)


@dataclass(frozen=True)
class UcpResult:
    ok: bool
    margin: float
    ill_conditioned: bool


def weak_ucp_check(system: IntervalSystem) -> UcpResult:
    """Kernel elements vanishing at one endpoint vanish identically.

    With J invertible the propagator is invertible, so the statement holds
    with margin sigma_min(Phi); tiny margins flag a stiff system whose
    numerics should not be trusted downstream.
    """
    phi = fundamental_solution(system, 0.0)
    smin = float(np.linalg.svd(phi, compute_uv=False)[-1])
    return UcpResult(ok=smin > 0.0, margin=smin,
                     ill_conditioned=smin < UCP_CONDITION_FLOOR)


def double_kernel_matrix(system: IntervalSystem,
                         coupling: Optional[DoubleCoupling] = None):
    """Kernel matrix M = Phi~ T0 - T1 Phi of the coupled double.

    Phi~ is the propagator of the formal adjoint.  Returns (M, sigma_min(M));
    a singular M means the coupled double has nontrivial kernel.
    """
    if coupling is None:
        coupling = DoubleCoupling.default(system)
    coupling.validate(system)
    phi = fundamental_solution(system, 0.0)
    phi_t = fundamental_solution(system.formal_adjoint(), 0.0)
    m = phi_t @ coupling.t0 - coupling.t1 @ phi
    smin = float(np.linalg.svd(m, compute_uv=False)[-1])
    return m, smin


def _jump_coefficients(system: IntervalSystem, coupling: DoubleCoupling):
    m, smin = double_kernel_matrix(system, coupling)
    if smin <= 1e-10 * max(1.0, linalg.spectral_norm(m)):
        raise DoubleDegenerateError(
            "coupled double is singular; jump decomposition unavailable"
        )
    phi = fundamental_solution(system, 0.0)
    phi_t = fundamental_solution(system.formal_adjoint(), 0.0)
    n = system.n
    rhs = np.hstack([phi_t @ coupling.t0, -coupling.t1])
    a_coef = np.linalg.solve(m, rhs)  # a = a_coef @ xi
    return a_coef, phi, phi_t


def calderon_projection(system: IntervalSystem,
                        coupling: Optional[DoubleCoupling] = None,
                        method: str = "complement") -> np.ndarray:
    """Projection of trace space onto the Cauchy data space.

    The complementary subspace is the coupling-transported Cauchy data of
    the formal adjoint; ``method`` selects the complement-projection or the
    jump-decomposition route.
    """
    if coupling is None:
        coupling = DoubleCoupling.default(system)
    coupling.validate(system)
    n = system.n
    if method == "complement":
        phi = fundamental_solution(system, 0.0)
        phi_t = fundamental_solution(system.formal_adjoint(), 0.0)
        n_frame = np.vstack([np.eye(n), phi])
        w_frame = np.vstack([np.linalg.inv(coupling.t0),
                             np.linalg.solve(coupling.t1, phi_t)])
        return linalg.projector_onto_along(n_frame, w_frame)
    if method == "jump":
        a_coef, phi, _ = _jump_coefficients(system, coupling)
        return np.vstack([a_coef, phi @ a_coef])
    raise CauchyKitError(f"unknown method {method!r}")


def calderon_pair(system: IntervalSystem,
                  coupling: Optional[DoubleCoupling] = None):
    """(C_plus, C_minus) from the jump decomposition; they sum to identity."""
    if coupling is None:
        coupling = DoubleCoupling.default(system)
    coupling.validate(system)
    a_coef, phi, phi_t = _jump_coefficients(system, coupling)
    n = system.n
    c_plus = np.vstack([a_coef, phi @ a_coef])
    b_top = np.hstack([np.eye(n), np.zeros((n, n))]) - a_coef
    c_minus = np.vstack([
        b_top,
        np.linalg.solve(coupling.t1, phi_t @ (coupling.t0 @ b_top)),
    ])
    return c_plus, c_minus


@dataclass(frozen=True)
class PoissonSolution:
    xi: np.ndarray
    xi_plus: np.ndarray
    xi_minus: np.ndarray
    a: np.ndarray
    b: np.ndarray
    u_at: Callable[[np.ndarray], np.ndarray]
    v_at: Callable[[np.ndarray], np.ndarray]


def poisson_solution(system: IntervalSystem, xi,
                     coupling: Optional[DoubleCoupling] = None) -> PoissonSolution:
    """Split trace data xi into kernel traces plus transported adjoint traces.

    u solves Au = 0 with rho(u) = C_plus xi; v solves the adjoint equation
    and carries the complementary jump through the coupling.
    """
    if coupling is None:
        coupling = DoubleCoupling.default(system)
    coupling.validate(system)
    xi = np.asarray(xi, dtype=np.complex128).reshape(-1)
    if xi.size != 2 * system.n:
        raise CauchyKitError("trace data must have length 2n")
    a_coef, phi, phi_t = _jump_coefficients(system, coupling)
    a = a_coef @ xi
    b = coupling.t0 @ (xi[: system.n] - a)
    xi_plus = np.concatenate([a, phi @ a])
    v0 = np.linalg.solve(coupling.t0, b)
    xi_minus = np.concatenate([v0, np.linalg.solve(coupling.t1, phi_t @ b)])
    adjoint = system.formal_adjoint()

    def u_at(xs):
        return np.einsum("kij,j->ki", propagate_grid(system, 0.0, xs), a)

    def v_at(xs):
        return np.einsum("kij,j->ki", propagate_grid(adjoint, 0.0, xs), v0)

    return PoissonSolution(xi=xi, xi_plus=xi_plus, xi_minus=xi_minus, a=a,
                           b=b, u_at=u_at, v_at=v_at)


@dataclass(frozen=True)
class TangentialComparison:
    deviation: float
    eps: Sequence[float]
    gaps: Sequence[float]
    slope: Optional[float]
    modulus: Optional[float]


def calderon_vs_tangential(system: IntervalSystem,
                           coupling: Optional[DoubleCoupling] = None,
                           direction=None,
                           eps: Sequence[float] = (1e-1, 1e-2, 1e-3, 1e-4)
                           ) -> TangentialComparison:
    """Distance of the Calderon projection from its constant-coefficient model.

    The model is blockdiag of the positive spectral projection of B(0) and
    the negative one of B(1).  With a perturbation direction the parameter
    continuity of the projection itself is measured on the given offsets.
    """
    c0 = calderon_projection(system, coupling)
    tm0 = TangentialMatrix(system.b(0.0))
    tm1 = TangentialMatrix(-system.b(1.0))
    n = system.n
    model = np.zeros_like(c0)
    model[:n, :n] = p_plus(tm0)
    model[n:, n:] = p_plus(tm1)
    deviation = linalg.spectral_norm(c0 - model)
    if direction is None:
        return TangentialComparison(deviation=deviation, eps=(), gaps=(),
                                    slope=None, modulus=None)
    gaps = []
    for e in eps:
        ce = calderon_projection(system.with_shift(e, direction), coupling)
        gaps.append(linalg.spectral_norm(ce - c0))
    logs = np.polyfit(np.log(np.asarray(eps)), np.log(np.maximum(gaps, 1e-300)), 1)
    modulus = float(max(g / e for g, e in zip(gaps, eps)))
    return TangentialComparison(deviation=deviation, eps=tuple(eps),
                                gaps=tuple(gaps), slope=float(logs[0]),
                                modulus=modulus)
