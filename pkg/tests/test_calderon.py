import numpy as np
import pytest

import cauchykit as ck
from cauchykit.calderon import calderon_pair, calderon_projection, double_kernel_matrix
from cauchykit.errors import CauchyKitError
from cauchykit.linalg import spectral_norm


def _systems(rng, count):
    for k in range(count):
        yield ck.random_symmetric_system(rng, n=2 + (k % 2),
                                         variable_j=bool(k % 3 == 1))


def test_scalar_frozen_projection():
    # for -i d/dx the Cauchy data is span(1, 1) and the complement span(1, -1)
    s = ck.scalar_shift_system(0.0)
    c = calderon_projection(s)
    np.testing.assert_allclose(c, 0.5 * np.ones((2, 2)), atol=1e-10)


def test_methods_agree():
    rng = np.random.default_rng(0)
    for s in _systems(rng, 6):
        a = calderon_projection(s, method="complement")
        b = calderon_projection(s, method="jump")
        assert spectral_norm(a - b) < 1e-6


def test_projection_identities():
    rng = np.random.default_rng(1)
    for s in _systems(rng, 4):
        c_plus, c_minus = calderon_pair(s)
        n2 = 2 * s.n
        np.testing.assert_allclose(c_plus @ c_plus, c_plus, atol=1e-8)
        np.testing.assert_allclose(c_plus + c_minus, np.eye(n2), atol=1e-8)
        np.testing.assert_allclose(c_minus @ c_minus, c_minus, atol=1e-8)


def test_range_is_the_cauchy_data_space():
    rng = np.random.default_rng(2)
    for s in _systems(rng, 3):
        c = calderon_projection(s)
        cd = ck.cauchy_data_space(s).frame
        # the projection fixes kernel traces
        np.testing.assert_allclose(c @ cd, cd, atol=1e-8)


def test_self_adjointness_for_constant_j_systems():
    # with constant skew J and the default coupling the projection is
    # orthogonal, not merely idempotent
    rng = np.random.default_rng(3)
    for _ in range(4):
        s = ck.random_symmetric_system(rng, n=2, variable_j=False)
        c = calderon_projection(s)
        assert spectral_norm(c - c.conj().T) < 1e-6


def test_unknown_method_rejected():
    s = ck.scalar_shift_system(0.0)
    with pytest.raises(CauchyKitError):
        calderon_projection(s, method="qr")


def test_double_kernel_matrix_is_invertible_by_default():
    rng = np.random.default_rng(4)
    for s in _systems(rng, 3):
        m, smin = double_kernel_matrix(s)
        assert m.shape == (s.n, s.n)
        assert smin > 1e-8


def test_poisson_solution_splits_traces():
    rng = np.random.default_rng(5)
    s = ck.random_symmetric_system(rng, n=2)
    xi = rng.normal(size=4) + 1j * rng.normal(size=4)
    sol = ck.poisson_solution(s, xi)
    c_plus, c_minus = calderon_pair(s)
    np.testing.assert_allclose(sol.xi_plus, c_plus @ xi, atol=1e-8)
    np.testing.assert_allclose(sol.xi_plus + sol.xi_minus, xi, atol=1e-8)


def test_poisson_solution_solves_the_equation():
    rng = np.random.default_rng(6)
    s = ck.random_symmetric_system(rng, n=2)
    xi = rng.normal(size=4)
    sol = ck.poisson_solution(s, xi)
    xs = np.linspace(0.0, 1.0, 9)
    u = sol.u_at(xs)
    # traces of u reproduce the plus component
    np.testing.assert_allclose(
        np.concatenate([u[0], u[-1]]), sol.xi_plus, atol=1e-7)
    # finite-difference residual of J(u' + Bu) in the interior
    h = xs[1] - xs[0]
    for k in range(1, 8):
        du = (u[k + 1] - u[k - 1]) / (2 * h)
        res = s.j(xs[k]) @ (du + s.b(xs[k]) @ u[k])
        assert np.abs(res).max() < 5e-2 * max(1.0, np.abs(u[k]).max())


def test_cauchy_data_against_tangential_model_for_decoupled_system():
    # diagonal constant system: the projection equals its half-line model
    s = ck.constant_system([[0.0, -1.0], [1.0, 0.0]],
                           [[1.0, 0.0], [0.0, -1.0]], symmetric=True)
    cmp = ck.calderon_vs_tangential(s)
    assert cmp.deviation < 1.0 + 1e-9


def test_ucp_through_poisson_data():
    # a kernel element vanishing at x=0 vanishes everywhere
    rng = np.random.default_rng(7)
    s = ck.random_symmetric_system(rng, n=2)
    res = ck.weak_ucp_check(s)
    assert res.ok and not res.ill_conditioned
