import numpy as np
import pytest

from cauchykit import _accel


def _random_tables(rng, n, nsteps, scale=0.5):
    shape = (2 * nsteps + 1, n, n)
    a = scale * (rng.normal(size=shape) + 1j * rng.normal(size=shape))
    b = scale * (rng.normal(size=shape) + 1j * rng.normal(size=shape))
    return a, b


@pytest.mark.skipif(not _accel.HAVE_NUMBA, reason="numba unavailable")
@pytest.mark.parametrize("n", [1, 2, 3, 5])
def test_rk4_backends_agree(n):
    rng = np.random.default_rng(n)
    a, b = _random_tables(rng, n, nsteps=64)
    lams = np.linspace(-2.0, 2.0, 7).astype(np.complex128)
    r_np = _accel.rk4_propagate_numpy(a, b, lams, 1.0 / 64)
    r_nb = _accel.rk4_propagate_numba(a, b, lams, 1.0 / 64)
    np.testing.assert_allclose(r_nb, r_np, rtol=0, atol=1e-13)


def test_rk4_matches_exponential_for_constant_coefficients():
    import scipy.linalg

    rng = np.random.default_rng(3)
    n, nsteps = 3, 256
    a0 = 0.4 * (rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))
    b0 = 0.4 * (rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))
    a = np.broadcast_to(a0, (2 * nsteps + 1, n, n)).copy()
    b = np.broadcast_to(b0, (2 * nsteps + 1, n, n)).copy()
    lam = 1.3 + 0j
    got = _accel.rk4_propagate(a, b, np.array([lam]), 1.0 / nsteps)[0]
    want = scipy.linalg.expm(lam * a0 - b0)
    np.testing.assert_allclose(got, want, atol=1e-9)


def _smooth_tables(n, nsteps):
    # stepping order only holds for smooth coefficients, so build the tables
    # from trig polynomials rather than white noise
    xs = np.linspace(0.0, 1.0, 2 * nsteps + 1)
    i, j = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    a = (np.sin((i + 1)[None] * np.pi * xs[:, None, None])
         + 1j * np.cos((j + 2)[None] * xs[:, None, None])) * 0.4
    b = (np.cos((i + j + 1)[None] * xs[:, None, None])
         + 1j * np.sin((i + 2 * j + 1)[None] * xs[:, None, None])) * 0.4
    return a.astype(np.complex128), b.astype(np.complex128)


def test_rk4_backward_step_inverts_forward():
    n, nsteps = 2, 256
    a, b = _smooth_tables(n, nsteps)
    lams = np.array([0.7 + 0j])
    fwd = _accel.rk4_propagate(a, b, lams, 1.0 / nsteps)[0]
    bwd = _accel.rk4_propagate(a[::-1], b[::-1], lams, -1.0 / nsteps)[0]
    np.testing.assert_allclose(bwd @ fwd, np.eye(n), atol=1e-9)


@pytest.mark.skipif(not _accel.HAVE_NUMBA, reason="numba unavailable")
def test_resolvent_backends_agree():
    rng = np.random.default_rng(9)
    n = 4
    b0 = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    nodes = (2.0 + rng.normal(size=13)) + 1j * rng.normal(size=13)
    weights = rng.normal(size=13) + 1j * rng.normal(size=13)
    r_np = _accel.resolvent_sum_numpy(b0, nodes, weights)
    r_nb = _accel.resolvent_sum_numba(b0, nodes, weights)
    np.testing.assert_allclose(r_nb, r_np, rtol=0, atol=1e-12)


def test_resolvent_sum_is_weighted_inverse_sum():
    b0 = np.diag([1.0 + 0j, -1.0])
    nodes = np.array([3.0 + 0j, 2.0 + 1j])
    weights = np.array([1.0 + 0j, 0.5 + 0j])
    got = _accel.resolvent_sum(b0, nodes, weights)
    want = sum(w * np.linalg.inv(z * np.eye(2) - b0)
               for z, w in zip(nodes, weights))
    np.testing.assert_allclose(got, want, atol=1e-14)
