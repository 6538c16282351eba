import numpy as np
import pytest

from cauchykit import EigenFamily, spectral_flow, track_eigenvalues
from cauchykit.errors import CauchyKitError, IdenticallyZeroError, WindowError
from cauchykit.spectral_flow import PARAM_TOL


def _diag_family(*fns, t0=0.0, t1=1.0, window=None):
    def fn(t):
        return np.diag([f(t) for f in fns]).astype(complex)
    return EigenFamily.from_matrices(fn, t0, t1, window=window)


def test_monotone_crossing_counts_plus_one():
    fam = _diag_family(lambda t: t - 0.5, lambda t: 2.0)
    res = spectral_flow(fam)
    assert res.flow == 1
    assert len(res.crossings) == 1
    c = res.crossings[0]
    assert c.direction == 1
    assert abs(c.t - 0.5) <= 10 * PARAM_TOL


def test_monotone_descent_counts_minus_one():
    fam = _diag_family(lambda t: 0.5 - t, lambda t: -2.0)
    assert spectral_flow(fam).flow == -1


def test_opposite_crossings_cancel():
    fam = _diag_family(lambda t: t - 0.3, lambda t: 0.7 - t, lambda t: 2.0)
    res = spectral_flow(fam)
    assert res.flow == 0
    assert sorted(c.direction for c in res.crossings) == [-1, 1]


def test_colliding_pair_has_zero_flow():
    # ordered tracking relabels the branches at the collision, the net
    # count is insensitive to that
    fam = _diag_family(lambda t: t, lambda t: -t, t0=-1.0, t1=1.0)
    assert spectral_flow(fam).flow == 0


def test_initial_zero_counts_with_outgoing_direction():
    up = _diag_family(lambda t: t, lambda t: 2.0)
    dn = _diag_family(lambda t: -t, lambda t: 2.0)
    assert spectral_flow(up).flow == 1
    assert spectral_flow(dn).flow == -1


def test_final_zero_is_not_counted():
    fam = _diag_family(lambda t: t - 1.0, lambda t: 2.0)
    res = spectral_flow(fam)
    assert res.flow == 0
    assert res.crossings == []


def test_both_endpoints_on_zero():
    # leaves zero downward (counts -1), returns to it at t1 (ignored)
    fam = _diag_family(lambda t: t * (t - 1.0), lambda t: 2.0)
    assert spectral_flow(fam).flow == -1


def test_tangential_touch_resolves_to_zero():
    fam = _diag_family(lambda t: (t - 0.5) ** 2, lambda t: 2.0)
    res = spectral_flow(fam)
    assert res.flow == 0
    assert res.crossings == []


def test_identically_zero_branch_is_rejected():
    fam = _diag_family(lambda t: 0.0, lambda t: 2.0)
    with pytest.raises(IdenticallyZeroError):
        spectral_flow(fam)


def test_zero_over_a_subinterval_is_rejected():
    fam = _diag_family(lambda t: max(t - 0.5, 0.0) ** 1, lambda t: 2.0)
    with pytest.raises(IdenticallyZeroError):
        spectral_flow(fam)


def test_window_grows_until_branches_stay_inside():
    # the second eigenvalue outruns the initial guess of 4*max|w(t0)|
    fam = _diag_family(lambda t: t - 0.5, lambda t: 2.0 + 20.0 * t)
    res = spectral_flow(fam)
    assert res.flow == 1
    assert res.window >= 22.0


def test_locator_and_matrix_routes_agree():
    def mat(t):
        return np.diag([t - 0.5, 2.0]).astype(complex)

    def loc(t, lo, hi):
        vals = [t - 0.5, 2.0]
        return np.array(sorted(v for v in vals if lo <= v <= hi))

    fm = spectral_flow(EigenFamily.from_matrices(mat, 0.0, 1.0))
    fl = spectral_flow(EigenFamily.from_locator(loc, 0.0, 1.0, window=3.0))
    assert fm.flow == fl.flow == 1
    assert abs(fm.crossings[0].t - fl.crossings[0].t) <= 1e-6


def test_locator_without_window_is_rejected():
    with pytest.raises(WindowError):
        EigenFamily(t0=0.0, t1=1.0, locator_fn=lambda t, lo, hi: np.array([]))


def test_family_requires_exactly_one_source():
    with pytest.raises(CauchyKitError):
        EigenFamily(t0=0.0, t1=1.0)


def test_non_hermitian_matrix_is_rejected():
    fam = EigenFamily.from_matrices(
        lambda t: np.array([[0.0, 1.0], [0.0, 0.0]]), 0.0, 1.0)
    with pytest.raises(CauchyKitError):
        spectral_flow(fam)


def test_trajectories_cover_the_interval():
    fam = _diag_family(lambda t: np.sin(3.0 * t) - 0.2, lambda t: 2.0)
    traj = track_eigenvalues(fam)
    assert traj.ts[0] == fam.t0 and traj.ts[-1] == fam.t1
    assert all(len(b.idx) == len(traj.ts) for b in traj.branches)


def test_flow_result_casts_to_int():
    fam = _diag_family(lambda t: t - 0.5, lambda t: 2.0)
    assert int(spectral_flow(fam)) == 1
