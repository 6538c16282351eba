"""Acceptance gate: nine numbered criteria, one printed pass/fail line each.

Every criterion builds its own randomized corpus from a pinned seed, states
its tolerance explicitly, and measures its own wall clock against the stated
budget.  Run with ``pytest tests/test_acceptance.py -s`` to see the lines.
"""

import time

import numpy as np
import pytest
import scipy.linalg

import cauchykit as ck
from cauchykit import (
    RealizedOperator,
    TangentialMatrix,
    boundary_pair_from_system,
    eigenprojection_oracle,
    find_eigenvalues,
    p_plus,
    q_plus,
    signature_obstruction,
)
from cauchykit.calderon import calderon_pair, calderon_projection
from cauchykit.errors import (
    CauchyKitError,
    DegenerateCrossingError,
    RefinementBudgetError,
    UndersampledPathError,
    WindowError,
)
from cauchykit.experiments import OperatorPath, rotation_gaps, sf_mas_experiment
from cauchykit.linalg import ginibre, random_unitary, spectral_norm
from cauchykit.sectorial import sectorial_projection


def _line(tag: str, ok: bool, detail: str) -> bool:
    print(f"{tag}: {'PASS' if ok else 'FAIL'} [{detail}]", flush=True)
    return ok


def _balanced_domain(system):
    # Lagrangian frame from the standard basis of the boundary form
    std = ck.green_form(system).standard_form()
    n = system.n
    return std.s @ np.vstack([np.eye(n), np.eye(n)]) / np.sqrt(2)


# -- A1: projection identities over a randomized corpus -----------------------

def test_a1_projection_identities():
    budget, tol = 120.0, 1e-8
    t0 = time.perf_counter()
    rng = np.random.default_rng(101)
    dims = (2, 4, 8)
    worst = 0.0
    count = 0
    for i in range(250):
        n = dims[i % 3]
        s = ck.random_symmetric_system(rng, n=n, variable=bool(i % 2),
                                       variable_j=(i % 4 == 0))
        c_plus, c_minus = calderon_pair(s)
        eye = np.eye(2 * n)
        worst = max(worst,
                    spectral_norm(c_plus @ c_plus - c_plus),
                    spectral_norm(c_plus + c_minus - eye))
        count += 1
    for i in range(250):
        n = dims[i % 3]
        tm = TangentialMatrix(_margin_matrix(rng, n))
        p = p_plus(tm)
        pm = p_plus(tm.reflected())
        worst = max(worst,
                    spectral_norm(p @ p - p),
                    spectral_norm(p + pm - np.eye(n)))
        count += 1
    dt = time.perf_counter() - t0
    ok = worst <= tol and count >= 500 and dt <= budget
    assert _line("A1", ok,
                 f"{count} samples, worst identity residual {worst:.2e} "
                 f"(tol {tol:g}), {dt:.1f}s of {budget:g}s")


def _margin_matrix(rng, n, margin=0.1, norm_cap=0.8):
    while True:
        re = rng.uniform(0.12, 0.45, n) * rng.choice([-1.0, 1.0], n)
        im = rng.uniform(-0.25, 0.25, n)
        v = random_unitary(rng, n) + 0.15 * ginibre(rng, n, n) / np.sqrt(n)
        b = v @ np.diag(re + 1j * im) @ np.linalg.inv(v)
        eigs = np.linalg.eigvals(b)
        if np.abs(eigs.real).min() >= margin and np.linalg.norm(b, 2) <= norm_cap:
            return b


# -- A2: spectral flow equals Maslov index -------------------------------------

def _a2_family(rng, n):
    base = ck.random_symmetric_system(rng, n=n, variable_j=False)
    c = rng.uniform(1.5, 3.0) * rng.choice([-1.0, 1.0])
    h = 0.5 * (lambda g: (g + g.conj().T) / 2)(
        rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))
    cm = c * np.eye(n) + h
    path = OperatorPath(base, lambda x, m=cm: m, 0.0, 1.0)
    return path, _balanced_domain(base), 3.5 + abs(c)


def test_a2_flow_equals_maslov():
    budget = 300.0
    t0 = time.perf_counter()

    # the calibration case must come out exactly 1 = 1
    shift = ck.scalar_shift_system(0.0)
    path0 = OperatorPath(shift, lambda x: np.eye(1), 0.0, 2.0 * np.pi)
    res0 = sf_mas_experiment(path0, _balanced_domain(shift), window=4.0)
    exact_ok = res0.flow.flow == 1 and res0.maslov == 1

    rng = np.random.default_rng(20260814)
    sizes = [1] * 45 + [2] * 45 + [3] * 10
    done, attempts, disagreements, nonzero = 0, 0, 0, 0
    while done < 100 and attempts < 160:
        attempts += 1
        n = sizes[done]
        path, dom, window = _a2_family(rng, n)
        op0 = RealizedOperator(path.at(path.t0), dom)
        op1 = RealizedOperator(path.at(path.t1), dom)
        # the criterion only covers families with nondegenerate endpoints
        if len(find_eigenvalues(op0, (-1e-3, 1e-3))) or \
           len(find_eigenvalues(op1, (-1e-3, 1e-3))):
            continue
        try:
            res = sf_mas_experiment(path, dom, window=window, samples=9)
        except (WindowError, RefinementBudgetError, DegenerateCrossingError,
                UndersampledPathError):
            continue  # corpus pathology, not a disagreement
        done += 1
        if not res.agree:
            disagreements += 1
        if res.flow.flow != 0:
            nonzero += 1
    dt = time.perf_counter() - t0
    ok = exact_ok and done == 100 and disagreements == 0 and dt <= budget
    assert _line("A2", ok,
                 f"calibration 1=1 {'ok' if exact_ok else 'BROKEN'}; "
                 f"{done} families ({nonzero} with nonzero flow), "
                 f"{disagreements} disagreements, {dt:.1f}s of {budget:g}s")


# -- A3: negative spectrum of the length-4pi problem ---------------------------

def test_a3_morse_eigenvalues():
    budget, tol = 30.0, 1e-6
    t0 = time.perf_counter()
    s = ck.sl_companion_system(4.0 * np.pi, offset=1.0)
    dom = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 0.0], [0.0, 1.0]])
    op = RealizedOperator(s, dom)
    vals = find_eigenvalues(op, (-0.99, -0.01))
    want = np.array([(k / 4.0) ** 2 - 1.0 for k in (1, 2, 3)])
    err = float(np.max(np.abs(vals - want))) if len(vals) == 3 else np.inf
    dt = time.perf_counter() - t0
    ok = len(vals) == 3 and err <= tol and dt <= budget
    assert _line("A3", ok,
                 f"{len(vals)} negative eigenvalues, max deviation {err:.2e} "
                 f"(tol {tol:g}), {dt:.1f}s of {budget:g}s")


# -- A4/A5 corpus ---------------------------------------------------------------

@pytest.fixture(scope="module")
def halfline_corpus():
    rng = np.random.default_rng(404)
    corpus = []
    for n in (2, 4, 8):
        for _ in range(100):
            while True:
                tm = TangentialMatrix(_margin_matrix(rng, n))
                oracle = eigenprojection_oracle(tm)
                if not oracle.skipped:
                    break
            corpus.append((tm, oracle.p))
    return corpus


def test_a4_sectorial_projections(halfline_corpus):
    budget, tol = 120.0, 1e-8
    t0 = time.perf_counter()
    worst_oracle, worst_semigroup = 0.0, 0.0
    for tm, p_ref in halfline_corpus:
        p = p_plus(tm)
        worst_oracle = max(worst_oracle, spectral_norm(p - p_ref))
        for x in (0.0, 0.25, 1.0, 4.0):
            want = scipy.linalg.expm(-x * tm.b0) @ p
            worst_semigroup = max(worst_semigroup,
                                  spectral_norm(q_plus(tm, x) - want))
    # node-doubling gain of at least 10x per doubling once the error is in
    # the asymptotic regime (<= 5e-2), down to the 1e-12 floor
    doubling_ok, worst_ratio = True, np.inf
    for tm, _ in halfline_corpus[::60]:
        fresh = TangentialMatrix(tm.b0)
        errs = sectorial_projection(fresh, start=16).certificate.errors
        for a, b in zip(errs, errs[1:]):
            if a <= 5e-2 and a > 1e-12:
                ratio = a / max(b, 1e-300)
                worst_ratio = min(worst_ratio, ratio)
                if ratio < 10.0:
                    doubling_ok = False
    dt = time.perf_counter() - t0
    ok = (worst_oracle <= tol and worst_semigroup <= tol and doubling_ok
          and dt <= budget)
    assert _line("A4", ok,
                 f"{len(halfline_corpus)} matrices; vs oracle {worst_oracle:.2e}, "
                 f"semigroup {worst_semigroup:.2e} (tol {tol:g}); worst "
                 f"doubling gain {worst_ratio:.1f}x; {dt:.1f}s of {budget:g}s")


def test_a5_semigroup_continuity(halfline_corpus):
    budget, tol = 120.0, 1e-6
    t0 = time.perf_counter()
    worst_final, violations = 0.0, 0
    for tm, _ in halfline_corpus:
        p = p_plus(tm)
        errs = [spectral_norm(q_plus(tm, 2.0 ** -k) - p) for k in range(1, 21)]
        worst_final = max(worst_final, errs[-1])
        violations += sum(1 for a, b in zip(errs, errs[1:]) if b > a + 1e-13)
    dt = time.perf_counter() - t0
    ok = violations == 0 and worst_final <= tol and dt <= budget
    assert _line("A5", ok,
                 f"x=2^-k for k=1..20 on {len(halfline_corpus)} matrices; "
                 f"{violations} monotonicity violations, final error "
                 f"{worst_final:.2e} (tol {tol:g}); {dt:.1f}s of {budget:g}s")


# -- A6: Cauchy data and Calderon coherence -------------------------------------

def test_a6_cauchy_data_and_projections():
    budget = 120.0
    t0 = time.perf_counter()
    rng = np.random.default_rng(606)
    lag_fail, agree_worst, herm_worst = 0, 0.0, 0.0
    constant_j = 0
    for i in range(200):
        n = (1, 2, 3, 4)[i % 4]
        variable_j = (i % 4 == 3) and n > 1
        s = ck.random_symmetric_system(rng, n=n, variable=bool(i % 2),
                                       variable_j=variable_j)
        space = ck.green_form(s)
        cd = ck.cauchy_data_space(s)
        if not space.is_lagrangian(cd, tol=1e-8):
            lag_fail += 1
        a = calderon_projection(s, method="complement")
        b = calderon_projection(s, method="jump")
        agree_worst = max(agree_worst, spectral_norm(a - b))
        if not variable_j:
            constant_j += 1
            herm_worst = max(herm_worst, spectral_norm(a - a.conj().T))
    dt = time.perf_counter() - t0
    ok = (lag_fail == 0 and agree_worst <= 1e-6 and herm_worst <= 1e-6
          and dt <= budget)
    assert _line("A6", ok,
                 f"200 systems: {lag_fail} non-Lagrangian Cauchy data (tol 1e-8), "
                 f"method gap {agree_worst:.2e} (tol 1e-6), hermiticity "
                 f"{herm_worst:.2e} on {constant_j} constant-J systems "
                 f"(tol 1e-6); {dt:.1f}s of {budget:g}s")


# -- A7: vanishing and invariance of the signature obstruction ------------------

def test_a7_signature_obstruction():
    budget = 120.0
    t0 = time.perf_counter()
    rng = np.random.default_rng(707)
    nonzero, variance = 0, 0
    pairs = 0
    for i in range(50):
        n = (2, 3)[i % 2]
        s = ck.random_symmetric_system(rng, n=n, variable=bool(i % 2))
        pair = boundary_pair_from_system(s)
        sig = signature_obstruction(pair)
        pairs += 1
        if sig != 0:
            nonzero += 1
        for _ in range(20):
            m = random_unitary(rng, pair.n) + 0.2 * ginibre(rng, pair.n, pair.n)
            if signature_obstruction(pair.transformed(m)) != sig:
                variance += 1
    dt = time.perf_counter() - t0
    ok = nonzero == 0 and variance == 0 and pairs >= 50 and dt <= budget
    assert _line("A7", ok,
                 f"{pairs} bounding pairs: {nonzero} nonzero obstructions, "
                 f"{variance} transform variances over 20 transforms each; "
                 f"{dt:.1f}s of {budget:g}s")


# -- A8: Lipschitz continuity of the two projection routes ----------------------

def _endpoint_margin(system):
    m0 = np.min(np.abs(np.linalg.eigvals(system.b(0.0)).real))
    m1 = np.min(np.abs(np.linalg.eigvals(system.b(1.0)).real))
    return min(m0, m1)


def test_a8_projection_continuity():
    budget = 120.0
    t0 = time.perf_counter()
    rng = np.random.default_rng(808)
    eps = (1e-1, 1e-2, 1e-3, 1e-4)
    cal_slopes, rot_slopes = [], []
    lipschitz = 0.0
    done = attempts = 0
    while done < 12 and attempts < 400:
        attempts += 1
        # constant-J symmetry mirrors eigenvalues of B across the imaginary
        # axis, so endpoint spectra often land exactly on it (odd n always
        # does); the tangential model needs them strictly off, so draw even
        # sizes and redraw until both ends clear a working margin
        n = (2, 4)[done % 2]
        s = ck.random_symmetric_system(rng, n=n, variable_j=False)
        if _endpoint_margin(s) < 0.05:
            continue
        c = ck.systems.random_direction(rng, n, scale=1.0)
        cmp = ck.calderon_vs_tangential(s, direction=c, eps=eps)
        cal_slopes.append(cmp.slope)
        lipschitz = max(lipschitz, cmp.modulus)
        op = RealizedOperator(s, _balanced_domain(s))
        rot = rotation_gaps(op, eps=eps, seed=900 + done)
        rot_slopes.append(rot.slope)
        done += 1
    # every sampled gap satisfies gap <= L * eps for this single constant
    dt = time.perf_counter() - t0
    ok = (done == 12 and min(cal_slopes) >= 0.9 and min(rot_slopes) >= 0.9
          and np.isfinite(lipschitz) and dt <= budget)
    assert _line("A8", ok,
                 f"12 perturbation families: projection slopes >= "
                 f"{min(cal_slopes):.3f}, rotation slopes >= "
                 f"{min(rot_slopes):.3f} (need 0.9), single Lipschitz "
                 f"constant L={lipschitz:.3g}; {dt:.1f}s of {budget:g}s")


# -- A9: discretization order of the box scheme ----------------------------------

def test_a9_box_scheme_order():
    budget = 120.0
    t0 = time.perf_counter()
    s = ck.sl_companion_system(4.0 * np.pi, offset=1.0)
    dom = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 0.0], [0.0, 1.0]])
    op = RealizedOperator(s, dom)
    orders, lists = ck.fd_order(op, (-0.99, -0.01), cells=(200, 400, 800), k=8)
    worst = float(np.min(orders))
    dt = time.perf_counter() - t0
    ok = len(lists[0]) == 3 and worst >= 1.8 and dt <= budget
    assert _line("A9", ok,
                 f"Richardson orders {np.round(orders, 3).tolist()} on cells "
                 f"(200, 400, 800), need >= 1.8; {dt:.1f}s of {budget:g}s")
