import json

import numpy as np
import pytest

from cauchykit.errors import ScenarioError
from cauchykit.scenarios import (
    bundled_names,
    build_direction,
    build_domain,
    build_system,
    load_bundled,
    load_scenario,
    matrix_fns,
    validate,
)


def _sf_spec(**over):
    spec = {
        "name": "t", "kind": "sf_mas",
        "system": {"n": 1, "j": [[[0, -1]]], "b": [[0]], "symmetric": True},
        "domain": "periodic",
        "direction": [[1]],
        "t0": 0.0, "t1": 1.0,
    }
    spec.update(over)
    return spec


def test_bundled_inventory():
    names = bundled_names()
    assert "periodic_shift" in names
    assert "morse_4pi" in names
    assert len(names) >= 6


def test_bundled_scenarios_validate():
    for name in bundled_names():
        spec = load_bundled(name)
        assert spec["name"] == name


def test_unknown_bundled_name():
    with pytest.raises(ScenarioError):
        load_bundled("nope")


def test_missing_required_fields():
    with pytest.raises(ScenarioError):
        validate({"kind": "sf_mas"})  # no name
    with pytest.raises(ScenarioError):
        validate({"name": "x", "kind": "bogus"})
    spec = _sf_spec()
    del spec["system"]
    with pytest.raises(ScenarioError):
        validate(spec)
    spec = _sf_spec()
    del spec["direction"]
    with pytest.raises(ScenarioError):
        validate(spec)
    spec = _sf_spec()
    del spec["system"]["n"]
    with pytest.raises(ScenarioError):
        validate(spec)


def test_sectorial_requires_b0():
    with pytest.raises(ScenarioError):
        validate({"name": "x", "kind": "sectorial"})


def test_continuity_requires_a_seed():
    spec = {
        "name": "x", "kind": "continuity",
        "system": {"n": 1, "j": [[[0, -1]]], "b": [[0]], "symmetric": True},
        "domain": "periodic",
    }
    with pytest.raises(ScenarioError):
        validate(spec)


def test_scalar_entries():
    fn, dfn, const = matrix_fns([[2.0, [0, -1]], [[1, 0], 0]], 2)
    assert const
    np.testing.assert_allclose(fn(0.3), [[2.0, -1j], [1.0, 0.0]])
    np.testing.assert_allclose(dfn(0.3), np.zeros((2, 2)))


def test_poly_entries_and_derivatives():
    fn, dfn, const = matrix_fns([[{"poly": [1.0, 2.0, 3.0]}]], 1)
    assert not const
    x = 0.4
    np.testing.assert_allclose(fn(x), [[1.0 + 2.0 * x + 3.0 * x * x]])
    np.testing.assert_allclose(dfn(x), [[2.0 + 6.0 * x]])


def test_trig_entries_and_derivatives():
    fn, dfn, const = matrix_fns([[{"trig": [0.5, [1.0, -2.0]]}]], 1)
    assert not const
    x = 0.3
    w = 2 * np.pi
    np.testing.assert_allclose(
        fn(x), [[0.5 + np.cos(w * x) - 2.0 * np.sin(w * x)]], atol=1e-14)
    np.testing.assert_allclose(
        dfn(x), [[-w * np.sin(w * x) - 2.0 * w * np.cos(w * x)]], atol=1e-12)


def test_matrix_shape_mismatch():
    with pytest.raises(ScenarioError):
        matrix_fns([[1.0]], 2)


def test_build_system_and_domain():
    spec = load_bundled("periodic_shift")
    s = build_system(spec)
    assert s.n == 1 and s.symmetric
    dom = build_domain(spec, s.n)
    np.testing.assert_allclose(dom.frame,
                               np.array([[1.0], [1.0]]) / np.sqrt(2))
    c = build_direction(spec, s.n)
    np.testing.assert_allclose(c(0.2), [[1.0]])


def test_load_scenario_from_file(tmp_path):
    path = tmp_path / "s.json"
    path.write_text(json.dumps(_sf_spec()))
    spec = load_scenario(path)
    assert spec["kind"] == "sf_mas"
    bad = tmp_path / "bad.json"
    bad.write_text("{nope")
    with pytest.raises(ScenarioError):
        load_scenario(bad)


def test_variable_coefficient_system_builds():
    spec = {
        "name": "v", "kind": "eigs",
        "system": {
            "n": 2,
            "j": [[[0, 0], [0, -1]], [[0, 1], [0, 0]]],
            "b": [[0, {"poly": [0.0, -1.0]}], [{"poly": [0.0, 1.0]}, 0]],
        },
        "domain": [[1, 0], [0, 0], [0, 0], [1, 0]],
        "window": [-1.0, 1.0],
    }
    validate(spec)
    s = build_system(spec)
    np.testing.assert_allclose(s.b(0.5), [[0.0, -0.5], [0.5, 0.0]])
