"""Execute scenarios and collect a machine-readable report.

Reports are deterministic: scenario entries are sorted by name, floats are
emitted as plain JSON numbers, and wall-clock timings live in a separate
sidecar so that two runs of the same build produce byte-identical report
files.
"""

from __future__ import annotations

import csv
import json
import math
import os
import time
import traceback
from concurrent.futures import ProcessPoolExecutor
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import scenarios as sc
from .calderon import calderon_pair, calderon_projection, calderon_vs_tangential
from .cobordism import BoundarySymbolPair, boundary_pair_from_system, obstruction_details
from .eigenproblem import RealizedOperator, fd_eigenvalues, find_eigenvalues
from .errors import CauchyKitError, ScenarioError
from .experiments import OperatorPath, rotation_gaps, sf_mas_experiment
from .linalg import spectral_norm
from .sectorial import TangentialMatrix, eigenprojection_oracle, sectorial_projection
from .systems import DoubleCoupling

REPORT_VERSION = 1


def _jsonable(obj):
    if isinstance(obj, (bool, int, str)) or obj is None:
        return obj
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else repr(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, np.generic):
        return _jsonable(obj.item())
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    raise TypeError(f"cannot serialize {type(obj)!r}")


def _check(checks: list, name: str, passed: bool, detail: str):
    checks.append({"name": name, "passed": bool(passed), "detail": detail})


def _run_sf_mas(spec: dict, tol_scale: float, oracle: bool) -> Tuple[dict, list]:
    system = sc.build_system(spec)
    dom = sc.build_domain(spec, system.n)
    direction = sc.build_direction(spec, system.n)
    path = OperatorPath(base=system, direction=direction,
                        t0=float(spec.get("t0", 0.0)),
                        t1=float(spec.get("t1", 1.0)))
    window = spec.get("window")
    res = sf_mas_experiment(path, dom, window=window,
                            samples=int(spec.get("samples", 17)),
                            include_angles=True)
    traj = res.flow.trajectories
    data = {
        "flow": res.flow.flow,
        "maslov": res.maslov,
        "agree": res.agree,
        "window": res.window,
        "crossings": [{"t": c.t, "direction": c.direction}
                      for c in res.flow.crossings],
        "trajectories": [
            {"label": br.label,
             "t": br.times(traj.ts),
             "value": br.vals}
            for br in traj.branches],
        "angles": {"t": res.angle_samples[0], "value": res.angle_samples[1]},
    }
    checks: list = []
    _check(checks, "flow_equals_maslov", res.agree,
           f"flow={res.flow.flow} maslov={res.maslov}")
    expect = spec.get("expect", {})
    if "flow" in expect:
        _check(checks, "flow", res.flow.flow == expect["flow"],
               f"got {res.flow.flow}, want {expect['flow']}")
    if "maslov" in expect:
        _check(checks, "maslov", res.maslov == expect["maslov"],
               f"got {res.maslov}, want {expect['maslov']}")
    return data, checks


def _run_eigs(spec: dict, tol_scale: float, oracle: bool) -> Tuple[dict, list]:
    system = sc.build_system(spec)
    dom = sc.build_domain(spec, system.n)
    op = RealizedOperator(system, dom)
    lo, hi = spec["window"]
    vals = find_eigenvalues(op, (float(lo), float(hi)))
    data = {"values": list(map(float, vals)), "count": int(vals.size)}
    checks: list = []
    if oracle:
        ref = fd_eigenvalues(op, (float(lo), float(hi)),
                             cells=int(spec.get("oracle_cells", 400)),
                             k=max(8, vals.size + 4))
        dist = (float(np.max(np.abs(np.sort(ref) - np.sort(vals))))
                if ref.size == vals.size else float("inf"))
        data["oracle_values"] = list(map(float, ref))
        data["oracle_distance"] = dist
        _check(checks, "oracle_count", ref.size == vals.size,
               f"locator {vals.size}, grid {ref.size}")
    expect = spec.get("expect", {})
    if "count" in expect:
        _check(checks, "count", data["count"] == expect["count"],
               f"got {data['count']}, want {expect['count']}")
    if "values" in expect:
        want = np.sort(np.asarray(expect["values"], float))
        tol = float(expect.get("tol", 1e-6)) * tol_scale
        if vals.size != want.size:
            _check(checks, "values", False,
                   f"got {vals.size} eigenvalues, want {want.size}")
        else:
            err = float(np.max(np.abs(np.sort(vals) - want)))
            _check(checks, "values", err <= tol, f"max err {err:.3e} tol {tol:.1e}")
    return data, checks


def _run_sectorial(spec: dict, tol_scale: float, oracle: bool) -> Tuple[dict, list]:
    b0 = sc.constant_matrix(spec["b0"])
    tm = TangentialMatrix(b0)
    xs = [float(x) for x in spec.get("x_values", (0.0, 0.25, 1.0, 4.0))]
    ora = eigenprojection_oracle(b0)
    rows = []
    worst = 0.0
    for x in xs:
        res = sectorial_projection(tm, x)
        row = {"x": x,
               "nodes_per_side": res.certificate.nodes_per_side,
               "quad_errors": res.certificate.errors}
        if not ora.skipped:
            err = spectral_norm(res.value - ora.q(x))
            row["oracle_error"] = float(err)
            worst = max(worst, float(err))
        rows.append(row)
    data = {"margin": tm.margin, "evaluations": rows,
            "oracle_skipped": ora.skipped, "oracle_condition": ora.condition}
    checks: list = []
    if not ora.skipped:
        tol = 1e-8 * tol_scale
        _check(checks, "oracle_agreement", worst <= tol,
               f"max err {worst:.3e} tol {tol:.1e}")
    expect = spec.get("expect", {})
    if "p_plus" in expect:
        want = sc.constant_matrix(expect["p_plus"])
        tol = float(expect.get("tol", 1e-8)) * tol_scale
        err = spectral_norm(sectorial_projection(tm, 0.0).value - want)
        _check(checks, "p_plus", err <= tol, f"err {err:.3e} tol {tol:.1e}")
    return data, checks


def _run_calderon(spec: dict, tol_scale: float, oracle: bool) -> Tuple[dict, list]:
    system = sc.build_system(spec)
    coupling = None
    if "coupling" in spec:
        coupling = DoubleCoupling(t0=sc.constant_matrix(spec["coupling"]["t0"]),
                                  t1=sc.constant_matrix(spec["coupling"]["t1"]))
    c_comp = calderon_projection(system, coupling, method="complement")
    c_jump = calderon_projection(system, coupling, method="jump")
    plus, minus = calderon_pair(system, coupling)
    eye = np.eye(plus.shape[0])
    direction = sc.build_direction(spec, system.n) if "direction" in spec else None
    comparison = calderon_vs_tangential(
        system, coupling, direction,
        eps=tuple(spec.get("eps", (1e-1, 1e-2, 1e-3, 1e-4))))
    data = {
        "method_agreement": float(spectral_norm(c_comp - c_jump)),
        "idempotency": float(spectral_norm(c_comp @ c_comp - c_comp)),
        "sum_identity": float(spectral_norm(plus + minus - eye)),
        "hermitian_defect": float(spectral_norm(c_comp - c_comp.conj().T)),
        "model_deviation": comparison.deviation,
        "eps": list(comparison.eps),
        "gaps": list(comparison.gaps),
        "slope": comparison.slope,
        "modulus": comparison.modulus,
    }
    checks: list = []
    _check(checks, "methods_agree", data["method_agreement"] <= 1e-6 * tol_scale,
           f"gap {data['method_agreement']:.3e}")
    _check(checks, "idempotent", data["idempotency"] <= 1e-8 * tol_scale,
           f"defect {data['idempotency']:.3e}")
    _check(checks, "pair_sums_to_identity", data["sum_identity"] <= 1e-8 * tol_scale,
           f"defect {data['sum_identity']:.3e}")
    expect = spec.get("expect", {})
    if "deviation_max" in expect:
        _check(checks, "deviation", comparison.deviation <= expect["deviation_max"],
               f"got {comparison.deviation:.3e}, cap {expect['deviation_max']:.1e}")
    if "slope_min" in expect:
        ok = comparison.slope is not None and comparison.slope >= expect["slope_min"]
        _check(checks, "slope", ok,
               f"got {comparison.slope}, floor {expect['slope_min']}")
    return data, checks


def _run_cobordism(spec: dict, tol_scale: float, oracle: bool) -> Tuple[dict, list]:
    if "system" in spec:
        pair = boundary_pair_from_system(sc.build_system(spec))
    else:
        pair = BoundarySymbolPair(j0=sc.constant_matrix(spec["j0"]),
                                  b0=sc.constant_matrix(spec["b0"]),
                                  label=spec["name"])
    det = obstruction_details(pair)
    data = {"signature": det.signature, "space_dim": det.space_dim,
            "positive": det.positive, "negative": det.negative,
            "zeros_excluded": det.zeros_excluded,
            "form_eigenvalues": list(map(float, det.form_eigenvalues))}
    checks: list = []
    expect = spec.get("expect", {})
    if "signature" in expect:
        _check(checks, "signature", det.signature == expect["signature"],
               f"got {det.signature}, want {expect['signature']}")
    if "dim" in expect:
        _check(checks, "dim", det.space_dim == expect["dim"],
               f"got {det.space_dim}, want {expect['dim']}")
    return data, checks


def _run_continuity(spec: dict, tol_scale: float, oracle: bool) -> Tuple[dict, list]:
    system = sc.build_system(spec)
    dom = sc.build_domain(spec, system.n)
    op = RealizedOperator(system, dom)
    eps = tuple(float(e) for e in spec.get("eps", (1e-1, 1e-2, 1e-3, 1e-4)))
    res = rotation_gaps(op, eps=eps, seed=int(spec.get("seed", 7)),
                        cells=int(spec.get("cells", 64)))
    data = {"eps": list(res.eps), "gaps": list(map(float, res.gaps)),
            "slope": res.slope}
    checks: list = []
    expect = spec.get("expect", {})
    if "slope_min" in expect:
        _check(checks, "slope", res.slope >= expect["slope_min"],
               f"got {res.slope:.3f}, floor {expect['slope_min']}")
    return data, checks


_HANDLERS = {
    "sf_mas": _run_sf_mas,
    "eigs": _run_eigs,
    "sectorial": _run_sectorial,
    "calderon": _run_calderon,
    "cobordism": _run_cobordism,
    "continuity": _run_continuity,
}


def _failing_stage(exc: BaseException) -> str:
    """Deepest package-internal function on the traceback."""
    stage = "scenario"
    for frame in traceback.extract_tb(exc.__traceback__):
        if f"cauchykit{os.sep}" in frame.filename and not frame.name.startswith("_run"):
            stage = frame.name
    return stage


def run_scenario(spec: dict, tol_scale: float = 1.0,
                 oracle: bool = False) -> dict:
    """One scenario in, one report entry out.  Never raises on math errors."""
    sc.validate(spec)
    entry = {"name": spec["name"], "kind": spec["kind"],
             "scenario": spec, "tol_scale": tol_scale}
    try:
        data, checks = _HANDLERS[spec["kind"]](spec, tol_scale, oracle)
    except (CauchyKitError, np.linalg.LinAlgError) as exc:
        entry["status"] = "error"
        entry["error"] = f"{type(exc).__name__}: {exc}"
        entry["stage"] = _failing_stage(exc)
        entry["checks"] = []
        return entry
    entry["data"] = _jsonable(data)
    entry["checks"] = checks
    entry["status"] = "ok" if all(c["passed"] for c in checks) else "mismatch"
    return entry


def _timed_entry(args) -> Tuple[dict, float]:
    spec, tol_scale, oracle = args
    t0 = time.perf_counter()
    entry = run_scenario(spec, tol_scale=tol_scale, oracle=oracle)
    return entry, time.perf_counter() - t0


def run_report(specs: Sequence[dict], tol_scale: float = 1.0,
               oracle: bool = False, jobs: int = 1) -> Tuple[dict, dict]:
    """Run scenarios and return (report, timings)."""
    names = [s["name"] for s in specs]
    if len(set(names)) != len(names):
        raise ScenarioError("duplicate scenario names in one run")
    work = [(s, tol_scale, oracle) for s in specs]
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            done = list(pool.map(_timed_entry, work))
    else:
        done = [_timed_entry(w) for w in work]
    entries = sorted((e for e, _ in done), key=lambda e: e["name"])
    timings = {e["name"]: t for e, t in done}
    counts = {"ok": 0, "mismatch": 0, "error": 0}
    for e in entries:
        counts[e["status"]] += 1
    report = {
        "version": REPORT_VERSION,
        "scenarios": entries,
        "summary": {"total": len(entries), **counts},
    }
    return report, timings


def write_report(report: dict, timings: dict, outdir: str) -> str:
    os.makedirs(outdir, exist_ok=True)
    path = os.path.join(outdir, "report.json")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    with open(os.path.join(outdir, "timings.json"), "w", encoding="utf-8") as fh:
        json.dump({k: round(v, 6) for k, v in sorted(timings.items())},
                  fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def _write_csv(path: str, header: Sequence[str], rows: Sequence[Sequence]):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


def _figure():
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    return plt


def emit_plot_data(report: dict, outdir: str,
                   kinds: Optional[Sequence[str]] = None,
                   strict: bool = True) -> List[str]:
    """CSV + SVG artifacts for the plottable scenario kinds."""
    wanted = set(kinds) if kinds else {"eigen_trajectories", "principal_angles",
                                       "convergence"}
    os.makedirs(outdir, exist_ok=True)
    plt = _figure()
    written: List[str] = []

    def save(fig, stem):
        path = os.path.join(outdir, f"{stem}.svg")
        fig.savefig(path)
        plt.close(fig)
        written.append(path)

    for entry in report["scenarios"]:
        if entry["status"] == "error":
            continue
        name, kind, data = entry["name"], entry["kind"], entry.get("data", {})
        if kind == "sf_mas" and "eigen_trajectories" in wanted:
            rows = [(br["label"], t, v)
                    for br in data["trajectories"]
                    for t, v in zip(br["t"], br["value"])]
            path = os.path.join(outdir, f"{name}_trajectories.csv")
            _write_csv(path, ("branch", "t", "value"), rows)
            written.append(path)
            fig, ax = plt.subplots(figsize=(6, 4))
            for br in data["trajectories"]:
                ax.plot(br["t"], br["value"], lw=1.0)
            ax.axhline(0.0, color="k", lw=0.5)
            for c in data["crossings"]:
                ax.axvline(c["t"], color="r", ls=":", lw=0.8)
            ax.set_xlabel("t")
            ax.set_ylabel("eigenvalue")
            ax.set_title(f"{name}: flow {data['flow']}")
            save(fig, f"{name}_trajectories")
        if kind == "sf_mas" and "principal_angles" in wanted:
            ts, vals = data["angles"]["t"], data["angles"]["value"]
            path = os.path.join(outdir, f"{name}_angles.csv")
            _write_csv(path, ("t", "angle"), list(zip(ts, vals)))
            written.append(path)
            fig, ax = plt.subplots(figsize=(6, 4))
            ax.plot(ts, vals, lw=1.0)
            ax.set_xlabel("t")
            ax.set_ylabel("smallest principal angle")
            ax.set_title(f"{name}: domain vs Cauchy data")
            save(fig, f"{name}_angles")
        if kind == "sectorial" and "convergence" in wanted:
            rows = []
            for ev in data["evaluations"]:
                for n, err in zip(ev["nodes_per_side"], ev["quad_errors"]):
                    rows.append((ev["x"], n, err))
            path = os.path.join(outdir, f"{name}_convergence.csv")
            _write_csv(path, ("x", "nodes_per_side", "error"), rows)
            written.append(path)
            fig, ax = plt.subplots(figsize=(6, 4))
            for ev in data["evaluations"]:
                ax.semilogy(ev["nodes_per_side"], np.maximum(ev["quad_errors"], 1e-18),
                            marker="o", label=f"x={ev['x']:g}")
            ax.set_xlabel("nodes per side")
            ax.set_ylabel("doubling increment")
            ax.legend(fontsize=8)
            ax.set_title(f"{name}: contour quadrature")
            save(fig, f"{name}_convergence")
        if kind in ("continuity", "calderon") and "convergence" in wanted:
            eps, gaps = data.get("eps", []), data.get("gaps", [])
            if not eps:
                continue
            path = os.path.join(outdir, f"{name}_convergence.csv")
            _write_csv(path, ("eps", "gap"), list(zip(eps, gaps)))
            written.append(path)
            fig, ax = plt.subplots(figsize=(6, 4))
            ax.loglog(eps, np.maximum(gaps, 1e-18), marker="o")
            ax.set_xlabel("perturbation size")
            ax.set_ylabel("projection gap")
            slope = data.get("slope")
            title = f"{name}: continuity"
            if slope is not None:
                title += f" (slope {slope:.2f})"
            ax.set_title(title)
            save(fig, f"{name}_convergence")
    if not written and strict:
        raise CauchyKitError(
            f"missing series: no {'/'.join(sorted(wanted))} data in the report")
    return written
