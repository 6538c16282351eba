import json
import os

import pytest

from cauchykit.cli import main
from cauchykit.runner import emit_plot_data, run_report, write_report
from cauchykit.scenarios import load_bundled


def _spec_file(tmp_path, spec, name="spec.json"):
    path = tmp_path / name
    path.write_text(json.dumps(spec))
    return str(path)


def test_list_flag_and_subcommand(capsys):
    assert main(["--list"]) == 0
    flag_out = capsys.readouterr().out
    assert main(["list"]) == 0
    sub_out = capsys.readouterr().out
    assert flag_out == sub_out
    assert "periodic_shift" in flag_out
    assert "morse_4pi" in flag_out


def test_no_command_prints_usage(capsys):
    assert main([]) == 2
    assert "usage" in capsys.readouterr().err.lower()


def test_run_single_scenario(tmp_path, capsys):
    out = str(tmp_path / "out")
    rc = main(["run", "imaginary_symbol", "--out", out])
    assert rc == 0
    report = json.loads((tmp_path / "out" / "report.json").read_text())
    assert report["summary"]["ok"] == report["summary"]["total"] == 1
    entry = report["scenarios"][0]
    assert entry["status"] == "ok"
    # the report echoes the scenario it ran
    assert entry["scenario"]["kind"] == "cobordism"
    # wall-clock lives in the sidecar, not the report
    assert "timings" not in report
    timings = json.loads((tmp_path / "out" / "timings.json").read_text())
    assert set(timings) == {"imaginary_symbol"}
    assert "ok" in capsys.readouterr().out


def test_reports_are_byte_identical(tmp_path):
    outs = []
    for k in (1, 2):
        out = str(tmp_path / f"out{k}")
        assert main(["run", "rotation_continuity", "sector_companion",
                     "--out", out]) == 0
        outs.append((tmp_path / f"out{k}" / "report.json").read_bytes())
    assert outs[0] == outs[1]


def test_mismatch_sets_exit_code(tmp_path, capsys):
    spec = load_bundled("imaginary_symbol")
    spec["name"] = "wrong_expectation"
    spec["expect"] = {"signature": 0}
    path = _spec_file(tmp_path, spec)
    rc = main(["run", path, "--out", str(tmp_path / "out")])
    assert rc == 1
    report = json.loads((tmp_path / "out" / "report.json").read_text())
    assert report["scenarios"][0]["status"] == "mismatch"
    assert "failed: signature" in capsys.readouterr().out


def test_tol_scale_loosens_expectations(tmp_path):
    spec = load_bundled("sector_companion")
    spec["name"] = "tight"
    # make the frozen value fail at the stock tolerance
    spec["expect"]["p_plus"][0][0] += 5e-8
    path = _spec_file(tmp_path, spec)
    assert main(["run", path, "--out", str(tmp_path / "a")]) == 1
    assert main(["run", path, "--out", str(tmp_path / "b"),
                 "--tol-scale", "100"]) == 0


def test_invalid_scenario_file_is_a_usage_error(tmp_path, capsys):
    path = _spec_file(tmp_path, {"name": "x", "kind": "sectorial"})
    rc = main(["run", path, "--out", str(tmp_path / "out")])
    assert rc == 2
    assert "b0" in capsys.readouterr().err


def test_partial_results_identify_the_failing_stage(tmp_path):
    # spectrum on the axis: the sectorial stage errors, the run completes
    spec = {"name": "axis", "kind": "sectorial", "b0": [[0.0]],
            "x_values": [0.0]}
    path = _spec_file(tmp_path, spec)
    rc = main(["run", path, "--out", str(tmp_path / "out")])
    assert rc == 1
    report = json.loads((tmp_path / "out" / "report.json").read_text())
    entry = report["scenarios"][0]
    assert entry["status"] == "error"
    assert "SpectralMarginError" in entry["error"]
    assert entry["stage"]


def test_parallel_jobs_agree_with_serial(tmp_path):
    names = ["imaginary_symbol", "sector_companion", "calderon_diagonal"]
    assert main(["run", *names, "--out", str(tmp_path / "ser")]) == 0
    assert main(["run", *names, "--jobs", "3",
                 "--out", str(tmp_path / "par")]) == 0
    ser = (tmp_path / "ser" / "report.json").read_bytes()
    par = (tmp_path / "par" / "report.json").read_bytes()
    assert ser == par


def test_run_emits_plot_artifacts(tmp_path, capsys):
    out = tmp_path / "out"
    rc = main(["run", "periodic_shift", "--plots", "--out", str(out)])
    assert rc == 0
    names = {p.name for p in out.iterdir()}
    assert "report.json" in names and "timings.json" in names
    csvs = [n for n in names if n.endswith(".csv")]
    svgs = [n for n in names if n.endswith(".svg")]
    assert csvs and svgs
    # mandatory header row on every csv
    for n in csvs:
        first = (out / n).read_text().splitlines()[0]
        assert any(c.isalpha() for c in first)


def test_plots_flag_tolerates_unplottable_scenarios(tmp_path, capsys):
    # the explicit plot subcommand rejects a report with no series, but
    # the run flag is best effort: the exit code stays with the checks
    out = tmp_path / "out"
    rc = main(["run", "imaginary_symbol", "--plots", "--out", str(out)])
    assert rc == 0
    assert "wrote 0 plot artifacts" in capsys.readouterr().out
    assert {p.name for p in out.iterdir()} == {"report.json", "timings.json"}


def test_plot_subcommand_filters_kinds(tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["run", "periodic_shift", "--out", str(out)]) == 0
    capsys.readouterr()  # drop the run output
    plot_dir = tmp_path / "plots"
    rc = main(["plot", str(out / "report.json"), "--out", str(plot_dir),
               "--kind", "principal_angles"])
    assert rc == 0
    written = capsys.readouterr().out.splitlines()
    assert written
    assert all("angles" in os.path.basename(p) for p in written)


def test_plot_with_no_series_is_an_error(tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["run", "imaginary_symbol", "--out", str(out)]) == 0
    rc = main(["plot", str(out / "report.json"),
               "--out", str(tmp_path / "plots")])
    assert rc == 2
    assert "missing series" in capsys.readouterr().err


def test_seed_override_reaches_the_report(tmp_path):
    out = tmp_path / "out"
    assert main(["run", "rotation_continuity", "--seed", "11",
                 "--out", str(out)]) == 0
    report = json.loads((out / "report.json").read_text())
    assert report["scenarios"][0]["scenario"]["seed"] == 11


def test_every_bundled_scenario_passes(tmp_path):
    # the full bundled suite is the default run target
    report, timings = run_report([load_bundled(n) for n in
                                  __import__("cauchykit.scenarios",
                                             fromlist=["bundled_names"])
                                  .bundled_names()])
    assert report["summary"]["ok"] == report["summary"]["total"]
    assert all(t < 60.0 for t in timings.values())
    write_report(report, timings, str(tmp_path))
    emit_plot_data(report, str(tmp_path))
