import csv
import json
import math

import numpy as np
import pytest
import yaml

from squeezed_reservoir import __version__, cli
from squeezed_reservoir.config import parse_config, validate_config, with_axis_value
from squeezed_reservoir.errors import ConfigError, StiffnessError


def make_doc(tmp_path, **overrides):
    doc = {
        "dim": 24,
        "squeeze": {"r": 0.2, "theta": 0.5},
        "gamma_profile": {"kind": "constant", "gamma0": 1.0},
        "initial_state": {"kind": "fock", "n": 1},
        "time_grid": {"t_end": 4.0, "n_samples": 9},
        "method": "both",
        "tolerances": {"ode_tol": 1e-10},
        "outputs": {
            "trajectory_path": str(tmp_path / "out" / "traj.csv"),
            "diagnostics_path": str(tmp_path / "out" / "diag.json"),
            "spectrum_path": str(tmp_path / "out" / "spec.csv"),
        },
    }
    doc.update(overrides)
    return doc


def write_config(tmp_path, doc, name="run.yaml"):
    path = tmp_path / name
    path.write_text(yaml.safe_dump(doc))
    return str(path)


def read_csv(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def test_run_writes_all_outputs(tmp_path):
    doc = make_doc(tmp_path)
    assert cli.main(["run", write_config(tmp_path, doc)]) == 0
    rows = read_csv(doc["outputs"]["trajectory_path"])
    assert len(rows) == 9
    assert list(rows[0]) == list(cli.TRAJECTORY_COLUMNS) + [cli.INTER_METHOD_COLUMN]
    assert max(float(r["inter_method_distance"]) for r in rows) < 1e-7
    assert float(rows[0]["Gamma_int"]) == 0.0
    assert float(rows[-1]["y"]) == pytest.approx(1 - math.exp(-4.0), rel=1e-14)
    diag = json.load(open(doc["outputs"]["diagnostics_path"]))
    assert diag["fitted_convergence_rate"] == pytest.approx(-1.0, rel=0.05)
    spec = read_csv(doc["outputs"]["spectrum_path"])
    assert len(spec) == 24 * 24
    assert abs(float(spec[0]["real"])) < 1e-10


def test_outputs_are_deterministic(tmp_path):
    doc = make_doc(tmp_path)
    path = write_config(tmp_path, doc)
    assert cli.main(["run", path]) == 0
    first = {k: open(doc["outputs"][k], "rb").read() for k in doc["outputs"]}
    assert cli.main(["run", path]) == 0
    second = {k: open(doc["outputs"][k], "rb").read() for k in doc["outputs"]}
    assert first == second


@pytest.mark.parametrize("method", ["numeric", "analytic"])
def test_single_method_has_no_inter_method_column(tmp_path, method):
    doc = make_doc(tmp_path, method=method)
    if method == "analytic":
        del doc["outputs"]["spectrum_path"]
    assert cli.main(["run", write_config(tmp_path, doc)]) == 0
    rows = read_csv(doc["outputs"]["trajectory_path"])
    assert list(rows[0]) == list(cli.TRAJECTORY_COLUMNS)


def test_validate_only_writes_nothing(tmp_path):
    doc = make_doc(tmp_path)
    path = write_config(tmp_path, doc)
    assert cli.main(["run", path, "--validate-only"]) == 0
    assert cli.main(["--validate-only", "run", path]) == 0
    assert not (tmp_path / "out").exists()


@pytest.mark.parametrize(
    "patch, field",
    [
        ({"dim": 2}, "dim"),
        ({"squeeze": {"r": -0.1}}, "squeeze.r"),
        ({"gamma_profile": {"kind": "constant", "gamma0": -1}}, "gamma_profile"),
        ({"method": "magic"}, "method"),
        ({"colour": "blue"}, "config"),
        ({"time_grid": {"t_end": 0, "n_samples": 5}}, "time_grid.t_end"),
        ({"initial_state": {"kind": "fock", "n": -1}}, "initial_state.n"),
    ],
)
def test_validation_errors_name_the_field(tmp_path, caplog, patch, field):
    doc = make_doc(tmp_path, **patch)
    with pytest.raises(ConfigError) as info:
        validate_config(doc)
    assert info.value.field == field
    assert cli.main(["run", write_config(tmp_path, doc)]) == 1
    assert field in caplog.text


def test_analytic_with_spectrum_rejected(tmp_path):
    with pytest.raises(ConfigError, match="numeric"):
        validate_config(make_doc(tmp_path, method="analytic"))


def test_malformed_yaml_is_validation_error(tmp_path):
    path = tmp_path / "bad.yaml"
    path.write_text("dim: [1, 2\n")
    assert cli.main(["run", str(path)]) == 1


def test_missing_config_is_io_error(tmp_path):
    assert cli.main(["run", str(tmp_path / "nope.yaml")]) == 3


def test_unwritable_output_is_io_error(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    doc = make_doc(tmp_path)
    doc["outputs"]["trajectory_path"] = str(blocker / "traj.csv")
    assert cli.main(["run", write_config(tmp_path, doc)]) == 3


def test_leakage_failure_is_runtime_error(tmp_path):
    doc = make_doc(tmp_path, squeeze={"r": 1.5, "theta": 0.0})
    assert cli.main(["run", write_config(tmp_path, doc)]) == 2


def test_solver_failure_is_runtime_error(tmp_path, monkeypatch):
    def boom(*args, **kwargs):
        raise StiffnessError("forced")

    monkeypatch.setattr(cli, "integrate", boom)
    assert cli.main(["run", write_config(tmp_path, make_doc(tmp_path))]) == 2


def test_monitor_trip_is_runtime_error_and_reported(tmp_path, monkeypatch):
    real = cli.analytic_trajectory

    def corrupted(*args, **kwargs):
        traj = real(*args, **kwargs)
        traj.states[-1] = traj.states[-1] * 1.01
        return traj

    monkeypatch.setattr(cli, "analytic_trajectory", corrupted)
    doc = make_doc(tmp_path)
    assert cli.main(["run", write_config(tmp_path, doc)]) == 2
    diag = json.load(open(doc["outputs"]["diagnostics_path"]))
    assert any(t["check"] == "trace_defect" for t in diag["monitor_trips"])


def test_sweep_writes_summary_and_isolates_failures(tmp_path):
    doc = make_doc(tmp_path, method="analytic")
    del doc["outputs"]["spectrum_path"]
    path = write_config(tmp_path, doc)
    summary = tmp_path / "sweep.csv"
    code = cli.main(["sweep", path, "--axis", "r", "--values", "0,0.2,1.5",
                     "--summary", str(summary)])
    assert code == 2
    rows = read_csv(summary)
    assert [r["r"] for r in rows] == ["0.0", "0.2", "1.5"]
    assert [r["exit_code"] for r in rows] == ["0", "0", "2"]
    assert "TruncationError" in rows[2]["error"]
    assert float(rows[1]["final_min_variance"]) < 0.25
    assert (tmp_path / "out" / "traj_r=0.2.csv").exists()


def test_parallel_sweep_matches_serial(tmp_path):
    doc = make_doc(tmp_path, method="analytic")
    del doc["outputs"]["spectrum_path"]
    path = write_config(tmp_path, doc)
    s1, s2 = tmp_path / "s1.csv", tmp_path / "s2.csv"
    assert cli.main(["sweep", path, "--axis", "dim", "--values", "16,20",
                     "--summary", str(s1)]) == 0
    assert cli.main(["sweep", path, "--axis", "dim", "--values", "16,20", "--jobs", "2",
                     "--summary", str(s2)]) == 0
    assert s1.read_bytes() == s2.read_bytes()


def test_sweep_rejects_inapplicable_axis(tmp_path):
    path = write_config(tmp_path, make_doc(tmp_path))
    assert cli.main(["sweep", path, "--axis", "nbar", "--values", "0.1",
                     "--validate-only"]) == 1
    assert cli.main(["sweep", path, "--axis", "r", "--values", "x"]) == 1


def test_with_axis_value_gamma0():
    doc = {"gamma_profile": {"kind": "constant", "gamma0": 1.0}}
    assert with_axis_value(doc, "gamma0", 2.0)["gamma_profile"]["gamma0"] == 2.0
    assert doc["gamma_profile"]["gamma0"] == 1.0
    with pytest.raises(ConfigError):
        with_axis_value({"gamma_profile": {"kind": "piecewise"}}, "gamma0", 1.0)


def test_parse_config_complex_alpha_and_explicit_times(tmp_path):
    doc = make_doc(tmp_path, initial_state={"kind": "coherent", "alpha": [0.3, -0.2]},
                   time_grid={"times": [0, 0.5, 2.0]})
    cfg = parse_config(yaml.safe_dump(doc))
    assert cfg.initial_state.params["alpha"] == complex(0.3, -0.2)
    np.testing.assert_array_equal(cfg.times, [0, 0.5, 2.0])
    assert cfg.leakage_tol == 1e-8


def test_version(capsys):
    with pytest.raises(SystemExit) as info:
        cli.main(["--version"])
    assert info.value.code == 0
    assert __version__ in capsys.readouterr().out


CONFIG_DIR = __import__("pathlib").Path(__file__).resolve().parents[1] / "configs"


def committed_config(tmp_path, name):
    doc = yaml.safe_load((CONFIG_DIR / name).read_text())
    for key, value in doc["outputs"].items():
        doc["outputs"][key] = str(tmp_path / __import__("os").path.basename(value))
    return doc


def test_minimal_config_converges(tmp_path):
    doc = committed_config(tmp_path, "minimal.yaml")
    assert cli.main(["run", write_config(tmp_path, doc)]) == 0
    rows = read_csv(doc["outputs"]["trajectory_path"])
    assert 1 - float(rows[-1]["fidelity_to_steady"]) < 1e-6
    assert max(float(r["inter_method_distance"]) for r in rows) < 1e-6


def test_pulse_config_inter_method_agreement(tmp_path):
    doc = committed_config(tmp_path, "pulse.yaml")
    assert cli.main(["run", write_config(tmp_path, doc)]) == 0
    rows = read_csv(doc["outputs"]["trajectory_path"])
    assert max(float(r["inter_method_distance"]) for r in rows) < 1e-6


def test_r_sweep_reproduces_variance_law(tmp_path):
    doc = make_doc(tmp_path, dim=80, method="analytic", initial_state={"kind": "fock", "n": 0},
                   time_grid={"t_end": 40.0, "n_samples": 5})
    del doc["outputs"]["spectrum_path"]
    summary = tmp_path / "r.csv"
    values = [0, 0.25, 0.5, 0.75, 1.0]
    assert cli.main(["sweep", write_config(tmp_path, doc), "--axis", "r", "--values",
                     ",".join(map(str, values)), "--summary", str(summary)]) == 0
    got = [float(r["final_min_variance"]) for r in read_csv(summary)]
    np.testing.assert_allclose(got, np.exp(-2 * np.array(values)) / 4, atol=1e-4)


def test_dim_sweep_leakage_decreases(tmp_path):
    doc = make_doc(tmp_path, squeeze={"r": 0.8, "theta": 0.0}, method="analytic",
                   initial_state={"kind": "fock", "n": 0}, tolerances={"leakage_tol": 1e-3})
    del doc["outputs"]["spectrum_path"]
    summary = tmp_path / "dim.csv"
    assert cli.main(["sweep", write_config(tmp_path, doc), "--axis", "dim", "--values",
                     "20,30,40", "--summary", str(summary)]) == 0
    leak = [float(r["final_leakage"]) for r in read_csv(summary)]
    assert leak[0] > leak[1] > leak[2] > 0
