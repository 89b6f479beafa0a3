import csv
import json
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from oscbath.cli import main
from oscbath.coeffs import CSV_HEADER
from oscbath.evolve import ComparisonReport, Trajectory

DRUDE = ["--set", 'spectral.variant="drude"']


def run(tmp_path, *args):
    return main(list(args) + ["--jobs", "1"])


def test_coeffs_two_points(tmp_path):
    out = tmp_path / "c"
    assert run(tmp_path, "coeffs", "--out", str(out), "--n-points", "2") == 0
    rows = list(csv.reader((out / "coeffs.csv").open()))
    assert rows[0] == list(CSV_HEADER) and len(rows) == 3
    assert all(float(v) == 0 for v in rows[1])
    assert json.loads((out / "config.json").read_text())["grid"]["n_points"] == 2


def test_coeffs_deterministic_with_plot(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert run(tmp_path, "coeffs", "--out", str(d), "--plot", "--t-max", "10", "--n-points", "51") == 0
    for name in ("coeffs.csv", "lindblad.csv", "coeffs.svg"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    root = ET.parse(a / "coeffs.svg").getroot()
    assert len(root.findall(".//{http://www.w3.org/2000/svg}polyline")) == 4


def test_late_time_coefficient_convergence(tmp_path):
    out = tmp_path / "c"
    assert run(tmp_path, "coeffs", "--out", str(out), "--t-max", "300", "--n-points", "301", *DRUDE) == 0
    data = np.genfromtxt(out / "coeffs.csv", delimiter=",", names=True)
    late = data["t"] >= 30
    assert np.max(np.abs(data["delta_fv"] - data["delta_rwa"])[late] / data["delta_fv"][late]) <= 0.02


def test_bad_key_exit_code(tmp_path, capsys):
    assert run(tmp_path, "coeffs", "--out", str(tmp_path), "--set", "spectral.omega_cc=2") == 2
    assert "spectral.omega_cc" in capsys.readouterr().err
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps({"theta": -2}))
    assert run(tmp_path, "evolve", "--config", str(cfg), "--out", str(tmp_path)) == 2
    assert "theta" in capsys.readouterr().err


def test_evolve_zero_coupling(tmp_path):
    out = tmp_path / "e"
    assert run(tmp_path, "evolve", "--out", str(out), "--alpha", "0", "--model", "rw", "--plot",
               "--t-max", "5", "--n-points", "11") == 0
    traj = Trajectory.from_csv(out / "trajectory_rw.csv")
    assert np.all(traj.n_mean == 0)
    assert (out / "trajectory_rw.svg").exists()


def test_evolve_truncation_exit_code(tmp_path, capsys):
    assert run(tmp_path, "evolve", "--out", str(tmp_path), "--alpha", "0.5", "--theta", "3",
               "--fock-dim", "4", "--t-max", "20", "--n-points", "21", "--model", "rw") == 1
    assert "fock_dim" in capsys.readouterr().err


def test_evolve_rw_long_run_asymptote(tmp_path):
    out = tmp_path / "e"
    assert run(tmp_path, "evolve", "--out", str(out), "--model", "rw", "--t-max", "1200", "--n-points", "601",
               "--set", "quadrature.table_dt=0.05", *DRUDE) == 0
    traj = Trajectory.from_csv(out / "trajectory_rw.csv")
    assert abs(traj.n_mean[-1] * np.expm1(1.0) - 1) < 0.01


def test_compare_identical_models(tmp_path):
    out = tmp_path / "c"
    assert run(tmp_path, "compare", "--out", str(out), "--set", 'models=["rw"]', "--t-max", "20",
               "--n-points", "201") == 0
    rep = ComparisonReport.parse((out / "report.txt").read_text())
    assert float(rep["short_ratio"]) == 1.0
    assert rep["long_rate_rw"] == rep["long_rate_rw"]


def test_compare_hot_bath_ratio_and_exponents(tmp_path):
    out = tmp_path / "c"
    assert run(tmp_path, "compare", "--out", str(out), "--theta", "10", "--t-max", "20", "--n-points", "201",
               "--plot") == 0
    rep = ComparisonReport.parse((out / "report.txt").read_text())
    assert 1.9 <= float(rep["short_ratio"]) <= 2.2
    assert abs(float(rep["exponent_gamma_fv"]) - 3) <= 0.1
    assert abs(float(rep["exponent_gamma_rwa"]) - 1) <= 0.05
    assert rep["short_window_start"] == "0.002"
    ET.parse(out / "compare.svg")


def test_oracle_command(tmp_path):
    out = tmp_path / "o"
    assert run(tmp_path, "oracle", "--out", str(out), "--model", "rw", "--alpha", "0.05", "--t-max", "20",
               "--n-points", "41") == 0
    traj = Trajectory.from_csv(out / "oracle_rw.csv")
    assert traj.n_mean[-1] > 0
    assert run(tmp_path, "oracle", "--out", str(out), "--t-max", "500") == 1


def test_sweep_single_value_matches_evolve(tmp_path):
    common = ["--t-max", "10", "--n-points", "21", "--model", "rw"]
    assert run(tmp_path, "evolve", "--out", str(tmp_path / "e"), "--alpha", "0.2", *common) == 0
    assert run(tmp_path, "sweep", "--out", str(tmp_path / "s"), "--param", "alpha", "--values", "0.2",
               *common) == 0
    index = list(csv.DictReader((tmp_path / "s" / "index.csv").open()))
    assert len(index) == 1 and index[0]["status"] == "ok"
    assert (tmp_path / "e" / "trajectory_rw.csv").read_bytes() == open(index[0]["path"], "rb").read()


def test_sweep_records_failures(tmp_path):
    out = tmp_path / "s"
    rc = run(tmp_path, "sweep", "--out", str(out), "--param", "theta", "--values", "1,30", "--fock-dim", "30",
             "--t-max", "20", "--n-points", "21", "--model", "rw", "--alpha", "0.2")
    assert rc != 0
    index = list(csv.DictReader((out / "index.csv").open()))
    assert [r["status"] for r in index] == ["ok", "failed"]
    assert "TruncationError" in index[1]["error"]


def test_sweep_rejects_bad_values(tmp_path):
    assert run(tmp_path, "sweep", "--out", str(tmp_path), "--param", "alpha", "--values", "a,b") == 2
    assert run(tmp_path, "sweep", "--out", str(tmp_path), "--param", "alpha", "--values", "nan") == 2


def test_sweep_rate_scales_with_coupling(tmp_path):
    out = tmp_path / "s"
    args = ["sweep", "--out", str(out), "--param", "alpha", "--values", "0.05,0.1", "--model", "rw",
            "--t-max", "1200", "--n-points", "1201", "--set", "quadrature.table_dt=0.05", *DRUDE]
    assert run(tmp_path, *args) == 0
    index = list(csv.DictReader((out / "index.csv").open()))
    r1, r2 = (float(r["rate"]) for r in index)
    assert abs((r2 / r1) / 4 - 1) < 0.1
    first = (out / "index.csv").read_bytes()
    assert run(tmp_path, *args) == 0
    assert (out / "index.csv").read_bytes() == first


@pytest.mark.parametrize("jobs", ["2"])
def test_sweep_parallel_matches_serial(tmp_path, jobs):
    common = ["--param", "omega_c", "--values", "1,2", "--t-max", "5", "--n-points", "11", "--model", "fv_rwa"]
    assert main(["sweep", "--out", str(tmp_path / "a"), "--jobs", "1", *common]) == 0
    assert main(["sweep", "--out", str(tmp_path / "b"), "--jobs", jobs, *common]) == 0
    for sub in ("omega_c_1.0", "omega_c_2.0"):
        name = "trajectory_fv_rwa.csv"
        assert (tmp_path / "a" / sub / name).read_bytes() == (tmp_path / "b" / sub / name).read_bytes()
