import pandas as pd
import pytest
import yaml

from uav_irs_noma import app as app_module
from uav_irs_noma.app import EXIT_ACCEPTANCE, EXIT_CONFIG, EXIT_OK, EXIT_RUNTIME, Application
from uav_irs_noma.cli.emitters import ResultTable
from uav_irs_noma.cli.experiments import run_power_ratio_sweep
from uav_irs_noma.cli.parser import parse_args
from uav_irs_noma.logic.errors import SeriesError
from uav_irs_noma.logic.experiment_config import ExperimentConfig


def _config(tmp_path, text):
    path = tmp_path / "run.yaml"
    path.write_text(text, encoding="utf-8")
    return path


def _run(tmp_path, *argv):
    return Application(list(argv), config_dir=tmp_path / "home").run()


def _read(path):
    lines = path.read_text(encoding="utf-8").splitlines()
    meta = yaml.safe_load("\n".join(line[2:] for line in lines if line.startswith("# ")))
    return pd.read_csv(path, comment="#"), meta


def test_parser_defaults():
    args = parse_args(["power-sweep", "--weight-mode", "paper-literal", "--trials", "100"])
    assert args.command == "power-sweep"
    assert args.weight_mode == "paper-literal"
    assert args.trials == 100
    assert args.seed is None
    with pytest.raises(SystemExit):
        parse_args(["power-sweep", "--trials", "0"])


def test_validate_config(tmp_path, capsys):
    assert _run(tmp_path, "validate-config") == EXIT_OK
    assert "irs_elements: 8" in capsys.readouterr().out
    bad = _config(tmp_path, "network:\n  pathloss_exponent: 2.0\n")
    assert _run(tmp_path, "validate-config", "--config", str(bad)) == EXIT_CONFIG
    assert _run(tmp_path, "validate-config", "--config", str(tmp_path / "missing.yaml")) == EXIT_CONFIG


def test_session_logs_are_written(tmp_path):
    _run(tmp_path, "validate-config")
    assert list((tmp_path / "home" / "logs").glob("session-*.log"))


def test_power_sweep_analytic(tmp_path):
    cfg = _config(tmp_path, "power_sweep:\n  ratio_values: [0.5, 1.0, 4.0]\n  irs_elements: [8]\n")
    out = tmp_path / "power.csv"
    svg = tmp_path / "power.svg"
    code = _run(tmp_path, "power-sweep", "--config", str(cfg), "--out-csv", str(out), "--out-svg", str(svg))
    assert code == EXIT_OK
    frame, meta = _read(out)
    assert list(frame["ratio"]) == pytest.approx([0.5, 1.0, 2.0, 4.0])
    assert frame["c_n_mc"].isna().all()
    assert frame["c_f_mc_R8"].isna().all()
    assert frame["c_f_analytic_R8"].between(0.0, 1.0).all()
    assert meta["policy_threshold_ratio"] == pytest.approx(2.0)
    assert meta["config"]["power_sweep"]["irs_elements"] == [8]
    assert "truncation_ratio" not in meta
    assert svg.read_text(encoding="utf-8").lstrip().startswith("<?xml")


def test_power_sweep_writes_csv_to_stdout(tmp_path, capsys):
    cfg = _config(tmp_path, "power_sweep:\n  ratio_values: [4.0]\n  irs_elements: [8]\n")
    assert _run(tmp_path, "power-sweep", "--config", str(cfg)) == EXIT_OK
    out = capsys.readouterr().out
    assert out.startswith("# experiment: power-sweep")
    assert "ratio,p_near,p_far,c_n_analytic" in out


def test_elevation_sweep_bound_and_irs_ordering(tmp_path):
    cfg = _config(
        tmp_path,
        "elevation_sweep:\n  start_deg: 5\n  stop_deg: 30\n  step_deg: 5\n  irs_elements: [8, 16]\n",
    )
    out = tmp_path / "elev.csv"
    assert _run(tmp_path, "elevation-sweep", "--config", str(cfg), "--out-csv", str(out)) == EXIT_OK
    frame, meta = _read(out)
    assert list(frame["theta_deg"]) == [5.0, 10.0, 15.0, 20.0, 25.0, 30.0]
    assert frame["elevation_bound_deg"].iloc[0] == pytest.approx(57.12, abs=0.01)
    assert (frame["c_f_analytic_R16"] >= frame["c_f_analytic_R8"] - 1e-9).all()
    assert meta["reference_optima_deg"] == {8: 9.2, 16: 12.2}
    assert meta["argmax_theta_deg"][16] in list(frame["theta_deg"])


def test_optimize_reports_angles(tmp_path, capsys):
    cfg = _config(tmp_path, "optimizer:\n  grid_points: 31\n  resolution_deg: 0.05\n  irs_elements: [8]\n")
    assert _run(tmp_path, "optimize", "--config", str(cfg), "--out-csv", str(tmp_path / "opt.csv")) == EXIT_OK
    out = capsys.readouterr().out
    assert "R=8: theta*=" in out
    frame, meta = _read(tmp_path / "opt.csv")
    assert len(frame) == 31
    assert 0.0 < meta["optima"][8]["theta_deg"] < meta["elevation_bound_deg"]
    assert meta["optima"][8]["c_f"] >= frame["c_f_R8"].max() - 1e-9


def test_assoc_stats_simulation(tmp_path):
    cfg = _config(tmp_path, "assoc_stats:\n  windows: 20\n  m_max: 40\n  n_max: 40\nacceptance_tolerance: 0.2\n")
    out = tmp_path / "assoc.csv"
    code = _run(tmp_path, "assoc-stats", "--config", str(cfg), "--mode", "mc", "--seed", "5", "--out-csv", str(out))
    assert code == EXIT_OK
    frame, meta = _read(out)
    assert len(frame) == 41
    assert meta["p_n0_empirical"] < 0.05
    assert meta["p_n0_analytic"] < 0.05
    assert meta["w_b"] == pytest.approx(1.0217, abs=2e-3)
    assert meta["tv_users"] < 0.2
    assert frame["p_m_empirical"].sum() == pytest.approx(1.0, abs=0.05)


def test_acceptance_failures_exit_with_4(tmp_path, monkeypatch):
    def disagreeing(cfg):
        frame = pd.DataFrame({"ratio": [1.0], "c_n_analytic": [0.9], "c_n_mc": [0.5], "c_n_ci": [0.01]})
        return ResultTable("fake", frame, failures=["c_n_analytic row 0"])

    monkeypatch.setitem(app_module.EXPERIMENTS, "power-sweep", disagreeing)
    assert _run(tmp_path, "power-sweep", "--out-csv", str(tmp_path / "fake.csv")) == EXIT_ACCEPTANCE
    assert (tmp_path / "fake.csv").is_file()
    log_text = "".join(p.read_text(encoding="utf-8") for p in (tmp_path / "home" / "logs").glob("session-*.log"))
    assert "Acceptance check failed" in log_text
    assert "c_n_analytic row 0" in log_text


def test_runtime_errors_exit_with_3(tmp_path, monkeypatch):
    def broken(cfg):
        raise SeriesError("order too large")

    monkeypatch.setitem(app_module.EXPERIMENTS, "optimize", broken)
    assert _run(tmp_path, "optimize") == EXIT_RUNTIME


def test_cli_override_errors_exit_with_2(tmp_path):
    bad = _config(tmp_path, "simulation:\n  block_size: 0\n")
    assert _run(tmp_path, "power-sweep", "--config", str(bad)) == EXIT_CONFIG


def test_analytic_sweep_skips_the_truncation_check(caplog):
    cfg = ExperimentConfig.from_dict({"power_sweep": {"ratio_values": [4.0], "irs_elements": [8]}})
    assert not cfg.montecarlo_enabled
    with caplog.at_level("DEBUG", logger="uav_irs_noma.logic.montecarlo"):
        table = run_power_ratio_sweep(cfg)
    assert "truncation_ratio" not in table.metadata
    assert not [r for r in caplog.records if r.name == "uav_irs_noma.logic.montecarlo"]


def test_monte_carlo_sweep_records_the_truncation_ratio(caplog):
    cfg = ExperimentConfig.from_dict(
        {"power_sweep": {"ratio_values": [4.0], "irs_elements": [8]}, "simulation": {"trials": 200}, "mode": "mc"}
    )
    with caplog.at_level("WARNING", logger="uav_irs_noma.logic.montecarlo"):
        table = run_power_ratio_sweep(cfg)
    assert table.metadata["truncation_ratio"] > 0.0
    assert "beyond r_max" in caplog.text
