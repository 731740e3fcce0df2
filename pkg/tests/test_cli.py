import numpy as np
import pytest

from gridfreq.cli import run


def csv_rows(path):
    lines = path.read_text().splitlines()
    return lines[0].split(","), [l.split(",") for l in lines[1:]]


@pytest.fixture(scope="module")
def data(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    assert run(["synth", "--days", "12", "--seed", "1", "--out", str(d / "f.csv"), "--feature-out", str(d / "a.csv")]) == 0
    return d


def test_synth_then_evaluate(data):
    out = data / "ev"
    assert run(["evaluate", "--input", str(data / "f.csv"), "--out-dir", str(out), "--k-max", "6"]) == 0
    header, rows = csv_rows(out / "evaluate.csv")
    assert header == ["delta_t_s", "rmse_constant_hz", "rmse_daily_profile_hz", "rmse_wnn_hz"]
    assert len(rows) == 3600 and rows[0][0] == "1"
    manifest = (out / "run_manifest.txt").read_text()
    assert "status=ok" in manifest and "input_sha256" in manifest and "version.numpy" in manifest


def test_numbers_have_nine_significant_digits(data):
    _, rows = csv_rows(data / "ev" / "evaluate.csv")
    mant = rows[5][1].split("e")[0].replace(".", "").lstrip("0-")
    assert len(mant) <= 9


def test_evaluate_with_feature_adds_column(data):
    out = data / "evx"
    args = ["evaluate", "--input", str(data / "f.csv"), "--feature", str(data / "a.csv"), "--beta", "0.5", "--out-dir", str(out), "--k-max", "4"]
    assert run(args) == 0
    assert csv_rows(out / "evaluate.csv")[0][-1] == "rmse_wnn_extended_hz"


def test_short_train_is_data_error(tmp_path, capsys):
    run(["synth", "--days", "3", "--out", str(tmp_path / "s.csv")])
    assert run(["evaluate", "--input", str(tmp_path / "s.csv"), "--out-dir", str(tmp_path)]) == 1
    err = capsys.readouterr().err.strip().splitlines()
    assert len(err) == 1 and err[0].startswith("error: InsufficientDataError:")


def test_acf_lag_beyond_span_is_data_error(tmp_path):
    run(["synth", "--days", "30", "--out", str(tmp_path / "s.csv")])
    code = run(["stats", "--input", str(tmp_path / "s.csv"), "--acf-max-lag", "1728000", "--out-dir", str(tmp_path)])
    assert code == 1
    assert "status=error" in (tmp_path / "run_manifest.txt").read_text()


def test_unknown_flag_is_usage_error(data):
    assert run(["evaluate", "--input", str(data / "f.csv"), "--bogus"]) == 2
    assert run(["frobnicate"]) == 2


def test_stats_outputs(data):
    out = data / "st"
    assert run(["stats", "--input", str(data / "f.csv"), "--out-dir", str(out), "--acf-max-lag", "86400"]) == 0
    assert csv_rows(out / "daily.csv")[0] == ["second_of_day", "mean_hz", "std_hz", "count"]
    h, rows = csv_rows(out / "acf.csv")
    assert h == ["lag_s", "acf"] and rows[0] == ["0", "1"] and rows[-1][0] == "86400"
    h, rows = csv_rows(out / "increments_tau1.csv")
    assert h == ["bin_center_sigma", "density"] and len(rows) == 101


def test_forecast_and_sweep_and_tune(data):
    f = str(data / "f.csv")
    assert run(["forecast", "--input", f, "--out-dir", str(data / "fc"), "--k", "3", "--origin", "2021-01-14T06:00:00Z"]) == 0
    h, rows = csv_rows(data / "fc" / "forecast_1610604000.csv")
    assert h == ["delta_t_s", "predicted_hz"] and len(rows) == 3600
    assert run(["sweep", "--input", f, "--out-dir", str(data / "sw"), "--intervals-days", "7", "12", "--k-max", "5"]) == 0
    h, rows = csv_rows(data / "sw" / "sweep.csv")
    assert h == ["interval_days", "predictor", "mean_rmse_hz"] and len(rows) == 6
    args = ["tune-beta", "--input", f, "--feature", str(data / "a.csv"), "--out-dir", str(data / "tb"), "--betas", "0.5", "1", "--k-max", "4"]
    assert run(args) == 0
    h, rows = csv_rows(data / "tb" / "tune_beta.csv")
    assert h == ["beta", "mean_rmse_hz"] and [r[0] for r in rows] == ["0", "0.5", "1"]


def test_ingest_round_trip(data):
    out = data / "ing"
    assert run(["ingest", "--input", str(data / "f.csv"), "--out-dir", str(out)]) == 0
    assert (out / "frequency_clean.csv").read_bytes() == (data / "f.csv").read_bytes()


def test_config_file_with_flag_override(data, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(f"# reproduction settings\ninput = {data / 'f.csv'}\nout-dir = {tmp_path / 'o'}\nk_max = 3\npooled-k = true\n")
    assert run(["--config", str(cfg), "evaluate", "--k-max", "2"]) == 0
    manifest = (tmp_path / "o" / "run_manifest.txt").read_text()
    assert "config.k_max=2" in manifest and "config.pooled_k=True" in manifest
    _, rows = csv_rows(tmp_path / "o" / "adaptive_k.csv")
    assert {r[1] for r in rows} <= {"1", "2"}
    cfg.write_text("nonsense = 1\n")
    assert run(["--config", str(cfg), "evaluate", "--input", str(data / "f.csv")]) == 2


def test_rerun_is_byte_identical(data, tmp_path):
    args = lambda o: ["stats", "--input", str(data / "f.csv"), "--out-dir", str(o), "--acf-max-lag", "3600"]
    assert run(args(tmp_path / "a")) == 0 and run(args(tmp_path / "b")) == 0
    for name in ("daily.csv", "acf.csv", "increments_tau10.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
