import json
from pathlib import Path

import pandas as pd
import pytest

from csoa.cli import check_suite, load_config, main
from csoa.core import ConfigError
from csoa.metrics import violation_summary

ROOT = Path(__file__).resolve().parents[1]
DESK = str(ROOT / "configs" / "desk_qp_csoa.yaml")


def _run(tmp_path, name, *extra, T=2000):
    out = tmp_path / name
    code = main(["run", "--config", DESK, "--seed", "3", "--T", str(T), "--output-dir", str(out),
                 *extra])
    return code, out


def test_run_writes_trace_and_summary(tmp_path):
    code, out = _run(tmp_path, "a")
    assert code == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["status"] == "ok" and summary["iterations"] == 2000
    df = pd.read_csv(out / "trace.csv")
    assert list(df.columns) == ["t", "obj_est", "obj_avg", "h1", "h1_avg", "lambda_norm", "eta",
                                "upsilon"]
    assert df.t.iloc[-1] == 2000
    assert summary["avg_constraints"][0] == pytest.approx(df.h1_avg.iloc[-1], rel=1e-15)
    assert summary["projection_calls"] == 2000 and summary["lmo_calls"] == 0
    assert "gap" in summary and "f_star" in summary


def test_summary_matches_violation_summary_of_csv(tmp_path):
    _, out = _run(tmp_path, "a", "--trace-stride", "1", T=500)
    vs = violation_summary(pd.read_csv(out / "trace.csv"))
    summary = json.loads((out / "summary.json").read_text())
    c = vs["constraints"][0]
    assert c.running_avg_final == pytest.approx(summary["avg_constraints"][0], rel=1e-15)
    assert c.recomputed_avg == pytest.approx(c.running_avg_final, abs=1e-12)


def test_run_is_byte_identical(tmp_path):
    _, a = _run(tmp_path, "a")
    _, b = _run(tmp_path, "b")
    assert (a / "trace.csv").read_bytes() == (b / "trace.csv").read_bytes()
    c = tmp_path / "c"
    main(["run", "--config", DESK, "--seed", "4", "--T", "2000", "--output-dir", str(c)])
    assert (a / "trace.csv").read_bytes() != (c / "trace.csv").read_bytes()


def test_zero_horizon_is_noop(tmp_path):
    code, out = _run(tmp_path, "z", T=0)
    assert code == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["status"] == "noop"
    assert pd.read_csv(out / "trace.csv").empty


def test_config_errors_exit_2(tmp_path, capsys):
    assert _run(tmp_path, "e", "--set", "schedule.kind=cosine")[0] == 2
    assert "schedule.kind" in capsys.readouterr().err
    assert _run(tmp_path, "e", "--set", "schedule.delta=fast")[0] == 2
    assert "schedule.delta" in capsys.readouterr().err
    assert _run(tmp_path, "e", "--set", "nonsense=1")[0] == 2
    assert main(["run", "--config", str(tmp_path / "missing.yaml"), "--seed", "0"]) == 2
    with pytest.raises(SystemExit):
        main(["run", "--config", DESK])  # seed is mandatory


def test_numerical_abort_exit_3(tmp_path):
    out = tmp_path / "nan"
    cfg = str(ROOT / "configs" / "fairness_synthetic.yaml")
    with pytest.warns(RuntimeWarning):
        code = main(["run", "--config", cfg, "--seed", "0", "--T", "5", "--output-dir", str(out),
                     "--set", "problem.params.radius=1e300", "--set", "schedule.eta0=1e300"])
    assert code == 3
    summary = json.loads((out / "summary.json").read_text())
    assert summary["status"] == "aborted" and summary["abort_iteration"] == 1
    assert (out / "trace.csv").exists()


def test_scientific_notation_in_yaml(tmp_path):
    cfg = tmp_path / "c.yaml"
    cfg.write_text("problem: {kind: desk_qp}\nschedule: {kind: manual, eta0: 1e-2, delta: 1,"
                   " upsilon0: 0}\nT: 10\n")
    assert load_config(cfg, seed=0).schedule.eta0 == 0.01


def test_env_var_sets_default_output(tmp_path, monkeypatch):
    monkeypatch.setenv("CSOA_OUTPUT_DIR", str(tmp_path / "envout"))
    assert main(["run", "--config", DESK, "--seed", "1", "--T", "10"]) == 0
    assert list((tmp_path / "envout").glob("*/trace.csv"))


def test_load_config_field_paths():
    cfg = load_config(DESK, overrides=["T=5"], seed=2)
    assert cfg.T == 5 and cfg.seed == 2
    with pytest.raises(ConfigError, match="T"):
        load_config(DESK, overrides=["T=-1"], seed=0)


def test_sweep_over_T(tmp_path):
    out = tmp_path / "sw"
    code = main(["sweep", "--config", DESK, "--seed", "0", "--axis", "T",
                 "--values", "100,1000,10000", "--seeds", "2", "--workers", "1",
                 "--output-dir", str(out)])
    assert code == 0
    df = pd.read_csv(out / "sweep.csv")
    assert list(df.value) == [100, 1000, 10000] and set(df.n) == {2}
    fit = json.loads((out / "rate_fit.json").read_text())
    assert fit["slope"] < 0


def test_sweep_single_value_matches_run(tmp_path):
    main(["sweep", "--config", DESK, "--seed", "3", "--axis", "T", "--values", "2000",
          "--seeds", "1", "--workers", "1", "--output-dir", str(tmp_path / "sw")])
    _, out = _run(tmp_path, "r")
    assert (tmp_path / "sw" / "T=2000" / "seed=3" / "trace.csv").read_bytes() == \
        (out / "trace.csv").read_bytes()


def test_report_one_and_two_traces(tmp_path):
    _, a = _run(tmp_path, "a", T=300)
    _, b = _run(tmp_path, "b", "--set", "seed=9", T=300)
    ta, tb = tmp_path / "first.csv", tmp_path / "second.csv"
    ta.write_bytes((a / "trace.csv").read_bytes())
    tb.write_bytes((b / "trace.csv").read_bytes())
    assert main(["report", str(ta), "--out", str(tmp_path / "one")]) == 0
    svgs = sorted(p.name for p in (tmp_path / "one").glob("*.svg"))
    assert svgs == ["objective.svg", "violation.svg"]
    assert main(["report", str(ta), str(tb), "--out", str(tmp_path / "two")]) == 0
    text = (tmp_path / "two" / "objective.svg").read_text()
    assert "first" in text and "second" in text
    # deterministic output
    main(["report", str(ta), str(tb), "--out", str(tmp_path / "two_again")])
    assert (tmp_path / "two_again" / "objective.svg").read_bytes() == \
        (tmp_path / "two" / "objective.svg").read_bytes()


def test_report_errors(tmp_path):
    empty = tmp_path / "empty.csv"
    _, a = _run(tmp_path, "z", T=0)
    empty.write_bytes((a / "trace.csv").read_bytes())
    assert main(["report", str(empty), "--out", str(tmp_path / "r")]) == 2
    bad = tmp_path / "bad.csv"
    bad.write_text("t,foo\n1,2\n")
    assert main(["report", str(bad), "--out", str(tmp_path / "r")]) == 2


def test_datagen(tmp_path):
    assert main(["datagen", "fairness", "--seed", "0", "--out", str(tmp_path / "f.csv"),
                 "--set", "n_samples=100"]) == 0
    df = pd.read_csv(tmp_path / "f.csv")
    assert list(df.columns) == ["x1", "x2", "y", "s"] and len(df) == 100
    assert main(["datagen", "mc", "--seed", "0", "--out", str(tmp_path / "m.npz"),
                 "--set", "m=20", "--set", "n=30", "--set", "r=2", "--set", "b=5"]) == 0
    assert (tmp_path / "m.npz").exists()
    assert main(["datagen", "mc", "--seed", "0", "--out", str(tmp_path / "x.npz"),
                 "--set", "bogus=1"]) == 2


def test_fairness_csv_config_roundtrip(tmp_path):
    main(["datagen", "fairness", "--seed", "0", "--out", str(tmp_path / "f.csv"),
          "--set", "n_samples=300"])
    cfg = tmp_path / "c.yaml"
    cfg.write_text(
        "problem:\n  kind: fairness_csv\n  csv: f.csv\n"
        "  schema: {label_col: y, sensitive_col: s, feature_cols: [x1, x2]}\n"
        "algorithm: csoa\nschedule: {kind: manual, eta0: 0.15, delta: 0.01, upsilon0: 1.0}\n"
        "T: 500\n")
    assert main(["run", "--config", str(cfg), "--seed", "0", "--output-dir",
                 str(tmp_path / "o")]) == 0
    summary = json.loads((tmp_path / "o" / "summary.json").read_text())
    assert 0 <= summary["p_percent"] <= 100


def test_check_suite_passes():
    rows = check_suite(seed=0)
    assert rows and all(r[3] for r in rows)
