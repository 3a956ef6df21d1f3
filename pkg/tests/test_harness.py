import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from husl.balance import Scenario
from husl.harness import (
    AnalysisReport, ConfigError, ConfigMismatchError, LogFormatError, analyze_run, compare_runs, config_from_dict,
    load_config, read_log, run_scenario, save_config, tick_count, write_log,
)
from husl.harness.analysis import percent_change
from husl.harness.cli import main
from husl.harness.runlog import COLUMNS, RunLog
from husl.metrics import Trajectory


def short(scenario="dynamic_balancing", duration=1.0, seed=0, **extra):
    return config_from_dict({"scenario": {"scenario": scenario, "duration": duration, "seed": seed, **extra}})


# --- configuration ---------------------------------------------------------------------

def test_defaults_and_roundtrip(tmp_path):
    cfg = config_from_dict({})
    assert cfg.kind is Scenario.DYNAMIC_BALANCING and cfg.duration == 10.0 and cfg.model.dt == 1e-3
    save_config(cfg, tmp_path / "c.json")
    back = load_config(tmp_path / "c.json")
    assert back.hash() == cfg.hash()
    assert back.to_dict() == cfg.to_dict()


def test_hash_tracks_content():
    assert short(seed=0).hash() == short(seed=0).hash()
    assert short(seed=0).hash() != short(seed=1).hash()
    assert len(short().hash()) == 64


@pytest.mark.parametrize("doc", [
    {"modle": {}},
    {"model": {"trunk_mas": 40}},
    {"gait": {"sway": 0.1}},
    {"balance": {"kp_arms": [1]}},
    {"learning": {"learning_rat": 1e-3}},
    {"scenario": {"seeds": 3}},
])
def test_unknown_keys_rejected(doc):
    with pytest.raises(ConfigError, match="unknown"):
        config_from_dict(doc)


@pytest.mark.parametrize("doc", [
    {"scenario": {"scenario": "walk"}},
    {"scenario": {"duration": 0}},
    {"scenario": {"payload_mass": -1}},
    {"model": {"dt": 0}},
    {"learning": {"gamma": 2.0}},
    {"learning": {"curriculum_breakpoints": [0.5, 0.2]}},
    {"balance": {"kp": [1, 2]}},
    {"gait": {"reach": [0.1]}},
])
def test_invalid_values_rejected(doc):
    with pytest.raises(ConfigError):
        config_from_dict(doc)


def test_load_config_errors(tmp_path):
    p = tmp_path / "c.json"
    p.write_text("[1, 2]")
    with pytest.raises(ConfigError):
        load_config(p)
    p.write_text("{oops")
    with pytest.raises(ConfigError):
        load_config(p)


def test_train_config_uses_learning_section():
    cfg = config_from_dict({"learning": {"dt": 0.004, "total_steps": 1000, "nominal_step_dcm": 0.5}})
    tc = cfg.train_config()
    assert tc.env.model.dt == 0.004 and tc.learning.total_steps == 1000
    assert tc.env.locomotion.step_dcm == 0.5


# --- run logs ------------------------------------------------------------------------

def fake_rows(n, dt=0.01):
    rng = np.random.default_rng(0)
    return [(k * dt, *rng.normal(size=11), k % 3, *rng.normal(size=4)) for k in range(n)]


def test_log_roundtrip(tmp_path):
    rows = fake_rows(20)
    write_log(tmp_path / "r.csv", "abc", 4, 0.01, "ok", rows)
    text = (tmp_path / "r.csv").read_text().splitlines()
    assert text[0] == "# husl-sim v1 config_hash=abc seed=4 dt=0.01 status=ok"
    assert text[1] == ",".join(COLUMNS)
    log = read_log(tmp_path / "r.csv")
    assert (log.config_hash, log.seed, log.dt, log.status, log.rows) == ("abc", 4, 0.01, "ok", 20)
    np.testing.assert_array_equal(log.trajectory.com, np.array(rows)[:, 1:4])
    log.check_config("abc")
    with pytest.raises(ConfigMismatchError):
        log.check_config("def")


@pytest.mark.parametrize("text", [
    "",
    "t,com_x\n",
    "# other v1 config_hash=a seed=0 dt=0.1\n" + ",".join(COLUMNS) + "\n",
    "# husl-sim v1 config_hash=a seed=0 dt=0.1\nt,x\n",
    "# husl-sim v1 config_hash=a seed=0 dt=0.1\n" + ",".join(COLUMNS) + "\n1,2,3\n",
])
def test_log_format_errors(tmp_path, text):
    p = tmp_path / "bad.csv"
    p.write_text(text)
    with pytest.raises(LogFormatError):
        read_log(p)


# --- scenario runs -----------------------------------------------------------------------

def test_tick_count():
    assert tick_count(10.0, 1e-3) == 10_000
    assert tick_count(1.0, 0.003) == 333


def test_ten_second_run_row_count(tmp_path):
    cfg = short("baseline", duration=10.0)
    result = run_scenario(cfg, tmp_path / "b.csv")
    assert result.status == "ok" and len(result.rows) == 10_000
    log = read_log(tmp_path / "b.csv")
    assert log.rows == 10_000 and log.config_hash == cfg.hash()
    assert np.array_equal(log.trajectory.q, np.zeros((10_000, 4)))  # baseline has no arms
    fz = log.trajectory.grf_left[:, 0] + log.trajectory.grf_right[:, 0]
    np.testing.assert_allclose(fz, cfg.model.trunk_mass * cfg.model.g, atol=1e-9)  # arm bodies removed


@pytest.mark.parametrize("scenario", ["baseline", "static_payload", "dynamic_balancing"])
def test_runs_are_byte_identical(tmp_path, scenario):
    cfg = short(scenario, duration=0.5, seed=3)
    run_scenario(cfg, tmp_path / "a.csv")
    run_scenario(cfg, tmp_path / "b.csv")
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_scenario_wiring():
    static = run_scenario(short("static_payload", duration=0.5)).log.trajectory
    np.testing.assert_allclose(static.q[:, [0, 2]], 1.2, atol=1e-9)
    dynamic = run_scenario(short("dynamic_balancing", duration=0.5)).log.trajectory
    assert np.ptp(dynamic.q[:, 0]) > 1e-3  # arms move under the balance law


def test_weight_carried_with_payload():
    cfg = short("dynamic_balancing", duration=2.0)
    traj = run_scenario(cfg).log.trajectory
    w = (cfg.model.trunk_mass + 2 * (cfg.model.arm_link_mass + cfg.scenario.payload_mass)) * cfg.model.g
    np.testing.assert_allclose(traj.grf_left[:, 0] + traj.grf_right[:, 0], w, atol=1e-9)


def test_fall_ends_run_with_partial_log(tmp_path):
    cfg = short("static_payload", duration=5.0, push=3.0, fall_radius=0.05)
    result = run_scenario(cfg, tmp_path / "f.csv")
    assert result.status == "fell" and 0 < len(result.rows) < 5000
    assert read_log(tmp_path / "f.csv").status == "fell"


# --- analysis -----------------------------------------------------------------------------

def synthetic_log(minima, fz_noise=0.0, dt=0.01, period=40, seed=0):
    """Run log whose D(t) has planted peaks and minima and whose GRFs lie on fz_R = C - fz_L."""
    d = [0.05]
    for m in minima:
        half = period // 2
        d += list(np.linspace(0.1, m, half + 1)[:-1]) + list(np.linspace(m, 0.1, period - half + 1)[:-1])
    d += [0.1, 0.05]
    d = np.array(d)
    d[1::period] += 1e-3
    n = len(d)
    rng = np.random.default_rng(seed)
    com = np.column_stack([d, np.zeros(n), np.full(n, 0.9)])
    fz_l = 450.0 + 400.0 * np.sin(np.linspace(0, 12 * np.pi, n))
    fz_r = 900.0 - fz_l
    fz_l = fz_l * (1 + fz_noise * rng.normal(size=n))
    fz_r = fz_r * (1 + fz_noise * rng.normal(size=n))
    z = np.zeros(n)
    traj = Trajectory(dt, np.arange(n) * dt, com, np.zeros((n, 2)), np.column_stack([fz_l, z, z]),
                      np.column_stack([fz_r, z, z]), z, np.zeros((n, 4)))
    return RunLog("x", 0, dt, "ok", traj)


def test_analyze_planted_log():
    minima = [0.02, 0.015, 0.03, 0.012]
    log = synthetic_log(minima)
    report = analyze_run(log, log, stride_period=period_seconds(40, 0.01))
    assert report.dtw_to_baseline == 0.0
    assert report.cycle_count == 4 and report.gcsm["values"] == minima
    assert report.gcsm_median == float(np.median(minima))
    assert report.orientation_error < 0.5
    assert len(report.mean_recovery_curve["mean"]) == 101


def period_seconds(samples, dt):
    return samples * dt


def test_analyze_without_cycles_marks_fields_unavailable():
    n = 50
    z = np.zeros(n)
    traj = Trajectory(0.01, np.arange(n) * 0.01, np.column_stack([np.linspace(0, 1, n), z, z + 0.9]),
                      np.zeros((n, 2)), np.column_stack([np.full(n, 450.0), z, z]),
                      np.column_stack([np.full(n, 450.0), z, z]), z, np.zeros((n, 4)))
    report = analyze_run(RunLog("x", 0, 0.01, "ok", traj), None)
    assert report.gcsm is None and report.cycle_count == 0 and report.dtw_to_baseline is None
    assert report.orientation_error is None
    json.loads(report.to_json())


def test_analyze_rejects_mismatched_dt():
    a, b = synthetic_log([0.02, 0.03]), synthetic_log([0.02, 0.03], dt=0.02)
    with pytest.raises(ValueError):
        analyze_run(a, b)


def test_report_json_roundtrip():
    report = analyze_run(synthetic_log([0.02, 0.03, 0.01]), None, stride_period=0.4)
    assert AnalysisReport.from_json(report.to_json()) == report


# --- comparison ------------------------------------------------------------------------------

def report(dtw, gcsm=None, orient=None):
    g = None if gcsm is None else {"median": gcsm}
    return AnalysisReport(dtw, g, orient, 0, None)


def test_compare_format_example():
    table = compare_runs([("baseline", report(0.0)), ("static", report(123.71)), ("dynamic", report(65.54))])
    change = dict(((r, o), c) for r, o, c in table.changes)[("static", "dynamic")]
    assert change["dtw_to_baseline"] == pytest.approx(-47.02, abs=0.01)
    text = table.render()
    assert "-47.02%" in text and "n/a" in text


def test_compare_identical_and_missing():
    table = compare_runs([("a", report(1.0, 0.02, 3.0)), ("b", report(1.0, 0.02, 3.0))])
    assert table.changes[0][2] == {"dtw_to_baseline": 0.0, "gcsm_median": 0.0, "orientation_error": 0.0}
    table = compare_runs([("a", report(1.0, None, 3.0)), ("b", report(2.0, 0.02, None))])
    assert table.values["a"]["gcsm_median"] is None
    assert table.changes[0][2]["gcsm_median"] is None and table.changes[0][2]["orientation_error"] is None
    with pytest.raises(ValueError):
        compare_runs([("a", report(1.0))])


@given(st.floats(-1e6, 1e6), st.floats(-1e6, 1e6))
def test_percent_change(a, b):
    c = percent_change(a, b)
    if a == b:
        assert c == 0.0
    elif a == 0:
        assert c is None
    else:
        assert math.isclose(c, 100 * (b - a) / abs(a))


# --- command line -----------------------------------------------------------------------------

def write_json(path, doc):
    path.write_text(json.dumps(doc))
    return path


def test_cli_end_to_end(tmp_path):
    base = write_json(tmp_path / "base.json", {"scenario": {"scenario": "baseline", "duration": 2.0}})
    dyn = write_json(tmp_path / "dyn.json", {"scenario": {"scenario": "dynamic_balancing", "duration": 2.0}})
    assert main(["simulate", "--config", str(base), "--out", str(tmp_path / "b.csv")]) == 0
    assert main(["simulate", "--config", str(dyn), "--out", str(tmp_path / "d.csv")]) == 0
    assert main(["simulate", "--config", str(dyn), "--out", str(tmp_path / "d2.csv")]) == 0
    assert (tmp_path / "d.csv").read_bytes() == (tmp_path / "d2.csv").read_bytes()
    for name in ("r1", "r2"):
        assert main(["analyze", "--run", str(tmp_path / "d.csv"), "--baseline", str(tmp_path / "b.csv"),
                     "--report", str(tmp_path / f"{name}.json"), "--config", str(dyn)]) == 0
    assert (tmp_path / "r1.json").read_bytes() == (tmp_path / "r2.json").read_bytes()
    assert main(["analyze", "--run", str(tmp_path / "d.csv"), "--baseline", str(tmp_path / "b.csv"),
                 "--report", str(tmp_path / "x.json"), "--config", str(base)]) == 1
    assert main(["analyze", "--run", str(tmp_path / "b.csv"), "--baseline", str(tmp_path / "b.csv"),
                 "--report", str(tmp_path / "self.json")]) == 0
    assert json.loads((tmp_path / "self.json").read_text())["dtw_to_baseline"] == 0.0
    assert main(["compare", "--report", str(tmp_path / "self.json"), str(tmp_path / "r1.json"),
                 "--name", "baseline", "dynamic", "--out", str(tmp_path / "t.md")]) == 0
    assert "| dynamic vs baseline |" in (tmp_path / "t.md").read_text()


def test_cli_exit_codes(tmp_path, capsys):
    with pytest.raises(SystemExit) as exc:
        main(["simulate"])
    assert exc.value.code == 1
    with pytest.raises(SystemExit) as exc:
        main(["fly"])
    assert exc.value.code == 1
    assert main(["simulate", "--config", str(tmp_path / "none.json"), "--out", str(tmp_path / "o.csv")]) == 1
    bad = write_json(tmp_path / "bad.json", {"scenario": {"sceanrio": "baseline"}})
    assert main(["simulate", "--config", str(bad), "--out", str(tmp_path / "o.csv")]) == 1
    assert "unknown key" in capsys.readouterr().err
    fall = write_json(tmp_path / "fall.json", {"scenario": {"scenario": "static_payload", "duration": 5.0,
                                                            "push": 3.0, "fall_radius": 0.05}})
    assert main(["simulate", "--config", str(fall), "--out", str(tmp_path / "f.csv")]) == 2


def test_cli_train(tmp_path):
    cfg = write_json(tmp_path / "t.json", {"learning": {"total_steps": 128, "rollout_steps": 64, "epochs": 1,
                                                        "hidden": [8], "episode_time": 0.5}})
    assert main(["train", "--config", str(cfg), "--checkpoint", str(tmp_path / "p.json"),
                 "--log", str(tmp_path / "l.csv")]) == 0
    assert (tmp_path / "l.csv").read_text().startswith("step,mean_return,mean_episode_length\n")
    sim = write_json(tmp_path / "s.json", {"scenario": {"duration": 0.5, "checkpoint": str(tmp_path / "p.json")}})
    assert main(["simulate", "--config", str(sim), "--out", str(tmp_path / "s.csv")]) == 0
    broken = write_json(tmp_path / "bk.json", {"scenario": {"duration": 0.5, "checkpoint": str(tmp_path / "l.csv")}})
    assert main(["simulate", "--config", str(broken), "--out", str(tmp_path / "s.csv")]) == 1
