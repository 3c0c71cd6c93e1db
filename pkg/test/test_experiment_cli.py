"""
Command-line surface: every subcommand on small versions of the shipped specs,
output files, determinism and exit codes.
"""

import json
import os

from Main import main


def _spec(tmp_path, config_path, name, **overrides):
    with open(config_path(name), "r", encoding="utf-8") as f:
        payload = json.load(f)
    payload.update(overrides)
    path = tmp_path / f"{name}.json"
    path.write_text(json.dumps(payload), encoding="utf-8")
    return str(path)


def test_run_writes_trajectories_and_summary(tmp_path, config_path):
    spec = _spec(tmp_path, config_path, "example1", horizon=64, seeds=[1, 2])
    out = tmp_path / "run"
    assert main(["run", spec, "--out-dir", str(out), "--workers", "1"]) == 0
    assert sorted(os.listdir(out)) == ["summary.json", "trajectory_seed1.csv", "trajectory_seed2.csv"]
    summary = json.loads((out / "summary.json").read_text(encoding="utf-8"))
    assert {"instance", "mode", "horizon", "seeds", "metrics", "solver", "objective"} <= set(summary)
    assert summary["mode"] == "run"
    assert summary["seeds"] == [1, 2]
    assert summary["metrics"]["d_t"]["n"] == 2
    header = (out / "trajectory_seed1.csv").read_text(encoding="utf-8").splitlines()[0]
    assert header == "t,d_t,C_t,Cgr_t,D_t,P_t,R_t,Rgr_t"


def test_runs_are_byte_identical(tmp_path, config_path):
    spec = _spec(tmp_path, config_path, "example1", horizon=32, seeds=[4])
    for name in ("first", "second"):
        assert main(["run", spec, "--out-dir", str(tmp_path / name), "--workers", "1"]) == 0
    first = (tmp_path / "first" / "trajectory_seed4.csv").read_bytes()
    assert first == (tmp_path / "second" / "trajectory_seed4.csv").read_bytes()


def test_seed_override(tmp_path, config_path):
    spec = _spec(tmp_path, config_path, "example1", horizon=16)
    out = tmp_path / "override"
    assert main(["run", spec, "--seed-override", "5", "--out-dir", str(out), "--workers", "1"]) == 0
    assert sorted(os.listdir(out)) == ["summary.json", "trajectory_seed5.csv"]


def test_invalid_spec_exits_with_validation_code(tmp_path, config_path):
    spec = _spec(tmp_path, config_path, "example1", monitoring="partial")
    assert main(["run", spec, "--out-dir", str(tmp_path / "bad")]) == 2
    assert main(["run", str(tmp_path / "absent.json")]) == 2


def test_plot(tmp_path, config_path):
    spec = _spec(tmp_path, config_path, "example1", horizon=32, seeds=[1])
    out = tmp_path / "run"
    assert main(["run", spec, "--out-dir", str(out), "--workers", "1"]) == 0
    svg = tmp_path / "d_t.svg"
    assert main(["plot", str(out / "trajectory_seed1.csv"), "--out", str(svg), "--columns", "d_t"]) == 0
    assert svg.read_text(encoding="utf-8").startswith("<svg")

    header_only = tmp_path / "empty.csv"
    header_only.write_text("t,d_t\n", encoding="utf-8")
    assert main(["plot", str(header_only), "--out", str(tmp_path / "empty.svg")]) == 2
    assert not (tmp_path / "empty.svg").exists()


def test_check_reports_violation(tmp_path, config_path):
    spec = _spec(tmp_path, config_path, "counterexample2")
    out = tmp_path / "check"
    assert main(["check", spec, "--out-dir", str(out), "--workers", "1"]) == 0
    report = json.loads((out / "check_report.json").read_text(encoding="utf-8"))
    assert report["satisfied"] is False
    assert report["agree"] is True
    assert [single["resolution"] for single in report["reports"]] == [0.5, 0.25]


def test_check_grid_guard(tmp_path, config_path):
    spec = _spec(tmp_path, config_path, "example1", check={"resolutions": ["0.01"]})
    assert main(["check", spec, "--out-dir", str(tmp_path / "guard")]) == 4


def test_diagnose(tmp_path, config_path):
    spec = _spec(tmp_path, config_path, "example1")
    out = tmp_path / "diagnose"
    assert main(["diagnose", spec, "--reps", "5", "--out-dir", str(out), "--workers", "1"]) == 0
    rows = (out / "assumption1.csv").read_text(encoding="utf-8").splitlines()
    assert rows[0] == "t,mean_tv2,t_times_mean_tv2,stderr"
    assert [row.split(",")[0] for row in rows[1:]] == ["100", "400", "1600", "6400"]
    diagnostics = json.loads((out / "diagnostics.json").read_text(encoding="utf-8"))
    assert "coverage" not in diagnostics


def test_pareto(tmp_path, config_path):
    spec = _spec(tmp_path, config_path, "pareto_aware", horizon=64, seeds=[1],
                 pareto={"taus": ["0", "1"], "N": 4})
    out = tmp_path / "pareto"
    assert main(["pareto", spec, "--out-dir", str(out), "--workers", "1"]) == 0
    assert sorted(os.listdir(out)) == ["frontier.csv", "frontier.svg", "summary.json"]
    rows = (out / "frontier.csv").read_text(encoding="utf-8").splitlines()
    assert len(rows) == 3
    assert json.loads((out / "summary.json").read_text(encoding="utf-8"))["mode"] == "pareto"


def test_pareto_needs_a_pareto_block(tmp_path, config_path):
    spec = _spec(tmp_path, config_path, "example1", horizon=16)
    assert main(["pareto", spec, "--out-dir", str(tmp_path / "none")]) == 2


def test_unknown_target_run(tmp_path, config_path):
    spec = _spec(tmp_path, config_path, "unknown_target", horizon=32, seeds=[1])
    out = tmp_path / "unknown"
    assert main(["run", spec, "--out-dir", str(out), "--workers", "1"]) == 0
    summary = json.loads((out / "summary.json").read_text(encoding="utf-8"))
    assert summary["knowledge_mode"] == "unknown_target"


def _group_no_regret_with_target(target):
    return [{"name": "group_no_regret", "params": {"r": "r"}, "target": target}]


def test_objective_target_override(tmp_path, config_path):
    # a ball containing every payoff vector: the run sits in the target from round one
    target = {"type": "weighted_l1_ball", "weights": [1, 1, 1, 1], "radius": "100"}
    spec = _spec(tmp_path, config_path, "counterexample1", horizon=64, seeds=[1],
                 objectives=_group_no_regret_with_target(target))
    out = tmp_path / "override_target"
    assert main(["run", spec, "--out-dir", str(out), "--workers", "1"]) == 0
    summary = json.loads((out / "summary.json").read_text(encoding="utf-8"))
    assert summary["metrics"]["d_t"]["max"] == 0.0

    plain = _spec(tmp_path, config_path, "counterexample1", horizon=64, seeds=[1])
    out = tmp_path / "catalog_target"
    assert main(["run", plain, "--out-dir", str(out), "--workers", "1"]) == 0
    assert json.loads((out / "summary.json").read_text(encoding="utf-8"))["metrics"]["d_t"]["max"] > 0.0


def test_target_override_errors_exit_with_validation_code(tmp_path, config_path):
    wrong_dim = {"type": "orthant", "dim": 3}
    untagged = {"dim": 4}
    unknown = {"type": "ellipsoid"}
    for target in (wrong_dim, untagged, unknown):
        spec = _spec(tmp_path, config_path, "counterexample1", horizon=16, seeds=[1],
                     objectives=_group_no_regret_with_target(target))
        assert main(["run", spec, "--out-dir", str(tmp_path / "bad"), "--workers", "1"]) == 2
