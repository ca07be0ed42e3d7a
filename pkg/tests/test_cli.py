"""Command surface: exit codes, determinism, artifact files."""

import json

import pytest

from consensuslab.cli import main
from consensuslab.findings import racing_scenario
from consensuslab.scenario import Scenario, SchedulerSpec, default_values
from consensuslab.trace import Trace, run


@pytest.fixture
def clean_scenario_file(tmp_path):
    path = tmp_path / "scenario.json"
    Scenario(
        n=5,
        values=tuple(default_values(5)),
        scheduler=SchedulerSpec(type="seeded-random", seed=1, fairness_bound=64),
    ).save(path)
    return str(path)


def test_version_exits_zero(capsys):
    assert main(["version"]) == 0
    assert "consensuslab" in capsys.readouterr().out


def test_unknown_flag_is_a_usage_error():
    assert main(["case-suite", "--definitely-not-a-flag"]) == 1


def test_missing_scenario_file_names_the_problem(capsys):
    assert main(["run", "/nonexistent/scenario.json"]) == 1
    assert "scenario" in capsys.readouterr().err


def test_run_clean_scenario_exits_zero(clean_scenario_file, capsys, tmp_path):
    trace_path = tmp_path / "out.jsonl"
    code = main(["run", clean_scenario_file, "--trace", str(trace_path)])
    assert code == 0
    out = capsys.readouterr().out
    assert "config_hash" in out
    assert trace_path.exists()


def test_run_racing_scenario_exits_two(tmp_path, capsys):
    path = tmp_path / "racing.json"
    racing_scenario().save(path)
    assert main(["run", str(path)]) == 2
    assert "FAIL" in capsys.readouterr().out


def test_case_suite_exits_zero(capsys):
    assert main(["case-suite"]) == 0
    out = capsys.readouterr().out
    assert "case01" in out and "case15b" in out
    assert "22/22 cases match" in out


def test_case_suite_output_is_stable(capsys):
    main(["case-suite"])
    first = capsys.readouterr().out
    main(["case-suite"])
    second = capsys.readouterr().out
    assert first == second


def test_replay_roundtrip_exit_mirrors_original(tmp_path, capsys):
    clean = tmp_path / "clean.jsonl"
    run(
        Scenario(
            n=5,
            values=tuple(default_values(5)),
            scheduler=SchedulerSpec(type="seeded-random", seed=2),
        )
    ).save(clean)
    assert main(["replay", str(clean)]) == 0
    racing = tmp_path / "racing.jsonl"
    run(racing_scenario()).save(racing)
    assert main(["replay", str(racing)]) == 2
    assert "replay ok" in capsys.readouterr().out


def test_replay_detects_divergence(tmp_path, capsys):
    path = tmp_path / "tampered.jsonl"
    trace = run(
        Scenario(
            n=5,
            values=tuple(default_values(5)),
            scheduler=SchedulerSpec(type="seeded-random", seed=3),
        )
    )
    trace.verdict.config_hash = "f" * 16
    path.write_text(trace.to_jsonl())
    assert main(["replay", str(path)]) == 1
    assert "DIVERGED" in capsys.readouterr().out


def test_fuzz_writes_counterexample_trace(clean_scenario_file, tmp_path, capsys):
    cx = tmp_path / "cx.jsonl"
    code = main(
        ["fuzz", clean_scenario_file, "--seeds", "800", "--trace", str(cx), "--report",
         str(tmp_path / "report.txt")]
    )
    assert code == 2
    assert cx.exists()
    loaded = Trace.load(cx)
    assert loaded.verdict.config_hash
    assert (tmp_path / "report.txt").read_text().startswith("fuzz:")


def test_explore_small_budget_exits_three(clean_scenario_file):
    assert main(["explore", clean_scenario_file, "--max-configs", "200"]) == 3


def test_commute_exits_zero(capsys):
    assert main(["commute", "--n", "5", "--tie-rule", "1"]) == 0
    assert "192 instances" in capsys.readouterr().out
