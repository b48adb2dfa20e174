import json
import subprocess
import sys

from hmmdkit.cli import main
from hmmdkit.probio import fixture_path, parse_result

COURSE = fixture_path("course_example.morph")
ASSIGN = fixture_path("table5_assign.assign")
MCKP = fixture_path("table5_mckp.mckp")
STUDENT = fixture_path("student_strategy.morph")


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_synth_course_example_lists_four_root_composites(capsys):
    code, out, err = run(capsys, "synth", "--input", COURSE, "--format", "text")
    assert code == 0
    root_lines = [l for l in out.splitlines() if l.startswith("  S_")]
    assert len(root_lines) == 4
    assert "N(S) = (2; 4, 0, 0)" in out
    assert "N(S) = (3; 2, 2, 0)" in out


def test_synth_student_strategy(capsys):
    code, out, err = run(capsys, "synth", "--input", STUDENT, "--format", "text")
    assert code == 0
    assert "node career:" in out


def test_missing_input_exits_3(capsys):
    code, out, err = run(capsys, "rank", "--method", "pareto", "--input", "missing.json")
    assert code == 3
    assert err.startswith("hmmdkit: error: parse:")
    assert err.count("\n") == 1


def test_type_mismatch_exits_2(capsys):
    code, out, err = run(capsys, "rank", "--input", MCKP)
    assert code == 2
    assert err.startswith("hmmdkit: error: usage:")


def test_unknown_method_exits_2(capsys):
    code, out, err = run(capsys, "tsp", "--method", "bogus", "--input", MCKP)
    assert code == 2


def test_unknown_subcommand_exits_2(capsys):
    code, out, err = run(capsys, "not-a-command", "--input", MCKP)
    assert code == 2
    assert err.startswith("hmmdkit: error: usage:")
    assert err.count("\n") == 1


def test_unknown_flag_exits_2(capsys):
    code, out, err = run(capsys, "mckp", "--input", MCKP, "--frobnicate")
    assert code == 2
    assert err.startswith("hmmdkit: error: usage:")
    assert err.count("\n") == 1


def test_weights_rejected_where_not_applicable(capsys):
    code, out, err = run(capsys, "synth", "--input", COURSE, "--weights", "1,2")
    assert code == 2
    code, out, err = run(capsys, "mckp", "--input", MCKP, "--weights", "zero")
    assert code == 2


def test_mckp_oracle_passes_on_fixture(capsys):
    code, out, err = run(capsys, "mckp", "--input", MCKP, "--oracle", "--format", "json")
    assert code == 0
    result = parse_result(out)
    assert result.diagnostics["oracle"].startswith("ok")
    assert result.solution["total_cost"] == 15
    assert sorted(result.solution["chosen"]) == [
        "A1V6:T3",
        "A2V10:T3",
        "A3V12:T3",
        "A5V1:T2",
    ]


def test_assign_text_report_shows_reference_pairs(capsys):
    code, out, err = run(capsys, "assign", "--input", ASSIGN, "--format", "text")
    assert code == 0
    assert "A1 -> V6" in out and "A5 -> V1" in out
    assert "A4 ->" not in out


def test_repeated_invocations_are_byte_identical(capsys):
    outputs = set()
    for _ in range(3):
        for fmt in ("json", "text"):
            code, out, err = run(capsys, "synth", "--input", COURSE, "--format", fmt)
            assert code == 0
            outputs.add((fmt, out))
    assert len(outputs) == 2


def test_unwritable_output_exits_1(tmp_path, capsys):
    code, out, err = run(
        capsys,
        "mckp",
        "--input",
        MCKP,
        "--output",
        str(tmp_path / "no" / "such" / "dir" / "out.json"),
    )
    assert code == 1
    assert err.startswith("hmmdkit: error: output:")
    assert err.count("\n") == 1


def test_output_file_writing(tmp_path, capsys):
    target = tmp_path / "result.json"
    code, out, err = run(
        capsys, "mckp", "--input", MCKP, "--format", "json", "--output", str(target)
    )
    assert code == 0
    assert out == ""
    parsed = parse_result(target.read_text())
    assert parsed.problem_type == "mckp"


def test_guard_override_via_environment(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("HMMD_KIT_GUARD", "2")
    code, out, err = run(capsys, "mckp", "--input", MCKP, "--method", "exact")
    assert code == 1
    assert err.startswith("hmmdkit: error: solve:")


def test_parse_error_in_payload_exits_3(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(
        json.dumps(
            {
                "spec_version": 1,
                "problem_type": "cluster",
                "payload": {"ids": ["a", "b"], "matrix": [[0, 1], [2, 0]]},
            }
        )
    )
    code, out, err = run(capsys, "cluster", "--input", str(bad))
    assert code == 3
    assert "matrix" in err


def test_infeasible_solve_exits_1(tmp_path, capsys):
    doc = {
        "spec_version": 1,
        "problem_type": "mckp",
        "payload": {
            "criteria": [{"id": "v"}],
            "groups": [
                {"id": "g", "items": [{"id": "a", "value": [1], "cost": 9}]}
            ],
            "budget": 4,
            "group_rule": "exactly_one",
        },
    }
    path = tmp_path / "infeasible.json"
    path.write_text(json.dumps(doc))
    code, out, err = run(capsys, "mckp", "--input", str(path))
    assert code == 1
    assert err.startswith("hmmdkit: error: solve:")


def test_rank_end_to_end(tmp_path, capsys):
    doc = {
        "spec_version": 1,
        "problem_type": "rank",
        "payload": {
            "criteria": [{"id": "c1"}, {"id": "c2"}],
            "alternatives": [
                {"id": "a", "estimates": [1, 1]},
                {"id": "b", "estimates": [1, 0]},
                {"id": "c", "estimates": [0, 1]},
            ],
        },
    }
    path = tmp_path / "rank.json"
    path.write_text(json.dumps(doc))
    for method, expected_best in [
        ("utility", "a"),
        ("pareto", "a"),
        ("outranking", "a"),
        ("ideal", "a"),
    ]:
        code, out, err = run(
            capsys, "rank", "--input", str(path), "--method", method, "--format", "json"
        )
        assert code == 0
        result = parse_result(out)
        assert result.solution["priorities"][expected_best] == 1


def test_tsp_and_cluster_and_oracle(tmp_path, capsys):
    tsp_doc = {
        "spec_version": 1,
        "problem_type": "tsp",
        "payload": {
            "ids": ["a", "b", "c", "d"],
            "matrix": [
                [0, 1, 2, 1],
                [1, 0, 1, 2],
                [2, 1, 0, 1],
                [1, 2, 1, 0],
            ],
            "start": "a",
        },
    }
    path = tmp_path / "tsp.json"
    path.write_text(json.dumps(tsp_doc))
    code, out, err = run(capsys, "tsp", "--input", str(path), "--oracle", "--format", "json")
    assert code == 0
    result = parse_result(out)
    assert result.solution["length"] == 4

    cluster_doc = {
        "spec_version": 1,
        "problem_type": "cluster",
        "payload": {
            "ids": ["p1", "p2", "p3"],
            "matrix": [[0, 1, 5], [1, 0, 4], [5, 4, 0]],
            "k": 2,
        },
    }
    cpath = tmp_path / "cluster.json"
    cpath.write_text(json.dumps(cluster_doc))
    code, out, err = run(
        capsys, "cluster", "--input", str(cpath), "--oracle", "--format", "json"
    )
    assert code == 0
    result = parse_result(out)
    assert result.solution["partition"] == [["p1", "p2"], ["p3"]]
    assert result.method == "single"


def test_trajectory_integrate_pipeline_improve_end_to_end(tmp_path, capsys):
    trajectory_doc = {
        "spec_version": 1,
        "problem_type": "trajectory",
        "payload": {
            "stages": [
                {"time": 1, "decisions": [{"id": "a1", "priority": 1}, {"id": "a2", "priority": 2}]},
                {"time": 2, "decisions": [{"id": "b1", "priority": 1}]},
            ],
            "compat": [
                {"from": "a1", "to": "b1", "value": 2},
                {"from": "a2", "to": "b1", "value": 3},
            ],
        },
    }
    integrate_doc = {
        "spec_version": 1,
        "problem_type": "integrate",
        "payload": {
            "tree": {
                "id": "root",
                "scale": {"lo": 1, "hi": 2},
                "children": [
                    {"id": "a", "scale": {"lo": 1, "hi": 2}, "estimate": 1},
                    {"id": "b", "scale": {"lo": 1, "hi": 2}, "estimate": 2},
                ],
                "table": [
                    {"inputs": [1, 1], "output": 1},
                    {"inputs": [1, 2], "output": 2},
                    {"inputs": [2, 1], "output": 2},
                    {"inputs": [2, 2], "output": 2},
                ],
            }
        },
    }
    pipeline_doc = {
        "spec_version": 1,
        "problem_type": "pipeline",
        "payload": {
            "criteria": [{"id": "fit"}],
            "set1": {"ids": ["e1", "e2"], "matrix": [[0, 5], [5, 0]]},
            "set2": {"ids": ["f1", "f2"], "matrix": [[0, 7], [7, 0]]},
            "k1": 2,
            "k2": 2,
            "correspondence": [[[3], [1]], [[1], [3]]],
            "action_criteria": [{"id": "gain"}],
            "actions": [
                {"pair": ["e1", "f1"], "items": [{"id": "t1", "value": [4], "cost": 2}]},
                {"pair": ["e2", "f2"], "items": [{"id": "t1", "value": [2], "cost": 3}]},
            ],
            "budget": 5,
        },
    }
    improve_doc = {
        "spec_version": 1,
        "problem_type": "improve",
        "payload": {
            "criteria": [{"id": "perf"}, {"id": "safety"}],
            "parts": [
                {"id": "engine", "actions": [{"id": "tune", "effect": [3, 1], "cost": 2}]},
                {"id": "brakes", "actions": [{"id": "swap", "effect": [1, 4], "cost": 3}]},
            ],
            "budget": 5,
        },
    }
    for name, doc, expect in [
        ("trajectory", trajectory_doc, "a2 -> b1"),
        ("integrate", integrate_doc, "root estimate: 2"),
        ("pipeline", pipeline_doc, "action (e1, f1): t1 at cost 2"),
        ("improve", improve_doc, "engine: tune"),
    ]:
        path = tmp_path / f"{name}.json"
        path.write_text(json.dumps(doc))
        code, out, err = run(
            capsys, name, "--input", str(path), "--oracle", "--format", "text"
        )
        assert code == 0, err
        assert expect in out
        code, out_json, err = run(
            capsys, name, "--input", str(path), "--format", "json"
        )
        assert code == 0
        assert parse_result(out_json).problem_type == name


def test_knapsack_end_to_end(tmp_path, capsys):
    doc = {
        "spec_version": 1,
        "problem_type": "knapsack",
        "payload": {
            "criteria": [{"id": "v"}],
            "items": [
                {"id": "a", "value": [9], "cost": 5},
                {"id": "b", "value": [5], "cost": 3},
                {"id": "c", "value": [4], "cost": 3},
            ],
            "budget": 6,
        },
    }
    path = tmp_path / "knap.json"
    path.write_text(json.dumps(doc))
    for method in ("greedy", "exact"):
        code, out, err = run(
            capsys, "knapsack", "--input", str(path), "--method", method,
            "--oracle", "--format", "json",
        )
        assert code == 0
        result = parse_result(out)
        assert result.solution["total_cost"] <= 6


def test_module_entry_point_runs_in_subprocess():
    proc = subprocess.run(
        [sys.executable, "-m", "hmmdkit", "synth", "--input", COURSE, "--format", "json"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    result = parse_result(proc.stdout)
    root = next(n for n in result.solution["nodes"] if n["id"] == "S")
    assert len(root["composites"]) == 4
