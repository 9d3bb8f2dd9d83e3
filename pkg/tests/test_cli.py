"""Exit codes and printed output of the command line interface."""

import json
from pathlib import Path

from topkset.cli import entrypoint

F1_DIR = str(Path(__file__).resolve().parent.parent / "datasets" / "f1")


def run(argv, capsys):
    code = entrypoint(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_solve_default_policy(capsys):
    code, out, _ = run(["solve", "--dataset", F1_DIR, "--k", "3"], capsys)
    assert code == 0
    assert "winner: {HNY, HYN, MLN}" in out
    assert "oracleCalls: 1" in out
    assert "perTaskNanos: {" in out


def test_solve_baseline_policy(capsys):
    code, out, _ = run(["solve", "--dataset", F1_DIR, "--k", "3",
                        "--policy", "baseline"], capsys)
    assert code == 0
    assert "oracleCalls: 4" in out


def test_solve_writes_trace(tmp_path, capsys):
    trace = tmp_path / "run.jsonl"
    code, out, _ = run(["solve", "--dataset", F1_DIR, "--k", "3",
                        "--trace", str(trace)], capsys)
    assert code == 0
    assert f"trace: {trace}" in out
    last = json.loads(trace.read_text().splitlines()[-1])
    assert last["winner"] == ["HNY", "HYN", "MLN"]


def test_missing_dataset_dir(tmp_path, capsys):
    code, _, err = run(["solve", "--dataset", str(tmp_path / "nope"),
                        "--k", "3"], capsys)
    assert code == 2
    assert "error:" in err


def test_k_mismatching_explicit_candidates(capsys):
    code, _, err = run(["solve", "--dataset", F1_DIR, "--k", "2"], capsys)
    assert code == 2
    assert "not a 2-set" in err


def test_unknown_policy(capsys):
    code, _, err = run(["solve", "--dataset", F1_DIR, "--k", "3",
                        "--policy", "greedy"], capsys)
    assert code == 2
    assert "error:" in err


def test_exhausted_call_budget(capsys):
    code, _, err = run(["solve", "--dataset", F1_DIR, "--k", "3",
                        "--max-calls", "0"], capsys)
    assert code == 3
    assert "no provable winner within 0 oracle calls" in err


def test_llm_oracle_needs_a_config(capsys):
    code, _, err = run(["solve", "--dataset", F1_DIR, "--k", "3",
                        "--oracle", "llm"], capsys)
    assert code == 2
    assert "--llm-config" in err


def test_llm_oracle_round_trip(tmp_path, capsys, chat_server):
    chat_server.default_reply = "1.0"
    cfg = tmp_path / "llm.json"
    cfg.write_text(json.dumps({"endpointUrl": chat_server.url}))
    code, out, _ = run(["solve", "--dataset", F1_DIR, "--k", "3",
                        "--oracle", "llm", "--llm-config", str(cfg)], capsys)
    assert code == 0
    assert "winner: {HNY, HYN, MLN}" in out
    assert len(chat_server.requests) == 1


def test_gen_then_solve(tmp_path, capsys):
    out_dir = tmp_path / "synth"
    code, out, _ = run(["gen", "--n", "5", "--k", "2", "--seed", "3",
                        "--unknown", "4", "--out", str(out_dir)], capsys)
    assert code == 0
    assert f"dataset: {out_dir}" in out
    code, out, _ = run(["solve", "--dataset", str(out_dir), "--k", "2"],
                       capsys)
    assert code == 0
    assert "winner: {" in out


def test_gen_rejects_n_below_k(tmp_path, capsys):
    code, _, err = run(["gen", "--n", "2", "--k", "3",
                        "--out", str(tmp_path / "x")], capsys)
    assert code == 2
    assert "need n >= k" in err


def test_experiment_command(tmp_path, capsys):
    cfg = tmp_path / "exp.json"
    cfg.write_text(json.dumps({
        "kList": [2], "candidateCountList": [4],
        "policies": ["entrred-ind", "random"],
        "trials": 1, "unknownCount": 3}))
    out_dir = tmp_path / "results"
    code, out, _ = run(["experiment", "--config", str(cfg),
                        "--out", str(out_dir)], capsys)
    assert code == 0
    for name in ("runs", "summary", "ratios"):
        assert name in out
        assert (out_dir / f"{name}.csv").exists()


def test_experiment_rejects_bad_config(tmp_path, capsys):
    cfg = tmp_path / "exp.json"
    cfg.write_text(json.dumps({"kList": []}))
    code, _, err = run(["experiment", "--config", str(cfg),
                        "--out", str(tmp_path / "r")], capsys)
    assert code == 2
    assert "error:" in err


def test_help_exits_cleanly(capsys):
    assert entrypoint(["--help"]) == 0
