import json
import subprocess
import sys

import pytest

from intkit.cli import main
from intkit.dataset import read_jsonl, to_record, write_jsonl
from intkit.generator import GeneratorConfig, generate


def _run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_generate_then_verify(tmp_path, capsys):
    path = tmp_path / "d.jsonl"
    code, out, _ = _run(capsys, "generate", "--k", "3", "--l", "5", "--num", "10", "--seed", "7", "--out", str(path))
    assert code == 0 and json.loads(out) == {"written": 10, "out": str(path)}
    code, out, _ = _run(capsys, "verify", "--in", str(path))
    assert code == 0 and json.loads(out) == {"total": 10, "verified": 10, "failed": 0}


def test_generate_to_stdout_is_deterministic(capsys):
    _, first, _ = _run(capsys, "generate", "--num", "3", "--seed", "2")
    _, second, _ = _run(capsys, "generate", "--num", "3", "--seed", "2")
    assert first == second and len(first.splitlines()) == 3


def test_k_above_l_exits_2(capsys):
    code, _, err = _run(capsys, "generate", "--k", "5", "--l", "3", "--num", "1")
    assert code == 2 and json.loads(err)["error"]["code"] == "INFEASIBLE_ORDER"


def test_usage_errors_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["generate", "--k", "x"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit):
        main([])


def test_verify_reports_first_failure(tmp_path, capsys):
    thms = [generate(GeneratorConfig(k=2, l=3), i) for i in range(3)]
    recs = [to_record(t) for t in thms]
    recs[1]["proof"] = recs[1]["proof"][1:]
    path = tmp_path / "bad.jsonl"
    path.write_text("".join(json.dumps(r) + "\n" for r in recs))
    code, _, err = _run(capsys, "verify", "--in", str(path))
    report = json.loads(err)
    assert code == 1 and report["failed"] == 1
    first = report["first_failure"]
    assert first["theorem_id"] == recs[1]["id"] and first["index"] == 1
    assert isinstance(first["step_index"], int) and first["reason"]


def test_missing_input_exits_1(tmp_path, capsys):
    code, _, err = _run(capsys, "verify", "--in", str(tmp_path / "none.jsonl"))
    assert code == 1 and json.loads(err)["error"]["code"] == "IO_ERROR"


def test_stats(tmp_path, capsys):
    path = tmp_path / "d.jsonl"
    write_jsonl((generate(GeneratorConfig(k=3, l=5), i) for i in range(15)), path)
    code, out, _ = _run(capsys, "stats", "--in", str(path))
    report = json.loads(out)
    assert code == 0 and report["n"] == 15 and report["kl_counts"] == {"K3L5": 15}


def test_prove_with_oracle_policy(tmp_path, capsys):
    path, report_path = tmp_path / "d.jsonl", tmp_path / "r.json"
    write_jsonl((generate(GeneratorConfig(k=2, l=3), i) for i in range(4)), path)
    code, out, _ = _run(capsys, "prove", "--in", str(path), "--policy", "oracle", "--sims", "20",
                        "--limit", "3", "--report", str(report_path))
    summary = json.loads(out)
    assert code == 0 and summary["total"] == 3 and summary["solved"] == 3
    detail = json.loads(report_path.read_text())
    assert len(detail["results"]) == 3 and all(r["proof"] for r in detail["results"])
    code, out, _ = _run(capsys, "prove", "--in", str(path), "--method", "greedy", "--policy", "oracle")
    assert json.loads(out)["success_rate"] == 1.0


def test_bench(capsys):
    code, out, _ = _run(capsys, "bench", "--steps", "300")
    report = json.loads(out)
    assert code == 0 and report["n_steps"] == 300 and report["reference_ms"] == 1.28


def test_split(tmp_path, capsys):
    code, out, _ = _run(capsys, "split", "--dimension", "orders", "--orders", "10", "--test-size", "12",
                        "--train", "20", "--out-dir", str(tmp_path))
    assert code == 0 and json.loads(out)["test"] == 12
    test = {t.key() for t in read_jsonl(tmp_path / "test.jsonl")}
    train = {t.key() for t in read_jsonl(tmp_path / "train.jsonl")}
    assert len(test) == 12 and not test & train


def test_serve_stdio_subprocess():
    rec = to_record(generate(GeneratorConfig(k=2, l=3), 0))
    lines = [{"op": "reset", "id": 1, "theorem": rec}]
    lines += [{"op": "step", "id": 2 + i, "session": "s1", "action": s} for i, s in enumerate(rec["proof"])]
    proc = subprocess.run([sys.executable, "-m", "intkit.cli", "serve"], input="\n".join(map(json.dumps, lines)) + "\n",
                          capture_output=True, text=True, timeout=60)
    replies = [json.loads(x) for x in proc.stdout.splitlines()]
    assert proc.returncode == 0 and len(replies) == 4
    assert replies[-1]["done"] is True and replies[-1]["reward"] == 1.0
