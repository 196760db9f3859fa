import json
import os
import subprocess
import sys

import pytest

FIXTURES = os.path.join(os.path.dirname(__file__), "..", "fixtures")


def fx(name):
    return os.path.join(FIXTURES, f"{name}.json")


def run(*args, **kw):
    return subprocess.run(
        [sys.executable, "-m", "memsched.cli", *args],
        capture_output=True,
        text=True,
        **kw,
    )


def test_validate_ok():
    r = run("validate", "--input", fx("chain"))
    assert r.returncode == 0
    doc = json.loads(r.stdout)
    assert doc == {"name": "chain", "nodes": 3, "edges": 2}


def test_validate_missing_file_is_io_error():
    r = run("validate", "--input", "/nonexistent/zz.json")
    assert r.returncode == 3
    err = json.loads(r.stderr)
    assert err["error"] == "cannot read input"


def test_validate_bad_graph_is_validation_error(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text(json.dumps({"name": "b", "nodes": [], "edges": [[0, 1]]}))
    r = run("validate", "--input", str(p))
    assert r.returncode == 1
    assert json.loads(r.stderr)["error"] == "invalid graph"


def test_schedule_twochain():
    r = run("schedule", "--input", fx("twochain"))
    assert r.returncode == 0
    doc = json.loads(r.stdout)
    assert doc["order"] == [0, 1, 2, 3, 4, 5]
    assert doc["peak_bytes"] == 61
    assert len(doc["trace"]) == 6


def test_schedule_kahn_algorithm():
    r = run("schedule", "--input", fx("twochain"), "--algorithm", "kahn")
    assert json.loads(r.stdout)["peak_bytes"] == 100


def test_schedule_budget_failure_exit_code():
    r = run("schedule", "--input", fx("twochain"), "--budget-bytes", "60")
    assert r.returncode == 2
    assert json.loads(r.stderr)["error"] == "no solution within budget"


def test_adaptive_requires_timeout():
    r = run("schedule", "--input", fx("twochain"), "--adaptive")
    assert r.returncode == 1


def test_trace_csv():
    r = run("trace", "--input", fx("chain"), "--format", "csv")
    lines = r.stdout.strip().split("\n")
    assert lines[0] == "step,node,live_after_alloc,live_after_free,peak_so_far"
    assert len(lines) == 4


def test_arena_chain():
    r = run("arena", "--input", fx("chain"))
    doc = json.loads(r.stdout)
    assert doc["arena_size"] == 8


def test_offchip_requires_capacity():
    r = run("offchip", "--input", fx("twochain"))
    assert r.returncode == 1


def test_offchip_traffic():
    r = run("offchip", "--input", fx("twochain"), "--capacity-bytes", "60")
    doc = json.loads(r.stdout)
    assert doc["bytes_written_offchip"] == 10
    assert doc["bytes_read_offchip"] == 10


def test_offchip_sweep_csv():
    r = run("offchip", "--input", fx("twochain"), "--sweep", "60:62:1")
    lines = r.stdout.strip().split("\n")
    assert lines[0] == "capacity,bytes_read,bytes_written"
    assert lines[1] == "60,10,10"
    assert lines[-1] == "62,0,0"


def test_verify_rewrite():
    r = run("verify-rewrite", "--input", fx("rewrite_depthconv_pair"))
    assert r.returncode == 0
    doc = json.loads(r.stdout)
    assert doc["passed"] is True
    assert doc["max_abs_diff"] == 0.0
    assert doc["rewrites"] == 1


def test_rewrite_and_partition_pipeline():
    r = run(
        "schedule",
        "--input",
        fx("cellnet"),
        "--rewrite",
        "--partition",
        "--min-partition-size",
        "8",
    )
    doc = json.loads(r.stdout)
    assert doc["peak_bytes"] == 8192
    assert len(doc["rewrites"]) == 8
    assert len(doc["order"]) == 92  # scheduling happens on the rewritten graph
    assert sum(p["nodes"] for p in doc["partitions"]) == 92


@pytest.mark.parametrize(
    "name", ["chain", "twochain", "diamond", "stacked_diamonds", "cellnet"]
)
def test_reruns_byte_identical(name):
    args = ["schedule", "--input", fx(name), "--rewrite", "--partition"]
    a = run(*args)
    b = run(*args)
    assert a.returncode == b.returncode == 0
    assert a.stdout == b.stdout


def test_output_file_written(tmp_path):
    out = tmp_path / "sched.json"
    r = run("schedule", "--input", fx("chain"), "--output", str(out))
    assert r.returncode == 0 and r.stdout == ""
    assert json.loads(out.read_text())["peak_bytes"] == 8
