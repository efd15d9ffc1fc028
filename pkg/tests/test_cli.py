import json
import subprocess
import sys

import pytest

from fdnet.cli import EXIT_BRIDGE, EXIT_INVALID, EXIT_OK, EXIT_USAGE, main


@pytest.fixture
def files(tmp_path):
    def write(name, doc):
        p = tmp_path / name
        p.write_text(json.dumps(doc))
        return str(p)

    return {
        "tri": write("tri.json", {"nodes": [0, 1, 2], "edges": [[0, 1], [1, 2], [0, 2]], "root": 0}),
        "path": write("path.json", {"nodes": [0, 1, 2], "edges": [[0, 1], [1, 2]], "root": 0}),
        "k23": write("k23.json", {"nodes": [0, 1, 2, 3, 4],
                                    "edges": [[4, 1], [0, 1], [3, 4], [3, 0], [1, 2], [2, 3]], "root": 3}),
        "sum": write("sum.json", {"protocol": "pairwise-sum", "inputs": {"0": 1, "1": "10", "2": 3}}),
        "ping": write("ping.json", {"protocol": "ping-pong", "params": {"k": 2}, "inputs": {}}),
        "dir": tmp_path,
    }


def run_cli(*args):
    out = subprocess.run([sys.executable, "-m", "fdnet", *args], capture_output=True, text=True)
    return out.returncode, out.stdout, out.stderr


def test_simulate_triangle_pairwise_sum(files):
    code, out, _ = run_cli("simulate", "--graph", files["tri"], "--scenario", files["sum"],
                           "--scheduler", "random", "--seed-sched", "3", "--seed-adv", "5")
    doc = json.loads(out)
    assert code == EXIT_OK
    assert doc["outputs"] == {"0": 6, "1": 6, "2": 6}
    assert doc["verdict"]["valid"] and doc["status"] == "valid"
    assert doc["simulator"] == "cycle"


def test_simulate_refuses_bridges(files):
    code, out, _ = run_cli("simulate", "--graph", files["path"], "--scenario", files["sum"])
    doc = json.loads(out)
    assert code == EXIT_BRIDGE and doc["status"] == "refused"
    assert doc["bridges"] == [[0, 1], [1, 2]]


def test_same_config_gives_byte_identical_reports(files):
    outs = []
    for i in range(2):
        target = str(files["dir"] / f"r{i}.json")
        assert main(["simulate", "--graph", files["k23"], "--scenario", files["sum"],
                     "--scheduler", "lifo", "--seed-adv", "9", "--out", target]) == EXIT_OK
        outs.append(open(target, "rb").read())
    assert outs[0] == outs[1]


def test_build_cycle_then_simulate_with_it(files):
    target = str(files["dir"] / "cycle.json")
    assert main(["build-cycle", "--graph", files["k23"], "--out", target]) == EXIT_OK
    doc = json.load(open(target))
    assert doc["status"] == "ok" and doc["report"]["covers_edges"]
    assert set(doc["local"]) == {"0", "1", "2", "3", "4"}
    assert all({"k", "prev", "next"} <= set(v) for v in doc["local"].values())
    report = str(files["dir"] / "sim.json")
    assert main(["simulate", "--graph", files["k23"], "--scenario", files["ping"], "--cycle", target,
                 "--out", report]) == EXIT_OK
    sim = json.load(open(report))
    assert sim["simulator"] == "robbins" and sim["cycle"]["global"] == doc["global"]
    assert sim["outputs"]["3"] == 2


def test_build_cycle_refuses_bridges(files):
    assert main(["build-cycle", "--graph", files["path"], "--out", str(files["dir"] / "x.json")]) == EXIT_BRIDGE


def test_bad_pad_limit_is_usage_error(files):
    code, _, err = run_cli("simulate", "--graph", files["tri"], "--scenario", files["sum"], "--pad-l", "1")
    assert code == EXIT_USAGE and "pad-l" in err


def test_missing_file_is_usage_error(files):
    assert main(["simulate", "--graph", "/nonexistent.json", "--scenario", files["sum"]]) == EXIT_USAGE


def test_demo_bridge_exit_status(files):
    code, out, _ = run_cli("demo-bridge")
    assert code == EXIT_INVALID and json.loads(out)["refuted"]
    code, out, _ = run_cli("demo-bridge", "--candidate", "xor-content", "--adversary", "identity")
    assert code == EXIT_OK and not json.loads(out)["refuted"]


def test_bench_unary_doubles_per_payload_bit(files):
    target = str(files["dir"] / "bench.json")
    assert main(["bench", "--sizes", "4", "--bits", "1-6", "--out", target]) == EXIT_OK
    rows = json.load(open(target))["rows"]
    unary = [r["data_pulses"] for r in rows if r["mode"] == "unary"]
    for a, b in zip(unary, unary[1:]):
        assert abs(b - 2 * a) <= 4
    binary = [r["message_pulses"] for r in rows if r["mode"] == "binary"]
    assert binary == sorted(binary) and binary[-1] < 2 * binary[0]
