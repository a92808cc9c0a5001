import json
import subprocess
import sys

import numpy as np
import pytest

from qconsensus import __version__
from qconsensus.cli import main
from qconsensus.graphs import TopologySpec as T
from qconsensus.graphs import build_topology, to_json
from qconsensus.optimize import closed_form
from qconsensus.partitions import hasse_diagram


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, *argv):
    code, out, _ = run(capsys, *argv, "--format", "json")
    return code, json.loads(out)


def test_partitions_table(capsys):
    code, out, _ = run(capsys, "partitions", "4")
    assert code == 0
    assert sum(1 for line in out.splitlines() if "tabloids" in line) == 5
    code, out, _ = run(capsys, "partitions", "1")
    assert sum(1 for line in out.splitlines() if "tabloids" in line) == 1


def test_partitions_json_matches_hasse(capsys):
    code, doc = run_json(capsys, "partitions", "6")
    assert code == 0
    assert doc["tool"] == "qconsensus" and doc["version"] == __version__
    assert doc["input"] == {"N": 6}
    res = doc["result"]
    assert len(res["nodes"]) == 11
    expected = [(list(a.parts), list(b.parts), c) for a, b, c in hasse_diagram(6).cover_edges]
    got = [(e["dominant"], e["dominated"], e["category"]) for e in res["hasse_edges"]]
    assert got == expected


@pytest.mark.parametrize("arg", ["0", "-3"])
def test_partitions_bad_n(capsys, arg):
    assert main(["partitions", arg]) == 2


def test_partitions_non_integer():
    with pytest.raises(SystemExit) as exc:
        main(["partitions", "abc"])
    assert exc.value.code == 2


def test_induced_six_cycle_dot(capsys):
    code, out, _ = run(capsys, "induced", "path3", "--partition", "1,1,1", "--format", "dot")
    assert code == 0
    assert out.startswith("graph")
    assert out.count(" -- ") == 6


def test_induced_single_vertex(capsys):
    code, doc = run_json(capsys, "induced", "path3", "--partition", "3")
    assert code == 0
    assert doc["result"]["graph"]["n_vertices"] == 1
    assert doc["result"]["graph"]["edges"] == []


def test_induced_two_two_on_path_four(capsys):
    code, doc = run_json(capsys, "induced", "path4", "--partition", "2,2")
    g = doc["result"]["graph"]
    assert g["n_vertices"] == 6 and len(g["edges"]) == 6
    ev = doc["result"]["spectrum"]
    assert ev[1] == pytest.approx(2 - np.sqrt(2), abs=1e-12)


def test_induced_size_mismatch(capsys):
    code, _, err = run(capsys, "induced", "path3", "--partition", "2,2")
    assert code == 2 and "error" in err


def test_optimize_ccs_star(capsys):
    code, doc = run_json(capsys, "optimize", "ccs-star", "-p", "5", "-q", "3")
    assert code == 0
    ref = closed_form(T("ccs_star", (5, 3)))
    res = doc["result"]
    assert res["lambda2"] == ref.lambda2
    assert {int(k): v for k, v in res["weights"].items()} == ref.weights_by_orbit
    assert res["certificate"]["accepted"]


def test_optimize_complete_and_edge(capsys):
    _, doc = run_json(capsys, "optimize", "complete", "-n", "4", "-D", "3")
    assert doc["result"]["weights"]["0"] == pytest.approx(0.5)
    assert doc["result"]["lambda2"] == pytest.approx(2.0)
    _, doc = run_json(capsys, "optimize", "path", "-n", "2")
    assert doc["result"]["weights"] == {"0": 1.0}
    assert doc["result"]["lambda2"] == 2.0


def test_optimize_unsupported_then_numeric(capsys):
    code, _, err = run(capsys, "optimize", "coupled", "--n1", "1", "--n2", "3", "--n3", "2")
    assert code == 3 and "numeric" in err
    code, doc = run_json(capsys, "optimize", "coupled", "--n1", "1", "--n2", "3", "--n3", "2", "--method", "numeric")
    assert code == 0 and doc["result"]["method"] == "numeric"


def test_optimize_graph_file(capsys, tmp_path):
    path = tmp_path / "g.json"
    path.write_text(to_json(build_topology(T("paw"))))
    code, doc = run_json(capsys, "optimize", str(path), "--method", "numeric")
    assert code == 0
    assert doc["result"]["lambda2"] == pytest.approx(0.5, abs=1e-5)


def test_bad_graph_file(capsys, tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"n_vertices": 2, "edges": [[0, 5]]}')
    code, _, err = run(capsys, "optimize", str(path), "--method", "numeric")
    assert code == 2


def test_verify_commands(capsys):
    code, out, _ = run(capsys, "verify", "aldous", "path4")
    assert code == 0 and "PASS" in out and "0.585786" in out
    code, doc = run_json(capsys, "verify", "reduction", "path3", "--d", "2")
    assert code == 0 and doc["result"]["max_deviation"] <= 1e-8
    code, doc = run_json(capsys, "verify", "hasse", "star4")
    assert code == 0 and doc["result"]["passed"]
    code, doc = run_json(capsys, "verify", "intertwining", "path4")
    assert code == 0
    assert all(p["residual"] <= 1e-12 for p in doc["result"]["pairs"])


def test_verify_resource_guard(capsys):
    code, _, err = run(capsys, "verify", "aldous", "path8")
    assert code == 4 and "limit" in err


def test_verify_failure_exit_code(capsys, tmp_path):
    # a disconnected graph is rejected up front
    path = tmp_path / "two.json"
    path.write_text('{"n_vertices": 4, "edges": [[0, 1], [2, 3]]}')
    code, _, _ = run(capsys, "verify", "aldous", str(path))
    assert code == 2


def test_simulate_csv(capsys):
    code, out, _ = run(capsys, "simulate", "path3", "--format", "csv", "--steps", "4", "--seed", "5")
    lines = out.strip().splitlines()
    assert lines[0] == "t,distance,trace,min_eigenvalue"
    assert len(lines) == 6
    dist = [float(line.split(",")[1]) for line in lines[1:]]
    assert dist[-1] < dist[0]


@pytest.mark.parametrize("argv", [
    ["simulate", "path3", "--seed", "7"],
    ["optimize", "lollipop:4,2", "--method", "numeric", "--seed", "1"],
    ["verify", "reduction", "path3", "--seed", "3"],
])
def test_json_byte_identical(argv):
    cmd = [sys.executable, "-m", "qconsensus", *argv, "--format", "json"]
    a = subprocess.run(cmd, capture_output=True, check=True).stdout
    b = subprocess.run(cmd, capture_output=True, check=True).stdout
    assert a == b and a


def test_process_exit_codes():
    ok = subprocess.run([sys.executable, "-m", "qconsensus", "partitions", "3"], capture_output=True)
    assert ok.returncode == 0
    bad = subprocess.run([sys.executable, "-m", "qconsensus", "partitions", "0"], capture_output=True)
    assert bad.returncode == 2
    unknown = subprocess.run([sys.executable, "-m", "qconsensus", "optimize", "hexagon"], capture_output=True)
    assert unknown.returncode == 2
