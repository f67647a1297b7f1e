import json
import os
import subprocess
import sys

import pytest

from blform.cli import main

FAM = {"vectors": [[1, 0], [0, 1], [1, 1]]}
KF_POINT = {"theta": [1, -1], "lam": "1/4",
            "entries": [["7/12", "-1/8"], ["7/12", "-1/8"], ["7/12", "1/4"]]}


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_check_sufficient(capsys):
    doc = {"family": FAM, "index": {"entries": [["1/2", "1/6"]] * 3}}
    code, out, _ = run(capsys, "check", json.dumps(doc))
    assert code == 0 and json.loads(out)["classification"] == "SUFFICIENT"


def test_check_necessary_fail_exits_2(capsys):
    doc = {"family": FAM, "index": {"entries": [["1/2", "1/2"]] * 3}}
    code, out, _ = run(capsys, "check", json.dumps(doc))
    assert code == 2 and json.loads(out)["classification"] == "NECESSARY_FAIL"


def test_check_boundary_exits_0(capsys):
    doc = {"family": FAM, "index": {"entries": [[1, 0], [1, 0], [0, 0]]}}
    code, out, _ = run(capsys, "check", json.dumps(doc), "--format", "human")
    assert code == 0 and out.startswith("classification: BOUNDARY")


def test_reduce(capsys):
    doc = {"family": FAM, "lambda": [-1, 1, 1]}
    code, out, _ = run(capsys, "reduce", json.dumps(doc))
    j = json.loads(out)
    assert code == 0 and j["valid"]
    assert [l["alpha"] for l in j["certificate"]["leaves"]] == [["-1", "1", "0"], ["-1", "0", "1"]]


def test_reduce_with_index_carries_exponents(capsys):
    doc = {"family": FAM, "index": {"entries": [["2/3", "-1/6"], ["1/3", "1/3"], ["1/2", "1/3"]]}}
    code, out, _ = run(capsys, "reduce", json.dumps(doc))
    leaves = json.loads(out)["certificate"]["leaves"]
    assert code == 0 and leaves[1]["q_exponents"] == ["2/3", "2/3", "2/3"]


def test_mlfi_sets(capsys):
    code, out, _ = run(capsys, "mlfi", json.dumps(KF_POINT), "--set", "komori-furuya")
    assert code == 0 and json.loads(out)["verdict"]["satisfied"] is True
    code, out, _ = run(capsys, "mlfi", json.dumps(KF_POINT), "--set", "thm41")
    v = json.loads(out)["verdict"]
    assert code == 2 and not v["satisfied"]
    assert {c["tag"] for c in v["violations"]} == {"another_strict"}


def test_input_errors_exit_1(capsys, tmp_path):
    doc = {"family": FAM, "index": {"entries": [["0.7", 0], ["1/2", 0], ["1/2", 0]]}}
    code, out, err = run(capsys, "check", json.dumps(doc))
    assert code == 1 and out == "" and "use 7/10" in err and "/index/entries/0/0" in err
    code, _, err = run(capsys, "check", "{not json")
    assert code == 1 and "invalid JSON" in err
    code, _, err = run(capsys, "check", str(tmp_path / "missing.json"))
    assert code == 1
    code, _, err = run(capsys, "mlfi", json.dumps(KF_POINT), "--set", "nope")
    assert code == 1 and "unknown condition set" in err
    code, _, err = run(capsys, "witness", '{"kind": "SCALING"}', "--ladder", "1:2")
    assert code == 1 and "lo:hi:n" in err


def test_eval_reads_file(capsys, tmp_path):
    unit = {"k": 1, "pieces": [{"a": 0, "b": 1, "c": 1, "gamma": 0}]}
    path = tmp_path / "inst.json"
    path.write_text(json.dumps({"family": FAM, "functions": [unit] * 3}))
    code, out, _ = run(capsys, "eval", path)
    assert code == 0 and json.loads(out)["exact"] == "3"


def test_witness_formats(capsys):
    doc = {"kind": "INDEX", "family": FAM, "ell": 3,
           "index": {"entries": [["2/3", "-1/4"], ["2/3", "-1/4"], ["2/3", "1/2"]]}}
    code, out, _ = run(capsys, "witness", json.dumps(doc), "--format", "csv", "--ladder", "8:1024:8")
    assert code == 2 and len(out.strip().splitlines()) == 9
    code, out, _ = run(capsys, "witness", json.dumps(doc))
    assert json.loads(out)["verdict"] == "UNBOUNDED_WITNESS"


def test_compare(capsys):
    code, out, _ = run(capsys, "compare", "--set", "thm41", "--set", "komori-furuya", "--budget", 50)
    j = json.loads(out)
    assert code == 0 and j["set_a"] == "thm41" and len(j["a_minus_b"]) >= 1


def _cli(args, threads):
    env = dict(os.environ, BLFORM_THREADS=str(threads))
    return subprocess.run([sys.executable, "-m", "blform", *args], capture_output=True, env=env)


def test_output_is_byte_identical_across_runs_and_workers():
    unit = {"k": 1, "pieces": [{"a": 0, "b": 1, "c": 1, "gamma": 0}]}
    root = {"k": 1, "pieces": [{"a": 0, "b": 2, "c": 1, "gamma": -0.5}]}
    doc = json.dumps({"family": FAM, "functions": [unit, unit, root]})
    args = ["eval", doc, "--seed", "3", "--budget", "100000"]
    a, b, c = _cli(args, 1), _cli(args, 1), _cli(args, 4)
    assert a.returncode == 0 and a.stdout == b.stdout == c.stdout
    assert json.loads(a.stdout)["method"] == "MONTE_CARLO"


def test_console_script_is_installed():
    proc = subprocess.run(["blform", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0 and "witness" in proc.stdout
