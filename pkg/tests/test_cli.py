import json

import pytest

from gcx import bound as bounds
from gcx.cli import main


def write(path, data):
    path.write_text(json.dumps(data))
    return str(path)


K1 = {"k": 1, "n": 2, "initial": [["-1", "1"]], "moves": [{"j": 1, "t": "2"}]}


def test_bound_theorem(capsys):
    assert main(["bound", "--k", "3", "--n", "6", "--kind", "theorem"]) == 0
    assert capsys.readouterr().out.strip() == "64"


def test_bound_table_csv_and_ceiling(capsys):
    assert main(["bound", "--table", "5", "--kind", "all", "--format", "csv"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "k,n,kind,value,strict,max_nsc" and len(lines) == 1 + 10 * 4
    assert main(["bound", "--k", "4", "--n", "6", "--kind", "theorem", "--ceiling"]) == 0
    assert "243/2" in capsys.readouterr().out


def test_nsc(tmp_path, capsys):
    assert main(["nsc", "-i", write(tmp_path / "s.json", K1)]) == 0
    assert capsys.readouterr().out.strip() == "1"


def test_certify_then_check(tmp_path, capsys):
    seq = write(tmp_path / "s.json", K1)
    cert = str(tmp_path / "c.json")
    assert main(["certify", "-i", seq, "-o", cert]) == 0
    assert main(["check", "-i", seq, "-c", cert]) == 0
    data = json.loads(open(cert).read())
    data["pr"][1] += 1
    bad = write(tmp_path / "bad.json", data)
    assert main(["check", "-i", seq, "-c", bad]) == 3
    assert "axiom" in capsys.readouterr().out


def test_input_errors_exit_2(tmp_path):
    assert main(["nsc", "-i", str(tmp_path / "missing.json")]) == 2
    (tmp_path / "junk.json").write_text("{not json")
    assert main(["nsc", "-i", str(tmp_path / "junk.json")]) == 2
    bad = dict(K1, moves=[{"j": 1, "t": "1"}])  # leading minor hits zero
    assert main(["nsc", "-i", write(tmp_path / "d.json", bad)]) == 2
    with pytest.raises(SystemExit) as exc:
        main(["nsc", "--bogus"])
    assert exc.value.code == 2


def test_search_verify_and_target(tmp_path, capsys):
    out = str(tmp_path / "w.json")
    progress = str(tmp_path / "p.csv")
    args = ["search", "--k", "2", "--n", "4", "--budget", "20000", "--restarts", "4", "--seed", "42"]
    assert main(args + ["--target", "4", "-o", out, "--progress", progress, "--library", str(tmp_path / "lib")]) == 0
    assert main(["verify", "-i", out]) == 0
    assert "pass" in capsys.readouterr().out
    assert main(args + ["--target", "5", "-o", str(tmp_path / "w2.json")]) == 4


def test_red_alert_exit_5(tmp_path, monkeypatch):
    monkeypatch.setattr(bounds, "max_nsc_allowed", lambda kind, k, n: 0)
    args = ["search", "--k", "2", "--n", "4", "--budget", "2000", "--restarts", "1", "-o", str(tmp_path / "w.json")]
    assert main(args) == 5


def test_reduce(tmp_path):
    seq = {"k": 2, "n": 4, "initial": [["1", "2", "-1", "3"], ["2", "-1", "1", "1"]], "moves": [{"j": 2, "t": "3"}]}
    out = tmp_path / "r.json"
    assert main(["reduce", "-i", write(tmp_path / "s.json", seq), "-o", str(out)]) == 0
    data = json.loads(out.read_text())
    assert {"omega", "refined", "move_types", "runs"} <= data.keys()


def test_curve_commands(tmp_path, capsys):
    curve = write(tmp_path / "c.json", {"n": 3, "k": 2, "initial": "identity", "arcs": [{"c": ["1", "1"], "t_max": "5"}]})
    assert main(["curve", "zeros", "-i", curve]) == 0
    assert capsys.readouterr().out.startswith("nz 1")
    seq = str(tmp_path / "d.json")
    assert main(["curve", "discretize", "-i", curve, "-o", seq]) == 0
    assert main(["nsc", "-i", seq]) == 0
    assert int(capsys.readouterr().out) >= 1
    lifted = str(tmp_path / "l.json")
    assert main(["curve", "lift", "-i", seq, "-o", lifted]) == 0
    assert main(["curve", "zeros", "-i", lifted]) == 0
    assert int(capsys.readouterr().out.split()[1]) >= 1
    mat = write(tmp_path / "m.json", [["1", "0", "0"], ["2", "1", "0"], ["1", "1", "1"]])
    assert main(["curve", "factor", "-i", mat]) == 0
    assert capsys.readouterr().out.strip() == "1 1 1"
    ident = write(tmp_path / "i.json", [["1", "0"], ["0", "1"]])
    assert main(["curve", "factor", "-i", ident]) == 3


def test_selftest(capsys):
    assert main(["selftest"]) == 0
    assert "FAIL" not in capsys.readouterr().out
