import csv
import json

import pytest

from toeplitz import cli
from toeplitz.holewords import ConstantWordSystem


def run(capsys, *argv):
    code = cli.run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_gen_matches_evaluate(capsys):
    code, out, _ = run(capsys, "gen", "--word", "a?b?c", "--range", "-10:10")
    assert code == 0
    sys = ConstantWordSystem("a?b?c")
    assert out.strip() == "".join(sys.evaluate(i) for i in range(-10, 10))


def test_gen_json(capsys):
    code, out, _ = run(capsys, "gen", "--word", "a?b", "--range", "0:9", "--json")
    assert code == 0
    data = json.loads(out)
    assert data["start"] == 0 and "aabaababb" in json.dumps(data)


def test_skeleton(capsys):
    code, out, _ = run(capsys, "skeleton", "--word", "a?b", "--level", "2", "--range", "0:9")
    assert code == 0 and out.strip() == "aaba?babb"


@pytest.mark.parametrize("argv", [
    [],
    ["gen", "--word", "a?b"],
    ["gen", "--word", "a?b", "--range", "3"],
    ["phi", "--word", "?ab", "--level", "1"],
    ["phi", "--word", "ab?c?d", "--level", "1"],
    ["phi", "--word", "a?b?c", "--level", "1", "--p", "7"],
    ["odometer"],
    ["blocks", "--k1", "4", "--mode", "faithful"],
    ["realize", "--d", "0"],
    ["nonsense"],
])
def test_usage_errors_exit_one(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 1
    assert "usage" in err and "construction spec schema" in err


def test_bad_spec_rejected(tmp_path, capsys):
    p = tmp_path / "spec.json"
    p.write_text(json.dumps({"kind": "pq"}))
    code, _, err = run(capsys, "gen", "--spec", str(p), "--range", "0:5")
    assert code == 1 and "invalid" in err


def test_verification_failure_exits_two(capsys, monkeypatch):
    monkeypatch.setattr(cli, "verify_all", lambda *a, **k: {"ok": False})
    code, _, _ = run(capsys, "verify-all", "--word", "a?b", "--levels", "1")
    assert code == 2


def test_complexity_csv(tmp_path, capsys):
    out = tmp_path / "c.csv"
    code, text, _ = run(capsys, "complexity", "--word", "a?b?c", "--nmax", "80",
                        "--csv", str(out), "--fit", "20:80")
    assert code == 0
    rows = list(csv.DictReader(out.open()))
    vals = [int(r["p_X"]) for r in rows]
    assert vals == sorted(vals) and len(vals) == 80
    assert 1.4 < json.loads(text)["fit"]["slope"] < 2.1


def test_phi_and_roots(capsys):
    code, out, _ = run(capsys, "phi", "--word", "a?b?c", "--level", "1", "--p", "5", "--q", "2")
    assert code == 0
    cert = json.loads(out)
    assert cert["identity_holds"] and cert["radius"] == 3 and cert["minimal_power"] == 2
    code, out, _ = run(capsys, "roots", "--word", "a?b?c", "--level", "1")
    rep = json.loads(out)
    assert code == 0 and rep["equals_shift"] and (rep["a"], rep["b"]) == (1, 2)


def test_odometer(capsys):
    code, out, _ = run(capsys, "odometer", "--primorial", "4", "--translation", "1")
    rep = json.loads(out)
    assert code == 0
    assert rep["torsion"]["cyclic_parts"] == [[2, 2], [3, 3], [5, 5]]
    assert rep["minimal_translation"]["minimal"]


def test_blocks(capsys, tmp_path):
    plot = tmp_path / "freq.dat"
    code, out, _ = run(capsys, "blocks", "--k1", "4", "--levels", "3", "--freq-plot", str(plot))
    rep = json.loads(out)
    assert code == 0 and rep["overlap_ok"]
    assert all(f["max_deviation"] == "0" for f in rep["freq_table"])
    assert plot.read_text().startswith("#")


def test_realize_spec_roundtrip(tmp_path, capsys):
    spec = tmp_path / "spec.json"
    code, _, _ = run(capsys, "realize", "--d", "2", "--a", "6", "--out", str(spec))
    assert code == 0
    doc = json.loads(spec.read_text())
    assert doc["report"]["expected_group"] == "Z^2 + Z_6"
    code, out, _ = run(capsys, "gen", "--spec", str(spec), "--range", "0:3")
    assert code == 0 and out.strip()


def test_verify_all_is_deterministic(capsys):
    a = run(capsys, "verify-all", "--word", "a?b", "--levels", "2", "--trials", "20")
    b = run(capsys, "verify-all", "--word", "a?b", "--levels", "2", "--trials", "20")
    assert a[0] == 0 and a == b
