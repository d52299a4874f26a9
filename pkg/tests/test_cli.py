import json

import pytest

from coxcc import cli
from coxcc.cli import RunReport


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, *argv):
    code, out, _ = run(capsys, *argv, "--json")
    rep = RunReport.from_json(out)
    # parse(print(x)) == x
    assert RunReport.from_json(rep.to_json()) == rep
    assert rep.exit_code == code
    return code, rep


def test_classify_ex91(capsys):
    code, out, _ = run(capsys, "classify", "ex91")
    assert code == 0
    assert "reducibility: irreducible" in out and "hyperbolic: false" in out
    assert "(IC): true witness [[1, 2], [4, 5]]" in out


def test_classify_ex92_ex93(capsys):
    _, rep = run_json(capsys, "classify", "ex92")
    assert rep.outputs["hyperbolic"] is True
    _, rep = run_json(capsys, "classify", "ex93")
    assert rep.outputs["exists"] is True
    assert rep.outputs["peripherals"] == [{"atilde": [1, 2, 3], "commuting": [], "type": "A~2"}]


def test_classify_parse_error(capsys, tmp_path):
    p = tmp_path / "bad.cox"
    p.write_text("2\n1 2 x\n")
    code, _, err = run(capsys, "classify", str(p))
    assert code == 2 and "line 2" in err
    code, _, _ = run(capsys, "classify", str(tmp_path / "missing.cox"))
    assert code == 2


def test_decide_examples(capsys):
    code, rep = run_json(capsys, "decide", "--example", "ex92", "--x", "1", "--y", "1")
    assert code == 0 and rep.outputs["cc"] is False
    assert any(w["subset"] == [4, 5] for w in rep.outputs["witnesses"])
    code, rep = run_json(capsys, "decide", "--example", "ex93", "--x", "2", "--y", "1")
    assert rep.outputs["cc"] is True
    code, rep = run_json(capsys, "decide", "--example", "atilde", "--a", "1")
    assert rep.outputs["cc"] is False and rep.outputs["affine_case"]["type"] == "Zero"


def test_decide_human_names_witness(capsys):
    _, out, _ = run(capsys, "decide", "--example", "ex93", "--x", "1")
    assert "witness ZT [1, 2, 3]" in out


def test_decide_files_and_validation(capsys, tmp_path):
    cox = tmp_path / "w.cox"
    cox.write_text("2\n1 2 inf\n")
    bad = tmp_path / "bad.cartan"
    bad.write_text(json.dumps({"n": 2, "coxeter": "w.cox", "entries": [[2, -1], [-1, 2]]}))
    code, _, err = run(capsys, "decide", str(cox), str(bad))
    assert code == 3 and "product-ge-4" in err
    good = tmp_path / "good.cartan"
    good.write_text(json.dumps({"n": 2, "coxeter": "w.cox", "entries": [[2, -3], [-2, 2]]}))
    code, rep = run_json(capsys, "decide", str(cox), str(good))
    assert code == 0 and rep.outputs["cc"] is True
    malformed = tmp_path / "m.cartan"
    malformed.write_text("{not json")
    code, _, _ = run(capsys, "decide", str(malformed))
    assert code == 2


def test_decide_sweep(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("COXCC_THREADS", "1")
    out = tmp_path / "s.csv"
    code, rep = run_json(capsys, "decide", "--example", "ex93", "--sweep", "x=0.5:1.5:0.25",
                         "--out", str(out))
    rows = rep.outputs["rows"]
    assert [r["x"] for r in rows] == [0.5, 0.75, 1.0, 1.25, 1.5]
    assert [r["cc"] for r in rows] == [True, True, False, True, True]
    assert out.read_text().splitlines()[0].startswith("x,")


def test_sweep_parallel_matches_serial(capsys, monkeypatch):
    monkeypatch.setenv("COXCC_THREADS", "2")
    _, par = run_json(capsys, "decide", "--example", "ex92", "--y", "1.2", "--sweep", "x=0.5:2:0.5")
    monkeypatch.setenv("COXCC_THREADS", "1")
    _, ser = run_json(capsys, "decide", "--example", "ex92", "--y", "1.2", "--sweep", "x=0.5:2:0.5")
    assert par.outputs == ser.outputs


def test_build_generic_then_decide(capsys, tmp_path):
    prefix = tmp_path / "g"
    code, rep = run_json(capsys, "build", "ex93", "--flavor", "generic", "--out", str(prefix))
    assert code == 0 and rep.outputs["verify"]["passed"]
    code, rep = run_json(capsys, "decide", str(tmp_path / "g.cartan"))
    assert rep.outputs["cc"] is True


def test_build_atilde_zigzag(capsys):
    code, rep = run_json(capsys, "build", "--flavor", "atilde", "--a", "2", "--n", "3")
    assert code == 0 and rep.outputs["zigzag_ok"]


def test_build_deformed(capsys):
    code, rep = run_json(capsys, "build", "fig5", "--flavor", "deformed:1-2=0.5,2-3=1")
    assert code == 0 and rep.outputs["cartan"][0][1] == -2.5


def test_build_rank_error(capsys, tmp_path):
    p = tmp_path / "a2.cox"
    p.write_text("2\n1 2 3\n")
    code, _, err = run(capsys, "build", str(p), "--flavor", "tits", "--n", "1")
    assert code == 3 and "rank" in err
    code, _, err = run(capsys, "build", str(p), "--flavor", "bogus")
    assert code == 2


def test_tile(capsys, tmp_path):
    out = tmp_path / "f.svg"
    code, o, _ = run(capsys, "tile", "fig5", "--depth", "8", "--out", str(out))
    assert code == 0 and "Σ ⊂ interior: true" in o and "tiles: 229" in o
    assert out.read_text().startswith("<?xml")
    code, rep = run_json(capsys, "tile", "fig5", "--depth", "0", "--out", str(out))
    assert rep.outputs["tiles"] == 1


def test_tile_atilde_and_errors(capsys, tmp_path):
    code, rep = run_json(capsys, "tile", "--example", "atilde", "--a", "2", "--depth", "6",
                         "--out", str(tmp_path / "a.svg"))
    assert code == 0 and rep.outputs["tiles"] > 1
    code, _, _ = run(capsys, "tile", "--example", "atilde", "--a", "1", "--depth", "3")
    assert code == 3
    code, _, err = run(capsys, "tile", "--example", "ex93", "--x", "2", "--depth", "2")
    assert code == 3 and "dimension" in err


def test_examples_command(capsys):
    code, out, _ = run(capsys, "examples")
    assert code == 0 and "FAIL" not in out and out.count("PASS") >= 10


def test_examples_exit_on_failure(capsys, monkeypatch):
    monkeypatch.setattr(cli, "identity_checks", lambda seed: [("broken", False, "x")])
    code, out, _ = run(capsys, "examples")
    assert code == 1 and "FAIL  broken" in out


def test_report_roundtrip_values():
    rep = RunReport("x", outputs={"a": float("nan"), "b": float("inf"), "c": (1, 2)})
    back = RunReport.from_json(rep.to_json())
    assert back.outputs == {"a": None, "b": "inf", "c": [1, 2]}
    assert RunReport.from_json(back.to_json()) == back
