import json
import os

import pytest

from kurosh.cli import main

HERE = os.path.dirname(__file__)


def inst(name):
    return os.path.join(HERE, "..", "instances", name)


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_rank_text_and_json(capsys):
    code, out, _ = run(capsys, "rank", inst("z2_z3_whole.inst"))
    assert code == 0 and "C = 2" in out and "Kurosh rank = 2" in out
    code, out, _ = run(capsys, "rank", inst("z2_z2_circle.inst"), "--json")
    rep = json.loads(out)["report"]
    assert (rep["C"], rep["C_bar"], rep["kurosh_rank"]) == (1, 0, 1)
    code, out, _ = run(capsys, "rank", inst("z2_z3_elliptic.inst"))
    assert "elliptic, C = 1" in out


def test_rank_is_deterministic(capsys):
    a = run(capsys, "rank", inst("z6_z4_edge_free.inst"), "--json")
    b = run(capsys, "rank", inst("z6_z4_edge_free.inst"), "--json")
    assert a == b


def test_member(capsys):
    code, out, _ = run(capsys, "member", inst("f2_powers.inst"), "x1 x1 x1", "--json")
    d = json.loads(out)
    assert code == 0 and d["member"] and d["oracle"] == "YES"
    code, out, _ = run(capsys, "member", inst("f2_powers.inst"), "x2")
    assert "no" in out
    code, _, err = run(capsys, "member", inst("f2_powers.inst"), "x9")
    assert code == 2 and "out of range" in err


def test_intersect(capsys):
    code, out, _ = run(capsys, "intersect", inst("f2_powers.inst"), "--json")
    d = json.loads(out)
    assert code == 0 and d["intersection_gens"] == ["x1 x1"]
    assert all(c["ok"] for c in d["checks"] if c["applicable"])
    code, out, _ = run(capsys, "intersect", inst("z2_z3_elliptic.inst"))
    assert "elliptic" in out and "trivial bound" in out


def test_check_command(capsys):
    code, out, _ = run(capsys, "check", inst("z4_z4_over_z2.inst"), "thm3", "--json")
    d = json.loads(out)
    assert code == 0 and d["checks"][0]["lhs"] == 1 and d["checks"][0]["rhs"] == 4


def test_oracle_compare_shipped(capsys):
    for name in sorted(os.listdir(os.path.join(HERE, "..", "instances"))):
        code, out, _ = run(capsys, "oracle-compare", inst(name), "--json", "--budget-L", "6")
        assert code == 0 and json.loads(out)["agreement"], name


def test_export_dot(capsys, tmp_path):
    target = tmp_path / "pb.dot"
    code, _, _ = run(capsys, "export-dot", inst("z2_z2_circle.inst"), "--target", "pullback",
                     "--out", str(target))
    text = target.read_text()
    assert code == 0 and text.startswith("graph") and "fiber=" in text
    for t in ("H", "K", "tilde"):
        code, out, _ = run(capsys, "export-dot", inst("z2_z3_whole.inst"), "--target", t)
        assert code == 0 and " -- " in out


def test_campaign_command(capsys, tmp_path):
    code, out, err = run(capsys, "campaign", "tiny", "-n", "5", "--seed", "2", "--out", str(tmp_path))
    assert code == 0 and "5 instances" in out and "runtime" in err
    assert (tmp_path / "records.jsonl").exists()


def test_parse_errors(capsys, tmp_path):
    bad = tmp_path / "bad.inst"
    bad.write_text("[group]\nsetting = plain\nfactors = cyclic:2\nfoo = 1\n")
    code, _, err = run(capsys, "rank", str(bad))
    assert code == 2 and "line 4, column 1" in err
    code, _, err = run(capsys, "intersect", inst("z2_z3_whole.inst"), "--budget-L", "40")
    assert code == 2 and "budget L" in err
    with pytest.raises(SystemExit):
        main(["check", inst("z2_z3_whole.inst"), "thm9"])
