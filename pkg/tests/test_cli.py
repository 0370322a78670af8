import io
import json
import sys

import pytest

from magmalab import fixtures as fx
from magmalab.cli import main
from magmalab.models import direct_product, dual_model, loads_model, satisfies_theory
from magmalab.proofs import dumps_scripts, loads_scripts, mirror_script
from magmalab.terms import format_identity, mirror_identity, parse_theory


def run(capsys, *argv, stdin=None, monkeypatch=None):
    if stdin is not None:
        monkeypatch.setattr(sys, "stdin", io.StringIO(stdin))
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv)
    return code, json.loads(out), err


# ------------------------------------------------------------------- check


def test_check_table1(capsys):
    code, data, _ = run_json(capsys, "check", "--model", "TABLE1", "--theory", "RECT_LOOP")
    assert code == 2
    assert [v["name"] for v in data["verdicts"] if not v["holds"]] == ["L"]
    assert data["verdicts"][-1]["witness"] == {"x": 0, "y": 1}


def test_check_point(capsys):
    code, data, _ = run_json(capsys, "check", "--model", "POINT", "--theory", "RECT_LOOP")
    assert code == 0 and data["all_hold"]


def test_check_single_axiom(capsys):
    code, data, _ = run_json(capsys, "check", "--model", "TABLE3", "--theory", "RECT_LOOP", "--axiom", "Q4")
    assert code == 2
    assert data["verdicts"] == [{"name": "Q4", "holds": False, "witness": {"x": 0, "y": 1}}]


def test_check_pretty(capsys):
    code, out, _ = run(capsys, "check", "--model", "TABLE1", "--theory", "RECT_LOOP", "--pretty")
    lines = out.splitlines()
    assert code == 2 and len(lines) == 7
    assert lines[0].split() == ["Q1", "HOLDS"]
    assert lines[-1].split() == ["L", "FAILS", "x=0", "y=1"]


def test_check_unknown_axiom(capsys):
    code, _, err = run(capsys, "check", "--model", "TABLE1", "--theory", "RECT_LOOP", "--axiom", "Q9")
    assert code == 1 and "Q9" in err


def test_check_files_on_disk(capsys, tmp_path):
    (tmp_path / "m.model").write_text(fx.emit("TABLE2"))
    (tmp_path / "t.eq").write_text(fx.emit("RECT_LOOP"))
    code, data, _ = run_json(capsys, "check", "--model", str(tmp_path / "m.model"),
                             "--theory", str(tmp_path / "t.eq"))
    assert code == 2
    assert [v["name"] for v in data["verdicts"] if not v["holds"]] == ["Q2"]


@pytest.mark.parametrize(
    "model_text, theory_text",
    [
        ("{not json", "Q1: x = x"),
        ('{"size": 1, "mul": [[0]], "ldiv": [[0]], "rdiv": [[1]]}', "Q1: x = x"),
        ('{"size": 1, "mul": [[0]], "ldiv": [[0]], "rdiv": [[0]]}', "Q1: x * y / z = x"),
        ('{"size": 1, "mul": [[0]], "ldiv": [[0]], "rdiv": [[0]]}', "Q1 x = x"),
    ],
)
def test_check_malformed_input(capsys, tmp_path, model_text, theory_text):
    (tmp_path / "m.model").write_text(model_text)
    (tmp_path / "t.eq").write_text(theory_text)
    code, _, _ = run(capsys, "check", "--model", str(tmp_path / "m.model"), "--theory", str(tmp_path / "t.eq"))
    assert code == 1


def test_missing_file(capsys):
    code, _, err = run(capsys, "check", "--model", "/nonexistent/x.model", "--theory", "RECT_LOOP")
    assert code == 1 and "no such file" in err


def test_pipe_stability(capsys, monkeypatch):
    _, text, _ = run(capsys, "fixtures", "--emit", "TABLE4")
    piped = run(capsys, "check", "--model", "-", "--theory", "RECT_LOOP", stdin=text, monkeypatch=monkeypatch)
    direct = run(capsys, "check", "--model", "TABLE4", "--theory", "RECT_LOOP")
    assert piped == direct


# ------------------------------------------------------------------ search


def test_search_finds_model(capsys):
    code, out, err = run(capsys, "search", "--theory", "QUASIGROUP", "--size", "3")
    assert code == 0
    m = loads_model(out)
    assert m.size == 3 and all(v.holds for v in satisfies_theory(m, fx.theory("QUASIGROUP")))
    assert "nodes=" in err


def test_search_violate(capsys):
    code, out, _ = run(capsys, "search", "--theory", "RECT_LOOP", "--size", "3", "--violate", "L")
    assert code == 0
    failing = [v.name for v in satisfies_theory(loads_model(out), fx.theory("RECT_LOOP")) if not v.holds]
    assert failing == ["L"]


def test_search_violate_exhausted(capsys):
    code, out, err = run(capsys, "search", "--theory", "RECT_LOOP", "--size", "2", "--violate", "L", "--no-lnh")
    assert code == 2 and out == "" and "exhausted" in err


def test_search_all(capsys):
    code, out, _ = run(capsys, "search", "--theory", "QUASIGROUP", "--size", "2", "--all", "--no-lnh")
    assert code == 0
    data = json.loads(out)
    assert len(data) == 2 and all(d["size"] == 2 for d in data)


def test_search_all_limit(capsys):
    code, out, _ = run(capsys, "search", "--theory", "LEFT_ZERO", "--size", "3", "--all", "--limit", "5")
    assert code == 0 and len(json.loads(out)) == 1


def test_search_writes_out(capsys, tmp_path):
    target = tmp_path / "found.model"
    code, out, _ = run(capsys, "search", "--theory", "RECT_AXIOMS", "--size", "2", "--out", str(target))
    assert code == 0 and out == ""
    assert loads_model(target.read_text()).size == 2


@pytest.mark.parametrize("size", ["0", "7", "-1"])
def test_search_size_out_of_range(capsys, size):
    code, _, _ = run(capsys, "search", "--theory", "QUASIGROUP", "--size", size)
    assert code == 1


def test_search_bad_flag_combinations(capsys):
    assert run(capsys, "search", "--theory", "QUASIGROUP", "--size", "2", "--limit", "3")[0] == 1
    assert run(capsys, "search", "--theory", "RECT_LOOP", "--size", "2", "--all", "--violate", "L")[0] == 1
    assert run(capsys, "search", "--theory", "RECT_LOOP", "--size", "2", "--violate", "Q9")[0] == 1
    assert run(capsys, "search", "--theory", "RECT_LOOP")[0] == 1


def test_node_limit_from_environment(capsys, monkeypatch):
    monkeypatch.setenv("MAGMALAB_LIMIT_NODES", "10")
    code, _, err = run(capsys, "search", "--theory", "RECT_LOOP", "--size", "4", "--violate", "Q3")
    assert code == 3 and "limit" in err
    monkeypatch.setenv("MAGMALAB_LIMIT_NODES", "lots")
    assert run(capsys, "search", "--theory", "RECT_LOOP", "--size", "2")[0] == 1


def test_time_limit_flag(capsys):
    code, _, _ = run(capsys, "search", "--theory", "LEFT_ZERO", "--size", "6", "--all", "--no-lnh",
                     "--time-limit", "0.0001")
    assert code in (0, 3)


def test_search_workers(capsys):
    one = run(capsys, "search", "--theory", "RECT_LOOP", "--size", "3", "--violate", "L")
    two = run(capsys, "search", "--theory", "RECT_LOOP", "--size", "3", "--violate", "L", "--workers", "2")
    assert one[:2] == two[:2]


# ------------------------------------------------------------- independence


def test_independence_rect_loop(capsys, tmp_path):
    code, data, _ = run_json(capsys, "independence", "--theory", "RECT_LOOP", "--max-size", "4",
                             "--witness-dir", str(tmp_path))
    assert code == 0
    sizes = {a["axiom"]: a["size"] for a in data["axioms"]}
    assert sizes["L"] == 3 and len(sizes) == 7
    theory = fx.theory("RECT_LOOP")
    for a in data["axioms"]:
        m = loads_model((tmp_path / f"{a['axiom']}.model").read_text())
        assert [v.name for v in satisfies_theory(m, theory) if not v.holds] == [a["axiom"]]


def test_independence_small_bound(capsys):
    code, data, _ = run_json(capsys, "independence", "--theory", "RECT_LOOP", "--max-size", "2")
    assert code == 2
    missing = [a["axiom"] for a in data["axioms"] if a["status"] != "witness"]
    assert missing == ["Q3", "Q4", "L"]


def test_independence_valid_identity(capsys, tmp_path):
    (tmp_path / "t.eq").write_text("T: x = x\n")
    code, _, _ = run(capsys, "independence", "--theory", str(tmp_path / "t.eq"), "--max-size", "3")
    assert code == 2


def test_independence_limit(capsys, monkeypatch):
    monkeypatch.setenv("MAGMALAB_LIMIT_NODES", "3")
    code, _, _ = run(capsys, "independence", "--theory", "RECT_LOOP", "--max-size", "4")
    assert code == 3


def test_independence_pretty(capsys):
    code, out, _ = run(capsys, "independence", "--theory", "RECT_LOOP", "--max-size", "3", "--pretty")
    assert code == 2
    assert "Q3" in out and "L" in out


# ------------------------------------------------------------------ verify


def test_verify_collection(capsys):
    code, data, _ = run_json(capsys, "verify", "--proofs", "PROOFS", "--theory", "RECT_AXIOMS")
    assert code == 0 and data["verified"]
    assert {"K5", "K9", "K13", "K15"} <= set(data["registry"])


def test_verify_files_in_order(capsys):
    order = [f for f in fx.PROOF_ORDER]
    code, _, _ = run(capsys, "verify", "--proofs", *order, "--theory", "RECT_AXIOMS")
    assert code == 0


def test_verify_corrupted_script(capsys, tmp_path):
    scripts = loads_scripts(fx.emit("F4"))
    data = json.loads(dumps_scripts(scripts))
    data[0]["steps"][2]["term"] = data[0]["steps"][2]["term"].replace("y", "z", 1)
    bad = tmp_path / "bad.proof.json"
    bad.write_text(json.dumps(data))
    prereq = [f for f in fx.PROOF_ORDER if f != "F4"]
    code, out, err = run(capsys, "verify", "--proofs", *prereq, str(bad), "--theory", "RECT_AXIOMS")
    assert code == 2
    entry = json.loads(out)["scripts"][-1]
    assert entry["status"] == "rejected" and entry["step"] in (3, 4)
    assert "step" in err


def test_verify_missing_theory(capsys):
    code, _, _ = run(capsys, "verify", "--proofs", "PROOFS", "--theory", "/nonexistent.eq")
    assert code == 1


def test_verify_malformed_proof_file(capsys, tmp_path):
    (tmp_path / "p.json").write_text("[{}]")
    code, _, _ = run(capsys, "verify", "--proofs", str(tmp_path / "p.json"), "--theory", "RECT_AXIOMS")
    assert code == 1


def test_verify_pretty(capsys):
    code, out, _ = run(capsys, "verify", "--proofs", "F7", "--theory", "RECT_AXIOMS", "--pretty")
    assert code == 0 and "K14" in out and "verified" in out


# ---------------------------------------------------------- constructors


def test_product(capsys):
    code, out, _ = run(capsys, "product", "--left", "TABLE1", "--right", "BAND2x2")
    assert code == 0
    assert loads_model(out) == direct_product(fx.model("TABLE1"), fx.model("BAND2x2"))


def test_product_too_large(capsys, tmp_path):
    _, out, _ = run(capsys, "product", "--left", "BAND2x2", "--right", "BAND2x2")
    (tmp_path / "b16.model").write_text(out)
    code, out, _ = run(capsys, "product", "--left", str(tmp_path / "b16.model"), "--right", "BAND2x2")
    assert code == 0 and loads_model(out).size == 64
    (tmp_path / "b64.model").write_text(out)
    code, _, err = run(capsys, "product", "--left", str(tmp_path / "b64.model"), "--right", "Z2")
    assert code == 1 and "64" in err


def test_dual(capsys, tmp_path):
    target = tmp_path / "d.model"
    code, _, _ = run(capsys, "dual", "--model", "TABLE3", "--out", str(target))
    assert code == 0
    assert loads_model(target.read_text()) == dual_model(fx.model("TABLE3"))


def test_mirror_theory(capsys):
    code, out, _ = run(capsys, "mirror", "--theory", "KRAPEZ")
    assert code == 0
    expected = [format_identity(mirror_identity(i)) for i in fx.theory("KRAPEZ")]
    assert out.splitlines() == expected
    assert len(parse_theory(out)) == len(expected)


def test_mirror_proofs(capsys):
    code, out, _ = run(capsys, "mirror", "--proofs", "F4")
    assert code == 0
    assert out == dumps_scripts([mirror_script(s) for s in fx.proof("F4")]) == fx.emit("F5")


def test_mirror_needs_exactly_one_input(capsys):
    assert run(capsys, "mirror")[0] == 1
    assert run(capsys, "mirror", "--theory", "KRAPEZ", "--proofs", "F4")[0] == 1


# ---------------------------------------------------------------- fixtures


def test_fixtures_list(capsys):
    code, data, _ = run_json(capsys, "fixtures", "--list")
    assert code == 0
    names = [f["name"] for f in data["fixtures"]]
    assert len(names) >= 12
    assert {"TABLE1", "TABLE2", "TABLE3", "TABLE4", "RECT_LOOP", "KRAPEZ8", "PROOFS"} <= set(names)


def test_fixtures_default_lists(capsys):
    assert run(capsys, "fixtures")[0] == 0


def test_fixtures_emit_is_byte_exact(capsys):
    for name in fx.names():
        code, out, _ = run(capsys, "fixtures", "--emit", name)
        assert code == 0 and out == fx.emit(name)


def test_fixtures_emit_table2(capsys):
    _, out, _ = run(capsys, "fixtures", "--emit", "TABLE2")
    m = loads_model(out)
    assert m.mul.tolist() == fx.model("TABLE2").mul.tolist()


def test_fixtures_emit_out(capsys, tmp_path):
    target = tmp_path / "t.eq"
    assert run(capsys, "fixtures", "--emit", "RECT_LOOP", "--out", str(target))[0] == 0
    assert target.read_text() == fx.emit("RECT_LOOP")


def test_fixtures_unknown(capsys):
    code, _, err = run(capsys, "fixtures", "--emit", "TABLE9")
    assert code == 1 and "TABLE9" in err


def test_usage_errors(capsys):
    assert run(capsys)[0] == 1
    assert run(capsys, "frobnicate")[0] == 1
    assert run(capsys, "--help")[0] == 0


def test_module_entry_point():
    import subprocess

    proc = subprocess.run([sys.executable, "-m", "magmalab", "fixtures", "--emit", "Z2"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout == fx.emit("Z2")
