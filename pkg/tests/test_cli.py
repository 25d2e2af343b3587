from __future__ import annotations

import io
import json
import shutil

import pytest

from minisa import __version__
from minisa.cli import main
from minisa.report import loads_run

from conftest import CORPUS

GOLDEN_EXIT = {
    "arrays.mc": (1, 2),
    "budget_loop.mc": (0, 0),
    "clean.mc": (0, 0),
    "const_check.mc": (0, 0),
    "div_zero.mc": (1, 1),
    "div_zero_fixed.mc": (0, 0),
    "exploded_g.mc": (0, 0),
    "interp_functions.mc": (1, 5),
    "ladder.mc": (1, 3),
    "recursion.mc": (0, 0),
    "stream.mc": (1, 2),
    "tu_prob.mc": (0, 0),
    "uninit.mc": (1, 4),
}


def run_cli(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main([str(a) for a in argv], out, err)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture
def work(tmp_path):
    for p in CORPUS.glob("*.mc"):
        shutil.copy(p, tmp_path / p.name)
    return tmp_path


def test_golden_exit_codes_cover_corpus():
    assert sorted(GOLDEN_EXIT) == sorted(p.name for p in CORPUS.glob("*.mc"))


@pytest.mark.parametrize("name", sorted(GOLDEN_EXIT))
def test_exit_code_contract(name, tmp_path):
    code, out, _ = run_cli("analyze", CORPUS / name, "--timestamp", "T", "-o", tmp_path / "run.json")
    expected_code, count = GOLDEN_EXIT[name]
    assert code == expected_code
    assert len(loads_run((tmp_path / "run.json").read_text()).reports) == count
    assert out.rstrip().endswith("report." if count == 1 else "reports.")


def test_determinism_except_timestamp(work):
    files = sorted(work.glob("*.mc"))
    run_cli("analyze", *files, "-o", work / "a.json")
    run_cli("analyze", *files, "-o", work / "b.json")
    a, b = json.loads((work / "a.json").read_text()), json.loads((work / "b.json").read_text())
    a.pop("timestamp"), b.pop("timestamp")
    assert a == b
    run_cli("analyze", *files, "--timestamp", "T", "-o", work / "c.json")
    run_cli("analyze", *files, "--timestamp", "T", "-o", work / "d.json")
    assert (work / "c.json").read_bytes() == (work / "d.json").read_bytes()


def test_stats_recorded(work):
    run_cli("analyze", work / "recursion.mc", "--timestamp", "T", "-o", work / "r.json")
    stats = loads_run((work / "r.json").read_text()).stats
    assert stats["inlined_calls"] == 4 and stats["max_call_depth"] == 4 and stats["files"] == 1


def test_flow_mode_flag(work):
    code, out, _ = run_cli("analyze", work / "div_zero.mc", "--checkers", "flow.DivideByZero", "--flow-mode", "may")
    assert code == 1 and out.rstrip().endswith("3 reports.")
    code, out, _ = run_cli("analyze", work / "div_zero.mc", "--checkers", "flow.DivideByZero", "--flow-mode", "must")
    assert code == 0 and out == "0 reports.\n"


def test_checker_subset_and_unknown_id(work):
    code, out, _ = run_cli("analyze", work / "ladder.mc", "--checkers", "style.TokenDivLiteralZero")
    assert code == 1 and "[style.TokenDivLiteralZero]" in out and "core." not in out
    code, _, err = run_cli("analyze", work / "ladder.mc", "--checkers", "core.Nope")
    assert code == 2 and "unknown checker" in err


def test_budget_flag(work):
    run_cli("analyze", work / "recursion.mc", "--budget", "maxCallDepth=2", "-o", work / "r.json")
    assert loads_run((work / "r.json").read_text()).stats["inlined_calls"] == 2
    code, _, err = run_cli("analyze", work / "recursion.mc", "--budget", "maxCallDepth=0")
    assert code == 2 and "positive" in err


def test_frontend_error_exit_2(tmp_path):
    bad = tmp_path / "bad.mc"
    bad.write_text("int f() {\n  return 1 +;\n}\n")
    code, out, err = run_cli("analyze", bad)
    assert code == 2
    assert err.startswith(f"{bad}:2:")
    assert ": error: " in err


def test_missing_file_exit_2(tmp_path):
    code, _, err = run_cli("analyze", tmp_path / "none.mc")
    assert code == 2 and "cannot read" in err


def test_listfile(work):
    listing = work / "files.txt"
    listing.write_text(f"{work / 'div_zero.mc'}\n{work / 'clean.mc'}\n")
    code, out, _ = run_cli("analyze", f"@{listing}", "--timestamp", "T", "-o", work / "r.json")
    assert code == 1
    assert loads_run((work / "r.json").read_text()).stats["files"] == 2


def test_sa_dump_lines_printed(work):
    code, out, _ = run_cli("analyze", work / "tu_prob.mc")
    lines = [l for l in out.splitlines() if l.startswith("sa_dump")]
    assert lines == [
        f"sa_dump @{work / 'tu_prob.mc'}:6: $x ; constraints: [1, IMAX]",
        f"sa_dump @{work / 'tu_prob.mc'}:9: $x#1 ; constraints: [IMIN, IMAX]",
    ]


@pytest.mark.parametrize("flag", ["cfg", "exploded-graph", "ast", "tokens"])
def test_dumps_to_file(work, flag):
    target = work / f"{flag}.json"
    code, out, _ = run_cli("analyze", work / "exploded_g.mc", f"--dump-{flag}", target)
    assert code == 0
    data = json.loads(target.read_text())
    assert isinstance(data, list) and data
    assert data[0]["file"].endswith("exploded_g.mc")
    if flag == "ast":
        assert data[0]["kind"] == "Program"
        assign = data[0]["children"][0]["children"]
        assert any(c["kind"] == "Block" for c in assign)


def test_dump_to_stdout(work):
    code, out, _ = run_cli("analyze", work / "exploded_g.mc", "--dump-cfg")
    body = out[: out.rindex("0 reports.")]
    (cfg,) = json.loads(body)
    assert cfg["function"] == "g"
    assert all(set(b["term"]) == {"kind", "targets"} for b in cfg["blocks"])


def test_exploded_graph_dump_leaves(work):
    target = work / "eg.json"
    run_cli("analyze", work / "exploded_g.mc", "--dump-exploded-graph", target)
    (g,) = json.loads(target.read_text())
    with_succ = {a for a, _ in g["edges"]}
    leaves = [n["state"] for n in g["nodes"] if n["id"] not in with_succ and not n["sink"]]
    assert sorted(s["constraints"]["$b"] for s in leaves) == ["[0, 0]", "[IMIN, -1] ∪ [1, IMAX]"]


def test_print_command(work):
    run_cli("analyze", work / "div_zero.mc", "--timestamp", "T", "-o", work / "r.json")
    code, text, _ = run_cli("print", work / "r.json")
    assert code == 0 and text.rstrip().endswith("1 report.")
    code, js, _ = run_cli("print", work / "r.json", "--format", "json")
    assert js == (work / "r.json").read_text()


def test_print_rejects_garbage(work):
    (work / "bad.json").write_text("{}")
    code, _, err = run_cli("print", work / "bad.json")
    assert code == 2 and "not a valid run file" in err


def test_diff_command(work):
    run_cli("analyze", work / "div_zero.mc", "--timestamp", "T", "-o", work / "old.json")
    shutil.copy(work / "div_zero_fixed.mc", work / "div_zero.mc")
    run_cli("analyze", work / "div_zero.mc", "--timestamp", "T", "-o", work / "new.json")
    code, out, _ = run_cli("diff", work / "old.json", work / "new.json")
    assert code == 1
    assert out.splitlines()[0] == "New reports:"
    assert "0 reports." in out and "Resolved reports:" in out and "1 report." in out
    code, out, _ = run_cli("diff", work / "old.json", work / "new.json", "--new")
    assert code == 0 and out == "New reports:\n0 reports.\n"
    code, out, _ = run_cli("diff", work / "old.json", work / "old.json")
    assert code == 0


def test_suppress_file_and_annotation(work):
    rules = work / "rules.txt"
    rules.write_text("core.DivideByZero:div_zero.mc:12\n")
    code, out, _ = run_cli("analyze", work / "div_zero.mc", "--suppress", rules, "-o", work / "r.json")
    assert code == 0
    assert loads_run((work / "r.json").read_text()).stats["suppressed"] == 1
    src = (work / "div_zero.mc").read_text().replace("j = 3/i;", "j = 3/i; // sa-suppress(core.DivideByZero)")
    (work / "div_zero.mc").write_text(src)
    code, _, _ = run_cli("analyze", work / "div_zero.mc")
    assert code == 0
    rules.write_text("not a rule\n")
    code, _, err = run_cli("analyze", work / "div_zero.mc", "--suppress", rules)
    assert code == 2


def test_list_checkers_and_version(capsys):
    code, out, _ = run_cli("--list-checkers")
    assert code == 0 and len(out.splitlines()) == 9
    assert main(["--version"]) == 0
    assert capsys.readouterr().out.strip() == f"minisa {__version__}"


def test_usage_errors():
    assert run_cli()[0] == 2
    assert main(["analyze"], io.StringIO(), io.StringIO()) == 2
