from __future__ import annotations

import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from minisa.frontend.lexer import SourceLocation
from minisa.report import (
    EventKind,
    PathEvent,
    Report,
    Run,
    Severity,
    Suppression,
    annotation_suppressions,
    apply_suppressions,
    dedup_sorted,
    diff_runs,
    dumps_run,
    fnv1a_64,
    loads_run,
    make_report,
    parse_suppression_file,
    render,
    severity_for,
)


def loc(line, col=1, file="src/a.mc"):
    return SourceLocation(file, line, col, 0)


# -- hashing ---------------------------------------------------------------------------


@pytest.mark.parametrize(
    "data, expected",
    [(b"", 0xCBF29CE484222325), (b"a", 0xAF63DC4C8601EC8C), (b"foobar", 0x85944171F73967E8)],
)
def test_fnv1a_reference_vectors(data, expected):
    assert fnv1a_64(data) == expected


def test_hash_uses_basename_and_ignores_path():
    a = make_report("core.DivideByZero", "Division by zero", loc(3, 5, "/x/y/a.mc"))
    b = make_report("core.DivideByZero", "Division by zero", loc(3, 5, "other/a.mc"))
    c = Report(a.checker, a.severity, a.message, a.file, a.line, a.col, (*a.path, *a.path))
    assert a.hash == b.hash == c.hash
    assert a.hash == fnv1a_64(b"core.DivideByZero:a.mc:3:5:Division by zero")
    assert len(a.hash_hex) == 16


def test_single_event_default_path():
    r = make_report("style.SelfAssign", "Value is assigned to itself", loc(2, 3))
    (ev,) = r.path
    assert (ev.line, ev.col, ev.kind, ev.note) == (2, 3, EventKind.EVENT, r.message)
    assert r.severity is Severity.STYLE
    assert severity_for("unknown.X") is Severity.LOW


def test_dedup_sorted_keeps_shortest_path():
    long = make_report("core.X", "m", loc(5), [PathEvent("src/a.mc", 1, 1, EventKind.EVENT, "n")] * 3)
    short = make_report("core.X", "m", loc(5))
    other = make_report("core.X", "m", loc(2))
    out = dedup_sorted([long, other, short])
    assert [r.line for r in out] == [2, 5]
    assert out[1].path == short.path


# -- run JSON ---------------------------------------------------------------------------------

names = st.sampled_from(["core.DivideByZero", "flow.UninitVar", "style.SelfAssign", "resource.Stream"])
events = st.builds(
    PathEvent,
    st.sampled_from(["a.mc", "dir/b.mc"]),
    st.integers(1, 50),
    st.integers(1, 80),
    st.sampled_from(list(EventKind)),
    st.text(max_size=20),
)
reports = st.builds(
    lambda c, m, f, line, col, p: Report(c, severity_for(c), m, f, line, col, tuple(p)),
    names,
    st.text(min_size=1, max_size=30),
    st.sampled_from(["a.mc", "dir/b.mc"]),
    st.integers(1, 50),
    st.integers(1, 80),
    st.lists(events, max_size=3),
)
runs = st.builds(
    lambda rs, stats: Run("r", "2024-01-01T00:00:00+00:00", "0.1.0", dedup_sorted(rs), stats),
    st.lists(reports, max_size=6),
    st.dictionaries(st.sampled_from(["nodes", "sinks", "files"]), st.integers(0, 10**6)),
)


@given(runs)
def test_run_json_round_trip(run):
    text = dumps_run(run)
    back = loads_run(text)
    assert back == run
    assert dumps_run(back) == text
    assert render(run, "json") == text


def test_run_schema_keys():
    run = Run("r", "t", "v", [make_report("core.X", "m", loc(1))], {"nodes": 3})
    d = json.loads(dumps_run(run))
    assert set(d) == {"version", "run_name", "timestamp", "tool_version", "stats", "reports"}
    assert set(d["reports"][0]) == {"hash", "checker", "severity", "message", "file", "line", "col", "path"}
    assert set(d["reports"][0]["path"][0]) == {"file", "line", "col", "kind", "note"}


def test_tampered_hash_and_version_rejected():
    run = Run("r", "t", "v", [make_report("core.X", "m", loc(1))], {})
    d = json.loads(dumps_run(run))
    d["reports"][0]["line"] = 2
    with pytest.raises(ValueError):
        Run.from_json(d)
    d = json.loads(dumps_run(run))
    d["version"] = 2
    with pytest.raises(ValueError):
        Run.from_json(d)


def test_text_render():
    run = Run("r", "t", "v", [make_report("core.DivideByZero", "Division by zero", loc(3, 4))], {})
    assert render(run) == (
        "HIGH: src/a.mc:3:4: Division by zero [core.DivideByZero]\n"
        "  1. src/a.mc:3:4: Division by zero\n"
        "1 report.\n"
    )
    assert render(Run("r", "t", "v")) == "0 reports.\n"


# -- diff ------------------------------------------------------------------------------------


@given(runs)
def test_diff_with_self(run):
    d = diff_runs(run, run)
    assert d.new == [] and d.resolved == [] and d.common == run.reports


@given(runs, runs)
def test_diff_antisymmetric(a, b):
    assert diff_runs(a, b).new == diff_runs(b, a).resolved
    assert diff_runs(a, b).resolved == diff_runs(b, a).new


# -- suppression ------------------------------------------------------------------------------


def test_parse_suppression_file():
    text = "# header\ncore.DivideByZero:src/a.mc:12\n\nstyle.SelfAssign : a.mc : *  # any line\n"
    assert parse_suppression_file(text) == [
        Suppression("File", "core.DivideByZero", "src/a.mc", 12),
        Suppression("File", "style.SelfAssign", "a.mc", None),
    ]
    for bad in ("core.X:a.mc", "core.X:a.mc:twelve", ":a.mc:1"):
        with pytest.raises(ValueError):
            parse_suppression_file(bad)


def test_suffix_matching():
    r = make_report("core.X", "m", loc(4, file="/work/proj/src/a.mc"))
    assert Suppression("File", "core.X", "src/a.mc", 4).matches(r)
    assert Suppression("File", "*", "a.mc", None).matches(r)
    assert not Suppression("File", "core.X", "rc/a.mc", 4).matches(r)
    assert not Suppression("File", "core.Y", "a.mc", 4).matches(r)


def test_annotations():
    src = "int x;\nx = 1 / 0; // sa-suppress(core.DivideByZero, flow.DivideByZero)\n"
    rules = annotation_suppressions("a.mc", src)
    assert [(s.checker, s.line, s.source) for s in rules] == [
        ("core.DivideByZero", 2, "Annotation"),
        ("flow.DivideByZero", 2, "Annotation"),
    ]


rules = st.lists(
    st.builds(Suppression, st.just("File"), names | st.just("*"), st.sampled_from(["a.mc", "b.mc"]), st.none() | st.integers(1, 50)),
    max_size=4,
)


@given(runs, rules, st.randoms())
def test_suppression_idempotent_and_order_independent(run, rs, rnd):
    once, n = apply_suppressions(run, rs)
    twice, m = apply_suppressions(once, rs)
    assert twice.reports == once.reports and m == 0
    shuffled = list(rs)
    rnd.shuffle(shuffled)
    assert apply_suppressions(run, shuffled)[0].reports == once.reports
    assert once.stats["suppressed"] == n == len(run.reports) - len(once.reports)
