from __future__ import annotations

import pytest

from minisa import constraints as C
from minisa.checkers import (
    ALL_IDS,
    REGISTRY,
    DivideByZeroChecker,
    StreamChecker,
    list_checkers,
    path_checkers,
)
from minisa.frontend import ast, compile_source
from minisa.report import Severity
from minisa.symexec import Checker, ConcreteInt, Symbolic, analyze_program

from conftest import corpus_files, load


def reports_for(src_or_name, checkers=None, **kw):
    tu = load(src_or_name) if src_or_name.endswith(".mc") else compile_source(src_or_name, "t.mc")
    checkers = checkers if checkers is not None else path_checkers(ALL_IDS)
    return analyze_program(tu.info, checkers=checkers, **kw)


def summary(result):
    return [(r.checker, r.line, r.message) for r in result.reports]


def test_registry():
    assert len(ALL_IDS) == len(set(ALL_IDS)) == 9
    assert {c.tier for c in REGISTRY} == {"symexec", "flow", "style"}
    text = list_checkers()
    assert all(cid in text for cid in ALL_IDS)
    assert [type(c) for c in path_checkers(["resource.Stream", "core.DivideByZero"])] == [
        DivideByZeroChecker,
        StreamChecker,
    ]


@pytest.mark.parametrize(
    "cid, severity",
    [("core.DivideByZero", Severity.HIGH), ("flow.UninitVar", Severity.MEDIUM), ("resource.Stream", Severity.MEDIUM), ("style.SelfAssign", Severity.STYLE)],
)
def test_severity_mapping(cid, severity):
    from minisa.report import severity_for

    assert severity_for(cid) is severity


# -- division by zero ---------------------------------------------------------------------


def test_div_zero_only_zero_reported_with_interesting_write():
    result = reports_for("int f() { int i = 0; return 1 / i; }")
    (r,) = result.reports
    assert (r.checker, r.message) == ("core.DivideByZero", "Division by zero")
    assert [e.note for e in r.path] == ["'i' initialized to 0", "Division by zero"]


def test_div_zero_maybe_zero_is_silent():
    assert reports_for("int f(int a) { return 10 / a; }").reports == []


def test_remainder_by_zero():
    result = reports_for("int f(int a) { if (a == 0) return 7 % a; return 1; }")
    assert summary(result) == [("core.DivideByZero", 1, "Division by zero")]


class _ZeronessProbe(Checker):
    id = "test.Probe"

    def __init__(self):
        self.seen = []

    def post_stmt(self, ctx, elem):
        if isinstance(elem, ast.BinaryOp) and elem.op == "/":
            v = ctx.value(elem.right)
            if isinstance(v, Symbolic):
                self.seen.append(C.query_zeroness(ctx.state.constraints, v.expr))


def test_maybe_zero_refined_after_division():
    probe = _ZeronessProbe()
    reports_for("int f(int a, int b) { int x = b / a; int y = 3 / (a + 1); return x + y; }", [DivideByZeroChecker(), probe])
    assert probe.seen == [C.Zeroness.NEVER_ZERO, C.Zeroness.NEVER_ZERO]


def test_offset_symbol_division():
    result = reports_for("int f(int a) { if (a == -1) return 5 / (a + 1); return 0; }")
    assert len(result.reports) == 1


# -- uninitialized reads ----------------------------------------------------------------


def test_uninit_corpus():
    result = reports_for("uninit.mc")
    assert [(r.line, r.col) for r in result.reports] == [(5, 10), (10, 11)]
    assert result.reports[0].path[0].note == "'x' declared without an initial value"


def test_uninit_array_element():
    result = reports_for("int f() { int a[2]; a[0] = 1; return a[1]; }")
    assert summary(result) == [("core.UninitRead", 1, "Array element 'a[1]' is uninitialized when read")]


def test_by_ref_write_initializes():
    src = "void init(int &r) { r = 3; } int main() { int v; init(v); return v; }"
    assert reports_for(src).reports == []


# -- array bounds ------------------------------------------------------------------------


def test_array_bounds_corpus():
    result = reports_for("arrays.mc")
    assert summary(result) == [
        ("core.ArrayBounds", 3, "Index 3 is out of bounds for 'a' of size 3"),
        ("core.ArrayBounds", 10, "Index i is out of bounds for 'a' of size 3"),
    ]
    assert result.dumps[-1].endswith("$input#0 ; constraints: [0, 2]")


def test_negative_index_and_by_ref_element():
    src = "void w(int &r) { r = 1; } int main() { int a[2]; w(a[2]); return 0; }"
    result = reports_for(src)
    assert summary(result) == [("core.ArrayBounds", 1, "Index 2 is out of bounds for 'a' of size 2")]
    assert len(reports_for("int f() { int a[2]; a[-1] = 0; return 0; }").reports) == 1


# -- stream ------------------------------------------------------------------------------------


def test_stream_corpus():
    result = reports_for("stream.mc")
    assert summary(result) == [
        ("resource.Stream", 6, "Resource opened at line 2 is never closed"),
        ("resource.Stream", 11, "Resource opened at line 9 is closed twice"),
    ]


def test_stream_handle_escapes_through_inlined_call():
    src = """
    void shut(int h) { close(h); }
    int main() { int h = open(); shut(h); return 0; }
    """
    assert reports_for(src).reports == []


def test_close_of_untracked_value_is_ignored():
    assert reports_for("int f(int h) { close(h); return 0; }").reports == []


# -- callback discipline ------------------------------------------------------------------------


class _Snapshot(Checker):
    """Records every state handed to a callback so later mutation would be visible."""

    id = "test.Snapshot"

    def __init__(self):
        self.states = []

    def _keep(self, ctx, *_):
        self.states.append((ctx.state, repr(ctx.state.to_json())))

    pre_stmt = post_stmt = pre_call = post_call = _keep

    def end_of_path(self, ctx):
        self._keep(ctx)


def test_checkers_do_not_mutate_states():
    for path in corpus_files():
        snap = _Snapshot()
        analyze_program(load(path.name).info, checkers=[*path_checkers(ALL_IDS), snap])
        assert snap.states
        for state, text in snap.states:
            assert repr(state.to_json()) == text


def test_concrete_values_in_checker_context():
    seen = []

    class Probe(Checker):
        id = "test.Values"

        def post_stmt(self, ctx, elem):
            if isinstance(elem, ast.BinaryOp):
                seen.append(ctx.value(elem))

    analyze_program(compile_source("int f() { return 2 * 3; }").info, checkers=[Probe()])
    assert seen == [ConcreteInt(6)]
