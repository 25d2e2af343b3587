from __future__ import annotations

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from minisa import errors
from minisa.frontend import analyze, ast, compile_source, desugar, parse, tokenize
from minisa.frontend.lexer import TokenKind
from minisa.frontend.printer import expr_text, print_program

from conftest import corpus_files
from strategies import programs

PROPS = settings(max_examples=150, deadline=None, suppress_health_check=[HealthCheck.too_slow])


def kinds_texts(src):
    return [(t.kind, t.text) for t in tokenize(src)]


def body_of(src, header="void f(int b, int x)"):
    prog = parse(tokenize(f"{header} {{ {src} }}"))
    return prog.functions[0].body.stmts


# -- tokenize ---------------------------------------------------------------


def test_tokenize_simple_assignment():
    assert kinds_texts("x = 5;") == [
        (TokenKind.IDENTIFIER, "x"),
        (TokenKind.PUNCTUATOR, "="),
        (TokenKind.INT_LITERAL, "5"),
        (TokenKind.PUNCTUATOR, ";"),
        (TokenKind.EOF, ""),
    ]


def test_comments_produce_no_tokens():
    toks = tokenize("int i;\n// c\ni = 0;")
    assert len(toks) == 8
    assert all("c" != t.text for t in toks)


def test_block_comment_skipped_and_locations_advance():
    toks = tokenize("a /* x\ny */ b")
    assert [t.text for t in toks[:2]] == ["a", "b"]
    assert (toks[1].loc.line, toks[1].loc.column) == (2, 6)


def test_bad_character_is_lexical_error_at_column_3():
    with pytest.raises(errors.LexicalError) as exc:
        tokenize("x @ y")
    assert exc.value.loc.column == 3
    assert exc.value.char == "@"


def test_unterminated_block_comment():
    with pytest.raises(errors.LexicalError):
        tokenize("int x; /* never closed")


def test_literal_out_of_range():
    tokenize("9223372036854775807")
    with pytest.raises(errors.LexicalError):
        tokenize("9223372036854775808")


def test_keywords_and_longest_punctuators():
    toks = kinds_texts("while (a <= b && c != 0) x += 1;")
    assert (TokenKind.KEYWORD, "while") in toks
    for p in ("<=", "&&", "!=", "+="):
        assert (TokenKind.PUNCTUATOR, p) in toks


@PROPS
@given(programs(), st.lists(st.sampled_from([" ", "\n", "\t", "// note\n", "/* c */"]), min_size=1, max_size=5))
def test_lexer_round_trip(src, noise):
    # Sprinkle whitespace/comments between lines; offsets must still index the token text.
    lines = src.split("\n")
    text = "\n".join(line + noise[i % len(noise)] if not noise[i % len(noise)].startswith("//") else line + " " + noise[i % len(noise)].rstrip("\n") for i, line in enumerate(lines))
    toks = tokenize(text)
    assert toks[-1].kind is TokenKind.EOF
    assert sum(t.kind is TokenKind.EOF for t in toks) == 1
    for t in toks[:-1]:
        assert text[t.loc.offset : t.loc.offset + len(t.text)] == t.text
        assert t.loc.line >= 1 and t.loc.column >= 1
    assert "".join(t.text for t in toks) == "".join(t.text for t in tokenize(src))


# -- parse ------------------------------------------------------------------


def test_empty_function():
    prog = parse(tokenize("void f() { }"))
    assert [fn.name for fn in prog.functions] == ["f"]
    assert prog.functions[0].body.stmts == []


def test_precedence():
    (stmt,) = body_of("int a; a = 1 + 2 * 3;")[1:]
    assert isinstance(stmt, ast.AssignStmt) and stmt.op == "="
    assert expr_text(stmt.value) == "(1 + (2 * 3))"


def test_left_associativity_and_unary():
    (stmt,) = body_of("int a; a = 1 - 2 - -3;")[1:]
    assert expr_text(stmt.value) == "((1 - 2) - (-3))"


def test_logical_precedence():
    (stmt,) = body_of("int a; a = 1 || 2 && 3 == 4 < 5;")[1:]
    assert expr_text(stmt.value) == "(1 || (2 && (3 == (4 < 5))))"


def test_if_else_of_exploded_figure():
    (stmt,) = body_of("if (b) x = b+1; else x = 42;")
    assert isinstance(stmt, ast.IfStmt)
    assert isinstance(stmt.cond, ast.VarRef) and stmt.cond.name == "b"
    assert expr_text(stmt.then.value) == "(b + 1)"
    assert isinstance(stmt.else_.value, ast.IntLit) and stmt.else_.value.value == 42


def test_syntax_error_single_report():
    with pytest.raises(errors.SyntaxError_) as exc:
        parse(tokenize("void f() { x = ; y = ; }"))
    assert exc.value.loc.column == 16


def test_prototype_parses():
    prog = parse(tokenize("void f(int &x);"))
    assert prog.functions[0].body is None
    assert prog.functions[0].params[0].by_ref


def test_node_ids_unique():
    tu = load_all_units()
    for unit in tu:
        ids = [n.id for n in ast.walk(unit.surface)]
        assert len(ids) == len(set(ids))


def load_all_units():
    return [compile_source(p.read_text(), str(p)) for p in corpus_files()]


# -- semantic analysis ----------------------------------------------------------


def test_var_bound_and_typed():
    prog = parse(tokenize("void f() { int x; x = 1; }"))
    analyze(prog)
    decl, assign = prog.functions[0].body.stmts
    assert assign.target.decl == decl.id
    assert assign.target.type == ast.INT


@pytest.mark.parametrize(
    "src, error",
    [
        ("void f() { x = 1; }", errors.UndeclaredIdentifier),
        ("void f() { int x; int x; }", errors.Redefinition),
        ("void g(int &x) { } void f() { g(3); }", errors.NonLvalueRefArgument),
        ("void g(int x) { } void f() { g(1, 2); }", errors.ArityMismatch),
        ("void f() { int x; x[0] = 1; }", errors.IndexOfNonArray),
        ("void g() { } void f() { int y; y = g(); }", errors.TypeMismatch),
        ("void f() { int a[2]; int y; y = a; }", errors.TypeMismatch),
        ("int f() { return; }", errors.TypeMismatch),
        ("void f() { return 1; }", errors.TypeMismatch),
        ("void input() { }", errors.Redefinition),
    ],
)
def test_semantic_errors(src, error):
    with pytest.raises(error):
        analyze(parse(tokenize(src)))


def test_shadowing_resolves_innermost():
    prog = parse(tokenize("void f() { int x; x = 1; { int x; x = 2; } }"))
    analyze(prog)
    outer, a1, blk = prog.functions[0].body.stmts
    inner, a2 = blk.stmts
    assert a1.target.decl == outer.id
    assert a2.target.decl == inner.id


def test_call_before_definition():
    analyze(parse(tokenize("int f() { return g(); } int g() { return 1; }")))


def test_ref_param_type():
    prog = parse(tokenize("void f(int &x) { x = x + 1; }"))
    info = analyze(prog)
    p = prog.functions[0].params[0]
    assert info.decl_types[p.id] == ast.REF_INT


# -- desugar ----------------------------------------------------------------------


def _core_text(src):
    tu = compile_source(src)
    return print_program(tu.core)


def test_for_loop_rewrite():
    text = _core_text("void f() { int i; int s = 0; for(i=0;i<3;i+=1) s+=i; }")
    assert "for" not in text
    assert "+=" not in text
    expected = _core_text("void f() { int i; int s = 0; i=0; while(i<3){ s = s + i; i = i + 1; } }")
    assert text == expected


def test_desugar_identity_without_sugar():
    tu = compile_source("int f(int a) { int x = a; if (x) x = 1; while (x < 3) x = x + 1; return x; }")
    assert ast.shape(tu.core) == ast.shape(tu.surface)


def test_array_compound_assignment_hoists_index():
    tu = compile_source("void f() { int a[4]; a[input()] += 1; }")
    text = print_program(tu.core)
    assert text.count("input()") == 1
    assert "__t" in text


def test_desugar_leaves_input_untouched():
    tu = compile_source("void f() { int s = 0; s += 1; }")
    assert "+=" in print_program(tu.surface)
    assert tu.surface.next_id <= tu.core.next_id


@PROPS
@given(programs())
def test_parse_print_idempotence(src):
    prog = parse(tokenize(src))
    printed = print_program(prog)
    again = parse(tokenize(printed))
    assert ast.shape(again) == ast.shape(prog)
    assert print_program(again) == printed


@PROPS
@given(programs())
def test_desugar_idempotent_and_retypes(src):
    tu = compile_source(src)
    twice = desugar(tu.core)
    assert ast.shape(twice) == ast.shape(tu.core)
    analyze(twice)
    for n in ast.walk(tu.core):
        assert not isinstance(n, ast.ForStmt)
        if isinstance(n, ast.AssignStmt):
            assert n.op == "="


@PROPS
@given(programs())
def test_every_expression_typed(src):
    tu = compile_source(src)
    for prog in (tu.surface, tu.core):
        for n in ast.walk(prog):
            if ast.is_expr(n):
                assert n.type is not None, n.kind


def test_corpus_compiles():
    for unit in load_all_units():
        assert unit.core.functions
