"""Token-stream and AST pattern matching, plus the style checks built on them."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Union

from minisa.frontend import ast
from minisa.frontend.lexer import Token, TokenKind
from minisa.report import Report, make_report

# -- token patterns --------------------------------------------------------------


@dataclass(frozen=True)
class Exact:
    text: str

    def matches(self, tok: Token) -> bool:
        return tok.text == self.text and tok.kind is not TokenKind.EOF


@dataclass(frozen=True)
class Kind:
    kind: TokenKind

    def matches(self, tok: Token) -> bool:
        return tok.kind is self.kind


@dataclass(frozen=True)
class AnyOne:
    def matches(self, tok: Token) -> bool:
        return tok.kind is not TokenKind.EOF


TokenMatcher = Union[Exact, Kind, AnyOne]


@dataclass(frozen=True)
class TokenPattern:
    items: tuple[TokenMatcher, ...]

    def __post_init__(self):
        if not self.items:
            raise ValueError("token pattern must be nonempty")


@dataclass(frozen=True)
class Span:
    start: int  # index of the first matched token
    end: int  # one past the last


def match_tokens(pattern: TokenPattern, tokens: list[Token]) -> list[Span]:
    """Leftmost, non-overlapping contiguous matches in token order."""
    spans = []
    n = len(pattern.items)
    i = 0
    while i + n <= len(tokens):
        if all(m.matches(tokens[i + k]) for k, m in enumerate(pattern.items)):
            spans.append(Span(i, i + n))
            i += n
        else:
            i += 1
    return spans


# -- AST matchers -------------------------------------------------------------------

Bindings = dict[str, ast.Node]


class AstMatcher:
    """A predicate over nodes that may record labelled sub-nodes."""

    def match(self, node: ast.Node, bindings: Bindings) -> bool:
        raise NotImplementedError

    def labels(self) -> list[str]:
        return []


@dataclass
class _Pred(AstMatcher):
    test: Callable[[ast.Node], bool]
    name: str = ""

    def match(self, node: ast.Node, bindings: Bindings) -> bool:
        return self.test(node)


def kind_is(kind: str) -> AstMatcher:
    return _Pred(lambda n: n.kind == kind, f"kindIs({kind})")


def binary_op(op: str) -> AstMatcher:
    return _Pred(lambda n: isinstance(n, ast.BinaryOp) and n.op == op, f"binaryOp({op})")


def int_lit(value: Optional[int] = None) -> AstMatcher:
    return _Pred(lambda n: isinstance(n, ast.IntLit) and (value is None or n.value == value), "intLit")


def var_ref_named(name: Optional[str] = None) -> AstMatcher:
    return _Pred(lambda n: isinstance(n, ast.VarRef) and (name is None or n.name == name), "varRefNamed")


@dataclass
class HasChild(AstMatcher):
    index: int
    inner: AstMatcher

    def match(self, node: ast.Node, bindings: Bindings) -> bool:
        kids = node.children()
        return 0 <= self.index < len(kids) and self.inner.match(kids[self.index], bindings)

    def labels(self) -> list[str]:
        return self.inner.labels()


@dataclass
class AnyDescendant(AstMatcher):
    """Some strict descendant matches ``inner``; the first in pre-order supplies bindings."""

    inner: AstMatcher

    def match(self, node: ast.Node, bindings: Bindings) -> bool:
        for d in ast.walk(node):
            if d is node:
                continue
            trial: Bindings = {}
            if self.inner.match(d, trial):
                bindings.update(trial)
                return True
        return False

    def labels(self) -> list[str]:
        return self.inner.labels()


@dataclass
class AllOf(AstMatcher):
    parts: list[AstMatcher] = field(default_factory=list)

    def match(self, node: ast.Node, bindings: Bindings) -> bool:
        trial: Bindings = {}
        for m in self.parts:
            if not m.match(node, trial):
                return False
        bindings.update(trial)
        return True

    def labels(self) -> list[str]:
        return [lab for m in self.parts for lab in m.labels()]


@dataclass
class Bind(AstMatcher):
    label: str
    inner: AstMatcher

    def match(self, node: ast.Node, bindings: Bindings) -> bool:
        if self.inner.match(node, bindings):
            bindings[self.label] = node
            return True
        return False

    def labels(self) -> list[str]:
        return [self.label, *self.inner.labels()]


def has_child(index: int, m: AstMatcher) -> AstMatcher:
    return HasChild(index, m)


def any_descendant(m: AstMatcher) -> AstMatcher:
    return AnyDescendant(m)


def all_of(*ms: AstMatcher) -> AstMatcher:
    return AllOf(list(ms))


def bind(label: str, m: AstMatcher) -> AstMatcher:
    return Bind(label, m)


@dataclass
class AstMatch:
    node: ast.Node
    bindings: Bindings


def match_ast(matcher: AstMatcher, root: ast.Node) -> list[AstMatch]:
    """One match per node (pre-order) that satisfies ``matcher``."""
    labels = matcher.labels()
    if len(labels) != len(set(labels)):
        raise ValueError("bind labels must be unique within a matcher")
    out = []
    for node in ast.walk(root):
        b: Bindings = {}
        if matcher.match(node, b):
            out.append(AstMatch(node, b))
    return out


# -- style checks -----------------------------------------------------------------------

DIV_ZERO_PATTERNS = (
    TokenPattern((Exact("/"), Exact("0"))),
    TokenPattern((Exact("%"), Exact("0"))),
)

SELF_ASSIGN = all_of(
    kind_is("AssignStmt"),
    has_child(0, bind("lhs", kind_is("VarRef"))),
    has_child(1, bind("rhs", kind_is("VarRef"))),
)

SELF_ASSIGN_ELEMENT = all_of(
    kind_is("AssignStmt"),
    has_child(0, bind("lhs", kind_is("ArrayIndex"))),
    has_child(1, bind("rhs", kind_is("ArrayIndex"))),
)

CONSTANT_CONDITION = all_of(
    _Pred(lambda n: isinstance(n, (ast.IfStmt, ast.WhileStmt)), "ifOrWhile"),
    has_child(0, bind("cond", int_lit())),
)


def token_div_literal_zero(tokens: list[Token]) -> list[Report]:
    spans = sorted(
        (s for p in DIV_ZERO_PATTERNS for s in match_tokens(p, tokens)),
        key=lambda s: s.start,
    )
    return [
        make_report("style.TokenDivLiteralZero", f"Token '{tokens[s.start].text}' followed by literal 0", tokens[s.start].loc)
        for s in spans
    ]


def self_assign(program: ast.Program) -> list[Report]:
    """Compares resolved declarations, so equal names in different scopes never match."""
    reports = []
    for m in match_ast(SELF_ASSIGN, program):
        if m.node.op == "=" and m.bindings["lhs"].decl == m.bindings["rhs"].decl:
            reports.append(_self_assign_report(m.node))
    for m in match_ast(SELF_ASSIGN_ELEMENT, program):
        lhs, rhs = m.bindings["lhs"], m.bindings["rhs"]
        if m.node.op == "=" and lhs.base.decl == rhs.base.decl and _same_index(lhs.index, rhs.index):
            reports.append(_self_assign_report(m.node))
    return reports


def _same_index(a: ast.Node, b: ast.Node) -> bool:
    # Calls may return different values each time.
    if any(isinstance(n, ast.Call) for n in ast.walk(a)):
        return False
    return _resolved_shape(a) == _resolved_shape(b)


def _resolved_shape(node: ast.Node) -> tuple:
    tag = node.decl if isinstance(node, ast.VarRef) else node.attrs()
    return (node.kind, tag, tuple(_resolved_shape(c) for c in node.children()))


def _self_assign_report(node: ast.AssignStmt) -> Report:
    return make_report("style.SelfAssign", "Value is assigned to itself", node.loc)


def constant_condition(program: ast.Program) -> list[Report]:
    return [
        make_report(
            "style.ConstantCondition",
            f"Condition is the constant {m.bindings['cond'].value}",
            m.bindings["cond"].loc,
        )
        for m in match_ast(CONSTANT_CONDITION, program)
    ]


STYLE_CHECKS = {
    "style.TokenDivLiteralZero": lambda tu: token_div_literal_zero(tu.tokens),
    "style.SelfAssign": lambda tu: self_assign(tu.surface),
    "style.ConstantCondition": lambda tu: constant_condition(tu.surface),
}


def style_checks(tu, enabled=None) -> list[Report]:
    """Run the enabled style checks on a translation unit's tokens and surface tree."""
    out = []
    for cid, check in STYLE_CHECKS.items():
        if enabled is None or cid in enabled:
            out.extend(check(tu))
    return out
