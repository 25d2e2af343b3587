"""Path-sensitive checkers and the registry of every check id.

Each checker reacts to engine callbacks. State changes go through
``ctx.state``; reports go through ``ctx.emit``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from pyrsistent import pmap

from minisa import constraints as C
from minisa.frontend import ast
from minisa.frontend.printer import expr_text
from minisa.symexec import (
    Checker,
    CheckerContext,
    ConcreteInt,
    Symbolic,
    UndefinedVal,
)


class DivideByZeroChecker(Checker):
    id = "core.DivideByZero"
    doc = "Division or remainder whose divisor is zero on some feasible path"

    def pre_stmt(self, ctx: CheckerContext, elem) -> None:
        if not (isinstance(elem, ast.BinaryOp) and elem.op in ("/", "%")):
            return
        divisor = ctx.value(elem.right)
        if isinstance(divisor, ConcreteInt):
            zeroness = C.query_zeroness(ctx.state.constraints, divisor.value)
        elif isinstance(divisor, Symbolic):
            zeroness = C.query_zeroness(ctx.state.constraints, divisor.expr)
        else:
            return
        if zeroness is C.Zeroness.ONLY_ZERO:
            interesting = [ctx.region_of(elem.right)] if isinstance(elem.right, ast.VarRef) else []
            ctx.emit(self.id, "Division by zero", elem.loc, interesting=interesting)
        elif zeroness is C.Zeroness.MAYBE_ZERO:
            ctx.assume_in(divisor, C.relation_set("!=", 0))


class UninitReadChecker(Checker):
    id = "core.UninitRead"
    doc = "Read of a variable or array element that was never written on this path"

    def post_stmt(self, ctx: CheckerContext, elem) -> None:
        if not isinstance(elem, (ast.VarRef, ast.ArrayIndex)):
            return
        if not isinstance(ctx.value(elem), UndefinedVal):
            return
        if isinstance(elem, ast.VarRef):
            msg = f"Variable '{elem.name}' is uninitialized when read"
            interesting = [ctx.region_of(elem)]
        else:
            msg = f"Array element '{expr_text(elem)}' is uninitialized when read"
            interesting = []
        ctx.emit(self.id, msg, elem.loc, interesting=interesting)


class ArrayBoundsChecker(Checker):
    id = "core.ArrayBounds"
    doc = "Array index outside the declared extent"

    def pre_stmt(self, ctx: CheckerContext, elem) -> None:
        if isinstance(elem, ast.ArrayIndex):
            self._check(ctx, elem)
        elif isinstance(elem, ast.AssignStmt) and isinstance(elem.target, ast.ArrayIndex):
            self._check(ctx, elem.target)

    def pre_call(self, ctx: CheckerContext, call: ast.Call) -> None:
        for arg in ctx.by_ref_args(call):
            if isinstance(arg, ast.ArrayIndex):
                self._check(ctx, arg)
                if ctx.sink:
                    return

    def _check(self, ctx: CheckerContext, access: ast.ArrayIndex) -> None:
        extent = ctx.decl(access.base.decl).array_len
        valid = C.RangeSet.of([(0, extent - 1)])
        idx = ctx.value(access.index)
        if isinstance(idx, ConcreteInt):
            if not valid.contains(idx.value):
                ctx.emit(self.id, self._message(access, str(idx.value), extent), access.loc)
        elif isinstance(idx, Symbolic):
            if C.range_of(ctx.state.constraints, idx.expr).intersect(valid).is_empty():
                ctx.emit(self.id, self._message(access, expr_text(access.index), extent), access.loc)
            else:
                ctx.assume_in(idx, valid)

    @staticmethod
    def _message(access: ast.ArrayIndex, index: str, extent: int) -> str:
        return f"Index {index} is out of bounds for '{access.base.name}' of size {extent}"


STREAM_KEY = "resource.Stream"


class StreamChecker(Checker):
    """Tracks handles from ``open()`` in the generic data map."""

    id = "resource.Stream"
    doc = "Handle from open() closed twice or never closed"

    def post_call(self, ctx: CheckerContext, call: ast.Call) -> None:
        handles = ctx.state.gdm.get(STREAM_KEY, pmap())
        if call.name == "open":
            v = ctx.value(call)
            if isinstance(v, Symbolic):
                ctx.state = ctx.state.set_gdm(STREAM_KEY, handles.set(v.expr.sym, ("Open", call.loc.line)))
        elif call.name == "close":
            v = ctx.value(call.args[0])
            if not isinstance(v, Symbolic) or not isinstance(v.expr, C.Atom) or v.expr.sym not in handles:
                return
            status, line = handles[v.expr.sym]
            if status == "Closed":
                ctx.emit(self.id, f"Resource opened at line {line} is closed twice", call.loc)
            else:
                ctx.state = ctx.state.set_gdm(STREAM_KEY, handles.set(v.expr.sym, ("Closed", line)))

    def end_of_path(self, ctx: CheckerContext) -> None:
        handles = ctx.state.gdm.get(STREAM_KEY, pmap())
        fn = ctx.engine.fn
        loc = fn.end_loc or fn.loc
        for sym in sorted(handles.keys(), key=lambda s: s.id):
            status, line = handles[sym]
            if status == "Open":
                ctx.emit(self.id, f"Resource opened at line {line} is never closed", loc, sink=False)


PATH_CHECKERS = (DivideByZeroChecker, UninitReadChecker, ArrayBoundsChecker, StreamChecker)


@dataclass(frozen=True)
class CheckerInfo:
    id: str
    tier: str  # "symexec" | "flow" | "style"
    doc: str


REGISTRY: tuple[CheckerInfo, ...] = (
    *(CheckerInfo(c.id, "symexec", c.doc) for c in PATH_CHECKERS),
    CheckerInfo("flow.DivideByZero", "flow", "Division by a variable the zero-tracking analysis marks as zero"),
    CheckerInfo("flow.UninitVar", "flow", "Read of a variable not definitely assigned on every path"),
    CheckerInfo("style.TokenDivLiteralZero", "style", "Token sequence '/ 0' or '% 0'"),
    CheckerInfo("style.SelfAssign", "style", "Assignment of a variable or element to itself"),
    CheckerInfo("style.ConstantCondition", "style", "if/while condition is an integer literal"),
)

ALL_IDS = tuple(c.id for c in REGISTRY)


def path_checkers(enabled: Iterable[str]) -> list[Checker]:
    """Instances of the enabled path-sensitive checkers, in registry order."""
    wanted = set(enabled)
    return [cls() for cls in PATH_CHECKERS if cls.id in wanted]


def list_checkers() -> str:
    width = max(len(c.id) for c in REGISTRY)
    return "\n".join(f"{c.id:<{width}}  [{c.tier}] {c.doc}" for c in REGISTRY) + "\n"
