"""Control flow graphs of basic blocks.

Block elements are linearized in evaluation order: every sub-expression
appears before the expression that consumes it, and statements appear after
their operands. Branch conditions live in the terminator. Short-circuit
operators never appear as elements: in a condition they become branching
structure, and in value position the two outcomes bind the operator's
value through a :class:`SetValue` pseudo-element.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

from minisa.frontend import ast
from minisa.frontend.lexer import SourceLocation
from minisa.frontend.printer import expr_text
from minisa.frontend.sema import INTRINSICS, SemaInfo


@dataclass(eq=False)
class SetValue:
    """Binds a lowered ``&&``/``||`` expression to 0 or 1 on one outcome."""

    id: int
    target: ast.BinaryOp
    value: int

    kind = "SetValue"

    @property
    def loc(self) -> SourceLocation:
        return self.target.loc


Element = Union[ast.Node, SetValue]


@dataclass(frozen=True)
class Jump:
    target: int
    kind = "Jump"


@dataclass(frozen=True)
class CondBranch:
    cond: ast.Node
    true_target: int
    false_target: int
    stmt: Optional[ast.Node] = None  # owning if/while; None for value-position lowering
    whole: bool = True  # cond is the complete source condition (modulo '!')
    negated: bool = False  # an odd number of '!' was stripped from the source condition
    kind = "CondBranch"


@dataclass(frozen=True)
class Return:
    value: Optional[ast.Node] = None
    kind = "Return"


@dataclass(frozen=True)
class Exit:
    kind = "Exit"


Terminator = Union[Jump, CondBranch, Return, Exit]


@dataclass
class BasicBlock:
    id: int
    elements: list[Element] = field(default_factory=list)
    terminator: Optional[Terminator] = None
    preds: list[int] = field(default_factory=list)
    succs: list[int] = field(default_factory=list)
    reachable: bool = False


@dataclass
class Cfg:
    function: ast.FunctionDecl
    blocks: list[BasicBlock]
    entry: int
    exit: int
    rpo: list[int]
    variables: list[int]  # decl ids of parameters and locals
    decls: dict[int, ast.Node] = field(default_factory=dict)
    ref_params: dict[str, tuple[bool, ...]] = field(default_factory=dict)

    def by_ref_args(self, call: ast.Call) -> list[ast.Node]:
        flags = self.ref_params.get(call.name, ())
        return [a for by_ref, a in zip(flags, call.args) if by_ref]

    def is_scalar(self, decl_id: Optional[int]) -> bool:
        node = self.decls.get(decl_id)
        return node is not None and not (isinstance(node, ast.VarDecl) and node.array_len is not None)

    def block(self, bid: int) -> BasicBlock:
        return self.blocks[bid]

    def __len__(self) -> int:
        return len(self.blocks)

    def to_json(self) -> dict:
        return {
            "function": self.function.name,
            "entry": self.entry,
            "exit": self.exit,
            "rpo": self.rpo,
            "blocks": [
                {
                    "id": b.id,
                    "elements": [e.id for e in b.elements],
                    "term": {"kind": b.terminator.kind, "targets": list(b.succs)},
                    "reachable": b.reachable,
                }
                for b in self.blocks
            ],
        }


def successors(term: Terminator, exit_id: int) -> list[int]:
    match term:
        case Jump():
            return [term.target]
        case CondBranch():
            return [term.true_target, term.false_target]
        case Return():
            return [exit_id]
    return []


def is_full_statement(elem: Element) -> bool:
    """True for elements whose evaluation is a full statement."""
    return isinstance(elem, (ast.VarDecl, ast.AssignStmt, ast.ExprStmt))


class _Builder:
    def __init__(self, fn: ast.FunctionDecl, info: SemaInfo):
        self.fn = fn
        self.info = info
        self.blocks: list[BasicBlock] = []
        self.cur: Optional[int] = None

    def new_block(self) -> int:
        b = BasicBlock(len(self.blocks))
        self.blocks.append(b)
        return b.id

    def current(self) -> BasicBlock:
        # Code after a return lands in a fresh block with no predecessors.
        if self.cur is None:
            self.cur = self.new_block()
        return self.blocks[self.cur]

    def terminate(self, term: Terminator) -> None:
        self.current().terminator = term
        self.cur = None

    def jump_to(self, target: int) -> None:
        if self.cur is not None:
            self.terminate(Jump(target))

    # -- statements ------------------------------------------------------

    def stmt(self, node: ast.Node) -> None:
        match node:
            case ast.Block():
                for s in node.stmts:
                    self.stmt(s)
            case ast.VarDecl():
                if node.init is not None:
                    self.expr(node.init)
                self.current().elements.append(node)
            case ast.AssignStmt():
                self.lvalue(node.target)
                self.expr(node.value)
                self.current().elements.append(node)
            case ast.ExprStmt():
                self.expr(node.expr)
                self.current().elements.append(node)
            case ast.IfStmt():
                then_b, join = self.new_block(), None
                else_b = self.new_block() if node.else_ is not None else None
                join = self.new_block()
                self.cond(node.cond, then_b, else_b if else_b is not None else join, node)
                self.cur = then_b
                self.stmt(node.then)
                self.jump_to(join)
                if else_b is not None:
                    self.cur = else_b
                    self.stmt(node.else_)
                    self.jump_to(join)
                self.cur = join
            case ast.WhileStmt():
                header = self.new_block()
                self.jump_to(header)
                body, after = self.new_block(), self.new_block()
                self.cur = header
                self.cond(node.cond, body, after, node)
                self.cur = body
                self.stmt(node.body)
                self.jump_to(header)
                self.cur = after
            case ast.ReturnStmt():
                if node.value is not None:
                    self.expr(node.value)
                self.terminate(Return(node.value))
            case _:
                raise TypeError(f"{node.kind} must be desugared before CFG construction")

    def lvalue(self, node: ast.Node) -> None:
        # Only the index of an array lvalue is evaluated; the location itself is not read.
        if isinstance(node, ast.ArrayIndex):
            self.expr(node.index)

    # -- expressions -----------------------------------------------------

    def expr(self, node: ast.Node) -> None:
        match node:
            case ast.IntLit() | ast.VarRef():
                self.current().elements.append(node)
            case ast.ArrayIndex():
                self.expr(node.index)
                self.current().elements.append(node)
            case ast.UnaryOp():
                self.expr(node.operand)
                self.current().elements.append(node)
            case ast.BinaryOp() if node.op in ast.LOGICAL_OPS:
                t, f, join = self.new_block(), self.new_block(), self.new_block()
                self.cond(node, t, f, None)
                for blk, value in ((t, 1), (f, 0)):
                    self.cur = blk
                    self.current().elements.append(SetValue(self.info.program.fresh_id(), node, value))
                    self.jump_to(join)
                self.cur = join
            case ast.BinaryOp():
                self.expr(node.left)
                self.expr(node.right)
                self.current().elements.append(node)
            case ast.Call():
                sig = self.info.signature(node.name)
                for by_ref, arg in zip(sig.params, node.args):
                    if by_ref:
                        self.lvalue(arg)
                    else:
                        self.expr(arg)
                self.current().elements.append(node)
            case _:
                raise TypeError(f"unexpected expression {node.kind}")

    def cond(
        self,
        node: ast.Node,
        t: int,
        f: int,
        stmt: Optional[ast.Node],
        whole: bool = True,
        negated: bool = False,
    ) -> None:
        if isinstance(node, ast.UnaryOp) and node.op == "!":
            self.cond(node.operand, f, t, stmt, whole, not negated)
            return
        if isinstance(node, ast.BinaryOp) and node.op in ast.LOGICAL_OPS:
            mid = self.new_block()
            if node.op == "&&":
                self.cond(node.left, mid, f, stmt, False, negated)
            else:
                self.cond(node.left, t, mid, stmt, False, negated)
            self.cur = mid
            self.cond(node.right, t, f, stmt, False, negated)
            return
        self.expr(node)
        self.terminate(CondBranch(node, t, f, stmt, whole, negated))


def build_cfg(fn: ast.FunctionDecl, info: SemaInfo) -> Cfg:
    """Build the CFG of a desugared, typed function definition."""
    if fn.body is None:
        raise ValueError(f"function '{fn.name}' has no body")
    b = _Builder(fn, info)
    entry = b.new_block()
    b.cur = entry
    b.stmt(fn.body)
    if b.cur is not None:
        b.terminate(Return(None))
    exit_id = b.new_block()
    b.blocks[exit_id].terminator = Exit()
    # Blocks opened but never terminated (e.g. a join nobody reaches) fall through to exit.
    for blk in b.blocks:
        if blk.terminator is None:
            blk.terminator = Return(None)

    for blk in b.blocks:
        blk.succs = successors(blk.terminator, exit_id)
        for s in blk.succs:
            b.blocks[s].preds.append(blk.id)

    post: list[int] = []
    seen = {entry}
    stack = [(entry, iter(b.blocks[entry].succs))]
    while stack:
        bid, it = stack[-1]
        nxt = next(it, None)
        if nxt is None:
            stack.pop()
            post.append(bid)
        elif nxt not in seen:
            seen.add(nxt)
            stack.append((nxt, iter(b.blocks[nxt].succs)))
    rpo = post[::-1]
    for bid in rpo:
        b.blocks[bid].reachable = True

    decls: dict[int, ast.Node] = {p.id: p for p in fn.params}
    decls.update((n.id, n) for n in ast.walk(fn.body) if isinstance(n, ast.VarDecl))
    ref_params = {name: sig.params for name, sig in INTRINSICS.items()}
    ref_params.update((name, tuple(p.by_ref for p in f.params)) for name, f in info.functions.items())
    return Cfg(fn, b.blocks, entry, exit_id, rpo, list(decls), decls, ref_params)


def build_all(info: SemaInfo) -> dict[str, Cfg]:
    return {fn.name: build_cfg(fn, info) for fn in info.program.functions if fn.body is not None}


def describe_cond(term: CondBranch) -> str:
    return expr_text(term.cond)
