"""MiniC abstract syntax tree.

Nodes compare by identity; use :func:`shape` for structural comparison.
Semantic analysis fills ``type`` on expressions and ``decl`` on references.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Optional

from minisa.frontend.lexer import SourceLocation


@dataclass(frozen=True)
class SemaType:
    kind: str  # "int" | "int[]" | "int&" | "void"
    length: Optional[int] = None

    def __str__(self) -> str:
        if self.kind == "int[]":
            return f"int[{self.length}]"
        return self.kind


INT = SemaType("int")
VOID = SemaType("void")
REF_INT = SemaType("int&")


def array_of(length: int) -> SemaType:
    return SemaType("int[]", length)


@dataclass(eq=False)
class Node:
    id: int
    loc: SourceLocation
    type: Optional[SemaType] = field(default=None, kw_only=True)

    @property
    def kind(self) -> str:
        return type(self).__name__

    def children(self) -> list[Node]:
        return []

    def attrs(self) -> tuple:
        """Non-child attributes that take part in structural comparison."""
        return ()


@dataclass(eq=False)
class Program(Node):
    functions: list[FunctionDecl]
    next_id: int = field(default=0, kw_only=True)

    def children(self) -> list[Node]:
        return list(self.functions)

    def fresh_id(self) -> int:
        nid = self.next_id
        self.next_id += 1
        return nid

    def function(self, name: str) -> Optional[FunctionDecl]:
        """The definition of ``name`` if one exists, else its prototype."""
        found = None
        for fn in self.functions:
            if fn.name == name:
                if fn.body is not None:
                    return fn
                found = found or fn
        return found


@dataclass(eq=False)
class ParamDecl(Node):
    name: str
    by_ref: bool = False

    def attrs(self) -> tuple:
        return (self.name, self.by_ref)


@dataclass(eq=False)
class Block(Node):
    stmts: list[Node]

    def children(self) -> list[Node]:
        return list(self.stmts)


@dataclass(eq=False)
class FunctionDecl(Node):
    name: str
    return_type: str  # "int" | "void"
    params: list[ParamDecl]
    body: Optional[Block]
    end_loc: Optional[SourceLocation] = None

    def children(self) -> list[Node]:
        return [*self.params, *([self.body] if self.body is not None else [])]

    def attrs(self) -> tuple:
        return (self.name, self.return_type, self.body is None)


@dataclass(eq=False)
class VarDecl(Node):
    name: str
    array_len: Optional[int] = None
    init: Optional[Node] = None

    def children(self) -> list[Node]:
        return [self.init] if self.init is not None else []

    def attrs(self) -> tuple:
        return (self.name, self.array_len)


@dataclass(eq=False)
class IfStmt(Node):
    cond: Node
    then: Node
    else_: Optional[Node] = None

    def children(self) -> list[Node]:
        return [self.cond, self.then] + ([self.else_] if self.else_ is not None else [])


@dataclass(eq=False)
class WhileStmt(Node):
    cond: Node
    body: Node

    def children(self) -> list[Node]:
        return [self.cond, self.body]


@dataclass(eq=False)
class ForStmt(Node):
    init: Optional[Node]
    cond: Optional[Node]
    step: Optional[Node]
    body: Node

    def children(self) -> list[Node]:
        return [n for n in (self.init, self.cond, self.step, self.body) if n is not None]

    def attrs(self) -> tuple:
        return (self.init is not None, self.cond is not None, self.step is not None)


@dataclass(eq=False)
class ReturnStmt(Node):
    value: Optional[Node] = None

    def children(self) -> list[Node]:
        return [self.value] if self.value is not None else []


@dataclass(eq=False)
class ExprStmt(Node):
    expr: Node

    def children(self) -> list[Node]:
        return [self.expr]


@dataclass(eq=False)
class AssignStmt(Node):
    op: str
    target: Node  # VarRef | ArrayIndex
    value: Node

    def children(self) -> list[Node]:
        return [self.target, self.value]

    def attrs(self) -> tuple:
        return (self.op,)


@dataclass(eq=False)
class IntLit(Node):
    value: int

    def attrs(self) -> tuple:
        return (self.value,)


@dataclass(eq=False)
class VarRef(Node):
    name: str
    decl: Optional[int] = field(default=None, kw_only=True)

    def attrs(self) -> tuple:
        return (self.name,)


@dataclass(eq=False)
class ArrayIndex(Node):
    base: VarRef
    index: Node

    def children(self) -> list[Node]:
        return [self.base, self.index]


@dataclass(eq=False)
class UnaryOp(Node):
    op: str
    operand: Node

    def children(self) -> list[Node]:
        return [self.operand]

    def attrs(self) -> tuple:
        return (self.op,)


@dataclass(eq=False)
class BinaryOp(Node):
    op: str
    left: Node
    right: Node

    def children(self) -> list[Node]:
        return [self.left, self.right]

    def attrs(self) -> tuple:
        return (self.op,)


@dataclass(eq=False)
class Call(Node):
    name: str
    args: list[Node]

    def children(self) -> list[Node]:
        return list(self.args)

    def attrs(self) -> tuple:
        return (self.name,)


EXPRESSION_KINDS = frozenset({"IntLit", "VarRef", "ArrayIndex", "UnaryOp", "BinaryOp", "Call"})
LOGICAL_OPS = frozenset({"&&", "||"})
RELATIONAL_OPS = frozenset({"<", "<=", ">", ">=", "==", "!="})


def is_expr(node: Node) -> bool:
    return node.kind in EXPRESSION_KINDS


def walk(node: Node) -> Iterator[Node]:
    """Pre-order traversal."""
    stack = [node]
    while stack:
        n = stack.pop()
        yield n
        stack.extend(reversed(n.children()))


def shape(node: Node) -> tuple:
    """Structural signature: kinds, attributes and children, ignoring ids."""
    return (node.kind, node.attrs(), tuple(shape(c) for c in node.children()))


def index_nodes(root: Node) -> dict[int, Node]:
    return {n.id: n for n in walk(root)}
