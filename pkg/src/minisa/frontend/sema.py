"""Scope and type checking for MiniC.

Binds every ``VarRef`` to a declaration id and every expression to a
:class:`SemaType`. Safe to run repeatedly (desugared trees are re-checked).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from minisa import errors
from minisa.frontend import ast
from minisa.frontend.ast import INT, REF_INT, VOID, SemaType


@dataclass(frozen=True)
class Signature:
    return_type: SemaType
    params: tuple[bool, ...]  # by_ref flag per parameter


INTRINSICS: dict[str, Signature] = {
    "input": Signature(INT, ()),
    "open": Signature(INT, ()),
    "close": Signature(VOID, (False,)),
    "sa_dump": Signature(VOID, (False,)),
}


@dataclass(frozen=True)
class SymbolTableEntry:
    name: str
    decl: int
    type: SemaType
    scope_depth: int


@dataclass
class SemaInfo:
    program: ast.Program
    decls: dict[int, ast.Node] = field(default_factory=dict)
    decl_types: dict[int, SemaType] = field(default_factory=dict)
    decl_owner: dict[int, str] = field(default_factory=dict)
    functions: dict[str, ast.FunctionDecl] = field(default_factory=dict)
    symbols: list[SymbolTableEntry] = field(default_factory=list)

    def signature(self, name: str) -> Optional[Signature]:
        if name in INTRINSICS:
            return INTRINSICS[name]
        fn = self.functions.get(name)
        if fn is None:
            return None
        return _signature(fn)

    def is_intrinsic(self, name: str) -> bool:
        return name in INTRINSICS


def _signature(fn: ast.FunctionDecl) -> Signature:
    return Signature(INT if fn.return_type == "int" else VOID, tuple(p.by_ref for p in fn.params))


class _Analyzer:
    def __init__(self, program: ast.Program):
        self.info = SemaInfo(program)
        self.scopes: list[dict[str, SymbolTableEntry]] = []
        self.current: Optional[ast.FunctionDecl] = None

    def _declare(self, name: str, node: ast.Node, typ: SemaType) -> None:
        scope = self.scopes[-1]
        if name in scope:
            raise errors.Redefinition(node.loc, f"redefinition of '{name}'")
        entry = SymbolTableEntry(name, node.id, typ, len(self.scopes) - 1)
        scope[name] = entry
        self.info.symbols.append(entry)
        self.info.decls[node.id] = node
        self.info.decl_types[node.id] = typ
        self.info.decl_owner[node.id] = self.current.name

    def _lookup(self, ref: ast.VarRef) -> SymbolTableEntry:
        for scope in reversed(self.scopes):
            if ref.name in scope:
                return scope[ref.name]
        raise errors.UndeclaredIdentifier(ref.loc, f"use of undeclared identifier '{ref.name}'")

    # -- program ---------------------------------------------------------

    def run(self) -> SemaInfo:
        prog = self.info.program
        seen: dict[str, ast.FunctionDecl] = {}
        for fn in prog.functions:
            if fn.name in INTRINSICS:
                raise errors.Redefinition(fn.loc, f"'{fn.name}' redefines an intrinsic")
            prev = seen.get(fn.name)
            if prev is not None:
                if _signature(prev) != _signature(fn):
                    raise errors.Redefinition(fn.loc, f"conflicting declaration of '{fn.name}'")
                if prev.body is not None and fn.body is not None:
                    raise errors.Redefinition(fn.loc, f"redefinition of function '{fn.name}'")
            if prev is None or fn.body is not None:
                seen[fn.name] = fn
        self.info.functions = seen
        for fn in prog.functions:
            self._function(fn)
        return self.info

    def _function(self, fn: ast.FunctionDecl) -> None:
        self.current = fn
        self.scopes = [{}]
        for p in fn.params:
            self._declare(p.name, p, REF_INT if p.by_ref else INT)
        if fn.body is not None:
            # The outermost body block shares the parameter scope.
            for stmt in fn.body.stmts:
                self._stmt(stmt)
        self.scopes = []

    # -- statements ------------------------------------------------------

    def _stmt(self, node: ast.Node) -> None:
        match node:
            case ast.Block():
                self.scopes.append({})
                for s in node.stmts:
                    self._stmt(s)
                self.scopes.pop()
            case ast.VarDecl():
                if node.array_len is not None:
                    if node.array_len <= 0:
                        raise errors.TypeMismatch(node.loc, "array length must be positive")
                    if node.init is not None:
                        raise errors.TypeMismatch(node.loc, "arrays cannot have an initializer")
                    typ = ast.array_of(node.array_len)
                else:
                    typ = INT
                if node.init is not None:
                    self._int_expr(node.init)
                self._declare(node.name, node, typ)
            case ast.AssignStmt():
                self._lvalue(node.target)
                self._int_expr(node.value)
            case ast.ExprStmt():
                if not isinstance(node.expr, ast.Call):
                    raise errors.TypeMismatch(node.loc, "expression statement must be a call")
                self._expr(node.expr)
            case ast.IfStmt():
                self._int_expr(node.cond)
                self._scoped(node.then)
                if node.else_ is not None:
                    self._scoped(node.else_)
            case ast.WhileStmt():
                self._int_expr(node.cond)
                self._scoped(node.body)
            case ast.ForStmt():
                if node.init is not None:
                    self._stmt(node.init)
                if node.cond is not None:
                    self._int_expr(node.cond)
                if node.step is not None:
                    self._stmt(node.step)
                self._scoped(node.body)
            case ast.ReturnStmt():
                wants_value = self.current.return_type == "int"
                if node.value is None and wants_value:
                    raise errors.TypeMismatch(node.loc, f"non-void function '{self.current.name}' must return a value")
                if node.value is not None:
                    if not wants_value:
                        raise errors.TypeMismatch(node.loc, f"void function '{self.current.name}' cannot return a value")
                    self._int_expr(node.value)
            case _:
                raise errors.TypeMismatch(node.loc, f"unexpected {node.kind} in statement position")

    def _scoped(self, node: ast.Node) -> None:
        # A sub-statement gets its own scope even if it is not a block.
        self.scopes.append({})
        self._stmt(node)
        self.scopes.pop()

    def _lvalue(self, node: ast.Node) -> None:
        if isinstance(node, ast.VarRef):
            if self._expr(node) != INT:
                raise errors.TypeMismatch(node.loc, f"cannot assign to array '{node.name}'")
        elif isinstance(node, ast.ArrayIndex):
            self._expr(node)
        else:
            raise errors.TypeMismatch(node.loc, "expression is not assignable")

    # -- expressions -----------------------------------------------------

    def _int_expr(self, node: ast.Node) -> None:
        typ = self._expr(node)
        if typ != INT:
            raise errors.TypeMismatch(node.loc, f"expected int, got {typ}")

    def _expr(self, node: ast.Node) -> SemaType:
        typ = self._expr_type(node)
        node.type = typ
        return typ

    def _expr_type(self, node: ast.Node) -> SemaType:
        match node:
            case ast.IntLit():
                return INT
            case ast.VarRef():
                entry = self._lookup(node)
                node.decl = entry.decl
                return INT if entry.type == REF_INT else entry.type
            case ast.ArrayIndex():
                base = self._expr(node.base)
                if base.kind != "int[]":
                    raise errors.IndexOfNonArray(node.loc, f"'{node.base.name}' is not an array")
                self._int_expr(node.index)
                return INT
            case ast.UnaryOp():
                self._int_expr(node.operand)
                return INT
            case ast.BinaryOp():
                self._int_expr(node.left)
                self._int_expr(node.right)
                return INT
            case ast.Call():
                return self._call(node)
        raise errors.TypeMismatch(node.loc, f"unexpected {node.kind} in expression position")

    def _call(self, node: ast.Call) -> SemaType:
        sig = self.info.signature(node.name)
        if sig is None:
            raise errors.UndeclaredIdentifier(node.loc, f"call to undeclared function '{node.name}'")
        if len(sig.params) != len(node.args):
            raise errors.ArityMismatch(
                node.loc, f"'{node.name}' expects {len(sig.params)} argument(s), got {len(node.args)}"
            )
        for by_ref, arg in zip(sig.params, node.args):
            if by_ref:
                if not isinstance(arg, (ast.VarRef, ast.ArrayIndex)):
                    raise errors.NonLvalueRefArgument(arg.loc, "by-reference argument must be an lvalue")
                self._lvalue(arg)
            else:
                self._int_expr(arg)
        return sig.return_type


def analyze(program: ast.Program) -> SemaInfo:
    """Type- and scope-check ``program`` in place and return the symbol tables."""
    return _Analyzer(program).run()

