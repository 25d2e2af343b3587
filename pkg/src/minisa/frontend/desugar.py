"""Reduce MiniC to its core: no ``for`` loops, no compound assignment.

The input tree is left untouched; the result is a fresh tree in which
every surviving node keeps its id and rewritten constructs get new ids.
"""

from __future__ import annotations

import itertools

from minisa.frontend import ast


class _Desugarer:
    def __init__(self, program: ast.Program):
        self.next_id = program.next_id
        self.taken: set[str] = set()
        self.counter = itertools.count()

    def fresh_temp(self) -> str:
        while True:
            name = f"__t{next(self.counter)}"
            if name not in self.taken:
                self.taken.add(name)
                return name

    def new_id(self) -> int:
        nid = self.next_id
        self.next_id += 1
        return nid

    def function(self, fn: ast.FunctionDecl) -> ast.FunctionDecl:
        self.taken = {n.name for n in ast.walk(fn) if isinstance(n, (ast.VarDecl, ast.ParamDecl))}
        self.counter = itertools.count()
        params = [ast.ParamDecl(p.id, p.loc, p.name, p.by_ref) for p in fn.params]
        body = None
        if fn.body is not None:
            body = ast.Block(fn.body.id, fn.body.loc, self.stmt_list(fn.body.stmts))
        return ast.FunctionDecl(fn.id, fn.loc, fn.name, fn.return_type, params, body, fn.end_loc)

    def stmt_list(self, stmts: list[ast.Node]) -> list[ast.Node]:
        out: list[ast.Node] = []
        for s in stmts:
            out.extend(self.stmt(s))
        return out

    def single(self, node: ast.Node) -> ast.Node:
        parts = self.stmt(node)
        if len(parts) == 1:
            return parts[0]
        return ast.Block(self.new_id(), node.loc, parts)

    def stmt(self, node: ast.Node) -> list[ast.Node]:
        match node:
            case ast.Block():
                return [ast.Block(node.id, node.loc, self.stmt_list(node.stmts))]
            case ast.VarDecl():
                init = self.expr(node.init) if node.init is not None else None
                return [ast.VarDecl(node.id, node.loc, node.name, node.array_len, init)]
            case ast.AssignStmt():
                return self.assign(node)
            case ast.ExprStmt():
                return [ast.ExprStmt(node.id, node.loc, self.expr(node.expr))]
            case ast.IfStmt():
                else_ = self.single(node.else_) if node.else_ is not None else None
                return [ast.IfStmt(node.id, node.loc, self.expr(node.cond), self.single(node.then), else_)]
            case ast.WhileStmt():
                return [ast.WhileStmt(node.id, node.loc, self.expr(node.cond), self.single(node.body))]
            case ast.ForStmt():
                return self.for_loop(node)
            case ast.ReturnStmt():
                value = self.expr(node.value) if node.value is not None else None
                return [ast.ReturnStmt(node.id, node.loc, value)]
        raise TypeError(f"unexpected statement {node.kind}")

    def for_loop(self, node: ast.ForStmt) -> list[ast.Node]:
        out = self.assign(node.init) if node.init is not None else []
        if node.cond is not None:
            cond = self.expr(node.cond)
        else:
            cond = ast.IntLit(self.new_id(), node.loc, 1)
        body = self.stmt(node.body)
        if node.step is not None:
            body = body + self.assign(node.step)
        loop_body = ast.Block(self.new_id(), node.body.loc, body)
        out.append(ast.WhileStmt(self.new_id(), node.loc, cond, loop_body))
        return out

    def assign(self, node: ast.AssignStmt) -> list[ast.Node]:
        value = self.expr(node.value)
        if node.op == "=":
            return [ast.AssignStmt(node.id, node.loc, "=", self.expr(node.target), value)]
        binop = node.op[0]
        target = node.target
        if isinstance(target, ast.VarRef):
            lhs = self.expr(target)
            read = ast.VarRef(self.new_id(), target.loc, target.name)
            rhs = ast.BinaryOp(self.new_id(), node.loc, binop, read, value)
            return [ast.AssignStmt(node.id, node.loc, "=", lhs, rhs)]

        # Array lvalue: evaluate the index once into a temporary.
        temp = self.fresh_temp()
        index = target.index
        decl = ast.VarDecl(self.new_id(), index.loc, temp, None, self.expr(index))

        def element() -> ast.ArrayIndex:
            base = ast.VarRef(self.new_id(), target.base.loc, target.base.name)
            idx = ast.VarRef(self.new_id(), index.loc, temp)
            return ast.ArrayIndex(self.new_id(), target.loc, base, idx)

        lhs = ast.ArrayIndex(target.id, target.loc, self.expr(target.base), ast.VarRef(self.new_id(), index.loc, temp))
        rhs = ast.BinaryOp(self.new_id(), node.loc, binop, element(), value)
        return [decl, ast.AssignStmt(node.id, node.loc, "=", lhs, rhs)]

    def expr(self, node: ast.Node) -> ast.Node:
        match node:
            case ast.IntLit():
                return ast.IntLit(node.id, node.loc, node.value)
            case ast.VarRef():
                return ast.VarRef(node.id, node.loc, node.name)
            case ast.ArrayIndex():
                return ast.ArrayIndex(node.id, node.loc, self.expr(node.base), self.expr(node.index))
            case ast.UnaryOp():
                return ast.UnaryOp(node.id, node.loc, node.op, self.expr(node.operand))
            case ast.BinaryOp():
                return ast.BinaryOp(node.id, node.loc, node.op, self.expr(node.left), self.expr(node.right))
            case ast.Call():
                return ast.Call(node.id, node.loc, node.name, [self.expr(a) for a in node.args])
        raise TypeError(f"unexpected expression {node.kind}")


def desugar(program: ast.Program) -> ast.Program:
    """Return a desugared copy of ``program``.

    ``for`` becomes ``init; while (cond) { body; step }`` and ``x op= e``
    becomes ``x = x op e``. An array target's index is hoisted into a
    fresh temporary so it is evaluated exactly once. The copy is untyped;
    run semantic analysis on it again.
    """
    d = _Desugarer(program)
    functions = [d.function(fn) for fn in program.functions]
    out = ast.Program(program.id, program.loc, functions)
    out.next_id = d.next_id
    return out
