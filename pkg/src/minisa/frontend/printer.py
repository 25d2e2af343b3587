"""Canonical MiniC pretty-printer. Every compound expression is parenthesized."""

from __future__ import annotations

from minisa.frontend import ast


def expr_text(node: ast.Node) -> str:
    match node:
        case ast.IntLit():
            return str(node.value)
        case ast.VarRef():
            return node.name
        case ast.ArrayIndex():
            return f"{node.base.name}[{expr_text(node.index)}]"
        case ast.UnaryOp():
            return f"({node.op}{expr_text(node.operand)})"
        case ast.BinaryOp():
            return f"({expr_text(node.left)} {node.op} {expr_text(node.right)})"
        case ast.Call():
            return f"{node.name}({', '.join(expr_text(a) for a in node.args)})"
    raise TypeError(f"not an expression: {node.kind}")


def _assign(node: ast.AssignStmt) -> str:
    return f"{expr_text(node.target)} {node.op} {expr_text(node.value)}"


def _stmt(node: ast.Node, indent: int, out: list[str]) -> None:
    pad = "    " * indent
    match node:
        case ast.Block():
            out.append(pad + "{")
            for s in node.stmts:
                _stmt(s, indent + 1, out)
            out.append(pad + "}")
        case ast.VarDecl():
            text = f"int {node.name}"
            if node.array_len is not None:
                text += f"[{node.array_len}]"
            if node.init is not None:
                text += f" = {expr_text(node.init)}"
            out.append(pad + text + ";")
        case ast.AssignStmt():
            out.append(pad + _assign(node) + ";")
        case ast.ExprStmt():
            out.append(pad + expr_text(node.expr) + ";")
        case ast.IfStmt():
            out.append(pad + f"if ({expr_text(node.cond)})")
            _stmt(node.then, indent + 1, out)
            if node.else_ is not None:
                out.append(pad + "else")
                _stmt(node.else_, indent + 1, out)
        case ast.WhileStmt():
            out.append(pad + f"while ({expr_text(node.cond)})")
            _stmt(node.body, indent + 1, out)
        case ast.ForStmt():
            init = _assign(node.init) if node.init is not None else ""
            cond = expr_text(node.cond) if node.cond is not None else ""
            step = _assign(node.step) if node.step is not None else ""
            out.append(pad + f"for ({init}; {cond}; {step})")
            _stmt(node.body, indent + 1, out)
        case ast.ReturnStmt():
            if node.value is None:
                out.append(pad + "return;")
            else:
                out.append(pad + f"return {expr_text(node.value)};")
        case _:
            raise TypeError(f"not a statement: {node.kind}")


def print_program(program: ast.Program) -> str:
    out: list[str] = []
    for fn in program.functions:
        params = ", ".join(f"int {'&' if p.by_ref else ''}{p.name}" for p in fn.params)
        header = f"{fn.return_type} {fn.name}({params})"
        if fn.body is None:
            out.append(header + ";")
        else:
            out.append(header)
            _stmt(fn.body, 0, out)
    return "\n".join(out) + "\n"
