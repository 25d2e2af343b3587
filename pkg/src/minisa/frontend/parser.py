"""Recursive-descent parser for MiniC. Stops at the first syntax error."""

from __future__ import annotations

from typing import Optional

from minisa.errors import SyntaxError_
from minisa.frontend import ast
from minisa.frontend.lexer import Token, TokenKind

ASSIGN_OPS = ("=", "+=", "-=", "*=", "/=")

# Binary precedence levels, lowest first.
BINARY_LEVELS: tuple[tuple[str, ...], ...] = (
    ("||",),
    ("&&",),
    ("==", "!="),
    ("<", "<=", ">", ">="),
    ("+", "-"),
    ("*", "/", "%"),
)


class Parser:
    def __init__(self, tokens: list[Token]):
        if not tokens or tokens[-1].kind is not TokenKind.EOF:
            raise ValueError("token list must end with EndOfFile")
        self.toks = tokens
        self.pos = 0
        self.next_id = 0

    # -- helpers ---------------------------------------------------------

    def _id(self) -> int:
        nid = self.next_id
        self.next_id += 1
        return nid

    @property
    def tok(self) -> Token:
        return self.toks[self.pos]

    def _peek(self, k: int = 1) -> Token:
        return self.toks[min(self.pos + k, len(self.toks) - 1)]

    def _at(self, text: str) -> bool:
        return self.tok.kind in (TokenKind.PUNCTUATOR, TokenKind.KEYWORD) and self.tok.text == text

    def _accept(self, text: str) -> Optional[Token]:
        if self._at(text):
            t = self.tok
            self.pos += 1
            return t
        return None

    def _expect(self, text: str) -> Token:
        t = self._accept(text)
        if t is None:
            self._fail(f"'{text}'")
        return t

    def _expect_kind(self, kind: TokenKind, what: str) -> Token:
        if self.tok.kind is not kind:
            self._fail(what)
        t = self.tok
        self.pos += 1
        return t

    def _fail(self, expected: str):
        found = self.tok.text if self.tok.kind is not TokenKind.EOF else "end of file"
        raise SyntaxError_(self.tok.loc, expected, found)

    # -- declarations ----------------------------------------------------

    def parse_program(self) -> ast.Program:
        start = self.tok.loc
        functions = []
        while self.tok.kind is not TokenKind.EOF:
            functions.append(self._function())
        prog = ast.Program(self._id(), start, functions)
        prog.next_id = self.next_id
        return prog

    def _function(self) -> ast.FunctionDecl:
        start = self.tok
        if not (self._at("int") or self._at("void")):
            self._fail("'int' or 'void'")
        self.pos += 1
        name = self._expect_kind(TokenKind.IDENTIFIER, "function name")
        self._expect("(")
        params = []
        if not self._at(")"):
            params.append(self._param())
            while self._accept(","):
                params.append(self._param())
        self._expect(")")
        fn = ast.FunctionDecl(self._id(), start.loc, name.text, start.text, params, None)
        if self._accept(";"):
            fn.end_loc = self.toks[self.pos - 1].loc
            return fn
        fn.body = self._block()
        fn.end_loc = self.toks[self.pos - 1].loc
        return fn

    def _param(self) -> ast.ParamDecl:
        start = self._expect("int")
        by_ref = self._accept("&") is not None
        name = self._expect_kind(TokenKind.IDENTIFIER, "parameter name")
        return ast.ParamDecl(self._id(), start.loc, name.text, by_ref)

    def _block(self) -> ast.Block:
        start = self._expect("{")
        stmts = []
        while not self._at("}"):
            if self.tok.kind is TokenKind.EOF:
                self._fail("'}'")
            stmts.append(self._stmt())
        self._expect("}")
        return ast.Block(self._id(), start.loc, stmts)

    # -- statements ------------------------------------------------------

    def _stmt(self) -> ast.Node:
        t = self.tok
        if self._at("int"):
            return self._decl()
        if self._at("{"):
            return self._block()
        if self._accept(";"):
            return ast.Block(self._id(), t.loc, [])
        if self._accept("if"):
            self._expect("(")
            cond = self._expr()
            self._expect(")")
            then = self._stmt()
            else_ = self._stmt() if self._accept("else") else None
            return ast.IfStmt(self._id(), t.loc, cond, then, else_)
        if self._accept("while"):
            self._expect("(")
            cond = self._expr()
            self._expect(")")
            return ast.WhileStmt(self._id(), t.loc, cond, self._stmt())
        if self._accept("for"):
            self._expect("(")
            init = None if self._at(";") else self._assign()
            self._expect(";")
            cond = None if self._at(";") else self._expr()
            self._expect(";")
            step = None if self._at(")") else self._assign()
            self._expect(")")
            return ast.ForStmt(self._id(), t.loc, init, cond, step, self._stmt())
        if self._accept("return"):
            value = None if self._at(";") else self._expr()
            self._expect(";")
            return ast.ReturnStmt(self._id(), t.loc, value)
        if t.kind is TokenKind.IDENTIFIER:
            if self._peek().text == "(" and self._peek().kind is TokenKind.PUNCTUATOR:
                call = self._primary()
                self._expect(";")
                return ast.ExprStmt(self._id(), t.loc, call)
            stmt = self._assign()
            self._expect(";")
            return stmt
        self._fail("statement")

    def _decl(self) -> ast.VarDecl:
        start = self._expect("int")
        name = self._expect_kind(TokenKind.IDENTIFIER, "variable name")
        length = None
        if self._accept("["):
            length = int(self._expect_kind(TokenKind.INT_LITERAL, "array length").text)
            self._expect("]")
        init = self._expr() if self._accept("=") else None
        self._expect(";")
        return ast.VarDecl(self._id(), start.loc, name.text, length, init)

    def _assign(self) -> ast.AssignStmt:
        start = self.tok
        target = self._lvalue()
        if not (self.tok.kind is TokenKind.PUNCTUATOR and self.tok.text in ASSIGN_OPS):
            self._fail("assignment operator")
        op = self.tok.text
        self.pos += 1
        value = self._expr()
        return ast.AssignStmt(self._id(), start.loc, op, target, value)

    def _lvalue(self) -> ast.Node:
        name = self._expect_kind(TokenKind.IDENTIFIER, "identifier")
        ref = ast.VarRef(self._id(), name.loc, name.text)
        if self._accept("["):
            index = self._expr()
            self._expect("]")
            return ast.ArrayIndex(self._id(), name.loc, ref, index)
        return ref

    # -- expressions -----------------------------------------------------

    def _expr(self, level: int = 0) -> ast.Node:
        if level == len(BINARY_LEVELS):
            return self._unary()
        left = self._expr(level + 1)
        ops = BINARY_LEVELS[level]
        while self.tok.kind is TokenKind.PUNCTUATOR and self.tok.text in ops:
            op = self.tok
            self.pos += 1
            right = self._expr(level + 1)
            left = ast.BinaryOp(self._id(), op.loc, op.text, left, right)
        return left

    def _unary(self) -> ast.Node:
        t = self.tok
        if self._accept("-") or self._accept("!"):
            return ast.UnaryOp(self._id(), t.loc, t.text, self._unary())
        return self._primary()

    def _primary(self) -> ast.Node:
        t = self.tok
        if t.kind is TokenKind.INT_LITERAL:
            self.pos += 1
            return ast.IntLit(self._id(), t.loc, int(t.text))
        if self._accept("("):
            e = self._expr()
            self._expect(")")
            return e
        if t.kind is TokenKind.IDENTIFIER:
            self.pos += 1
            if self._accept("("):
                args = []
                if not self._at(")"):
                    args.append(self._expr())
                    while self._accept(","):
                        args.append(self._expr())
                self._expect(")")
                return ast.Call(self._id(), t.loc, t.text, args)
            ref = ast.VarRef(self._id(), t.loc, t.text)
            if self._accept("["):
                index = self._expr()
                self._expect("]")
                return ast.ArrayIndex(self._id(), t.loc, ref, index)
            return ref
        self._fail("expression")


def parse(tokens: list[Token]) -> ast.Program:
    return Parser(tokens).parse_program()
