"""MiniC frontend: lexing, parsing, semantic analysis and desugaring."""

from __future__ import annotations

from dataclasses import dataclass

from minisa.frontend import ast
from minisa.frontend.desugar import desugar
from minisa.frontend.lexer import SourceLocation, Token, TokenKind, tokenize
from minisa.frontend.parser import parse
from minisa.frontend.sema import SemaInfo, analyze


@dataclass
class TranslationUnit:
    """Everything the analyses need for one source file.

    ``surface`` is the typed tree as written (for token/AST matching);
    ``core``/``info`` are the desugared tree and its symbol tables.
    """

    file: str
    source: str
    tokens: list[Token]
    surface: ast.Program
    surface_info: SemaInfo
    core: ast.Program
    info: SemaInfo


def compile_source(source: str, file: str = "<input>") -> TranslationUnit:
    tokens = tokenize(source, file)
    surface = parse(tokens)
    surface_info = analyze(surface)
    core = desugar(surface)
    info = analyze(core)
    return TranslationUnit(file, source, tokens, surface, surface_info, core, info)


__all__ = [
    "SemaInfo",
    "SourceLocation",
    "Token",
    "TokenKind",
    "TranslationUnit",
    "analyze",
    "ast",
    "compile_source",
    "desugar",
    "parse",
    "tokenize",
]
