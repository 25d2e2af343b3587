"""Frontend error types. All carry a source location."""

from __future__ import annotations

from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from minisa.frontend.lexer import SourceLocation


class FrontendError(Exception):
    def __init__(self, loc: SourceLocation, message: str):
        super().__init__(f"{loc}: {message}")
        self.loc = loc
        self.message = message


class LexicalError(FrontendError):
    def __init__(self, loc: SourceLocation, char: str, message: str):
        super().__init__(loc, message)
        self.char = char


class SyntaxError_(FrontendError):
    """Parse failure. Named with a trailing underscore to avoid the builtin."""

    def __init__(self, loc: SourceLocation, expected: str, found: str):
        super().__init__(loc, f"expected {expected}, found {found!r}")
        self.expected = expected
        self.found = found


class SemanticError(FrontendError):
    pass


class UndeclaredIdentifier(SemanticError):
    pass


class Redefinition(SemanticError):
    pass


class TypeMismatch(SemanticError):
    pass


class ArityMismatch(SemanticError):
    pass


class NonLvalueRefArgument(SemanticError):
    pass


class IndexOfNonArray(SemanticError):
    pass
