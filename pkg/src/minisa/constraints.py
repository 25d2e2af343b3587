"""Range-set constraint solving.

A symbol's possible values are kept as a sorted union of disjoint closed
intervals. The integer universe is parameterized (64-bit by default) so
the algebra can be checked exhaustively against bit sets on tiny
universes.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional, Union

from pyrsistent import PMap, pmap


@dataclass(frozen=True)
class Universe:
    bits: int

    @property
    def min(self) -> int:
        return -(1 << (self.bits - 1))

    @property
    def max(self) -> int:
        return (1 << (self.bits - 1)) - 1

    @property
    def size(self) -> int:
        return 1 << self.bits

    def wrap(self, v: int) -> int:
        """Two's-complement wraparound into the universe."""
        return (v - self.min) % self.size + self.min


INT64 = Universe(64)
IMIN = INT64.min
IMAX = INT64.max


def _normalize(ranges, universe: Universe) -> tuple[tuple[int, int], ...]:
    """Sort, clip to the universe and merge overlapping or adjacent intervals."""
    clipped = sorted(
        (max(lo, universe.min), min(hi, universe.max))
        for lo, hi in ranges
        if max(lo, universe.min) <= min(hi, universe.max)
    )
    merged: list[list[int]] = []
    for lo, hi in clipped:
        if merged and lo <= merged[-1][1] + 1:
            merged[-1][1] = max(merged[-1][1], hi)
        else:
            merged.append([lo, hi])
    return tuple((lo, hi) for lo, hi in merged)


@dataclass(frozen=True)
class RangeSet:
    ranges: tuple[tuple[int, int], ...] = ()
    universe: Universe = INT64

    @classmethod
    def of(cls, ranges, universe: Universe = INT64) -> RangeSet:
        return cls(_normalize(ranges, universe), universe)

    @classmethod
    def full(cls, universe: Universe = INT64) -> RangeSet:
        return cls(((universe.min, universe.max),), universe)

    @classmethod
    def empty(cls, universe: Universe = INT64) -> RangeSet:
        return cls((), universe)

    @classmethod
    def point(cls, v: int, universe: Universe = INT64) -> RangeSet:
        return cls(((v, v),), universe)

    def is_empty(self) -> bool:
        return not self.ranges

    def is_full(self) -> bool:
        return self.ranges == ((self.universe.min, self.universe.max),)

    def contains(self, v: int) -> bool:
        return any(lo <= v <= hi for lo, hi in self.ranges)

    def single_value(self) -> Optional[int]:
        if len(self.ranges) == 1 and self.ranges[0][0] == self.ranges[0][1]:
            return self.ranges[0][0]
        return None

    def intersect(self, other: RangeSet) -> RangeSet:
        out = []
        i = j = 0
        a, b = self.ranges, other.ranges
        while i < len(a) and j < len(b):
            lo = max(a[i][0], b[j][0])
            hi = min(a[i][1], b[j][1])
            if lo <= hi:
                out.append((lo, hi))
            if a[i][1] < b[j][1]:
                i += 1
            else:
                j += 1
        return RangeSet(tuple(out), self.universe)

    def union(self, other: RangeSet) -> RangeSet:
        return RangeSet.of(self.ranges + other.ranges, self.universe)

    def complement(self) -> RangeSet:
        out = []
        nxt = self.universe.min
        for lo, hi in self.ranges:
            if lo > nxt:
                out.append((nxt, lo - 1))
            nxt = hi + 1
        if nxt <= self.universe.max:
            out.append((nxt, self.universe.max))
        return RangeSet(tuple(out), self.universe)

    def shift(self, k: int) -> RangeSet:
        """Add ``k`` to every member with wraparound; wrapping intervals split."""
        u = self.universe
        k = u.wrap(k)
        pieces = []
        for lo, hi in self.ranges:
            a, b = lo + k, hi + k
            for offset in (u.size, 0, -u.size):
                plo, phi = max(a + offset, u.min), min(b + offset, u.max)
                if plo <= phi:
                    pieces.append((plo, phi))
        return RangeSet.of(pieces, u)

    def _bound(self, v: int) -> str:
        if v == self.universe.min:
            return "IMIN"
        if v == self.universe.max:
            return "IMAX"
        return str(v)

    def __str__(self) -> str:
        if not self.ranges:
            return "∅"
        return " ∪ ".join(f"[{self._bound(lo)}, {self._bound(hi)}]" for lo, hi in self.ranges)


# -- symbols and symbolic expressions ---------------------------------------


@dataclass(frozen=True)
class Symbol:
    """An opaque unknown value. Identity is the id; ``name`` is for display."""

    id: int
    name: str = field(default="", compare=False)

    def __str__(self) -> str:
        return f"${self.name or self.id}"


@dataclass(frozen=True)
class Atom:
    sym: Symbol

    def __str__(self) -> str:
        return str(self.sym)


@dataclass(frozen=True)
class OffsetOf:
    """``sym + offset`` with wraparound; ``offset`` is never 0."""

    sym: Symbol
    offset: int

    @property
    def op(self) -> str:
        return "+" if self.offset > 0 else "-"

    @property
    def const(self) -> int:
        return abs(self.offset)

    def __str__(self) -> str:
        return f"{self.sym}{self.op}{self.const}"


SymExpr = Union[Atom, OffsetOf]


def offset_expr(e: SymExpr, k: int, universe: Universe = INT64) -> SymExpr:
    """``e + k`` kept in canonical form."""
    base = e.offset if isinstance(e, OffsetOf) else 0
    total = universe.wrap(base + k)
    return Atom(e.sym) if total == 0 else OffsetOf(e.sym, total)


ConstraintMap = PMap  # Symbol -> RangeSet; absent means the full range

EMPTY_CONSTRAINTS: ConstraintMap = pmap()


def range_of_symbol(cm: ConstraintMap, sym: Symbol, universe: Universe = INT64) -> RangeSet:
    return cm.get(sym) or RangeSet.full(universe)


def range_of(cm: ConstraintMap, e: SymExpr, universe: Universe = INT64) -> RangeSet:
    rs = range_of_symbol(cm, e.sym, universe)
    return rs.shift(e.offset) if isinstance(e, OffsetOf) else rs


def relation_set(rel: str, c: int, universe: Universe = INT64) -> RangeSet:
    """All values ``v`` of the universe with ``v rel c``."""
    lo, hi = universe.min, universe.max
    match rel:
        case "==":
            return RangeSet.of([(c, c)], universe)
        case "!=":
            return RangeSet.of([(c, c)], universe).complement()
        case "<":
            return RangeSet.of([(lo, c - 1)], universe)
        case "<=":
            return RangeSet.of([(lo, c)], universe)
        case ">":
            return RangeSet.of([(c + 1, hi)], universe)
        case ">=":
            return RangeSet.of([(c, hi)], universe)
    raise ValueError(f"unknown relation {rel!r}")


FLIPPED = {"==": "==", "!=": "!=", "<": ">", "<=": ">=", ">": "<", ">=": "<="}


def assume(
    cm: ConstraintMap,
    e: SymExpr,
    rel: str,
    c: int,
    holds: bool = True,
    universe: Universe = INT64,
) -> Optional[ConstraintMap]:
    """Refine ``cm`` with ``e rel c`` (or its negation); None if infeasible."""
    allowed = relation_set(rel, c, universe)
    if not holds:
        allowed = allowed.complement()
    if isinstance(e, OffsetOf):
        # sym + k in allowed  <=>  sym in allowed - k (exact under wraparound)
        allowed = allowed.shift(-e.offset)
    refined = range_of_symbol(cm, e.sym, universe).intersect(allowed)
    if refined.is_empty():
        return None
    return cm.set(e.sym, refined)


def assume_in(cm: ConstraintMap, e: SymExpr, allowed: RangeSet) -> Optional[ConstraintMap]:
    """Refine ``cm`` so that ``e`` lies in ``allowed``; None if infeasible."""
    if isinstance(e, OffsetOf):
        allowed = allowed.shift(-e.offset)
    refined = range_of_symbol(cm, e.sym, allowed.universe).intersect(allowed)
    if refined.is_empty():
        return None
    return cm.set(e.sym, refined)


class Zeroness(enum.Enum):
    NEVER_ZERO = "NeverZero"
    ONLY_ZERO = "OnlyZero"
    MAYBE_ZERO = "MaybeZero"


def query_zeroness(cm: ConstraintMap, v: Union[int, SymExpr], universe: Universe = INT64) -> Zeroness:
    if isinstance(v, int):
        return Zeroness.ONLY_ZERO if v == 0 else Zeroness.NEVER_ZERO
    rs = range_of(cm, v, universe)
    if rs.single_value() == 0:
        return Zeroness.ONLY_ZERO
    if not rs.contains(0):
        return Zeroness.NEVER_ZERO
    return Zeroness.MAYBE_ZERO


# -- concrete arithmetic ------------------------------------------------------


class DivByZero:
    """Signal value for a concrete division or remainder by zero."""

    _instance: Optional[DivByZero] = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "DivByZero"


DIV_BY_ZERO = DivByZero()


def _trunc_div(a: int, b: int) -> int:
    q = abs(a) // abs(b)
    return q if (a < 0) == (b < 0) else -q


def eval_concrete_binop(lhs: int, op: str, rhs: int, universe: Universe = INT64) -> Union[int, DivByZero]:
    """Machine semantics: wraparound arithmetic, 0/1 comparisons, truncating division."""
    w = universe.wrap
    match op:
        case "+":
            return w(lhs + rhs)
        case "-":
            return w(lhs - rhs)
        case "*":
            return w(lhs * rhs)
        case "/":
            if rhs == 0:
                return DIV_BY_ZERO
            return w(_trunc_div(lhs, rhs))
        case "%":
            if rhs == 0:
                return DIV_BY_ZERO
            return w(lhs - _trunc_div(lhs, rhs) * rhs)
        case "<":
            return int(lhs < rhs)
        case "<=":
            return int(lhs <= rhs)
        case ">":
            return int(lhs > rhs)
        case ">=":
            return int(lhs >= rhs)
        case "==":
            return int(lhs == rhs)
        case "!=":
            return int(lhs != rhs)
        case "&&":
            return int(lhs != 0 and rhs != 0)
        case "||":
            return int(lhs != 0 or rhs != 0)
    raise ValueError(f"unknown operator {op!r}")


def eval_concrete_unop(op: str, v: int, universe: Universe = INT64) -> int:
    if op == "-":
        return universe.wrap(-v)
    if op == "!":
        return int(v == 0)
    raise ValueError(f"unknown operator {op!r}")
