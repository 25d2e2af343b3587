"""Flow-sensitive dataflow over CFGs.

Facts are frozensets of declaration ids. The solvers are generic; the
analyses below plug in per-element transfer functions. None of them looks
at branch conditions, so they are flow- but not path-sensitive.
"""

from __future__ import annotations

import enum
import heapq
from dataclasses import dataclass, field
from typing import Callable, Optional

from minisa.cfg import Cfg, Element
from minisa.frontend import ast
from minisa.report import Report, make_report

Fact = frozenset
Transfer = Callable[[Element, Fact], Fact]


class MergeMode(enum.Enum):
    MAY = "may"
    MUST = "must"


def merge(mode: MergeMode, facts: list[Fact], bottom: Fact) -> Fact:
    if not facts:
        return bottom
    if mode is MergeMode.MAY:
        return frozenset().union(*facts)
    return frozenset.intersection(*facts)


@dataclass
class FlowResult:
    cfg: Cfg
    transfer: Transfer
    forward: bool
    block_in: dict[int, Fact]
    block_out: dict[int, Fact]
    mode: MergeMode = MergeMode.MAY
    init: Fact = frozenset()
    bottom: Fact = frozenset()
    visits: dict[int, int] = field(default_factory=dict)

    def element_facts(self, bid: int) -> list[tuple[Fact, Fact]]:
        """(before, after) facts for each element of block ``bid``, in program order."""
        elems = self.cfg.block(bid).elements
        pairs: list[tuple[Fact, Fact]] = []
        if self.forward:
            fact = self.block_in[bid]
            for e in elems:
                nxt = self.transfer(e, fact)
                pairs.append((fact, nxt))
                fact = nxt
            return pairs
        fact = self.block_out[bid]
        for e in reversed(elems):
            prev = self.transfer(e, fact)
            pairs.append((prev, fact))
            fact = prev
        return pairs[::-1]

    def sweep_is_stable(self) -> bool:
        """Re-applying every block equation once changes nothing."""
        boundary = self.cfg.entry if self.forward else self.cfg.exit
        for blk in self.cfg.blocks:
            if self.forward:
                sources = [self.block_out[p] for p in _live_preds(self.cfg, blk)]
                start, end = self.block_in[blk.id], self.block_out[blk.id]
            else:
                sources = [self.block_in[s] for s in blk.succs]
                start, end = self.block_out[blk.id], self.block_in[blk.id]
            expected = self.init if blk.id == boundary else merge(self.mode, sources, self.bottom)
            if start != expected:
                return False
            facts = self.element_facts(blk.id)
            if facts:
                got = facts[-1][1] if self.forward else facts[0][0]
            else:
                got = start
            if got != end:
                return False
        return True


def _live_preds(cfg: Cfg, blk) -> list[int]:
    # Dead code after a return must not feed facts into a reachable join.
    if not blk.reachable:
        return blk.preds
    return [p for p in blk.preds if cfg.block(p).reachable]


def _solve(
    cfg: Cfg,
    transfer: Transfer,
    mode: MergeMode,
    init: Fact,
    top: Optional[Fact],
    forward: bool,
) -> FlowResult:
    universe = frozenset(cfg.variables) if top is None else top
    # Blocks not yet computed contribute the identity of the merge.
    bottom = frozenset() if mode is MergeMode.MAY else universe
    order = cfg.rpo if forward else cfg.rpo[::-1]
    order = order + [b.id for b in cfg.blocks if b.id not in set(order)]
    rank = {bid: i for i, bid in enumerate(order)}
    boundary = cfg.entry if forward else cfg.exit

    block_in = {b.id: bottom for b in cfg.blocks}
    block_out = {b.id: bottom for b in cfg.blocks}
    visits = {b.id: 0 for b in cfg.blocks}

    def flow_through(bid: int, fact: Fact) -> Fact:
        elems = cfg.block(bid).elements
        for e in elems if forward else reversed(elems):
            fact = transfer(e, fact)
        return fact

    heap = [(rank[b], b) for b in order]
    queued = set(order)
    heapq.heapify(heap)
    while heap:
        _, bid = heapq.heappop(heap)
        queued.discard(bid)
        visits[bid] += 1
        blk = cfg.block(bid)
        sources = _live_preds(cfg, blk) if forward else blk.succs
        if bid == boundary:
            start = init
        else:
            start = merge(mode, [(block_out if forward else block_in)[s] for s in sources], bottom)
        end = flow_through(bid, start)
        if forward:
            block_in[bid], changed, block_out[bid] = start, end != block_out[bid], end
        else:
            block_out[bid], changed, block_in[bid] = start, end != block_in[bid], end
        if changed:
            for nxt in blk.succs if forward else blk.preds:
                if nxt not in queued:
                    queued.add(nxt)
                    heapq.heappush(heap, (rank[nxt], nxt))
    return FlowResult(cfg, transfer, forward, block_in, block_out, mode, init, bottom, visits)


def solve_forward(cfg: Cfg, transfer: Transfer, mode: MergeMode, init: Fact, top: Optional[Fact] = None) -> FlowResult:
    """Worklist fixpoint in reverse post-order. ``top`` defaults to all variables."""
    return _solve(cfg, transfer, mode, init, top, forward=True)


def solve_backward(cfg: Cfg, transfer: Transfer, mode: MergeMode, init: Fact, top: Optional[Fact] = None) -> FlowResult:
    """Mirror of :func:`solve_forward`; ``transfer`` maps the fact after an element to the one before."""
    return _solve(cfg, transfer, mode, init, top, forward=False)


# -- zero tracking ----------------------------------------------------------


def _zero_assign(cfg: Cfg, decl: int, value: Optional[ast.Node], fact: Fact) -> Fact:
    if not cfg.is_scalar(decl):
        return fact
    if isinstance(value, ast.IntLit):
        is_zero = value.value == 0
    elif isinstance(value, ast.VarRef) and cfg.is_scalar(value.decl):
        is_zero = value.decl in fact
    else:
        is_zero = False
    return fact | {decl} if is_zero else fact - {decl}


def zero_transfer(cfg: Cfg) -> Transfer:
    def transfer(elem: Element, fact: Fact) -> Fact:
        match elem:
            case ast.AssignStmt(target=ast.VarRef() as target):
                return _zero_assign(cfg, target.decl, elem.value, fact)
            case ast.VarDecl():
                return _zero_assign(cfg, elem.id, elem.init, fact)
            case ast.Call():
                # A by-reference argument may be overwritten by the callee.
                written = {a.decl for a in cfg.by_ref_args(elem) if isinstance(a, ast.VarRef)}
                return fact - written
        return fact

    return transfer


def zero_analysis(cfg: Cfg, mode: MergeMode) -> FlowResult:
    """Which variables hold zero before/after each element."""
    return solve_forward(cfg, zero_transfer(cfg), mode, frozenset())


def flow_div_zero_check(cfg: Cfg, mode: MergeMode) -> list[Report]:
    result = zero_analysis(cfg, mode)
    reports = []
    for bid in cfg.rpo:
        for elem, (before, _) in zip(cfg.block(bid).elements, result.element_facts(bid)):
            if not (isinstance(elem, ast.BinaryOp) and elem.op in ("/", "%")):
                continue
            divisor = elem.right
            if isinstance(divisor, ast.IntLit) and divisor.value == 0:
                msg = "Division by literal zero"
            elif isinstance(divisor, ast.VarRef) and divisor.decl in before:
                qualifier = "may be" if mode is MergeMode.MAY else "is"
                msg = f"Division by zero: '{divisor.name}' {qualifier} zero here"
            else:
                continue
            reports.append(make_report("flow.DivideByZero", msg, elem.loc))
    return reports


# -- uninitialized variables ------------------------------------------------


def assigned_transfer(cfg: Cfg) -> Transfer:
    def transfer(elem: Element, fact: Fact) -> Fact:
        match elem:
            case ast.AssignStmt(target=ast.VarRef() as target):
                return fact | {target.decl}
            case ast.VarDecl():
                if elem.array_len is not None:
                    return fact
                return fact | {elem.id} if elem.init is not None else fact - {elem.id}
            case ast.Call():
                return fact | {a.decl for a in cfg.by_ref_args(elem) if isinstance(a, ast.VarRef)}
        return fact

    return transfer


def definitely_assigned(cfg: Cfg) -> FlowResult:
    params = frozenset(p.id for p in cfg.function.params)
    return solve_forward(cfg, assigned_transfer(cfg), MergeMode.MUST, params)


def uninit_check(cfg: Cfg) -> list[Report]:
    """Report each scalar read that is not preceded by an assignment on every path."""
    result = definitely_assigned(cfg)
    reports = []
    for bid in cfg.rpo:
        for elem, (before, _) in zip(cfg.block(bid).elements, result.element_facts(bid)):
            if isinstance(elem, ast.VarRef) and cfg.is_scalar(elem.decl) and elem.decl not in before:
                reports.append(
                    make_report("flow.UninitVar", f"Variable '{elem.name}' may be used uninitialized", elem.loc)
                )
    return reports


# -- liveness -----------------------------------------------------------------


def liveness_transfer(cfg: Cfg) -> Transfer:
    def transfer(elem: Element, live_after: Fact) -> Fact:
        match elem:
            case ast.VarRef():
                return live_after | {elem.decl}
            case ast.ArrayIndex():
                return live_after | {elem.base.decl}
            case ast.AssignStmt(target=ast.VarRef() as target):
                return live_after - {target.decl}
            case ast.VarDecl():
                return live_after - {elem.id}
            case ast.Call():
                used = set()
                for a in cfg.by_ref_args(elem):
                    used.add(a.decl if isinstance(a, ast.VarRef) else a.base.decl)
                return live_after | used
        return live_after

    return transfer


def liveness(cfg: Cfg) -> FlowResult:
    """Variables whose current value may still be read."""
    return solve_backward(cfg, liveness_transfer(cfg), MergeMode.MAY, frozenset())


@dataclass
class LiveAfter:
    """Per-element ``live after`` sets, looked up by (block, element index)."""

    facts: dict[tuple[int, int], Fact]
    block_out: dict[int, Fact]
    block_in: dict[int, Fact]

    @classmethod
    def compute(cls, cfg: Cfg) -> LiveAfter:
        result = liveness(cfg)
        facts = {}
        for blk in cfg.blocks:
            for i, (_, after) in enumerate(result.element_facts(blk.id)):
                facts[(blk.id, i)] = after
        return cls(facts, result.block_out, result.block_in)

    def after(self, bid: int, index: int) -> Fact:
        return self.facts.get((bid, index), self.block_out[bid])
