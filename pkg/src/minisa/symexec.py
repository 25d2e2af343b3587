"""Path-sensitive symbolic execution.

The engine interprets one top-level function at a time, building an
exploded graph of (program point, program state) nodes with a depth-first
worklist. Calls are inlined while the budget allows and evaluated
conservatively otherwise. Checkers observe the walk through callbacks and
may refine states, attach reports or cut a path short with a sink.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field, fields, replace
from typing import Any, Iterable, Optional, Union

from pyrsistent import PMap, pmap

from minisa import constraints as C
from minisa.cfg import Cfg, CondBranch, Jump, Return, SetValue, build_cfg, is_full_statement
from minisa.dataflow import LiveAfter
from minisa.frontend import ast
from minisa.frontend.printer import expr_text
from minisa.frontend.sema import SemaInfo
from minisa.report import EventKind, PathEvent, Report, dedup_sorted, make_report

# Small functions are inlined past maxCallDepth; this cap stops trivial infinite recursion.
SMALL_FN_DEPTH_CAP = 64


# -- values -------------------------------------------------------------------


@dataclass(frozen=True)
class UndefinedVal:
    def __str__(self) -> str:
        return "Undefined"


@dataclass(frozen=True)
class UnknownVal:
    def __str__(self) -> str:
        return "Unknown"


UNDEFINED = UndefinedVal()
UNKNOWN = UnknownVal()


@dataclass(frozen=True)
class ConcreteInt:
    value: int

    def __str__(self) -> str:
        return str(self.value)


@dataclass(frozen=True)
class Symbolic:
    expr: C.SymExpr

    def __str__(self) -> str:
        return str(self.expr)


@dataclass(frozen=True)
class RegionVal:
    """The location a by-reference parameter is bound to."""

    region: MemRegion

    def __str__(self) -> str:
        return f"&{self.region}"


SVal = Union[UndefinedVal, UnknownVal, ConcreteInt, Symbolic, RegionVal]


def atom(sym: C.Symbol) -> Symbolic:
    return Symbolic(C.Atom(sym))


# -- frames and regions ---------------------------------------------------------


class Frame:
    """One activation in the inlining chain. Compared structurally."""

    __slots__ = ("function", "call_site", "parent", "return_block", "return_index", "depth", "_hash")

    def __init__(
        self,
        function: str,
        call_site: Optional[int] = None,
        parent: Optional[Frame] = None,
        return_block: Optional[int] = None,
        return_index: Optional[int] = None,
    ):
        self.function = function
        self.call_site = call_site
        self.parent = parent
        self.return_block = return_block
        self.return_index = return_index
        self.depth = 0 if parent is None else parent.depth + 1
        self._hash = hash((function, call_site, parent))

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other: object) -> bool:
        if self is other:
            return True
        return (
            isinstance(other, Frame)
            and self._hash == other._hash
            and self.function == other.function
            and self.call_site == other.call_site
            and self.parent == other.parent
        )

    def __str__(self) -> str:
        if self.parent is None:
            return self.function
        return f"{self.parent}>{self.function}@{self.call_site}"

    def __repr__(self) -> str:
        return f"Frame({self})"


@dataclass(frozen=True)
class VarRegion:
    frame: Frame
    decl: int
    name: str = field(default="", compare=False)

    def __str__(self) -> str:
        return self.name if self.frame.parent is None else f"{self.name}@{self.frame}"


@dataclass(frozen=True)
class ElementRegion:
    base: VarRegion
    index: SVal  # ConcreteInt or Symbolic

    def __str__(self) -> str:
        return f"{self.base}[{self.index}]"


MemRegion = Union[VarRegion, ElementRegion]


def _symbols_in(v: Any) -> Iterable[C.Symbol]:
    if isinstance(v, Symbolic):
        yield v.expr.sym
    elif isinstance(v, RegionVal):
        yield from _symbols_in(v.region)
    elif isinstance(v, ElementRegion):
        yield from _symbols_in(v.index)


# -- program state ----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ProgramState:
    """Environment, store, generic data map and constraints. Immutable."""

    env: PMap = pmap()  # (Frame, expr id) -> SVal
    store: PMap = pmap()  # MemRegion -> SVal
    gdm: PMap = pmap()  # checker key -> immutable payload
    constraints: PMap = C.EMPTY_CONSTRAINTS

    def __hash__(self) -> int:
        h = self.__dict__.get("_hash")
        if h is None:
            h = hash((self.env, self.store, self.gdm, self.constraints))
            object.__setattr__(self, "_hash", h)
        return h

    def __eq__(self, other: object) -> bool:
        if self is other:
            return True
        if not isinstance(other, ProgramState) or hash(self) != hash(other):
            return False
        return all(getattr(self, f.name) == getattr(other, f.name) for f in fields(self))

    def bind_expr(self, frame: Frame, expr_id: int, v: SVal) -> ProgramState:
        return replace(self, env=self.env.set((frame, expr_id), v))

    def value(self, frame: Frame, expr_id: int) -> SVal:
        return self.env.get((frame, expr_id), UNKNOWN)

    def bind(self, region: MemRegion, v: SVal) -> ProgramState:
        return replace(self, store=self.store.set(region, v))

    def with_constraints(self, cm: PMap) -> ProgramState:
        return replace(self, constraints=cm)

    def set_gdm(self, key: str, payload: Any) -> ProgramState:
        return replace(self, gdm=self.gdm.set(key, payload))

    def to_json(self) -> dict:
        def sym_key(s: C.Symbol) -> tuple:
            return (s.id, str(s))

        env = {f"{frame}:{eid}": str(v) for (frame, eid), v in self.env.items()}
        store = {str(r): str(v) for r, v in self.store.items()}
        cons = {str(s): str(self.constraints[s]) for s in sorted(self.constraints.keys(), key=sym_key)}
        return {
            "env": dict(sorted(env.items())),
            "store": dict(sorted(store.items())),
            "constraints": cons,
            "gdm": sorted(self.gdm.keys()),
        }


# -- program points ------------------------------------------------------------------


@dataclass(frozen=True)
class BlockEntrance:
    block: int
    frame: Frame
    kind = "BlockEntrance"


@dataclass(frozen=True)
class PreStmt:
    block: int
    index: int
    elem: int
    frame: Frame
    kind = "PreStmt"


@dataclass(frozen=True)
class PostStmt:
    block: int
    index: int
    elem: int
    frame: Frame
    kind = "PostStmt"


@dataclass(frozen=True)
class BranchTaken:
    block: int
    which: bool
    frame: Frame
    kind = "BranchTaken"


@dataclass(frozen=True)
class CallEnter:
    call: int
    callee: str
    frame: Frame  # the callee's frame
    kind = "CallEnter"


@dataclass(frozen=True)
class CallExit:
    call: int
    frame: Frame  # the frame being left
    kind = "CallExit"


@dataclass(frozen=True)
class EndOfFunction:
    frame: Frame
    kind = "EndOfFunction"


ProgramPoint = Union[BlockEntrance, PreStmt, PostStmt, BranchTaken, CallEnter, CallExit, EndOfFunction]


def point_json(p: ProgramPoint) -> dict:
    out: dict[str, Any] = {"kind": p.kind}
    match p:
        case BlockEntrance():
            out["block"] = p.block
        case PreStmt() | PostStmt():
            out.update(block=p.block, index=p.index, stmt=p.elem)
        case BranchTaken():
            out.update(block=p.block, which=p.which)
        case CallEnter():
            out.update(stmt=p.call, callee=p.callee)
        case CallExit():
            out["stmt"] = p.call
    out["frame"] = str(p.frame)
    return out


# -- exploded graph ---------------------------------------------------------------------


@dataclass(eq=False)
class ExplodedNode:
    id: int
    point: ProgramPoint
    state: ProgramState
    sink: bool = False
    preds: list[int] = field(default_factory=list)
    succs: list[int] = field(default_factory=list)
    written: Optional[MemRegion] = None  # region assigned by this step, for path notes


@dataclass
class ExplodedGraph:
    nodes: list[ExplodedNode] = field(default_factory=list)
    index: dict[tuple, ExplodedNode] = field(default_factory=dict)
    roots: list[int] = field(default_factory=list)

    def get_or_create(self, point: ProgramPoint, state: ProgramState) -> tuple[ExplodedNode, bool]:
        key = (point, state)
        node = self.index.get(key)
        if node is not None:
            return node, False
        node = ExplodedNode(len(self.nodes), point, state)
        self.nodes.append(node)
        self.index[key] = node
        return node, True

    def add_edge(self, src: ExplodedNode, dst: ExplodedNode) -> None:
        if dst.id not in src.succs:
            src.succs.append(dst.id)
            dst.preds.append(src.id)

    def __len__(self) -> int:
        return len(self.nodes)

    def leaves(self) -> list[ExplodedNode]:
        return [n for n in self.nodes if not n.succs and not n.sink]

    def chain_to(self, node: ExplodedNode) -> list[ExplodedNode]:
        """Root-to-node path following the oldest predecessor at each step."""
        chain = [node]
        seen = {node.id}
        while chain[-1].preds:
            pred = min(p for p in chain[-1].preds)
            if pred in seen:
                break
            seen.add(pred)
            chain.append(self.nodes[pred])
        return chain[::-1]

    def to_json(self) -> dict:
        return {
            "nodes": [
                {"id": n.id, "point": point_json(n.point), "sink": n.sink, "state": n.state.to_json()}
                for n in self.nodes
            ],
            "edges": [[n.id, s] for n in self.nodes for s in n.succs],
        }


# -- budget -------------------------------------------------------------------------------


@dataclass(frozen=True)
class AnalysisBudget:
    max_call_depth: int = 4
    small_fn_blocks: int = 3
    large_cfg_blocks: int = 14
    max_inline_of_large: int = 2
    max_block_visits: int = 4
    max_nodes: int = 50000

    ALIASES = {
        "maxCallDepth": "max_call_depth",
        "smallFnBlocks": "small_fn_blocks",
        "largeCfgBlocks": "large_cfg_blocks",
        "maxInlineOfLarge": "max_inline_of_large",
        "maxBlockVisits": "max_block_visits",
        "maxNodes": "max_nodes",
    }

    def __post_init__(self):
        for f in fields(self):
            if getattr(self, f.name) <= 0:
                raise ValueError(f"budget {f.name} must be positive")

    @classmethod
    def parse(cls, text: str) -> AnalysisBudget:
        """Parse ``k=v,...`` overrides; keys may be camelCase or snake_case."""
        known = {f.name for f in fields(cls)}
        overrides = {}
        for item in filter(None, (s.strip() for s in text.split(","))):
            key, sep, value = item.partition("=")
            key = cls.ALIASES.get(key.strip(), key.strip())
            if not sep or key not in known:
                raise ValueError(f"bad budget override {item!r}")
            overrides[key] = int(value)
        return cls(**overrides)


# -- checker interface -------------------------------------------------------------------


@dataclass
class PendingReport:
    checker: str
    message: str
    loc: Any
    interesting: frozenset = frozenset()


class CheckerContext:
    """What a callback sees: the current state, its frame, and ways to react.

    Callbacks never mutate states; they assign a new one to ``state``.
    """

    def __init__(self, engine: TopLevelAnalysis, node: ExplodedNode, state: ProgramState, frame: Frame):
        self.engine = engine
        self.node = node
        self.state = state
        self.frame = frame
        self.sink = False
        self.reports: list[PendingReport] = []

    def value(self, expr: ast.Node) -> SVal:
        return self.state.value(self.frame, expr.id)

    def region_of(self, ref: ast.VarRef) -> MemRegion:
        return self.engine.resolve(self.state, self.frame, ref.decl, ref.name)

    def decl(self, decl_id: int) -> ast.Node:
        return self.engine.info.decls[decl_id]

    def cfg(self) -> Cfg:
        return self.engine.cfgs[self.frame.function]

    def by_ref_args(self, call: ast.Call) -> list[ast.Node]:
        return self.cfg().by_ref_args(call)

    def emit(self, checker: str, message: str, loc, sink: bool = True, interesting: Iterable = ()) -> None:
        self.reports.append(PendingReport(checker, message, loc, frozenset(interesting)))
        self.sink = self.sink or sink

    def assume_in(self, v: SVal, allowed: C.RangeSet) -> bool:
        """Restrict a symbolic value to ``allowed``; False if that is infeasible."""
        if not isinstance(v, Symbolic):
            return True
        cm = C.assume_in(self.state.constraints, v.expr, allowed)
        if cm is None:
            return False
        self.state = self.state.with_constraints(cm)
        return True


class Checker:
    """Base class; override the hooks you need."""

    id = ""
    doc = ""

    def pre_stmt(self, ctx: CheckerContext, elem) -> None:
        pass

    def post_stmt(self, ctx: CheckerContext, elem) -> None:
        pass

    def pre_call(self, ctx: CheckerContext, call: ast.Call) -> None:
        pass

    def post_call(self, ctx: CheckerContext, call: ast.Call) -> None:
        pass

    def branch_condition(self, ctx: CheckerContext, cond: ast.Node, value: SVal) -> None:
        pass

    def end_of_path(self, ctx: CheckerContext) -> None:
        pass


# -- results ------------------------------------------------------------------------------

STAT_KEYS = (
    "nodes",
    "top_level_functions",
    "inlined_calls",
    "conservative_calls",
    "max_call_depth",
    "block_visit_exhausted",
    "node_budget_exhausted",
    "sinks",
    "paths_completed",
)


@dataclass
class TopLevelResult:
    function: str
    graph: ExplodedGraph
    reports: list[Report]
    report_nodes: list[tuple[Report, int]]
    stats: Counter
    inlined: set[str]
    dumps: list[str]

    function_id: int

    def return_values(self) -> list[SVal]:
        """Values returned on completed paths, in node order."""
        out = []
        for n in self.graph.nodes:
            if isinstance(n.point, EndOfFunction) and n.point.frame.parent is None:
                out.append(n.state.env.get((n.point.frame, self.function_id), UNKNOWN))
        return out


@dataclass
class ProgramResult:
    reports: list[Report]
    stats: dict[str, int]
    results: list[TopLevelResult]
    dumps: list[str]

    def graph_json(self) -> list[dict]:
        return [{"function": r.function, **r.graph.to_json()} for r in self.results]

    def result(self, function: str) -> TopLevelResult:
        for r in self.results:
            if r.function == function:
                return r
        raise KeyError(function)


# -- the engine -----------------------------------------------------------------------------


class TopLevelAnalysis:
    """Explore one top-level function and everything inlined into it."""

    def __init__(
        self,
        info: SemaInfo,
        cfgs: dict[str, Cfg],
        liveness: dict[str, LiveAfter],
        elements: dict[int, Any],
        fn: ast.FunctionDecl,
        budget: AnalysisBudget,
        checkers: list[Checker],
        gc: bool = True,
    ):
        self.info = info
        self.cfgs = cfgs
        self.liveness = liveness
        self.elements = elements
        self.fn = fn
        self.budget = budget
        self.checkers = checkers
        self.gc = gc
        self.graph = ExplodedGraph()
        self.stats: Counter = Counter({k: 0 for k in STAT_KEYS})
        self.inlined: set[str] = set()
        self.large_inlines: Counter = Counter()
        self.dumps: list[str] = []
        self.reports: list[tuple[Report, int]] = []
        self._next_sym = 0
        self._derived: dict[tuple, C.Symbol] = {}
        self._stack: list[tuple[ExplodedNode, PMap]] = []
        self._stopped = False

    # -- symbols ------------------------------------------------------------

    def fresh_symbol(self, origin: str, numbered: bool = True) -> C.Symbol:
        sid = self._next_sym
        self._next_sym += 1
        return C.Symbol(sid, f"{origin}#{sid}" if numbered else origin)

    def conjure(self, st: ProgramState, origin: str, numbered: bool = True) -> tuple[ProgramState, Symbolic]:
        sym = self.fresh_symbol(origin, numbered)
        return st.with_constraints(st.constraints.set(sym, C.RangeSet.full())), atom(sym)

    def derived_symbol(self, st: ProgramState, parent: C.Symbol, index: int) -> tuple[ProgramState, Symbolic]:
        """The value of element ``index`` of an array invalidated to ``parent``."""
        key = (parent, index)
        sym = self._derived.get(key)
        if sym is None:
            sym = self.fresh_symbol(f"{parent.name}[{index}]", numbered=False)
            self._derived[key] = sym
        if sym not in st.constraints:
            st = st.with_constraints(st.constraints.set(sym, C.RangeSet.full()))
        return st, atom(sym)

    # -- memory -----------------------------------------------------------------

    def resolve(self, st: ProgramState, frame: Frame, decl: int, name: str) -> MemRegion:
        """The region a variable names; reference parameters are followed."""
        region = VarRegion(frame, decl, name)
        bound = st.store.get(region)
        if isinstance(bound, RegionVal):
            return bound.region
        return region

    def load(self, st: ProgramState, region: MemRegion) -> tuple[ProgramState, SVal]:
        if isinstance(region, VarRegion):
            return st, st.store.get(region, UNDEFINED)
        base, idx = region.base, region.index
        if region in st.store:
            return st, st.store[region]
        default = st.store.get(base)
        if isinstance(default, Symbolic) and isinstance(idx, ConcreteInt):
            return self.derived_symbol(st, default.expr.sym, idx.value)
        if default is not None:
            return st, UNKNOWN
        if isinstance(idx, Symbolic) and any(_is_element_of(r, base) for r in st.store.keys()):
            return st, UNKNOWN
        return st, UNDEFINED

    def store_value(self, st: ProgramState, region: MemRegion, v: SVal) -> ProgramState:
        if isinstance(region, VarRegion):
            return st.bind(region, v)
        base, idx = region.base, region.index
        store = st.store.evolver()
        if isinstance(idx, ConcreteInt):
            # A symbolic-index binding may alias this element.
            for r in list(st.store.keys()):
                if _is_element_of(r, base) and not isinstance(r.index, ConcreteInt):
                    del store[r]
        else:
            for r in list(st.store.keys()):
                if _is_element_of(r, base):
                    del store[r]
            if not isinstance(st.store.get(base), UnknownVal):
                store[base] = UNKNOWN
        store[region] = v
        return replace(st, store=store.persistent())

    def element_region(self, frame: Frame, node: ast.ArrayIndex, idx: SVal) -> Optional[ElementRegion]:
        base = VarRegion(frame, node.base.decl, node.base.name)
        if isinstance(idx, (ConcreteInt, Symbolic)):
            return ElementRegion(base, idx)
        return None

    def invalidate_array(self, st: ProgramState, base: VarRegion) -> ProgramState:
        store = st.store.evolver()
        for r in list(st.store.keys()):
            if _is_element_of(r, base):
                del store[r]
        st = replace(st, store=store.persistent())
        st, sym = self.conjure(st, base.name)
        return st.bind(base, sym)

    # -- garbage collection ---------------------------------------------------

    def collect(self, st: ProgramState, frame: Frame, live: Optional[frozenset], clear_env: bool) -> ProgramState:
        """Drop finished expressions, dead locals, and constraints nobody references."""
        if not self.gc:
            return st
        env, store = st.env, st.store
        if clear_env:
            ev = env.evolver()
            for key in env.keys():
                if key[0] == frame:
                    del ev[key]
            env = ev.persistent()
        if live is not None:
            decls = self.cfgs[frame.function].decls
            sv = store.evolver()
            for region in store.keys():
                base = region if isinstance(region, VarRegion) else region.base
                if base.frame == frame and base.decl not in live and isinstance(decls.get(base.decl), ast.VarDecl):
                    del sv[region]
            store = sv.persistent()
        used = set()
        for v in env.values():
            used.update(_symbols_in(v))
        for r, v in store.items():
            used.update(_symbols_in(r))
            used.update(_symbols_in(v))
        cm = st.constraints
        if any(s not in used for s in cm.keys()):
            cm = pmap({s: rs for s, rs in cm.items() if s in used})
        return ProgramState(env, store, st.gdm, cm)

    def pop_frame(self, st: ProgramState, frame: Frame) -> ProgramState:
        ev = st.env.evolver()
        for key in st.env.keys():
            if key[0] == frame:
                del ev[key]
        sv = st.store.evolver()
        for region in st.store.keys():
            base = region if isinstance(region, VarRegion) else region.base
            if base.frame == frame:
                del sv[region]
        return replace(st, env=ev.persistent(), store=sv.persistent())

    # -- graph construction ---------------------------------------------------

    def successor(
        self,
        pred: ExplodedNode,
        point: ProgramPoint,
        state: ProgramState,
        visits: PMap,
        written: Optional[MemRegion] = None,
    ) -> None:
        if self._stopped:
            return
        if isinstance(point, BlockEntrance):
            key = (point.frame, point.block)
            count = visits.get(key, 0) + 1
            if count > self.budget.max_block_visits:
                self.stats["block_visit_exhausted"] += 1
                return
            visits = visits.set(key, count)
        node, new = self.graph.get_or_create(point, state)
        self.graph.add_edge(pred, node)
        if new:
            node.written = written
            self.stats["nodes"] += 1
            self._stack.append((node, visits))
            if self.stats["nodes"] >= self.budget.max_nodes:
                self.stats["node_budget_exhausted"] += 1
                self._stopped = True

    def run(self) -> TopLevelResult:
        frame = Frame(self.fn.name)
        st = ProgramState()
        for p in self.fn.params:
            st, sym = self.conjure(st, p.name, numbered=False)
            st = st.bind(VarRegion(frame, p.id, p.name), sym)
        cfg = self.cfgs[self.fn.name]
        root, _ = self.graph.get_or_create(BlockEntrance(cfg.entry, frame), st)
        self.graph.roots.append(root.id)
        self.stats["nodes"] += 1
        self._stack.append((root, pmap({(frame, cfg.entry): 1})))
        while self._stack and not self._stopped:
            node, visits = self._stack.pop()
            self.step(node, visits)
        reports = dedup_sorted(r for r, _ in self.reports)
        self.stats["top_level_functions"] = 1
        return TopLevelResult(
            self.fn.name, self.graph, reports, list(self.reports), self.stats, self.inlined, self.dumps, self.fn.id
        )

    def step(self, node: ExplodedNode, visits: PMap) -> None:
        p = node.point
        frame = p.frame
        cfg = self.cfgs[frame.function]
        match p:
            case BlockEntrance():
                blk = cfg.block(p.block)
                if blk.elements:
                    self.successor(node, PreStmt(p.block, 0, blk.elements[0].id, frame), node.state, visits)
                else:
                    self.terminator(node, cfg, p.block, node.state, visits)
            case PreStmt():
                self.pre_stmt(node, cfg, p, visits)
            case PostStmt():
                self.post_stmt(node, cfg, p, visits)
            case BranchTaken():
                term = cfg.block(p.block).terminator
                target = term.true_target if p.which else term.false_target
                self.successor(node, BlockEntrance(target, frame), node.state, visits)
            case CallEnter():
                callee_cfg = self.cfgs[p.callee]
                self.successor(node, BlockEntrance(callee_cfg.entry, frame), node.state, visits)
            case CallExit():
                caller = frame.parent
                self.successor(
                    node,
                    PostStmt(frame.return_block, frame.return_index, p.call, caller),
                    node.state,
                    visits,
                )
            case EndOfFunction():
                self.end_of_function(node, cfg, frame, visits)

    def run_hooks(self, hook: str, node: ExplodedNode, state: ProgramState, frame: Frame, *args) -> Optional[ProgramState]:
        """Dispatch one callback to every checker; None means the path ended in a sink."""
        if not self.checkers:
            return state
        ctx = CheckerContext(self, node, state, frame)
        for checker in self.checkers:
            getattr(checker, hook)(ctx, *args)
            if ctx.sink:
                break
        for pending in ctx.reports:
            self.reports.append((self.build_report(node, pending), node.id))
        if ctx.sink:
            node.sink = True
            self.stats["sinks"] += 1
            return None
        return ctx.state

    def build_report(self, node: ExplodedNode, pending: PendingReport) -> Report:
        events = _PathBuilder(self).events(node, pending.interesting)
        loc = pending.loc
        events.append(PathEvent(loc.file, loc.line, loc.column, EventKind.EVENT, pending.message))
        return make_report(pending.checker, pending.message, loc, events)

    def pre_stmt(self, node: ExplodedNode, cfg: Cfg, p: PreStmt, visits: PMap) -> None:
        frame = p.frame
        elem = cfg.block(p.block).elements[p.index]
        st = self.run_hooks("pre_stmt", node, node.state, frame, elem)
        if st is not None and isinstance(elem, ast.Call):
            st = self.run_hooks("pre_call", node, st, frame, elem)
        if st is None:
            return
        if isinstance(elem, ast.Call) and self.try_inline(node, cfg, p, st, visits):
            return
        outcome = self.evaluate(st, frame, elem, cfg)
        if outcome is None:
            # Concrete division by zero with no checker to report it.
            node.sink = True
            self.stats["sinks"] += 1
            return
        st, written = outcome
        self.successor(node, PostStmt(p.block, p.index, elem.id, frame), st, visits, written)

    def post_stmt(self, node: ExplodedNode, cfg: Cfg, p: PostStmt, visits: PMap) -> None:
        frame = p.frame
        blk = cfg.block(p.block)
        elem = blk.elements[p.index]
        st = self.run_hooks("post_stmt", node, node.state, frame, elem)
        if st is not None and isinstance(elem, ast.Call):
            st = self.run_hooks("post_call", node, st, frame, elem)
        if st is None:
            return
        if is_full_statement(elem):
            st = self.collect(st, frame, self.liveness[frame.function].after(p.block, p.index), clear_env=True)
        if p.index + 1 < len(blk.elements):
            nxt = blk.elements[p.index + 1]
            self.successor(node, PreStmt(p.block, p.index + 1, nxt.id, frame), st, visits)
        else:
            self.terminator(node, cfg, p.block, st, visits)

    def terminator(self, node: ExplodedNode, cfg: Cfg, bid: int, st: ProgramState, visits: PMap) -> None:
        frame = node.point.frame
        term = cfg.block(bid).terminator
        match term:
            case Jump():
                self.successor(node, BlockEntrance(term.target, frame), st, visits)
            case CondBranch():
                value = st.value(frame, term.cond.id)
                st = self.run_hooks("branch_condition", node, st, frame, term.cond, value)
                if st is None:
                    return
                arms = self.branch_states(st, frame, term.cond, value)
                live = self.liveness[frame.function]
                # Explore the true arm first: the stack is LIFO.
                for which in (False, True):
                    arm = arms.get(which)
                    if arm is None:
                        continue
                    if term.stmt is not None:
                        target = term.true_target if which else term.false_target
                        arm = self.collect(arm, frame, live.block_in[target], clear_env=True)
                    self.successor(node, BranchTaken(bid, which, frame), arm, visits)
            case Return():
                ret = st.value(frame, term.value.id) if term.value is not None else None
                st = self.pop_env(st, frame)
                if ret is not None:
                    st = st.bind_expr(frame, self.info.functions[frame.function].id, ret)
                st = self.collect(st, frame, frozenset(), clear_env=False)
                self.successor(node, EndOfFunction(frame), st, visits)

    def pop_env(self, st: ProgramState, frame: Frame) -> ProgramState:
        if not self.gc:
            return st
        ev = st.env.evolver()
        for key in st.env.keys():
            if key[0] == frame:
                del ev[key]
        return replace(st, env=ev.persistent())

    def branch_states(self, st: ProgramState, frame: Frame, cond: ast.Node, value: SVal) -> dict[bool, ProgramState]:
        if isinstance(value, ConcreteInt):
            return {value.value != 0: st}
        if isinstance(cond, ast.BinaryOp) and cond.op in ast.RELATIONAL_OPS:
            lhs, rhs = st.value(frame, cond.left.id), st.value(frame, cond.right.id)
            if isinstance(lhs, Symbolic) and isinstance(rhs, ConcreteInt):
                return self._assume_both(st, lhs.expr, cond.op, rhs.value)
            if isinstance(lhs, ConcreteInt) and isinstance(rhs, Symbolic):
                return self._assume_both(st, rhs.expr, C.FLIPPED[cond.op], lhs.value)
            return {True: st, False: st}
        if isinstance(value, Symbolic):
            return self._assume_both(st, value.expr, "!=", 0)
        return {True: st, False: st}

    def _assume_both(self, st: ProgramState, e: C.SymExpr, rel: str, c: int) -> dict[bool, ProgramState]:
        arms = {}
        for which in (True, False):
            cm = C.assume(st.constraints, e, rel, c, holds=which)
            if cm is not None:
                arms[which] = st.with_constraints(cm)
        return arms

    def end_of_function(self, node: ExplodedNode, cfg: Cfg, frame: Frame, visits: PMap) -> None:
        st = node.state
        if frame.parent is None:
            self.run_hooks("end_of_path", node, st, frame)
            self.stats["paths_completed"] += 1
            return
        fn_id = self.info.functions[frame.function].id
        ret = st.env.get((frame, fn_id))
        st = self.pop_frame(st, frame)
        if ret is not None:
            st = st.bind_expr(frame.parent, frame.call_site, ret)
        st = self.collect(st, frame.parent, None, clear_env=False)
        self.successor(node, CallExit(frame.call_site, frame), st, visits)

    # -- calls -------------------------------------------------------------------

    def should_inline(self, callee: Optional[ast.FunctionDecl], caller: Frame) -> bool:
        if callee is None or callee.body is None:
            return False
        size = len(self.cfgs[callee.name])
        b = self.budget
        small = size <= b.small_fn_blocks
        if not (caller.depth < b.max_call_depth or (small and caller.depth < SMALL_FN_DEPTH_CAP)):
            return False
        if size >= b.large_cfg_blocks and self.large_inlines[callee.name] >= b.max_inline_of_large:
            return False
        return True

    def try_inline(self, node: ExplodedNode, cfg: Cfg, p: PreStmt, st: ProgramState, visits: PMap) -> bool:
        call = cfg.block(p.block).elements[p.index]
        if self.info.is_intrinsic(call.name):
            return False
        callee = self.info.functions.get(call.name)
        frame = p.frame
        if not self.should_inline(callee, frame):
            return False
        bindings = []
        for param, arg in zip(callee.params, call.args):
            if param.by_ref:
                if isinstance(arg, ast.VarRef):
                    target = self.resolve(st, frame, arg.decl, arg.name)
                else:
                    target = self.element_region(frame, arg, st.value(frame, arg.index.id))
                    if target is None:
                        return False
                bindings.append((param, RegionVal(target)))
            else:
                bindings.append((param, st.value(frame, arg.id)))
        new_frame = Frame(callee.name, call.id, frame, p.block, p.index)
        for param, v in bindings:
            st = st.bind(VarRegion(new_frame, param.id, param.name), v)
        self.inlined.add(callee.name)
        self.stats["inlined_calls"] += 1
        self.stats["max_call_depth"] = max(self.stats["max_call_depth"], new_frame.depth)
        if len(self.cfgs[callee.name]) >= self.budget.large_cfg_blocks:
            self.large_inlines[callee.name] += 1
        self.successor(node, CallEnter(call.id, callee.name, new_frame), st, visits)
        return True

    def conservative_call(self, st: ProgramState, frame: Frame, call: ast.Call, cfg: Cfg) -> ProgramState:
        """Model an unavailable or over-budget callee: fresh result, by-ref arguments invalidated."""
        self.stats["conservative_calls"] += 1
        for arg in cfg.by_ref_args(call):
            if isinstance(arg, ast.VarRef):
                region = self.resolve(st, frame, arg.decl, arg.name)
                if isinstance(region, ElementRegion):
                    st = self.invalidate_array(st, region.base)
                else:
                    st, sym = self.conjure(st, arg.name)
                    st = st.bind(region, sym)
            else:
                st = self.invalidate_array(st, VarRegion(frame, arg.base.decl, arg.base.name))
        sig = self.info.signature(call.name)
        if sig.return_type == ast.INT:
            st, sym = self.conjure(st, call.name)
            st = st.bind_expr(frame, call.id, sym)
        return st

    def intrinsic_call(self, st: ProgramState, frame: Frame, call: ast.Call) -> ProgramState:
        match call.name:
            case "input" | "open":
                st, sym = self.conjure(st, call.name)
                return st.bind_expr(frame, call.id, sym)
            case "sa_dump":
                v = st.value(frame, call.args[0].id)
                self.dumps.append(sa_dump_line(call.loc, v, st.constraints))
        return st

    # -- transfer functions ---------------------------------------------------------

    def evaluate(
        self, st: ProgramState, frame: Frame, elem, cfg: Cfg
    ) -> Optional[tuple[ProgramState, Optional[MemRegion]]]:
        """Apply one element; None signals a concrete division by zero."""
        val = st.value
        match elem:
            case ast.IntLit():
                return st.bind_expr(frame, elem.id, ConcreteInt(elem.value)), None
            case ast.VarRef():
                st, v = self.load(st, self.resolve(st, frame, elem.decl, elem.name))
                return st.bind_expr(frame, elem.id, v), None
            case ast.ArrayIndex():
                region = self.element_region(frame, elem, val(frame, elem.index.id))
                if region is None:
                    return st.bind_expr(frame, elem.id, UNKNOWN), None
                st, v = self.load(st, region)
                return st.bind_expr(frame, elem.id, v), None
            case ast.UnaryOp():
                v = self.unary(st, elem.op, val(frame, elem.operand.id))
                return st.bind_expr(frame, elem.id, v), None
            case ast.BinaryOp():
                v = self.binary(st, elem.op, val(frame, elem.left.id), val(frame, elem.right.id))
                if v is None:
                    return None
                return st.bind_expr(frame, elem.id, v), None
            case SetValue():
                return st.bind_expr(frame, elem.target.id, ConcreteInt(elem.value)), None
            case ast.VarDecl():
                region = VarRegion(frame, elem.id, elem.name)
                if elem.array_len is not None:
                    return self.pop_region(st, region), None
                if elem.init is None:
                    return replace(st, store=st.store.discard(region)), None
                return st.bind(region, val(frame, elem.init.id)), region
            case ast.AssignStmt():
                target = elem.target
                v = val(frame, elem.value.id)
                if isinstance(target, ast.VarRef):
                    region = self.resolve(st, frame, target.decl, target.name)
                    return st.bind(region, v), region
                region = self.element_region(frame, target, val(frame, target.index.id))
                if region is None:
                    base = VarRegion(frame, target.base.decl, target.base.name)
                    return self.store_value(st, ElementRegion(base, UNKNOWN), v), None
                return self.store_value(st, region, v), region
            case ast.ExprStmt():
                return st, None
            case ast.Call():
                if self.info.is_intrinsic(elem.name):
                    return self.intrinsic_call(st, frame, elem), None
                return self.conservative_call(st, frame, elem, cfg), None
        raise TypeError(f"cannot evaluate {elem.kind}")

    def pop_region(self, st: ProgramState, base: VarRegion) -> ProgramState:
        sv = st.store.evolver()
        for r in st.store.keys():
            if r == base or _is_element_of(r, base):
                del sv[r]
        return replace(st, store=sv.persistent())

    def unary(self, st: ProgramState, op: str, v: SVal) -> SVal:
        if isinstance(v, ConcreteInt):
            return ConcreteInt(C.eval_concrete_unop(op, v.value))
        if isinstance(v, UndefinedVal):
            return UNDEFINED
        if op == "!" and isinstance(v, Symbolic):
            z = C.query_zeroness(st.constraints, v.expr)
            if z is C.Zeroness.ONLY_ZERO:
                return ConcreteInt(1)
            if z is C.Zeroness.NEVER_ZERO:
                return ConcreteInt(0)
        return UNKNOWN

    def binary(self, st: ProgramState, op: str, lhs: SVal, rhs: SVal) -> Optional[SVal]:
        if op in ("/", "%") and rhs == ConcreteInt(0):
            return None
        if isinstance(lhs, UndefinedVal) or isinstance(rhs, UndefinedVal):
            return UNDEFINED
        if isinstance(lhs, ConcreteInt) and isinstance(rhs, ConcreteInt):
            return ConcreteInt(C.eval_concrete_binop(lhs.value, op, rhs.value))
        if op in ("+", "-") and isinstance(lhs, Symbolic) and isinstance(rhs, ConcreteInt):
            k = rhs.value if op == "+" else -rhs.value
            return _offset(lhs, k)
        if op == "+" and isinstance(lhs, ConcreteInt) and isinstance(rhs, Symbolic):
            return _offset(rhs, lhs.value)
        if op in ast.RELATIONAL_OPS:
            # Decide the comparison when the constraints already do.
            if isinstance(lhs, Symbolic) and isinstance(rhs, ConcreteInt):
                return _decide(st.constraints, lhs.expr, op, rhs.value)
            if isinstance(lhs, ConcreteInt) and isinstance(rhs, Symbolic):
                return _decide(st.constraints, rhs.expr, C.FLIPPED[op], lhs.value)
        return UNKNOWN


def _offset(v: Symbolic, k: int) -> SVal:
    e = C.offset_expr(v.expr, k)
    return Symbolic(e)


def _decide(cm: PMap, e: C.SymExpr, rel: str, c: int) -> SVal:
    rs = C.range_of(cm, e)
    allowed = C.relation_set(rel, c)
    if rs.intersect(allowed) == rs:
        return ConcreteInt(1)
    if rs.intersect(allowed).is_empty():
        return ConcreteInt(0)
    return UNKNOWN


def _is_element_of(region: MemRegion, base: VarRegion) -> bool:
    return isinstance(region, ElementRegion) and region.base == base


def value_range(cm: PMap, v: SVal) -> Optional[C.RangeSet]:
    if isinstance(v, ConcreteInt):
        return C.RangeSet.point(v.value)
    if isinstance(v, Symbolic):
        return C.range_of(cm, v.expr)
    if isinstance(v, UnknownVal):
        return C.RangeSet.full()
    return None


def sa_dump_line(loc, v: SVal, cm: PMap) -> str:
    rs = value_range(cm, v)
    text = str(rs) if rs is not None else "∅"
    return f"sa_dump @{loc.file}:{loc.line}: {v} ; constraints: {text}"


# -- path notes -------------------------------------------------------------------------


def _branch_event(term: CondBranch, which: bool) -> PathEvent:
    loc = term.cond.loc
    if term.stmt is not None and term.whole:
        outcome = which != term.negated
        kind = EventKind.BRANCH_TRUE if outcome else EventKind.BRANCH_FALSE
        note = f"Taking {'true' if outcome else 'false'} branch"
    else:
        kind = EventKind.BRANCH_TRUE if which else EventKind.BRANCH_FALSE
        text = expr_text(term.cond)
        if text.startswith("(") and text.endswith(")"):
            text = text[1:-1]
        note = f"Assuming '{text}' is {'true' if which else 'false'}"
    return PathEvent(loc.file, loc.line, loc.column, kind, note)


def _write_event(elem, v: SVal) -> PathEvent:
    loc = elem.loc
    if isinstance(elem, ast.VarDecl):
        note = f"'{elem.name}' initialized to {v}"
    else:
        note = f"The value {v} is assigned to '{expr_text(elem.target)}'"
    return PathEvent(loc.file, loc.line, loc.column, EventKind.EVENT, note)


def _declared_event(elem: ast.VarDecl) -> PathEvent:
    loc = elem.loc
    return PathEvent(loc.file, loc.line, loc.column, EventKind.EVENT, f"'{elem.name}' declared without an initial value")


class _PathBuilder:
    def __init__(self, engine: TopLevelAnalysis):
        self.engine = engine

    def events(self, node: ExplodedNode, interesting: frozenset) -> list[PathEvent]:
        eng = self.engine
        out: list[PathEvent] = []
        for n in eng.graph.chain_to(node):
            p = n.point
            match p:
                case BranchTaken():
                    term = eng.cfgs[p.frame.function].block(p.block).terminator
                    out.append(_branch_event(term, p.which))
                case CallEnter():
                    loc = eng.elements[p.call].loc
                    out.append(PathEvent(loc.file, loc.line, loc.column, EventKind.CALL_ENTER, f"Calling '{p.callee}'"))
                case CallExit():
                    loc = eng.elements[p.call].loc
                    out.append(
                        PathEvent(loc.file, loc.line, loc.column, EventKind.CALL_EXIT, f"Returning from '{p.frame.function}'")
                    )
                case PostStmt() if n.written is not None and n.written in interesting:
                    elem = eng.elements[p.elem]
                    _, v = eng.load(n.state, n.written)
                    out.append(_write_event(elem, v))
                case PostStmt() if isinstance(eng.elements[p.elem], ast.VarDecl):
                    elem = eng.elements[p.elem]
                    if elem.init is None and VarRegion(p.frame, elem.id, elem.name) in interesting:
                        out.append(_declared_event(elem))
        return out


# -- whole programs ------------------------------------------------------------------------


def call_graph(info: SemaInfo) -> dict[str, list[str]]:
    """Direct callees of each defined function, in first-call order."""
    graph: dict[str, list[str]] = {}
    for fn in info.program.functions:
        if fn.body is None:
            continue
        callees: list[str] = []
        for n in ast.walk(fn.body):
            if isinstance(n, ast.Call) and n.name in info.functions and n.name not in callees:
                callees.append(n.name)
        graph[fn.name] = callees
    return graph


def top_level_order(info: SemaInfo) -> list[str]:
    """``main`` first, then functions nobody calls, then the rest; declaration order within each group."""
    defined = [fn.name for fn in info.program.functions if fn.body is not None]
    graph = call_graph(info)
    called = {c for caller, cs in graph.items() for c in cs if c != caller}
    order = [n for n in defined if n == "main"]
    order += [n for n in defined if n not in order and n not in called]
    order += [n for n in defined if n not in order]
    return order


def element_index(cfgs: dict[str, Cfg]) -> dict[int, Any]:
    out = {}
    for cfg in cfgs.values():
        for blk in cfg.blocks:
            for e in blk.elements:
                out[e.id] = e
            term = blk.terminator
            if isinstance(term, CondBranch):
                out.setdefault(term.cond.id, term.cond)
    return out


def analyze_program(
    info: SemaInfo,
    budget: Optional[AnalysisBudget] = None,
    checkers: Iterable[Checker] = (),
    gc: bool = True,
    cfgs: Optional[dict[str, Cfg]] = None,
    only: Optional[Iterable[str]] = None,
) -> ProgramResult:
    """Analyze every top-level function of a desugared, typed program.

    ``only`` restricts the top-level candidates (the inlining rules still apply).
    """
    budget = budget or AnalysisBudget()
    checkers = list(checkers)
    if cfgs is None:
        cfgs = {fn.name: build_cfg(fn, info) for fn in info.program.functions if fn.body is not None}
    liveness = {name: LiveAfter.compute(cfg) for name, cfg in cfgs.items()}
    elements = element_index(cfgs)
    visited: set[str] = set()
    results: list[TopLevelResult] = []
    wanted = set(only) if only is not None else None
    for name in top_level_order(info):
        if name in visited or (wanted is not None and name not in wanted):
            continue
        engine = TopLevelAnalysis(info, cfgs, liveness, elements, info.functions[name], budget, checkers, gc)
        res = engine.run()
        visited.add(name)
        visited |= res.inlined
        results.append(res)
    stats: Counter = Counter({k: 0 for k in STAT_KEYS})
    for r in results:
        for k, v in r.stats.items():
            stats[k] = max(stats[k], v) if k == "max_call_depth" else stats[k] + v
    reports = dedup_sorted(rep for r in results for rep in r.reports)
    dumps = [line for r in results for line in r.dumps]
    return ProgramResult(reports, dict(stats), results, dumps)
