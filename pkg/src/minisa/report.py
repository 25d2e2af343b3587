"""Diagnostics, runs, suppression and run diffing."""

from __future__ import annotations

import enum
import json
import os
import re
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Optional

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3
MASK64 = (1 << 64) - 1

RUN_SCHEMA_VERSION = 1


def fnv1a_64(data: bytes) -> int:
    h = FNV_OFFSET
    for byte in data:
        h ^= byte
        h = (h * FNV_PRIME) & MASK64
    return h


class Severity(enum.Enum):
    HIGH = "HIGH"
    MEDIUM = "MEDIUM"
    LOW = "LOW"
    STYLE = "STYLE"


def severity_for(checker: str) -> Severity:
    family = checker.split(".", 1)[0]
    return {
        "core": Severity.HIGH,
        "flow": Severity.MEDIUM,
        "resource": Severity.MEDIUM,
        "style": Severity.STYLE,
    }.get(family, Severity.LOW)


class EventKind(enum.Enum):
    EVENT = "Event"
    BRANCH_TRUE = "BranchTrue"
    BRANCH_FALSE = "BranchFalse"
    CALL_ENTER = "CallEnter"
    CALL_EXIT = "CallExit"


@dataclass(frozen=True)
class PathEvent:
    file: str
    line: int
    col: int
    kind: EventKind
    note: str

    def to_json(self) -> dict:
        return {"file": self.file, "line": self.line, "col": self.col, "kind": self.kind.value, "note": self.note}

    @classmethod
    def from_json(cls, d: Mapping) -> PathEvent:
        return cls(d["file"], d["line"], d["col"], EventKind(d["kind"]), d["note"])


@dataclass(frozen=True)
class Report:
    checker: str
    severity: Severity
    message: str
    file: str
    line: int
    col: int
    path: tuple[PathEvent, ...] = ()

    @property
    def hash(self) -> int:
        return compute_report_hash(self)

    @property
    def hash_hex(self) -> str:
        return f"{self.hash:016x}"

    def sort_key(self) -> tuple:
        return (self.file, self.line, self.col, self.checker, self.message)

    def to_json(self) -> dict:
        return {
            "hash": self.hash_hex,
            "checker": self.checker,
            "severity": self.severity.value,
            "message": self.message,
            "file": self.file,
            "line": self.line,
            "col": self.col,
            "path": [e.to_json() for e in self.path],
        }

    @classmethod
    def from_json(cls, d: Mapping) -> Report:
        rep = cls(
            d["checker"],
            Severity(d["severity"]),
            d["message"],
            d["file"],
            d["line"],
            d["col"],
            tuple(PathEvent.from_json(e) for e in d["path"]),
        )
        if "hash" in d and d["hash"] != rep.hash_hex:
            raise ValueError(f"hash mismatch for report at {rep.file}:{rep.line}")
        return rep


def make_report(checker: str, message: str, loc, path: Iterable[PathEvent] = ()) -> Report:
    """Build a report at a :class:`SourceLocation`; the path defaults to one event there."""
    path = tuple(path) or (PathEvent(loc.file, loc.line, loc.column, EventKind.EVENT, message),)
    return Report(checker, severity_for(checker), message, loc.file, loc.line, loc.column, path)


def compute_report_hash(report: Report) -> int:
    """FNV-1a over ``checker:basename:line:col:message``. The path is excluded."""
    key = f"{report.checker}:{os.path.basename(report.file)}:{report.line}:{report.col}:{report.message}"
    return fnv1a_64(key.encode("utf-8"))


def dedup_sorted(reports: Iterable[Report]) -> list[Report]:
    """Sort by location and drop duplicate hashes, keeping the shortest path."""
    best: dict[int, Report] = {}
    for r in reports:
        h = r.hash
        if h not in best or len(r.path) < len(best[h].path):
            best[h] = r
    return sorted(best.values(), key=Report.sort_key)


@dataclass
class Run:
    name: str
    timestamp: str
    tool_version: str
    reports: list[Report] = field(default_factory=list)
    stats: dict[str, int] = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "version": RUN_SCHEMA_VERSION,
            "run_name": self.name,
            "timestamp": self.timestamp,
            "tool_version": self.tool_version,
            "stats": dict(sorted(self.stats.items())),
            "reports": [r.to_json() for r in self.reports],
        }

    @classmethod
    def from_json(cls, d: Mapping) -> Run:
        if d.get("version") != RUN_SCHEMA_VERSION:
            raise ValueError(f"unsupported run version {d.get('version')!r}")
        stats = d["stats"]
        if not all(isinstance(v, int) for v in stats.values()):
            raise ValueError("run stats must be integers")
        return cls(
            d["run_name"],
            d["timestamp"],
            d["tool_version"],
            [Report.from_json(r) for r in d["reports"]],
            dict(stats),
        )


def dumps_run(run: Run) -> str:
    return json.dumps(run.to_json(), indent=2, ensure_ascii=False) + "\n"


def loads_run(text: str) -> Run:
    return Run.from_json(json.loads(text))


# -- suppression ----------------------------------------------------------

ANNOTATION_RE = re.compile(r"//\s*sa-suppress\(([^)]*)\)")


@dataclass(frozen=True)
class Suppression:
    source: str  # "File" | "Annotation"
    checker: str  # checker id or "*"
    file: str
    line: Optional[int]  # None matches any line

    def matches(self, report: Report) -> bool:
        if self.checker not in ("*", report.checker):
            return False
        if self.line is not None and self.line != report.line:
            return False
        return _path_suffix_match(report.file, self.file)


def _path_suffix_match(path: str, suffix: str) -> bool:
    a = os.path.normpath(path).replace(os.sep, "/").split("/")
    b = os.path.normpath(suffix).replace(os.sep, "/").split("/")
    return len(b) <= len(a) and a[len(a) - len(b):] == b


def parse_suppression_file(text: str) -> list[Suppression]:
    """One ``<checker>:<file>:<line|*>`` rule per line; ``#`` starts a comment."""
    rules = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.rsplit(":", 1)
        head = parts[0].split(":", 1)
        if len(parts) != 2 or len(head) != 2 or not head[0] or not head[1]:
            raise ValueError(f"suppression line {lineno}: expected <checker>:<file>:<line|*>")
        checker, file = head
        where = parts[1].strip()
        if where == "*":
            line_no = None
        elif where.isdigit():
            line_no = int(where)
        else:
            raise ValueError(f"suppression line {lineno}: bad line number {where!r}")
        rules.append(Suppression("File", checker.strip(), file.strip(), line_no))
    return rules


def annotation_suppressions(file: str, source: str) -> list[Suppression]:
    rules = []
    for lineno, line in enumerate(source.splitlines(), 1):
        for m in ANNOTATION_RE.finditer(line):
            for checker in m.group(1).split(","):
                if checker.strip():
                    rules.append(Suppression("Annotation", checker.strip(), file, lineno))
    return rules


def apply_suppressions(
    run: Run,
    suppressions: Iterable[Suppression],
    sources: Optional[Mapping[str, str]] = None,
) -> tuple[Run, int]:
    """Drop reports matched by a file rule or an in-source annotation."""
    rules = list(suppressions)
    for file, text in (sources or {}).items():
        rules.extend(annotation_suppressions(file, text))
    kept = [r for r in run.reports if not any(s.matches(r) for s in rules)]
    count = len(run.reports) - len(kept)
    stats = dict(run.stats)
    stats["suppressed"] = stats.get("suppressed", 0) + count
    return replace(run, reports=kept, stats=stats), count


# -- diffing --------------------------------------------------------------


@dataclass
class RunDiff:
    new: list[Report]
    resolved: list[Report]
    common: list[Report]


def diff_runs(old: Run, new: Run) -> RunDiff:
    old_hashes = {r.hash for r in old.reports}
    new_hashes = {r.hash for r in new.reports}
    return RunDiff(
        new=[r for r in new.reports if r.hash not in old_hashes],
        resolved=[r for r in old.reports if r.hash not in new_hashes],
        common=[r for r in new.reports if r.hash in old_hashes],
    )


# -- rendering ------------------------------------------------------------


def render_report(report: Report) -> str:
    lines = [f"{report.severity.value}: {report.file}:{report.line}:{report.col}: {report.message} [{report.checker}]"]
    for i, ev in enumerate(report.path, 1):
        lines.append(f"  {i}. {ev.file}:{ev.line}:{ev.col}: {ev.note}")
    return "\n".join(lines)


def report_count_line(n: int) -> str:
    return f"{n} report." if n == 1 else f"{n} reports."


def render(run: Run, fmt: str = "text") -> str:
    if fmt == "json":
        return dumps_run(run)
    if fmt != "text":
        raise ValueError(f"unknown format {fmt!r}")
    blocks = [render_report(r) for r in run.reports]
    blocks.append(report_count_line(len(run.reports)))
    return "\n".join(blocks) + "\n"
