"""Time oracles: map every op of a graph to a duration in microseconds."""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from types import MappingProxyType
from typing import Iterable, Mapping

from .errors import CoverageError, ParameterError, ValidationError
from .graph import Graph, OpKind


class Origin(str, enum.Enum):
    MEASURED = "measured"
    DECLARED = "declared"
    GENERAL = "general"
    SYNTHETIC = "synthetic"


@dataclass(frozen=True)
class TraceRecord:
    op_id: str
    run_index: int
    duration: int

    def __post_init__(self):
        if self.duration < 0:
            raise ValidationError(f"trace for {self.op_id!r} has negative duration")


@dataclass(frozen=True)
class TimeOracle:
    entries: Mapping[str, int]
    origin: Origin

    def __post_init__(self):
        for k, v in self.entries.items():
            if v < 0:
                raise ValidationError(f"negative time for {k!r}")
        object.__setattr__(self, "entries", MappingProxyType(dict(self.entries)))
        object.__setattr__(self, "origin", Origin(self.origin))

    def __call__(self, op_id: str) -> int:
        return self.entries[op_id]

    def __getitem__(self, op_id: str) -> int:
        return self.entries[op_id]

    def check_covers(self, g: Graph) -> None:
        missing = [op.id for op in g.ops if op.id not in self.entries]
        if missing:
            raise CoverageError(missing)

    def restricted(self, g: Graph) -> "TimeOracle":
        self.check_covers(g)
        return TimeOracle({op.id: self.entries[op.id] for op in g.ops}, self.origin)

    def to_json(self) -> dict:
        return {"origin": self.origin.value, "entries": dict(sorted(self.entries.items()))}

    @classmethod
    def from_json(cls, doc) -> "TimeOracle":
        try:
            origin = Origin(doc.get("origin", "declared"))
            entries = {str(k): int(v) for k, v in doc["entries"].items()}
        except (AttributeError, KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"malformed oracle document: {exc}") from None
        return cls(entries, origin)


def estimate_from_traces(records: Iterable[TraceRecord], graph: Graph) -> TimeOracle:
    best: dict[str, int] = {}
    for rec in records:
        if rec.op_id in best:
            best[rec.op_id] = min(best[rec.op_id], rec.duration)
        else:
            best[rec.op_id] = rec.duration
    missing = [op.id for op in graph.ops if op.id not in best]
    if missing:
        raise CoverageError(missing, what="trace records")
    return TimeOracle({op.id: best[op.id] for op in graph.ops}, Origin.MEASURED)


def general_oracle(graph: Graph) -> TimeOracle:
    """Unit cost for every recv, zero for everything else."""
    return TimeOracle(
        {op.id: 1 if op.kind is OpKind.RECV else 0 for op in graph.ops}, Origin.GENERAL
    )


def declared_oracle(graph: Graph) -> TimeOracle:
    missing = [op.id for op in graph.ops if op.declared_time is None]
    if missing:
        raise CoverageError(missing, what="declared time_us")
    return TimeOracle({op.id: op.declared_time for op in graph.ops}, Origin.DECLARED)


def _div_round_half_up(num: int, den: int) -> int:
    return (2 * num + den) // (2 * den)


def bandwidth_oracle(graph: Graph, bytes_per_us: int) -> TimeOracle:
    """Transfers take ``bytes / bandwidth`` (nearest µs, ties up); others keep declared times."""
    if bytes_per_us <= 0:
        raise ParameterError("bandwidth must be a positive integer (bytes per µs)")
    entries, missing = {}, []
    for op in graph.ops:
        if op.kind.is_transfer and op.bytes is not None:
            entries[op.id] = _div_round_half_up(op.bytes, bytes_per_us)
        elif op.declared_time is not None:
            entries[op.id] = op.declared_time
        else:
            missing.append(op.id)
    if missing:
        raise CoverageError(missing, what="bytes or time_us")
    return TimeOracle(entries, Origin.SYNTHETIC)


def parse_traces(text: str) -> list[TraceRecord]:
    records = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        try:
            d = json.loads(line)
            records.append(TraceRecord(str(d["op"]), int(d["run"]), int(d["us"])))
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"trace line {lineno}: {exc}") from None
    return records


def dump_traces(records: Iterable[TraceRecord]) -> str:
    return "".join(
        json.dumps({"op": r.op_id, "run": r.run_index, "us": r.duration}) + "\n"
        for r in records
    )
