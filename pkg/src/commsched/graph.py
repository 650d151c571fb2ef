"""Computational-graph data model, validation and JSON (de)serialisation.

Times are integer microseconds throughout the package.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Optional

from .errors import ValidationError


class OpKind(str, enum.Enum):
    COMPUTE = "compute"
    RECV = "recv"
    SEND = "send"
    PS_AGGREGATE = "ps_aggregate"
    PS_READ = "ps_read"
    PS_UPDATE = "ps_update"

    @property
    def is_transfer(self) -> bool:
        return self in (OpKind.RECV, OpKind.SEND)


class Unit(str, enum.Enum):
    COMPUTE = "compute"
    CHANNEL = "channel"


class Partition(str, enum.Enum):
    WORKER = "worker"
    CLUSTER = "cluster"


@dataclass(frozen=True, order=True)
class ResourceId:
    device: str
    unit: Unit
    name: str

    @property
    def is_channel(self) -> bool:
        return self.unit is Unit.CHANNEL

    def label(self) -> str:
        return f"{self.device}/{self.unit.value}/{self.name}"

    def to_json(self) -> dict:
        return {"device": self.device, "unit": self.unit.value, "name": self.name}


@dataclass(frozen=True)
class Op:
    id: str
    kind: OpKind
    resource: ResourceId
    declared_time: Optional[int] = None
    bytes: Optional[int] = None

    def to_json(self) -> dict:
        d = {"id": self.id, "kind": self.kind.value, "resource": self.resource.to_json()}
        if self.declared_time is not None:
            d["time_us"] = self.declared_time
        if self.bytes is not None:
            d["bytes"] = self.bytes
        return d


@dataclass(frozen=True)
class Graph:
    """Immutable, validated DAG of ops.

    Build through :func:`make_graph` (or :func:`parse_graph`); the
    constructor itself does not validate.
    """

    name: str
    ops: tuple[Op, ...]
    edges: tuple[tuple[str, str], ...]
    partition: Partition = Partition.WORKER

    @cached_property
    def op_map(self) -> dict[str, Op]:
        return {op.id: op for op in self.ops}

    @cached_property
    def preds(self) -> dict[str, tuple[str, ...]]:
        p = {op.id: [] for op in self.ops}
        for a, b in self.edges:
            p[b].append(a)
        return {k: tuple(v) for k, v in p.items()}

    @cached_property
    def succs(self) -> dict[str, tuple[str, ...]]:
        s = {op.id: [] for op in self.ops}
        for a, b in self.edges:
            s[a].append(b)
        return {k: tuple(v) for k, v in s.items()}

    @cached_property
    def recv_ids(self) -> tuple[str, ...]:
        return tuple(op.id for op in self.ops if op.kind is OpKind.RECV)

    @cached_property
    def resources(self) -> tuple[ResourceId, ...]:
        return tuple(sorted({op.resource for op in self.ops}))

    @cached_property
    def devices(self) -> tuple[str, ...]:
        return tuple(sorted({op.resource.device for op in self.ops}))

    def __getitem__(self, op_id: str) -> Op:
        return self.op_map[op_id]

    def __len__(self) -> int:
        return len(self.ops)

    def ops_on_device(self, device: str) -> list[Op]:
        return [op for op in self.ops if op.resource.device == device]


def make_graph(
    name: str,
    ops: Iterable[Op],
    edges: Iterable[tuple[str, str]],
    partition: Partition = Partition.WORKER,
) -> Graph:
    ops = list(ops)
    seen = set()
    for op in ops:
        if not op.id:
            raise ValidationError("op id must be non-empty")
        if op.id in seen:
            raise ValidationError(f"duplicate op id {op.id!r}")
        seen.add(op.id)
    edge_set = {(str(a), str(b)) for a, b in edges}
    g = Graph(
        name=name,
        ops=tuple(sorted(ops, key=lambda o: o.id)),
        edges=tuple(sorted(edge_set)),
        partition=partition,
    )
    validate(g)
    return g


def validate(g: Graph) -> None:
    if not g.ops:
        raise ValidationError("graph has no ops")
    for op in g.ops:
        if op.resource.is_channel and not op.kind.is_transfer:
            raise ValidationError(
                f"op {op.id!r} of kind {op.kind.value} cannot run on a channel"
            )
        if op.bytes is not None:
            if not op.kind.is_transfer:
                raise ValidationError(f"op {op.id!r}: bytes only allowed on recv/send ops")
            if op.bytes < 0:
                raise ValidationError(f"op {op.id!r}: negative bytes")
        if op.declared_time is not None and op.declared_time < 0:
            raise ValidationError(f"op {op.id!r}: negative time_us")
    ids = g.op_map
    for a, b in g.edges:
        if a not in ids or b not in ids:
            raise ValidationError(f"dangling edge {a!r} -> {b!r}")
        if a == b:
            raise ValidationError(f"self-loop on {a!r}")
    _check_acyclic(g)
    if g.partition is Partition.WORKER:
        for op in g.ops:
            if op.kind is OpKind.RECV and g.preds[op.id]:
                raise ValidationError(
                    f"recv op has incoming edge: {g.preds[op.id][0]!r} -> {op.id!r}"
                )
            if op.kind is OpKind.SEND and g.succs[op.id]:
                raise ValidationError(
                    f"send op has outgoing edge: {op.id!r} -> {g.succs[op.id][0]!r}"
                )


def _check_acyclic(g: Graph) -> None:
    white, grey, black = 0, 1, 2
    color = {op.id: white for op in g.ops}
    for root in g.op_map:
        if color[root] != white:
            continue
        color[root] = grey
        stack = [(root, iter(g.succs[root]))]
        while stack:
            node, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                color[node] = black
                stack.pop()
            elif color[nxt] == grey:
                raise ValidationError(f"cycle through edge {node!r} -> {nxt!r}")
            elif color[nxt] == white:
                color[nxt] = grey
                stack.append((nxt, iter(g.succs[nxt])))


def topo_order(g: Graph) -> list[str]:
    """Kahn's algorithm by generations; ids ascend within each generation."""
    indeg = {k: len(v) for k, v in g.preds.items()}
    level = sorted(k for k, d in indeg.items() if d == 0)
    order = []
    while level:
        order.extend(level)
        nxt = []
        for n in level:
            for s in g.succs[n]:
                indeg[s] -= 1
                if indeg[s] == 0:
                    nxt.append(s)
        level = sorted(nxt)
    return order


# --- JSON ---------------------------------------------------------------

def graph_to_json(g: Graph) -> dict:
    return {
        "name": g.name,
        "partition": g.partition.value,
        "ops": [op.to_json() for op in g.ops],
        "edges": [list(e) for e in g.edges],
    }


def serialize_graph(g: Graph) -> str:
    return json.dumps(graph_to_json(g), indent=1) + "\n"


def _enum(cls, value, what, where):
    try:
        return cls(value)
    except ValueError:
        allowed = "|".join(m.value for m in cls)
        raise ValidationError(f"{where}: bad {what} {value!r} (expected {allowed})") from None


def _opt_int(d, key, where):
    v = d.get(key)
    if v is None:
        return None
    if isinstance(v, bool) or not isinstance(v, int):
        raise ValidationError(f"{where}: {key} must be an integer")
    return v


def graph_from_json(doc) -> Graph:
    if not isinstance(doc, dict):
        raise ValidationError("graph document must be a JSON object")
    for key in ("ops", "edges"):
        if not isinstance(doc.get(key), list):
            raise ValidationError(f"graph document needs a list under {key!r}")
    partition = _enum(Partition, doc.get("partition", "worker"), "partition", "graph")
    ops = []
    for i, od in enumerate(doc["ops"]):
        where = f"ops[{i}]"
        if not isinstance(od, dict) or not isinstance(od.get("id"), str):
            raise ValidationError(f"{where}: op needs a string id")
        where = f"op {od['id']!r}"
        res = od.get("resource")
        if not isinstance(res, dict):
            raise ValidationError(f"{where}: missing resource")
        rid = ResourceId(
            device=str(res.get("device", "")),
            unit=_enum(Unit, res.get("unit"), "unit", where),
            name=str(res.get("name", "")),
        )
        ops.append(
            Op(
                id=od["id"],
                kind=_enum(OpKind, od.get("kind"), "kind", where),
                resource=rid,
                declared_time=_opt_int(od, "time_us", where),
                bytes=_opt_int(od, "bytes", where),
            )
        )
    edges = []
    for e in doc["edges"]:
        if not (isinstance(e, list) and len(e) == 2 and all(isinstance(x, str) for x in e)):
            raise ValidationError(f"malformed edge {e!r}")
        edges.append((e[0], e[1]))
    return make_graph(str(doc.get("name", "")), ops, edges, partition)


def parse_graph(text: str) -> Graph:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(
            f"malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from None
    return graph_from_json(doc)


def load_graph(path) -> Graph:
    with open(path, encoding="utf-8") as f:
        return parse_graph(f.read())
