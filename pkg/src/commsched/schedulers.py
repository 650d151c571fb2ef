"""Recv-op priority assignment: TIC, TAC and a seeded random baseline.

Lower priority number means transfer earlier.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Mapping, NamedTuple

from .errors import DomainError, ValidationError
from .graph import Graph
from .properties import PropertyMode, PropertyTable, find_dependencies, update_properties
from .rng import StableRng
from .timing import TimeOracle, general_oracle

ALGORITHMS = ("tic", "tac", "random")


@dataclass(frozen=True)
class PrioritySchedule:
    priorities: Mapping[str, int]
    algorithm: str = "file"
    graph: str = ""

    @property
    def total_order(self) -> bool:
        vals = sorted(self.priorities.values())
        return vals == list(range(len(vals)))

    def order(self) -> list[str]:
        """Recv ids by (priority, id)."""
        return sorted(self.priorities, key=lambda r: (self.priorities[r], r))

    def check_against(self, g: Graph) -> None:
        for r in self.priorities:
            if r not in g.op_map:
                raise DomainError(f"schedule references unknown op {r!r}")
            if not g[r].kind.is_transfer:
                raise DomainError(f"schedule entry {r!r} is not a transfer op")

    def to_json(self) -> dict:
        return {
            "graph": self.graph,
            "algorithm": self.algorithm,
            "priorities": dict(sorted(self.priorities.items())),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1) + "\n"

    @classmethod
    def from_json(cls, doc) -> "PrioritySchedule":
        try:
            pr = {str(k): int(v) for k, v in doc["priorities"].items()}
        except (KeyError, TypeError, ValueError, AttributeError) as exc:
            raise ValidationError(f"malformed schedule document: {exc}") from None
        if any(v < 0 for v in pr.values()):
            raise ValidationError("priorities must be non-negative")
        return cls(pr, str(doc.get("algorithm", "file")), str(doc.get("graph", "")))

    @classmethod
    def from_order(cls, order, algorithm="file", graph="") -> "PrioritySchedule":
        return cls({r: i for i, r in enumerate(order)}, algorithm, graph)


def dense_rank(keys: Mapping[str, float]) -> dict[str, int]:
    distinct = sorted(set(keys.values()))
    rank = {v: i for i, v in enumerate(distinct)}
    return {k: rank[v] for k, v in keys.items()}


def tic(g: Graph, mode: PropertyMode = PropertyMode.AMENDED) -> PrioritySchedule:
    """Rank recvs by impending communication load under unit transfer costs."""
    props = update_properties(g, general_oracle(g), g.recv_ids, mode)
    return PrioritySchedule(dense_rank(props.M_plus), "tic", g.name)


class RecvProps(NamedTuple):
    id: str
    P: int
    M: int
    M_plus: float


def recv_props(props: PropertyTable, r: str) -> RecvProps:
    return RecvProps(r, props.P[r], props.M[r], props.M_plus[r])


def precedes(a: RecvProps, b: RecvProps) -> bool:
    """True when recv ``a`` should be transferred before recv ``b``.

    Transferring ``a`` first overlaps better when
    ``min(P_b, M_a) < min(P_a, M_b)``; ties fall back to the smaller
    ``M_plus`` and finally to the smaller id.
    """
    lhs = min(b.P, a.M)
    rhs = min(a.P, b.M)
    if lhs != rhs:
        return lhs < rhs
    if a.M_plus != b.M_plus:
        return a.M_plus < b.M_plus
    return a.id < b.id


def tac(
    g: Graph, time: TimeOracle, mode: PropertyMode = PropertyMode.AMENDED
) -> PrioritySchedule:
    time.check_covers(g)
    dep = find_dependencies(g)
    outstanding = set(g.recv_ids)
    priorities = {}
    count = 0
    while outstanding:
        props = update_properties(g, time, outstanding, mode, dep=dep)
        # comparator need not be transitive: keep incumbent unless strictly beaten
        cands = [recv_props(props, r) for r in sorted(outstanding)]
        best = cands[0]
        for c in cands[1:]:
            if precedes(c, best):
                best = c
        outstanding.remove(best.id)
        priorities[best.id] = count
        count += 1
    return PrioritySchedule(priorities, "tac", g.name)


def random_schedule(g: Graph, seed: int) -> PrioritySchedule:
    order = list(g.recv_ids)
    StableRng(seed).shuffle(order)
    return PrioritySchedule.from_order(order, "random", g.name)
