"""Communication dependencies and the per-op scheduling properties.

For an outstanding set of recvs ``R`` every op gets

* ``M``: outstanding transfer time it still waits on,

and every recv in ``R`` gets

* ``P``: compute unlocked by completing that recv alone,
* ``M_plus``: cheapest outstanding communication that activates some
  consumer of the recv (the recv's own time included).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, Mapping

from .errors import DomainError
from .graph import Graph, OpKind
from .timing import TimeOracle

INF = math.inf


class PropertyMode(str, enum.Enum):
    # M_plus only from consumers with >1 outstanding dependency
    LITERAL = "literal"
    # M_plus also from single-dependency consumers (default)
    AMENDED = "amended"


def find_dependencies(g: Graph) -> dict[str, frozenset[str]]:
    """Recv ancestors of every op (a recv includes itself), by post-order DFS."""
    dep: dict[str, frozenset[str]] = {}
    for root in g.op_map:
        if root in dep:
            continue
        stack = [(root, False)]
        while stack:
            node, expanded = stack.pop()
            if node in dep:
                continue
            if expanded:
                acc = set()
                for p in g.preds[node]:
                    acc |= dep[p]
                if g[node].kind is OpKind.RECV:
                    acc.add(node)
                dep[node] = frozenset(acc)
            else:
                stack.append((node, True))
                stack.extend((p, False) for p in g.preds[node] if p not in dep)
    return dep


@dataclass(frozen=True)
class PropertyTable:
    dep: Mapping[str, frozenset[str]]
    M: Mapping[str, int]
    P: Mapping[str, int]
    M_plus: Mapping[str, float]
    mode: PropertyMode

    def to_json(self) -> dict:
        def fin(x):
            return "inf" if x == INF else x

        return {
            "mode": self.mode.value,
            "dep": {k: sorted(v) for k, v in sorted(self.dep.items())},
            "M": dict(sorted(self.M.items())),
            "P": dict(sorted(self.P.items())),
            "M_plus": {k: fin(v) for k, v in sorted(self.M_plus.items())},
        }


def update_properties(
    g: Graph,
    time: TimeOracle,
    outstanding: Iterable[str],
    mode: PropertyMode = PropertyMode.AMENDED,
    dep: Mapping[str, frozenset[str]] | None = None,
) -> PropertyTable:
    R = frozenset(outstanding)
    for r in R:
        if r not in g.op_map or g[r].kind is not OpKind.RECV:
            raise DomainError(f"outstanding member {r!r} is not a recv op of the graph")
    if dep is None:
        dep = find_dependencies(g)
    mode = PropertyMode(mode)
    amended = mode is PropertyMode.AMENDED

    M = {}
    for op in g.ops:
        M[op.id] = sum(time[x] for x in dep[op.id] & R)
    P = {r: 0 for r in R}
    M_plus = {r: INF for r in R}
    for op in g.ops:
        if op.id in R:
            continue
        D = dep[op.id] & R
        if len(D) == 1:
            (r,) = D
            P[r] += time[op.id]
        if len(D) > 1 or (amended and len(D) == 1):
            m = M[op.id]
            for r in D:
                if m < M_plus[r]:
                    M_plus[r] = m
    return PropertyTable(dep=dep, M=M, P=P, M_plus=M_plus, mode=mode)
