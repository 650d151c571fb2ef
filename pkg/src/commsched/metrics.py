"""Makespan bounds, scheduling efficiency, speedup and the brute-force oracle."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Optional

from .errors import DegenerateBoundsError, ParameterError
from .graph import Graph
from .schedulers import PrioritySchedule
from .sim import Enforcement, IterationStats, SimPolicy, simulate
from .timing import TimeOracle


@dataclass(frozen=True)
class MakespanBounds:
    upper: int
    lower: int


def makespan_bounds(g: Graph, time: TimeOracle) -> MakespanBounds:
    """Upper: everything serialised. Lower: the busiest single resource."""
    time.check_covers(g)
    per_res: dict = {}
    for op in g.ops:
        per_res[op.resource] = per_res.get(op.resource, 0) + time[op.id]
    return MakespanBounds(upper=sum(per_res.values()), lower=max(per_res.values()))


def efficiency(bounds: MakespanBounds, m: int) -> Fraction:
    span = bounds.upper - bounds.lower
    if span == 0:
        raise DegenerateBoundsError(
            "upper and lower makespan bounds coincide; scheduling cannot matter"
        )
    return Fraction(bounds.upper - m, span)


def speedup(bounds: MakespanBounds) -> Fraction:
    if bounds.lower == 0:
        raise DegenerateBoundsError("lower makespan bound is zero; speedup undefined")
    return Fraction(bounds.upper - bounds.lower, bounds.lower)


@dataclass(frozen=True)
class EfficiencyReport:
    bounds: MakespanBounds
    measured: int
    efficiency: Optional[Fraction]
    speedup: Optional[Fraction]
    straggler: Optional[IterationStats] = None

    def to_json(self) -> dict:
        doc = {
            "U_us": self.bounds.upper,
            "L_us": self.bounds.lower,
            "m_us": self.measured,
            "E": rational_json(self.efficiency),
            "S": rational_json(self.speedup),
            "straggler": None if self.straggler is None else self.straggler.to_json(),
        }
        if self.straggler is not None:
            doc["straggler"]["fraction"] = rational_json(self.straggler.straggler_fraction)
        return doc


def rational_json(x: Optional[Fraction]):
    if x is None:
        return None
    return {"num": x.numerator, "den": x.denominator, "decimal": f"{float(x):.6f}"}


def efficiency_report(
    g: Graph, time: TimeOracle, m: int, straggler: Optional[IterationStats] = None
) -> EfficiencyReport:
    b = makespan_bounds(g, time)
    try:
        e = efficiency(b, m)
    except DegenerateBoundsError:
        e = None
    try:
        s = speedup(b)
    except DegenerateBoundsError:
        s = None
    return EfficiencyReport(b, m, e, s, straggler)


@dataclass(frozen=True)
class BruteForceResult:
    best_order: list[str]
    best_makespan: int
    distribution: list[int]


def brute_force_best(
    g: Graph,
    time: TimeOracle,
    policy: SimPolicy = SimPolicy(),
    max_recvs: int = 8,
) -> BruteForceResult:
    """Simulate every recv permutation under counter gating.

    Permutations are visited in lexicographic order of recv ids, so the
    first optimum found is the lexicographically least one;
    ``distribution[i]`` is the makespan of the i-th permutation.
    """
    recvs = sorted(g.recv_ids)
    if len(recvs) > max_recvs:
        raise ParameterError(
            f"{len(recvs)} recvs exceed max_recvs={max_recvs} "
            f"({math.factorial(len(recvs))} permutations)"
        )
    policy = replace(policy, enforcement=Enforcement.COUNTER_GATE)
    best_order, best = None, None
    dist = []
    for perm in itertools.permutations(recvs):
        m = simulate(g, time, PrioritySchedule.from_order(perm, "bruteforce", g.name), policy).makespan
        dist.append(m)
        if best is None or m < best:
            best, best_order = m, list(perm)
    return BruteForceResult(best_order, best, dist)
