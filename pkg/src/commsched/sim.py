"""Deterministic discrete-event simulation of one training iteration.

Each resource runs one op at a time. When a resource is free it picks from
its ready queue: the candidates are the ops carrying the lowest priority
number present plus every op without a priority, and one is chosen
uniformly at random (seeded).

With counter gating, a prioritized transfer may only enter its channel's
candidate set once the channel has handed off as many gated transfers as
there are gated transfers on that channel with a strictly lower priority
number. For a total order this is the sequence 0, 1, 2, ... per channel.
"""

from __future__ import annotations

import enum
import heapq
import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, NamedTuple, Optional

from .errors import DomainError
from .graph import Graph, OpKind, ResourceId
from .rng import StableRng, derive_seed
from .schedulers import PrioritySchedule
from .timing import TimeOracle


class Enforcement(str, enum.Enum):
    NONE = "none"
    COUNTER_GATE = "counter"


@dataclass(frozen=True)
class SimPolicy:
    enforcement: Enforcement = Enforcement.COUNTER_GATE
    unprioritized_choice_seed: int = 0
    # chance a gated transfer is let through one slot early
    reorder_noise: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "enforcement", Enforcement(self.enforcement))
        if not 0.0 <= self.reorder_noise <= 1.0:
            raise ValueError("reorder_noise must lie in [0, 1]")


class Event(NamedTuple):
    op_id: str
    resource: ResourceId
    start: int
    end: int


@dataclass
class SimReport:
    makespan: int
    events: list[Event]
    busy: dict[ResourceId, int]
    violations: int = 0
    forced: int = 0

    def transfer_order(self, channel: ResourceId) -> list[str]:
        return [e.op_id for e in self.events if e.resource == channel]

    def channel_orders(self) -> dict[ResourceId, list[str]]:
        out: dict[ResourceId, list[str]] = {}
        for e in self.events:
            if e.resource.is_channel:
                out.setdefault(e.resource, []).append(e.op_id)
        return out

    def device_makespan(self, device: str) -> int:
        return max((e.end for e in self.events if e.resource.device == device), default=0)

    def to_json(self) -> dict:
        return {
            "makespan_us": self.makespan,
            "violations": self.violations,
            "forced_releases": self.forced,
            "busy_us": {r.label(): t for r, t in sorted(self.busy.items())},
            "events": [[e.op_id, e.resource.label(), e.start, e.end] for e in self.events],
        }


def _gate_values(g: Graph, prio: Mapping[str, int]) -> dict[str, int]:
    by_channel: dict[ResourceId, list[str]] = {}
    for op_id in prio:
        res = g[op_id].resource
        if res.is_channel:
            by_channel.setdefault(res, []).append(op_id)
    gate = {}
    for ids in by_channel.values():
        for op_id in ids:
            gate[op_id] = sum(1 for o in ids if prio[o] < prio[op_id])
    return gate


def _inversions(seq: list[int]) -> int:
    return sum(1 for i in range(len(seq)) for j in range(i + 1, len(seq)) if seq[i] > seq[j])


def simulate(
    g: Graph,
    time: TimeOracle,
    schedule: Optional[PrioritySchedule] = None,
    policy: SimPolicy = SimPolicy(),
) -> SimReport:
    time.check_covers(g)
    prio: dict[str, int] = {}
    if schedule is not None:
        schedule.check_against(g)
        prio = dict(schedule.priorities)
    gated = policy.enforcement is Enforcement.COUNTER_GATE
    gate = _gate_values(g, prio) if gated else {}

    choice_rng = StableRng(policy.unprioritized_choice_seed)
    noise_rng = StableRng(derive_seed(policy.unprioritized_choice_seed, 0x6E6F697365))
    early_ok: dict[str, bool] = {}

    waiting = {k: len(v) for k, v in g.preds.items()}
    queues: dict[ResourceId, list[str]] = {r: [] for r in g.resources}
    for op_id, n in waiting.items():
        if n == 0:
            queues[g[op_id].resource].append(op_id)
    handed_off = {r: 0 for r in g.resources}
    running: set[ResourceId] = set()
    heap: list[tuple[int, int, str]] = []
    starts: dict[str, tuple[int, int]] = {}
    finished: list[tuple[int, int, str, int]] = []
    seq = 0
    now = 0
    done = 0
    forced = 0

    def admission(op_id: str, res: ResourceId) -> int:
        """0 blocked, 1 admitted in turn, 2 released one slot early."""
        if op_id not in gate:
            return 1
        need, have = gate[op_id], handed_off[res]
        if need <= have:
            return 1
        if policy.reorder_noise > 0 and need == have + 1:
            if op_id not in early_ok:
                early_ok[op_id] = noise_rng.random() < policy.reorder_noise
            return 2 if early_ok[op_id] else 0
        return 0

    def start(op_id: str, res: ResourceId) -> None:
        nonlocal seq
        queues[res].remove(op_id)
        if op_id in gate:
            handed_off[res] += 1
        running.add(res)
        starts[op_id] = (now, seq)
        heapq.heappush(heap, (now + time[op_id], seq, op_id))
        seq += 1

    total = len(g.ops)
    while done < total:
        for res in g.resources:
            if res in running or not queues[res]:
                continue
            adm = {o: admission(o, res) for o in queues[res]}
            ok = [o for o, a in adm.items() if a == 1]
            early = [o for o, a in adm.items() if a == 2]
            if not ok and not early:
                continue
            ranked = [o for o in ok if o in prio]
            # an early release competes as a peer of the in-turn transfers
            cands = [o for o in ok if o not in prio] + early
            if ranked:
                low = min(prio[o] for o in ranked)
                cands += [o for o in ranked if prio[o] == low]
            cands.sort()
            start(choice_rng.choice(cands), res)

        if not heap:
            # every remaining ready op is gated behind a transfer that cannot arrive
            blocked = [
                (gate[o], r, o) for r, q in queues.items() for o in q if o in gate
            ]
            if not blocked:
                raise RuntimeError("simulation stalled with no runnable op")
            _, res, op_id = min(blocked)
            forced += 1
            start(op_id, res)

        t = heap[0][0]
        while heap and heap[0][0] == t:
            _, _, op_id = heapq.heappop(heap)
            res = g[op_id].resource
            running.discard(res)
            finished.append((*starts[op_id], op_id, t))
            done += 1
            for s in g.succs[op_id]:
                waiting[s] -= 1
                if waiting[s] == 0:
                    queues[g[s].resource].append(s)
        now = t

    # listed in hand-off order
    finished.sort()
    events = [Event(op_id, g[op_id].resource, st, end) for st, _, op_id, end in finished]
    busy = {r: 0 for r in g.resources}
    for e in events:
        busy[e.resource] += e.end - e.start
    violations = forced
    for res in g.resources:
        if res.is_channel:
            seq_prio = [prio[e.op_id] for e in events if e.resource == res and e.op_id in prio]
            violations += _inversions(seq_prio)
    makespan = max((e.end for e in events), default=0)
    return SimReport(makespan, events, busy, violations, forced)


# --- synchronized multi-worker iteration ---------------------------------

@dataclass(frozen=True)
class IterationStats:
    per_worker_makespan: dict[str, int]
    iteration_time: int
    straggler_fraction: Fraction

    def to_json(self) -> dict:
        return {
            "per_worker_makespan_us": dict(sorted(self.per_worker_makespan.items())),
            "iteration_time_us": self.iteration_time,
            "fraction": {
                "num": self.straggler_fraction.numerator,
                "den": self.straggler_fraction.denominator,
            },
        }


def iteration_stats(per_worker: Mapping[str, int]) -> IterationStats:
    if not per_worker:
        raise ValueError("no workers")
    it = max(per_worker.values())
    lo = min(per_worker.values())
    frac = Fraction(it - lo, it) if it > 0 else Fraction(0)
    return IterationStats(dict(per_worker), it, frac)


_WORKER_KINDS = (OpKind.COMPUTE, OpKind.RECV, OpKind.SEND)


def worker_devices(g: Graph) -> list[str]:
    return sorted({op.resource.device for op in g.ops if op.kind in _WORKER_KINDS})


def merge_worker_schedules(
    g: Graph, per_worker: Mapping[str, PrioritySchedule]
) -> PrioritySchedule:
    """Combine per-device schedules into one; bare worker ids get the ``device/`` prefix."""
    merged = {}
    for device, sched in per_worker.items():
        for op_id, p in sched.priorities.items():
            full = op_id if op_id in g.op_map else f"{device}/{op_id}"
            if full not in g.op_map:
                raise DomainError(f"schedule for {device} references unknown op {op_id!r}")
            if g[full].resource.device != device:
                raise DomainError(f"op {full!r} does not belong to device {device!r}")
            merged[full] = p
    return PrioritySchedule(merged, "merged", g.name)


def simulate_cluster(
    g: Graph,
    time: TimeOracle,
    per_worker_schedules: Mapping[str, PrioritySchedule],
    policy: SimPolicy = SimPolicy(),
) -> tuple[SimReport, IterationStats]:
    merged = merge_worker_schedules(g, per_worker_schedules)
    report = simulate(g, time, merged, policy)
    per_worker = {d: report.device_makespan(d) for d in worker_devices(g)}
    return report, iteration_stats(per_worker)


# --- Chrome trace export --------------------------------------------------

def chrome_trace(report: SimReport, g: Optional[Graph] = None) -> dict:
    out = []
    for e in report.events:
        ev = {
            "name": e.op_id,
            "ph": "X",
            "pid": e.resource.device,
            "tid": f"{e.resource.unit.value}/{e.resource.name}",
            "ts": e.start,
            "dur": e.end - e.start,
        }
        if g is not None:
            ev["cat"] = g[e.op_id].kind.value
        out.append(ev)
    return {"traceEvents": out, "displayTimeUnit": "ms"}


def dump_chrome_trace(report: SimReport, g: Optional[Graph] = None) -> str:
    return json.dumps(chrome_trace(report, g), indent=1) + "\n"
