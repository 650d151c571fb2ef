"""Synthetic worker DAGs and their expansion into a parameter-server cluster."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction

from .errors import ParameterError
from .graph import Graph, Op, OpKind, Partition, ResourceId, Unit, make_graph
from .properties import find_dependencies
from .rng import StableRng
from .timing import TimeOracle

# nominal link speed used to attach byte sizes to synthetic transfers
BYTES_PER_US = 1000

WORKER_DEVICE = "worker"
CPU = "cpu0"


class Shape(str, enum.Enum):
    CHAIN = "chain"
    LAYERED = "layered"
    SERIES_PARALLEL = "series-parallel"


@dataclass(frozen=True)
class SyntheticSpec:
    """Parameters of a generated worker DAG.

    ``comm_comp_ratio`` is total recv time over total compute time.
    Compute durations are drawn uniformly from ``compute_range`` (µs).
    """

    shape: Shape
    layers: int
    params_per_layer: int
    comm_comp_ratio: Fraction
    seed: int
    compute_range: tuple[int, int] = (100, 1000)

    def __post_init__(self):
        object.__setattr__(self, "shape", Shape(self.shape))
        object.__setattr__(self, "comm_comp_ratio", Fraction(self.comm_comp_ratio))
        if self.layers < 1 or self.params_per_layer < 1:
            raise ParameterError("layers and params_per_layer must be positive")
        if self.comm_comp_ratio <= 0:
            raise ParameterError("comm_comp_ratio must be positive")
        if not 0 <= self.seed < 2**64:
            raise ParameterError("seed must be a 64-bit unsigned integer")
        lo, hi = self.compute_range
        if not 1 <= lo <= hi:
            raise ParameterError("compute_range must satisfy 1 <= lo <= hi")


def _split_total(total: int, weights: list[int]) -> list[int]:
    """Integer apportionment of ``total`` proportional to ``weights`` (largest remainder)."""
    wsum = sum(weights)
    exact = [Fraction(total * w, wsum) for w in weights]
    parts = [int(x) for x in exact]
    short = total - sum(parts)
    by_rem = sorted(range(len(weights)), key=lambda i: (-(exact[i] - parts[i]), i))
    for i in by_rem[:short]:
        parts[i] += 1
    return parts


def generate_synthetic(spec: SyntheticSpec) -> Graph:
    """Build a worker partition; identical specs give identical graphs.

    Shapes (L layers, k params per layer, all recvs on one channel and all
    compute on one unit):

    * chain: L*k compute ops in a line, the i-th also consuming the i-th recv.
    * layered: one compute op per layer, consuming the layer's k recvs and
      the previous layer's op.
    * series-parallel: per layer, k branch ops (branch j consumes recv j and
      the previous layer's join) followed by a join op.
    """
    rng = StableRng(spec.seed)
    L, k = spec.layers, spec.params_per_layer
    channel = ResourceId(WORKER_DEVICE, Unit.CHANNEL, "ps0")
    cpu = ResourceId(WORKER_DEVICE, Unit.COMPUTE, CPU)
    wl, wk = len(str(L - 1)), len(str(k - 1))

    def rid(layer, j):
        return f"recv_{layer:0{wl}d}_{j:0{wk}d}"

    recvs = [rid(l, j) for l in range(L) for j in range(k)]
    compute: list[str] = []
    edges: list[tuple[str, str]] = []
    if spec.shape is Shape.CHAIN:
        prev = None
        for l in range(L):
            for j in range(k):
                c = f"op_{l:0{wl}d}_{j:0{wk}d}"
                compute.append(c)
                edges.append((rid(l, j), c))
                if prev:
                    edges.append((prev, c))
                prev = c
    elif spec.shape is Shape.LAYERED:
        prev = None
        for l in range(L):
            c = f"layer_{l:0{wl}d}"
            compute.append(c)
            edges.extend((rid(l, j), c) for j in range(k))
            if prev:
                edges.append((prev, c))
            prev = c
    else:
        prev = None
        for l in range(L):
            join = f"join_{l:0{wl}d}"
            for j in range(k):
                b = f"branch_{l:0{wl}d}_{j:0{wk}d}"
                compute.append(b)
                edges.append((rid(l, j), b))
                edges.append((b, join))
                if prev:
                    edges.append((prev, b))
            compute.append(join)
            prev = join

    lo, hi = spec.compute_range
    comp_times = [rng.randint(lo, hi) for _ in compute]
    recv_weights = [rng.randint(1, 10) for _ in recvs]
    comp_total = sum(comp_times)
    target = spec.comm_comp_ratio * comp_total
    recv_total = round(target)
    if recv_total < len(recvs):
        raise ParameterError(
            f"ratio {spec.comm_comp_ratio} gives {recv_total} µs of transfer time, "
            f"fewer than one µs per recv ({len(recvs)} recvs)"
        )
    if abs(Fraction(recv_total) - target) > target / 100:
        raise ParameterError(f"ratio {spec.comm_comp_ratio} not achievable within 1%")
    # every recv keeps at least 1 µs
    recv_times = [t + 1 for t in _split_total(recv_total - len(recvs), recv_weights)]

    ops = [
        Op(r, OpKind.RECV, channel, t, t * BYTES_PER_US) for r, t in zip(recvs, recv_times)
    ]
    ops += [Op(c, OpKind.COMPUTE, cpu, t) for c, t in zip(compute, comp_times)]
    name = (
        f"{spec.shape.value}-L{L}-k{k}-r{spec.comm_comp_ratio}-s{spec.seed}"
    )
    return make_graph(name, ops, edges, Partition.WORKER)


# --- Model-Replica / parameter-server expansion --------------------------

def worker_device(i: int) -> str:
    return f"worker{i}"


def ps_device(j: int) -> str:
    return f"ps{j}"


def ps_assignment(params, n_ps: int) -> dict[str, int]:
    """Round-robin parameter placement by ascending id."""
    return {p: i % n_ps for i, p in enumerate(sorted(params))}


def expand_to_mr(
    worker: Graph, n_workers: int, n_ps: int, ps_op_time: int = 0
) -> Graph:
    """Replicate a worker partition over ``n_workers`` and wire it to ``n_ps`` servers.

    Worker ``i`` ops are renamed ``worker{i}/<id>``. Per parameter ``p`` on
    server ``s``, the iteration is::

        ps{s}/read/p -> worker{i}/p (recv) -> ... worker compute ...
            -> worker{i}/grad/p (send) -> ps{s}/aggregate/p -> ps{s}/update/p

    The read sits at the start of the iteration (it serves the value the
    previous iteration's update produced) so the graph stays acyclic.
    Transfers in both directions between a worker and a server share one
    channel. A gradient send waits for every sink of the worker DAG that
    depends on its parameter and inherits the recv's time and size.
    """
    if n_workers < 1 or n_ps < 1:
        raise ParameterError("n_workers and n_ps must be >= 1")
    if ps_op_time < 0:
        raise ParameterError("ps_op_time must be >= 0")
    if worker.partition is not Partition.WORKER:
        raise ParameterError("expand_to_mr needs a worker partition")
    if any(op.kind is OpKind.SEND for op in worker.ops):
        raise ParameterError("worker graph must not contain send ops; gradients are generated")
    if any(op.kind not in (OpKind.RECV, OpKind.COMPUTE) for op in worker.ops):
        raise ParameterError("worker graph may only contain recv and compute ops")

    params = sorted(worker.recv_ids)
    placement = ps_assignment(params, n_ps)
    dep = find_dependencies(worker)
    sinks = [op.id for op in worker.ops if not worker.succs[op.id]]
    grad_after = {p: [s for s in sinks if p in dep[s]] for p in params}

    ops: list[Op] = []
    edges: list[tuple[str, str]] = []
    for p in params:
        s = placement[p]
        ps_cpu = ResourceId(ps_device(s), Unit.COMPUTE, CPU)
        for kind, tag in (
            (OpKind.PS_READ, "read"),
            (OpKind.PS_AGGREGATE, "aggregate"),
            (OpKind.PS_UPDATE, "update"),
        ):
            ops.append(Op(f"{ps_device(s)}/{tag}/{p}", kind, ps_cpu, ps_op_time))
        edges.append((f"{ps_device(s)}/aggregate/{p}", f"{ps_device(s)}/update/{p}"))

    for i in range(n_workers):
        dev = worker_device(i)
        pre = dev + "/"
        for op in worker.ops:
            if op.kind is OpKind.RECV:
                s = placement[op.id]
                res = ResourceId(dev, Unit.CHANNEL, ps_device(s))
            else:
                res = ResourceId(dev, op.resource.unit, op.resource.name)
            ops.append(Op(pre + op.id, op.kind, res, op.declared_time, op.bytes))
        edges.extend((pre + a, pre + b) for a, b in worker.edges)
        for p in params:
            s = placement[p]
            src = worker[p]
            grad = f"{pre}grad/{p}"
            ops.append(
                Op(grad, OpKind.SEND, ResourceId(dev, Unit.CHANNEL, ps_device(s)),
                   src.declared_time, src.bytes)
            )
            edges.append((f"{ps_device(s)}/read/{p}", pre + p))
            edges.extend((pre + snk, grad) for snk in grad_after[p])
            edges.append((grad, f"{ps_device(s)}/aggregate/{p}"))
    name = f"{worker.name}-mr{n_workers}x{n_ps}"
    return make_graph(name, ops, edges, Partition.CLUSTER)


def worker_subgraph(cluster: Graph, device: str) -> Graph:
    """The worker partition of one replica, with its ``device/`` prefix and gradients stripped."""
    pre = device + "/"
    keep = {
        op.id: op
        for op in cluster.ops
        if op.resource.device == device and op.kind in (OpKind.RECV, OpKind.COMPUTE)
    }
    if not keep:
        raise ParameterError(f"no worker ops on device {device!r}")

    def strip(x):
        return x[len(pre):] if x.startswith(pre) else x

    ops = [
        Op(strip(op.id), op.kind,
           ResourceId(WORKER_DEVICE, op.resource.unit, op.resource.name),
           op.declared_time, op.bytes)
        for op in keep.values()
    ]
    edges = [(strip(a), strip(b)) for a, b in cluster.edges if a in keep and b in keep]
    return make_graph(f"{cluster.name}:{device}", ops, edges, Partition.WORKER)


def reference_worker(g: Graph, time: TimeOracle) -> tuple[Graph, TimeOracle]:
    """Worker partition (and matching oracle) that schedules are computed on.

    For a cluster graph this is the first worker replica.
    """
    if g.partition is Partition.WORKER:
        return g, time
    devices = sorted({op.resource.device for op in g.ops if op.kind is OpKind.RECV})
    dev = devices[0]
    w = worker_subgraph(g, dev)
    return w, TimeOracle({op.id: time[f"{dev}/{op.id}"] for op in w.ops}, time.origin)
