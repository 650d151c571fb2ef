from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from commsched.errors import ParameterError
from commsched.graph import OpKind, Partition, Unit, serialize_graph
from commsched.synthetic import (
    Shape,
    SyntheticSpec,
    expand_to_mr,
    generate_synthetic,
    ps_assignment,
    worker_subgraph,
)

from conftest import toy_graph


def _times(g, kind):
    return sum(op.declared_time for op in g.ops if op.kind is kind)


def test_chain_example():
    g = generate_synthetic(SyntheticSpec(Shape.CHAIN, 3, 1, Fraction(1), 7))
    assert len(g.recv_ids) == 3
    assert sum(op.kind is OpKind.COMPUTE for op in g.ops) == 3
    assert _times(g, OpKind.RECV) == _times(g, OpKind.COMPUTE)


def test_layered_example():
    g = generate_synthetic(SyntheticSpec(Shape.LAYERED, 2, 2, Fraction(1), 1))
    assert len(g.recv_ids) == 4
    layers = [op.id for op in g.ops if op.kind is OpKind.COMPUTE]
    assert len(layers) == 2
    for i, layer in enumerate(sorted(layers)):
        recv_preds = {p for p in g.preds[layer] if g[p].kind is OpKind.RECV}
        assert recv_preds == {f"recv_{i}_0", f"recv_{i}_1"}


@settings(max_examples=40, deadline=None)
@given(
    shape=st.sampled_from(list(Shape)),
    layers=st.integers(1, 5),
    k=st.integers(1, 4),
    ratio=st.sampled_from([Fraction(1, 4), Fraction(1, 2), Fraction(1), Fraction(2), Fraction(3)]),
    seed=st.integers(0, 2**64 - 1),
)
def test_generator_contract(shape, layers, k, ratio, seed):
    spec = SyntheticSpec(shape, layers, k, ratio, seed)
    g = generate_synthetic(spec)
    assert g.partition is Partition.WORKER
    assert len(g.recv_ids) == layers * k
    comm, comp = _times(g, OpKind.RECV), _times(g, OpKind.COMPUTE)
    assert abs(Fraction(comm, comp) - ratio) <= ratio / 100
    assert serialize_graph(generate_synthetic(spec)) == serialize_graph(g)


def test_unachievable_ratio():
    with pytest.raises(ParameterError):
        generate_synthetic(
            SyntheticSpec(Shape.CHAIN, 4, 4, Fraction(1, 10000), 0, compute_range=(1, 1))
        )


def _worker(n_params):
    spec = SyntheticSpec(Shape.LAYERED, n_params, 1, Fraction(1), 5)
    return generate_synthetic(spec)


def test_expand_counts():
    g = expand_to_mr(_worker(2), 2, 1)
    transfers = [op for op in g.ops if op.kind.is_transfer]
    ps_ops = [op for op in g.ops if op.kind.name.startswith("PS_")]
    assert len(transfers) == 8
    assert len(ps_ops) == 6
    assert g.partition is Partition.CLUSTER

    g1 = expand_to_mr(_worker(1), 1, 1)
    assert sum(op.kind.is_transfer for op in g1.ops) == 2
    assert sum(op.kind.name.startswith("PS_") for op in g1.ops) == 3


def test_round_robin_placement():
    assert ps_assignment(["p0", "p1", "p2"], 2) == {"p0": 0, "p1": 1, "p2": 0}
    g = expand_to_mr(_worker(3), 1, 2)
    ps0 = {op.id.split("/")[-1] for op in g.ops if op.resource.device == "ps0"}
    ps1 = {op.id.split("/")[-1] for op in g.ops if op.resource.device == "ps1"}
    assert ps0 == {"recv_0_0", "recv_2_0"}
    assert ps1 == {"recv_1_0"}


def test_expand_structure():
    w = _worker(2)
    g = expand_to_mr(w, 2, 2, ps_op_time=3)
    # one channel per worker-PS pair, shared by both directions
    channels = {op.resource for op in g.ops if op.resource.unit is Unit.CHANNEL}
    assert len(channels) == 4
    for op in g.ops:
        if op.kind.name.startswith("PS_"):
            assert op.declared_time == 3
        if op.kind is OpKind.SEND:
            recv = g[op.id.replace("grad/", "")]
            assert op.declared_time == recv.declared_time
            assert op.resource == recv.resource
    p = "recv_0_0"
    assert g.succs["ps0/aggregate/" + p] == ("ps0/update/" + p,)
    assert set(g.preds["ps0/aggregate/" + p]) == {f"worker{i}/grad/{p}" for i in range(2)}
    assert g.preds["worker1/" + p] == ("ps0/read/" + p,)


def test_expand_is_deterministic():
    w = _worker(3)
    assert serialize_graph(expand_to_mr(w, 3, 2)) == serialize_graph(expand_to_mr(w, 3, 2))


@pytest.mark.parametrize("nw, nps", [(0, 1), (1, 0)])
def test_expand_parameter_errors(nw, nps):
    with pytest.raises(ParameterError):
        expand_to_mr(toy_graph(), nw, nps)


def test_worker_subgraph_inverts_expansion():
    w = toy_graph()
    g = expand_to_mr(w, 3, 1)
    sub = worker_subgraph(g, "worker2")
    assert sorted(sub.op_map) == sorted(w.op_map)
    assert sub.edges == w.edges
