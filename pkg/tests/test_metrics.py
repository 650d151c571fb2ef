import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from commsched.errors import CoverageError, DegenerateBoundsError, ParameterError
from commsched.graph import Op, OpKind, make_graph
from commsched.metrics import (
    MakespanBounds,
    brute_force_best,
    efficiency,
    efficiency_report,
    makespan_bounds,
    speedup,
)
from commsched.schedulers import PrioritySchedule, tac
from commsched.sim import SimPolicy, simulate
from commsched.synthetic import Shape, SyntheticSpec, generate_synthetic
from commsched.timing import TimeOracle, declared_oracle

from conftest import CPU, NET, toy_graph, worker_graphs


def test_toy_bounds(toy):
    b = makespan_bounds(toy, declared_oracle(toy))
    assert b == MakespanBounds(upper=10, lower=6)


def test_single_resource_bounds():
    g = make_graph("one", [Op("a", OpKind.COMPUTE, CPU, 3), Op("b", OpKind.COMPUTE, CPU, 4)], [])
    b = makespan_bounds(g, declared_oracle(g))
    assert b.lower == b.upper == 7


def test_zero_bounds(toy):
    zero = TimeOracle({k: 0 for k in toy.op_map}, "declared")
    assert makespan_bounds(toy, zero) == MakespanBounds(0, 0)


def test_bounds_coverage(toy):
    with pytest.raises(CoverageError):
        makespan_bounds(toy, TimeOracle({"op1": 1}, "declared"))


@pytest.mark.parametrize("m, e", [(6, 1), (10, 0), (9, Fraction(1, 4))])
def test_efficiency_values(m, e):
    assert efficiency(MakespanBounds(10, 6), m) == e


def test_efficiency_degenerate():
    with pytest.raises(DegenerateBoundsError):
        efficiency(MakespanBounds(5, 5), 5)


def test_speedup_values():
    assert speedup(MakespanBounds(10, 6)) == Fraction(2, 3)
    assert speedup(MakespanBounds(7, 7)) == 0
    assert speedup(MakespanBounds(8, 4)) == 1
    with pytest.raises(DegenerateBoundsError):
        speedup(MakespanBounds(3, 0))


@given(u=st.integers(1, 1000), gap=st.integers(1, 1000), m1=st.integers(0, 2000), m2=st.integers(0, 2000))
def test_efficiency_monotone_decreasing(u, gap, m1, m2):
    b = MakespanBounds(u + gap, u)
    if m1 < m2:
        assert efficiency(b, m1) > efficiency(b, m2)


def test_report_json(toy):
    doc = efficiency_report(toy, declared_oracle(toy), 9).to_json()
    assert doc["U_us"] == 10 and doc["L_us"] == 6 and doc["m_us"] == 9
    assert doc["E"] == {"num": 1, "den": 4, "decimal": "0.250000"}
    assert doc["S"] == {"num": 2, "den": 3, "decimal": "0.666667"}
    assert doc["straggler"] is None


def test_bruteforce_toy(toy):
    res = brute_force_best(toy, declared_oracle(toy))
    assert res.best_order == ["recv1", "recv2"]
    assert res.best_makespan == 9
    assert res.distribution == [9, 10]


def test_bruteforce_single_recv():
    g = make_graph("one", [Op("r", OpKind.RECV, NET, 2), Op("c", OpKind.COMPUTE, CPU, 1)], [("r", "c")])
    res = brute_force_best(g, declared_oracle(g))
    assert res.best_order == ["r"] and res.distribution == [3]


def test_bruteforce_cardinality():
    g = generate_synthetic(SyntheticSpec(Shape.CHAIN, 3, 1, 1, 2))
    assert len(brute_force_best(g, declared_oracle(g)).distribution) <= 6


def test_bruteforce_refuses_large():
    g = generate_synthetic(SyntheticSpec(Shape.CHAIN, 9, 1, 1, 2))
    with pytest.raises(ParameterError, match="9 recvs"):
        brute_force_best(g, declared_oracle(g))


@settings(max_examples=40, deadline=None)
@given(g=worker_graphs(max_recvs=4), seed=st.integers(0, 1000))
def test_bruteforce_brackets_tac(g, seed):
    t = declared_oracle(g)
    pol = SimPolicy(unprioritized_choice_seed=seed)
    res = brute_force_best(g, t, pol)
    m_tac = simulate(g, t, tac(g, t), pol).makespan
    assert res.best_makespan <= m_tac <= max(res.distribution)
    # lexicographically least optimum
    perms = list(itertools.permutations(sorted(g.recv_ids)))
    first_best = next(p for p, m in zip(perms, res.distribution) if m == res.best_makespan)
    assert res.best_order == list(first_best)
    idx = perms.index(tuple(res.best_order))
    again = simulate(g, t, PrioritySchedule.from_order(perms[idx]), pol).makespan
    assert again == res.best_makespan
