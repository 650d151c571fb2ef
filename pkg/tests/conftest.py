import pytest
from hypothesis import strategies as st

from commsched.graph import Op, OpKind, Partition, ResourceId, Unit, make_graph

NET = ResourceId("worker", Unit.CHANNEL, "net0")
CPU = ResourceId("worker", Unit.COMPUTE, "cpu0")

TOY_TIMES = {"recv1": 3, "recv2": 1, "op1": 4, "op2": 2}


def toy_graph(times=TOY_TIMES):
    ops = [
        Op("recv1", OpKind.RECV, NET, times.get("recv1")),
        Op("recv2", OpKind.RECV, NET, times.get("recv2")),
        Op("op1", OpKind.COMPUTE, CPU, times.get("op1")),
        Op("op2", OpKind.COMPUTE, CPU, times.get("op2")),
    ]
    return make_graph("toy", ops, [("recv1", "op1"), ("op1", "op2"), ("recv2", "op2")])


@pytest.fixture
def toy():
    return toy_graph()


def fig4b_graph(t=1):
    """Recvs A and B feed one op; C joins later, D later still."""
    ops = [Op(f"recv_{x}", OpKind.RECV, NET, t) for x in "ABCD"]
    ops += [Op(n, OpKind.COMPUTE, CPU, 5) for n in ("opAB", "opABC", "opABCD")]
    edges = [
        ("recv_A", "opAB"), ("recv_B", "opAB"),
        ("opAB", "opABC"), ("recv_C", "opABC"),
        ("opABC", "opABCD"), ("recv_D", "opABCD"),
    ]
    return make_graph("fig4b", ops, edges)


@st.composite
def worker_graphs(draw, max_recvs=5, max_compute=6, max_time=20, channels=1, cpus=1):
    """Random valid worker partitions: recv roots on channels, compute DAG on cpus."""
    n_r = draw(st.integers(1, max_recvs))
    n_c = draw(st.integers(1, max_compute))
    chans = [ResourceId("worker", Unit.CHANNEL, f"ps{i}") for i in range(channels)]
    cpus_ = [ResourceId("worker", Unit.COMPUTE, f"cpu{i}") for i in range(cpus)]
    ops = []
    for i in range(n_r):
        ops.append(Op(f"r{i}", OpKind.RECV, draw(st.sampled_from(chans)),
                      draw(st.integers(0, max_time))))
    for j in range(n_c):
        ops.append(Op(f"c{j}", OpKind.COMPUTE, draw(st.sampled_from(cpus_)),
                      draw(st.integers(0, max_time))))
    edges = set()
    for j in range(n_c):
        for i in range(n_r):
            if draw(st.booleans()):
                edges.add((f"r{i}", f"c{j}"))
        for k in range(j):
            if draw(st.integers(0, 3)) == 0:
                edges.add((f"c{k}", f"c{j}"))
    return make_graph("rand", ops, edges, Partition.WORKER)


# --- acceptance summary ---------------------------------------------------

_acceptance = []


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance: exit criteria")


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance.py" in report.nodeid:
        _acceptance.append((report.nodeid.split("::")[-1], report.outcome, report.duration))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome, dur in _acceptance:
        verdict = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"{verdict}  {name}  ({dur:.2f}s)")
