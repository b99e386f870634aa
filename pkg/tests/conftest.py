import random

import pytest

from qnetstack.graphstate import GraphState, QubitId


def qubits(device, n, start=0):
    return [QubitId(device, i) for i in range(start, start + n)]


def random_graph(seed, n, p=0.5, frames=False):
    rng = random.Random(seed)
    qs = qubits("q", n)
    edges = [(a, b) for i, a in enumerate(qs) for b in qs[i + 1:] if rng.random() < p]
    byp = {q: rng.randrange(24) for q in qs} if frames else None
    return GraphState(qs, edges, byp)


@pytest.fixture
def q():
    return qubits


def ghz_up_to_frame(g, qubits=None):
    """Physical state of ``qubits`` (default: all) is GHZ once the recorded frame is undone."""
    from qnetstack import clifford as cl
    from qnetstack import oracle
    from qnetstack.graphstate import induced, star_center

    if qubits is not None:
        g = induced(g, qubits)
        if g.vertices != set(qubits):
            return False
    root = star_center(g, g.vertices)
    if root is None:
        return False
    sv = oracle.physical_state(g)
    for v, c in g.byproducts.items():
        sv = oracle.apply_clifford(sv, v, cl.inv(c))
    for v in g.vertices - {root}:
        sv = oracle.apply_clifford(sv, v, cl.H)
    return oracle.equal_up_to_phase(sv, oracle.ghz_statevector(sorted(g.vertices)))


def four_network_regions(copies=2):
    """Four requesting routers N1..N4 joined through intermediate routers R1..R6.

    Four regions of two routers, three of three (B holds N1, C holds N2 and N3)
    and one of four.
    """
    from qnetstack.routing import Region

    spec = [("A", ("N1", "R1", "R2", "R3")), ("B", ("N1", "R4", "R5")), ("C", ("N2", "N3", "R6")),
            ("D", ("R3", "R5", "R6")), ("E", ("R1", "N2")), ("F", ("R2", "N4")),
            ("G", ("R4", "N4")), ("H", ("R6", "N4"))]
    return [Region(i, m, copies) for i, m in spec]


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
