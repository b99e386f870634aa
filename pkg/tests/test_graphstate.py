import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qnetstack import clifford as cl
from qnetstack import oracle
from qnetstack.errors import InvalidArgument, NotFound
from qnetstack.graphstate import (
    GraphState,
    OutcomeSource,
    QubitId,
    apply_cz,
    bell_measure,
    bell_merge,
    ghz_star,
    is_ghz_shaped,
    local_complement,
    make_star,
    measure,
    measure_x,
    measure_y,
    measure_z,
    merge_keep,
    star_center,
    tensor,
)

from conftest import qubits, random_graph

BITS = [OutcomeSource.fixed(0), OutcomeSource.fixed(1)]


def edgeset(*pairs):
    return frozenset(frozenset(p) for p in pairs)


def replays(g):
    return oracle.replay_matches(None, g, g.trace)


def is_physical_ghz(g):
    """Physical state equals GHZ after the recorded frame and a star-to-GHZ basis change."""
    root = star_center(g, g.vertices)
    sv = oracle.physical_state(g)
    for v, c in g.byproducts.items():
        sv = oracle.apply_clifford(sv, v, cl.inv(c))
    for v in g.vertices - {root}:
        sv = oracle.apply_clifford(sv, v, cl.H)
    return oracle.equal_up_to_phase(sv, oracle.ghz_statevector(sorted(g.vertices)))


class TestGhzStar:
    def test_bell_pair(self):
        a, b = qubits("d", 2)
        assert ghz_star(2, [a, b]).edges == edgeset((a, b))

    def test_star_degrees(self):
        qs = qubits("d", 4)
        g = ghz_star(4, qs)
        assert g.degree(qs[0]) == 3
        assert all(g.degree(v) == 1 for v in qs[1:])
        assert all(c == cl.I for c in g.byproducts.values())

    def test_stabilisers(self):
        g = ghz_star(3, qubits("d", 3))
        sv = oracle.build_statevector(g)
        for a in g.vertices:
            assert oracle.expect_pauli(sv, oracle.correlation_operator(g.edges, a)) == pytest.approx(1)

    def test_errors(self):
        with pytest.raises(InvalidArgument) as e:
            ghz_star(1, qubits("d", 1))
        assert e.value.code == "invalid-size"
        a = QubitId("d", 0)
        with pytest.raises(InvalidArgument) as e:
            ghz_star(2, [a, a])
        assert e.value.code == "invalid-labels"


class TestLocalComplement:
    def test_star_to_complete(self):
        qs = qubits("d", 4)
        g = local_complement(ghz_star(4, qs), qs[0])
        assert g.edges == edgeset(*itertools.combinations(qs, 2))

    @pytest.mark.parametrize("seed", range(10))
    def test_involution_on_edges(self, seed):
        g = random_graph(seed, 6)
        a = sorted(g.vertices)[seed % 6]
        assert local_complement(local_complement(g, a), a).edges == g.edges

    def test_preserves_physical_state_seed7(self):
        g = random_graph(7, 5)
        before = oracle.physical_state(g)
        for a in sorted(g.vertices):
            g = local_complement(g, a)
            assert oracle.equal_up_to_phase(before, oracle.physical_state(g))

    def test_unknown_vertex(self):
        with pytest.raises(NotFound):
            local_complement(ghz_star(2, qubits("d", 2)), QubitId("x", 9))


class TestMeasureZ:
    @pytest.mark.parametrize("src", BITS)
    def test_leaf_of_ghz4(self, src):
        qs = qubits("d", 4)
        g = measure_z(ghz_star(4, qs), qs[3], src)
        assert g.edges == edgeset((qs[0], qs[1]), (qs[0], qs[2]))
        assert replays(g) and is_physical_ghz(g)

    def test_single_vertex(self):
        a = QubitId("d", 0)
        g = measure_z(GraphState([a]), a, BITS[0])
        assert len(g) == 0

    def test_triangle_outcome0(self):
        a, b, c = qubits("d", 3)
        g = measure_z(GraphState([a, b, c], [(a, b), (b, c), (a, c)]), a, BITS[0])
        assert g.edges == edgeset((b, c))
        assert g.outcome_log == (("MZ", a, 0),)
        assert replays(g)


class TestMeasureY:
    def test_path_middle_shortens_wire(self):
        a, b, c = qubits("d", 3)
        g = measure_y(GraphState([a, b, c], [(a, b), (b, c)]), b, BITS[0])
        assert g.edges == edgeset((a, c))

    @pytest.mark.parametrize("src", BITS)
    def test_leaf_of_ghz3(self, src):
        qs = qubits("d", 3)
        g = measure_y(ghz_star(3, qs), qs[2], src)
        assert g.edges == edgeset((qs[0], qs[1]))
        assert replays(g)

    @pytest.mark.parametrize("src", BITS)
    def test_cycle4_both_branches(self, src):
        qs = qubits("d", 4)
        g = GraphState(qs, [(qs[i], qs[(i + 1) % 4]) for i in range(4)])
        assert replays(measure_y(g, qs[0], src))


class TestMeasureX:
    @pytest.mark.parametrize("src", BITS)
    def test_root_of_ghz4(self, src):
        qs = qubits("d", 4)
        g = measure_x(ghz_star(4, qs), qs[0], src, b0=qs[1])
        assert star_center(g, g.vertices) == qs[1]
        assert g.edges == edgeset((qs[1], qs[2]), (qs[1], qs[3]))
        assert replays(g) and is_physical_ghz(g)

    def test_isolated_vertex(self):
        a, b, c = qubits("d", 3)
        g0 = GraphState([a, b, c], [(b, c)])
        g = measure_x(g0, a, BITS[1])
        assert g.edges == g0.edges and g.vertices == {b, c}
        assert g.outcome_log[-1][2] == 0
        assert replays(g)

    @pytest.mark.parametrize("src", BITS)
    def test_path4_both_branches(self, src):
        qs = qubits("d", 4)
        g = GraphState(qs, [(qs[i], qs[i + 1]) for i in range(3)])
        assert replays(measure_x(g, qs[1], src))

    def test_bad_special_neighbour(self):
        qs = qubits("d", 4)
        with pytest.raises(InvalidArgument) as e:
            measure_x(GraphState(qs, [(qs[0], qs[1]), (qs[1], qs[2])]), qs[0], BITS[0], b0=qs[2])
        assert e.value.code == "invalid-special-neighbor"


class TestCZ:
    def test_disjoint_vertices_make_bell_graph(self):
        a, b = qubits("d", 2)
        assert apply_cz(GraphState([a, b]), a, b).edges == edgeset((a, b))

    def test_twice_restores(self):
        g = random_graph(3, 5, frames=True)
        a, b = sorted(g.vertices)[:2]
        g2 = apply_cz(apply_cz(g, a, b), a, b)
        assert oracle.equal_up_to_phase(oracle.physical_state(g), oracle.physical_state(g2))

    def test_two_bell_pairs_to_path(self):
        (a, b), (c, d) = qubits("A", 2), qubits("B", 2)
        g = apply_cz(tensor(ghz_star(2, [a, b]), ghz_star(2, [c, d])), b, c)
        assert g.edges == edgeset((a, b), (b, c), (c, d))
        assert replays(g)

    def test_same_qubit(self):
        a = QubitId("d", 0)
        with pytest.raises(InvalidArgument) as e:
            apply_cz(GraphState([a]), a, a)
        assert e.value.code == "invalid-pair"


class TestBellMerge:
    @pytest.mark.parametrize("bits", list(itertools.product((0, 1), repeat=2)))
    def test_ghz3_ghz3_to_ghz4(self, bits):
        a, b = qubits("A", 3), qubits("B", 3)
        g = bell_merge(tensor(ghz_star(3, a), ghz_star(3, b)), a[2], b[2], OutcomeSource.fixed(bits))
        assert len(g) == 4 and is_ghz_shaped(g, g.vertices)
        assert replays(g) and is_physical_ghz(g)
        assert [r[0] for r in g.outcome_log] == ["BM", "BM"]

    def test_entanglement_swapping(self):
        a, b = qubits("A", 2), qubits("B", 2)
        g = bell_merge(tensor(ghz_star(2, a), ghz_star(2, b)), a[1], b[0], OutcomeSource.seeded(1))
        assert g.vertices == {a[0], b[1]} and g.edges == edgeset((a[0], b[1]))
        assert replays(g)

    @pytest.mark.parametrize("bits", list(itertools.product((0, 1), repeat=2)))
    def test_ghz3_ghz4_all_outcomes(self, bits):
        a, b = qubits("A", 3), qubits("B", 4)
        g = bell_merge(tensor(ghz_star(3, a), ghz_star(4, b)), a[0], b[1], OutcomeSource.fixed(bits))
        assert len(g) == 5 and replays(g) and is_physical_ghz(g)

    def test_same_component_rejected(self):
        qs = qubits("A", 3)
        with pytest.raises(InvalidArgument) as e:
            bell_merge(ghz_star(3, qs), qs[1], qs[2], BITS[0])
        assert e.value.code == "would-create-loop"

    def test_non_star_rejected(self):
        qs = qubits("A", 4)
        path = GraphState(qs, [(qs[i], qs[i + 1]) for i in range(3)])
        b = qubits("B", 2)
        with pytest.raises(InvalidArgument) as e:
            bell_merge(tensor(path, ghz_star(2, b)), qs[0], b[0], BITS[0])
        assert e.value.code == "unsupported-shape"


class TestMergeKeep:
    def test_bell_bell_to_ghz3(self):
        a, b = qubits("A", 2), qubits("B", 2)
        g = merge_keep(tensor(ghz_star(2, a), ghz_star(2, b)), a[0], b[0], BITS[1])
        assert len(g) == 3 and star_center(g, g.vertices) == a[0]
        assert replays(g) and is_physical_ghz(g)

    def test_ghz3_bell_to_ghz4(self):
        a, b = qubits("A", 3), qubits("B", 2)
        g = merge_keep(tensor(ghz_star(3, a), ghz_star(2, b)), a[1], b[1], BITS[0])
        assert len(g) == 4 and replays(g) and is_physical_ghz(g)

    @pytest.mark.parametrize("m,n", list(itertools.product((2, 3, 4), repeat=2)))
    def test_size_law(self, m, n):
        a, b = qubits("A", m), qubits("B", n)
        g0 = tensor(ghz_star(m, a), ghz_star(n, b))
        g = merge_keep(g0, a[-1], b[-1], OutcomeSource.seeded(m * 10 + n))
        assert len(g) == len(g0) - 1 and replays(g)
        g2 = bell_merge(g0, a[-1], b[-1], OutcomeSource.seeded(m * 10 + n))
        assert len(g2) == len(g0) - 2


def test_make_star_moves_root():
    qs = qubits("d", 4)
    g = make_star(ghz_star(4, qs), qs[2])
    assert star_center(g, g.vertices) == qs[2]
    assert oracle.equal_up_to_phase(oracle.physical_state(g), oracle.physical_state(ghz_star(4, qs)))


def test_disjoint_z_measurements_commute():
    g = random_graph(11, 7)
    a, b = sorted(g.vertices)[1], sorted(g.vertices)[4]
    ab = measure_z(measure_z(g, a, BITS[1]), b, BITS[0])
    ba = measure_z(measure_z(g, b, BITS[0]), a, BITS[1])
    assert ab.edges == ba.edges
    assert oracle.equal_up_to_phase(oracle.physical_state(ab), oracle.physical_state(ba))


def test_seeded_outcomes_are_deterministic():
    def run(seed):
        g = random_graph(4, 6)
        src = OutcomeSource.seeded(seed)
        for v in sorted(g.vertices)[:4]:
            g = measure(g, v, "Y", src)
        return g.outcome_log

    assert run(5) == run(5)
    logs = {run(s) for s in range(8)}
    assert len(logs) > 1


OPS = st.sampled_from(["lc", "X", "Y", "Z", "cz", "bell"])


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 10_000), n=st.integers(2, 8), ops=st.lists(st.tuples(OPS, st.integers(0, 7),
                                                                                 st.integers(0, 7),
                                                                                 st.integers(0, 1)),
                                                                       min_size=1, max_size=5))
def test_random_operation_sequences_match_oracle(seed, n, ops):
    g = random_graph(seed, n, frames=True)
    for op, i, j, bit in ops:
        vs = sorted(g.vertices)
        if len(vs) < 2:
            break
        a, b = vs[i % len(vs)], vs[j % len(vs)]
        if a == b:
            b = vs[(i + 1) % len(vs)]
        src = OutcomeSource.fixed(bit)
        if op == "lc":
            g = local_complement(g, a)
        elif op == "cz":
            g = apply_cz(g, a, b)
        elif op == "bell":
            g = bell_measure(g, a, b, OutcomeSource.seeded(seed))
        else:
            g = measure(g, a, op, src)
        assert sum(1 for _ in g.byproducts) == len(g)
        assert replays(g)
