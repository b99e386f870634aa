"""Graph states with an explicit local-Clifford byproduct frame.

A :class:`GraphState` stores a simple graph ``G`` plus one single-qubit
Clifford ``C_v`` per vertex.  The physical state it stands for is
``(prod_v C_v) |G>``, where ``|G>`` is the common +1 eigenstate of the
correlation operators ``K_a``.  Operations are functional: each returns a new
state and appends the physical primitives it used to ``trace`` so the dense
oracle can replay them.

Measurement rules follow Hein, Eisert & Briegel (PRA 69, 062311):

* ``Z``: delete the vertex; outcome 1 puts ``Z`` on the former neighbours.
* ``Y``: complement the neighbourhood, then delete; ``sqrt(-+iZ)`` on neighbours.
* ``X``: ``tau_b0(tau_a(tau_b0(G)) - a)`` with a special neighbour ``b0``.
"""

from __future__ import annotations

from collections import deque
from functools import lru_cache
from itertools import combinations
from typing import Iterable, Mapping, NamedTuple, Sequence

import numpy as np

from . import clifford as cl
from .errors import InvalidArgument, NotFound


class QubitId(NamedTuple):
    device: str
    index: int

    def __str__(self) -> str:
        return f"{self.device}.{self.index}"


class Fragment(NamedTuple):
    """Snapshot of a freshly prepared state, used by ``attach`` trace records."""

    vertices: frozenset
    edges: frozenset
    byproducts: Mapping


class OutcomeSource:
    """Supplies measurement outcome bits.

    ``OutcomeSource.fixed(b)`` always returns ``b`` (or cycles through a
    sequence of bits); ``OutcomeSource.seeded(s)`` draws uniform bits from a
    PCG64 stream, so equal seeds give equal outcome sequences.
    """

    def __init__(self, mode: str = "seeded", bits: Sequence[int] = (0,), seed: int = 0):
        if mode not in ("fixed", "seeded"):
            raise InvalidArgument(f"unknown outcome mode {mode!r}")
        self.mode = mode
        self.bits = tuple(int(b) & 1 for b in bits) or (0,)
        self.seed = seed
        self._pos = 0
        self._rng = np.random.Generator(np.random.PCG64(seed)) if mode == "seeded" else None

    @classmethod
    def fixed(cls, bits: int | Sequence[int] = 0) -> "OutcomeSource":
        if isinstance(bits, int):
            bits = (bits,)
        return cls("fixed", bits=bits)

    @classmethod
    def seeded(cls, seed: int) -> "OutcomeSource":
        return cls("seeded", seed=seed)

    def next_bit(self) -> int:
        if self.mode == "fixed":
            b = self.bits[self._pos % len(self.bits)]
            self._pos += 1
            return b
        return int(self._rng.integers(0, 2))

    def spawn(self, key: int) -> "OutcomeSource":
        """Independent child stream; deterministic in ``(seed, key)``."""
        if self.mode == "fixed":
            return OutcomeSource("fixed", bits=self.bits)
        return OutcomeSource.seeded(int(np.random.SeedSequence([self.seed, key]).generate_state(1)[0]))


def _edge(a, b) -> frozenset:
    return frozenset((a, b))


class GraphState:
    """Immutable-from-outside graph state; see the module docstring."""

    __slots__ = ("_adj", "_byp", "outcome_log", "trace")

    def __init__(self, vertices: Iterable = (), edges: Iterable = (), byproducts: Mapping | None = None,
                 outcome_log: Iterable = (), trace: Iterable | None = None):
        self._adj: dict = {v: set() for v in vertices}
        for e in edges:
            u, v = tuple(e)
            if u == v:
                raise InvalidArgument(f"self-loop on {u!r}")
            if u not in self._adj or v not in self._adj:
                raise NotFound(f"edge {u!r}-{v!r} references a missing vertex")
            self._adj[u].add(v)
            self._adj[v].add(u)
        self._byp = {v: cl.I for v in self._adj}
        for v, c in (byproducts or {}).items():
            if v not in self._adj:
                raise NotFound(f"byproduct on missing vertex {v!r}")
            self._byp[v] = int(c)
        self.outcome_log = tuple(outcome_log)
        if trace is None:
            trace = (("attach", self.fragment()),) if self._adj else ()
        self.trace = tuple(trace)

    # ------------------------------------------------------------------ views
    @property
    def vertices(self) -> frozenset:
        return frozenset(self._adj)

    @property
    def edges(self) -> frozenset:
        return frozenset(_edge(u, v) for u in self._adj for v in self._adj[u] if u < v)

    @property
    def byproducts(self) -> dict:
        return dict(self._byp)

    def neighbors(self, q) -> frozenset:
        self._check(q)
        return frozenset(self._adj[q])

    def degree(self, q) -> int:
        return len(self.neighbors(q))

    def has_edge(self, a, b) -> bool:
        return b in self._adj.get(a, ())

    def fragment(self) -> Fragment:
        return Fragment(self.vertices, self.edges, self.byproducts)

    def component(self, q) -> frozenset:
        self._check(q)
        seen, stack = set(), [q]
        while stack:
            x = stack.pop()
            if x not in seen:
                seen.add(x)
                stack.extend(self._adj[x] - seen)
        return frozenset(seen)

    def components(self) -> list[frozenset]:
        out, seen = [], set()
        for v in sorted(self._adj):
            if v not in seen:
                c = self.component(v)
                seen |= c
                out.append(c)
        return out

    def subgraph_edges(self, vs: Iterable) -> frozenset:
        vs = set(vs)
        return frozenset(e for e in self.edges if e <= vs)

    def __len__(self) -> int:
        return len(self._adj)

    def __contains__(self, q) -> bool:
        return q in self._adj

    def __repr__(self) -> str:
        edges = sorted(tuple(sorted(map(str, e))) for e in self.edges)
        return f"GraphState(n={len(self)}, edges={edges})"

    def same_state_as(self, other: "GraphState") -> bool:
        """Structural equality of graph and frame (not of history)."""
        return self.vertices == other.vertices and self.edges == other.edges and \
            self._byp == other._byp

    # -------------------------------------------------------------- internals
    def _check(self, q) -> None:
        if q not in self._adj:
            raise NotFound(f"vertex {q!r} not in state")

    def _copy(self) -> "GraphState":
        g = GraphState.__new__(GraphState)
        g._adj = {v: set(n) for v, n in self._adj.items()}
        g._byp = dict(self._byp)
        g.outcome_log = self.outcome_log
        g.trace = self.trace
        return g

    def _record(self, *rec) -> None:
        self.trace = self.trace + (rec,)

    def _toggle(self, a, b) -> None:
        if b in self._adj[a]:
            self._adj[a].discard(b)
            self._adj[b].discard(a)
        else:
            self._adj[a].add(b)
            self._adj[b].add(a)

    def _complement_neighbourhood(self, a) -> None:
        for u, v in combinations(sorted(self._adj[a]), 2):
            self._toggle(u, v)

    def _remove(self, a) -> None:
        for b in self._adj.pop(a):
            self._adj[b].discard(a)
        del self._byp[a]

    def _right(self, q, c: int) -> None:
        self._byp[q] = cl.mul(self._byp[q], c)

    def _lc(self, a) -> None:
        # |tau_a G> = sqrt(-iX_a) prod_b sqrt(iZ_b) |G>; the frame absorbs the inverse.
        nbrs = sorted(self._adj[a])
        self._complement_neighbourhood(a)
        self._right(a, cl.SQRT_IX)
        for b in nbrs:
            self._right(b, cl.SQRT_MIZ)

    def _local(self, q, c: int) -> None:
        self._byp[q] = cl.mul(c, self._byp[q])
        self._record("local", q, c)

    def _graph_measure(self, a, basis: str, g: int, b0=None) -> None:
        """Measure graph-frame Pauli ``basis`` on ``|G>`` with outcome ``g``; fold corrections."""
        nbrs = sorted(self._adj[a])
        corr: dict = {}
        if basis == "Z":
            self._remove(a)
            if g:
                corr = {b: cl.Z for b in nbrs}
        elif basis == "Y":
            self._complement_neighbourhood(a)
            self._remove(a)
            u = cl.SQRT_IZ if g else cl.SQRT_MIZ
            corr = {b: u for b in nbrs}
        elif basis == "X":
            if not nbrs:
                self._remove(a)
            else:
                if b0 is None:
                    b0 = nbrs[0]
                na = set(self._adj[a])
                nb = set(self._adj[b0])
                if g == 0:
                    corr = {b: cl.Z for b in na - nb - {b0}}
                    corr[b0] = cl.SQRT_IY
                else:
                    corr = {b: cl.Z for b in nb - na - {a}}
                    corr[b0] = cl.SQRT_MIY
                self._complement_neighbourhood(b0)
                self._complement_neighbourhood(a)
                self._remove(a)
                self._complement_neighbourhood(b0)
        else:
            raise InvalidArgument(f"unknown basis {basis!r}")
        for b, u in corr.items():
            self._right(b, u)

    def _measure(self, a, pauli: str, src: OutcomeSource, tag: str, b0=None) -> int:
        sign, q = cl.conjugate_pauli(self._byp[a], pauli)
        if q == "X" and not self._adj[a]:
            g = 0
            m = 0 if sign > 0 else 1
        else:
            m = src.next_bit()
            g = m ^ (1 if sign < 0 else 0)
        self._graph_measure(a, q, g, b0=b0 if q == "X" else None)
        self.outcome_log = self.outcome_log + ((tag, a, m),)
        self._record("measure", a, pauli, m)
        return m

    def _reduce(self, a, avoid) -> bool:
        """Make ``C_a`` diagonal using local complementations; False if impossible here."""
        if cl.is_diagonal(self._byp[a]):
            return True
        others = sorted(self._adj[a] - {avoid})
        if not others:
            return False
        c = others[0]
        for step in _diagonalising_word(self._byp[a]):
            self._lc(a if step == "a" else c)
        assert cl.is_diagonal(self._byp[a])
        return True

    def _cz(self, a, b) -> None:
        if a == b:
            raise InvalidArgument("CZ needs two distinct qubits", code="invalid-pair")
        self._check(a)
        self._check(b)
        self._reduce(a, b)
        self._reduce(b, a)
        self._reduce(a, b)
        ca, cb = self._byp[a], self._byp[b]
        if cl.is_diagonal(ca) and cl.is_diagonal(cb):
            self._toggle(a, b)
        else:
            ext_a = bool(self._adj[a] - {b})
            ext_b = bool(self._adj[b] - {a})
            edge, na, nb = _two_qubit_cz(ca, cb, self.has_edge(a, b), ext_a, ext_b)
            if edge != self.has_edge(a, b):
                self._toggle(a, b)
            self._byp[a], self._byp[b] = na, nb
        self._record("cz", a, b)


# --------------------------------------------------------------------------- #
# cached helper tables


@lru_cache(maxsize=None)
def _diagonalising_word(c: int) -> tuple[str, ...]:
    """Shortest word over right factors sqrt(iX) ('a') and sqrt(-iZ) ('c') making ``c`` diagonal."""
    gens = {"a": cl.SQRT_IX, "c": cl.SQRT_MIZ}
    queue = deque([(c, ())])
    seen = {c}
    while queue:
        x, word = queue.popleft()
        if cl.is_diagonal(x):
            return word
        for s, g in gens.items():
            y = cl.mul(x, g)
            if y not in seen:
                seen.add(y)
                queue.append((y, word + (s,)))
    raise AssertionError("Clifford group not generated")


def _pair_state(ca: int, cb: int, edge: bool) -> np.ndarray:
    psi = np.full(4, 0.5, dtype=complex)
    if edge:
        psi[3] = -0.5
    return np.kron(cl.matrix(ca), cl.matrix(cb)) @ psi


@lru_cache(maxsize=None)
def _two_qubit_cz(ca: int, cb: int, edge: bool, diag_a: bool, diag_b: bool) -> tuple[bool, int, int]:
    target = np.diag([1, 1, 1, -1]).astype(complex) @ _pair_state(ca, cb, edge)
    for e in (edge, not edge):
        for na in range(24):
            if diag_a and not cl.is_diagonal(na):
                continue
            for nb in range(24):
                if diag_b and not cl.is_diagonal(nb):
                    continue
                if abs(abs(np.vdot(_pair_state(na, nb, e), target)) - 1) < 1e-9:
                    return e, na, nb
    raise AssertionError("no two-qubit graph form for CZ result")


# --------------------------------------------------------------------------- #
# public operations


def ghz_star(n: int, labels: Sequence) -> GraphState:
    """Star graph with ``labels[0]`` as root: the graph form of ``GHZ_n``."""
    labels = list(labels)
    if n < 2:
        raise InvalidArgument(f"GHZ size {n} < 2", code="invalid-size")
    if len(labels) != n or len(set(labels)) != n:
        raise InvalidArgument("need n distinct labels", code="invalid-labels")
    root = labels[0]
    return GraphState(labels, [(root, leaf) for leaf in labels[1:]])


def local_complement(state: GraphState, a) -> GraphState:
    state._check(a)
    s = state._copy()
    s._lc(a)
    return s


def apply_local(state: GraphState, q, c: int) -> GraphState:
    """Physically apply the Clifford ``c`` to qubit ``q``."""
    state._check(q)
    s = state._copy()
    s._local(q, c)
    return s


def clear_frame(state: GraphState, q) -> GraphState:
    """Physically undo the byproduct on ``q`` so that ``C_q = I``."""
    state._check(q)
    c = state._byp[q]
    if c == cl.I:
        return state
    return apply_local(state, q, cl.inv(c))


def clear_frames(state: GraphState, qubits: Iterable | None = None) -> GraphState:
    for q in sorted(state.vertices if qubits is None else qubits):
        state = clear_frame(state, q)
    return state


def measure(state: GraphState, a, pauli: str, src: OutcomeSource, b0=None) -> GraphState:
    """Measure physical Pauli ``pauli`` on ``a`` and remove it."""
    state._check(a)
    if pauli not in ("X", "Y", "Z"):
        raise InvalidArgument(f"unknown basis {pauli!r}")
    s = state._copy()
    s._measure(a, pauli, src, f"M{pauli}", b0=b0)
    return s


def measure_z(state: GraphState, a, src: OutcomeSource) -> GraphState:
    return measure(state, a, "Z", src)


def measure_y(state: GraphState, a, src: OutcomeSource) -> GraphState:
    return measure(state, a, "Y", src)


def measure_x(state: GraphState, a, src: OutcomeSource, b0=None) -> GraphState:
    state._check(a)
    nbrs = state._adj[a]
    if b0 is not None and nbrs and b0 not in nbrs:
        raise InvalidArgument(f"{b0!r} is not a neighbour of {a!r}", code="invalid-special-neighbor")
    return measure(state, a, "X", src, b0=b0)


def apply_cz(state: GraphState, a, b) -> GraphState:
    s = state._copy()
    s._cz(a, b)
    return s


def _cnot(s: GraphState, control, target) -> None:
    s._local(target, cl.H)
    s._cz(control, target)
    s._local(target, cl.H)


def bell_measure(state: GraphState, a, b, src: OutcomeSource) -> GraphState:
    """Bell measurement of ``a`` and ``b`` (CNOT a->b, H a, Z on both) on any graph."""
    if a == b:
        raise InvalidArgument("Bell measurement needs two qubits", code="invalid-pair")
    state._check(a)
    state._check(b)
    s = state._copy()
    _cnot(s, a, b)
    s._local(a, cl.H)
    s._measure(a, "Z", src, "BM")
    s._measure(b, "Z", src, "BM")
    return s


def star_center(state: GraphState, comp: Iterable) -> object | None:
    """Centre of a star component, ``None`` if the component is no star.

    Two-vertex components report their smaller vertex.
    """
    comp = sorted(comp)
    n = len(comp)
    if n == 1:
        return comp[0]
    for v in comp:
        if len(state._adj[v]) == n - 1 and all(len(state._adj[u]) == 1 for u in comp if u != v):
            return v
    return None


def is_complete(state: GraphState, comp: Iterable) -> bool:
    comp = set(comp)
    return all(state._adj[v] == comp - {v} for v in comp)


def is_ghz_shaped(state: GraphState, comp: Iterable) -> bool:
    comp = list(comp)
    return len(comp) >= 2 and (star_center(state, comp) is not None or is_complete(state, comp))


def _make_star(s: GraphState, root) -> None:
    comp = s.component(root)
    if len(comp) <= 2:
        return
    c = star_center(s, comp)
    if c == root:
        return
    if c is not None:
        s._lc(c)
    elif not is_complete(s, comp):
        raise InvalidArgument("component is not GHZ-shaped", code="unsupported-shape")
    s._lc(root)


def make_star(state: GraphState, root) -> GraphState:
    """Re-express a GHZ-shaped component as a star centred at ``root`` (frame-only)."""
    state._check(root)
    s = state._copy()
    _make_star(s, root)
    return s


def _prepare_fusion(state: GraphState, a, b) -> GraphState:
    if a == b:
        raise InvalidArgument("fusion needs two qubits", code="invalid-pair")
    state._check(a)
    state._check(b)
    ca, cb = state.component(a), state.component(b)
    if ca == cb:
        raise InvalidArgument(f"{a!r} and {b!r} share a component", code="would-create-loop")
    for comp in (ca, cb):
        if not is_ghz_shaped(state, comp):
            raise InvalidArgument("fusion is defined for GHZ components only", code="unsupported-shape")
    s = state._copy()
    for x in (a, b):
        _make_star(s, x)
        c = s._byp[x]
        if c != cl.I:
            s._local(x, cl.inv(c))
    return s


def _finish(s: GraphState, root) -> GraphState:
    if root is not None:
        _make_star(s, root)
    return s


def bell_merge(state: GraphState, a, b, src: OutcomeSource, root=None) -> GraphState:
    """Fuse the GHZ components of ``a`` and ``b`` by a Bell measurement: GHZ_m, GHZ_n -> GHZ_{m+n-2}.

    ``root`` optionally names the vertex that should be the star centre of the result.
    """
    s = _prepare_fusion(state, a, b)
    rest = (s.component(a) | s.component(b)) - {a, b}
    _cnot(s, a, b)
    s._local(a, cl.H)
    s._measure(a, "Z", src, "BM")
    s._measure(b, "Z", src, "BM")
    if root is None and rest:
        root = min(rest)
    return _finish(s, root)


def merge_keep(state: GraphState, a, b, src: OutcomeSource, root=None) -> GraphState:
    """Fuse keeping ``a``: GHZ_m, GHZ_n -> GHZ_{m+n-1} (parity measurement, ``b`` removed)."""
    s = _prepare_fusion(state, a, b)
    _cnot(s, a, b)
    s._measure(b, "Z", src, "FM")
    return _finish(s, a if root is None else root)


def tensor(*states: GraphState) -> GraphState:
    """Disjoint union; traces and outcome logs are concatenated."""
    out = GraphState()
    for st in states:
        clash = out.vertices & st.vertices
        if clash:
            raise InvalidArgument(f"duplicate qubits {sorted(clash)!r}", code="invalid-labels")
        out._adj.update({v: set(n) for v, n in st._adj.items()})
        out._byp.update(st._byp)
        out.outcome_log += st.outcome_log
        out.trace += st.trace
    return out


def relabel(state: GraphState, mapping: Mapping) -> GraphState:
    """Rename qubits (teleportation to a client is modelled this way)."""
    s = state._copy()
    for old, new in sorted(mapping.items()):
        s._check(old)
        if new in s._adj and new != old:
            raise InvalidArgument(f"target label {new!r} already used", code="invalid-labels")
        nbrs = s._adj.pop(old)
        s._adj[new] = nbrs
        for b in nbrs:
            s._adj[b].discard(old)
            s._adj[b].add(new)
        s._byp[new] = s._byp.pop(old)
        s._record("relabel", old, new)
    return s


def induced(state: GraphState, vertices: Iterable) -> GraphState:
    """Fresh state holding whole components listed in ``vertices`` (no history)."""
    vs = set()
    for v in vertices:
        vs |= state.component(v)
    return GraphState(vs, state.subgraph_edges(vs), {v: state._byp[v] for v in vs})


def discard(state: GraphState, vertices: Iterable) -> GraphState:
    """Trace out the whole components containing ``vertices``.

    Whole components are product factors of the state, so removing them is exact.
    """
    s = state._copy()
    drop = set()
    for v in vertices:
        drop |= s.component(v)
    for v in sorted(drop):
        s._remove(v)
    if drop:
        s._record("discard", tuple(sorted(drop)))
    return s
