"""Dense state-vector oracle for small systems (at most 16 qubits).

The oracle is deliberately naive: amplitudes live in a numpy tensor with one
axis per labelled qubit and every gate or projector is applied by explicit
contraction.  It shares nothing with the graph-rule code in
:mod:`qnetstack.graphstate` beyond the Clifford matrices, which is what makes
it usable as ground truth.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Hashable, Iterable, Mapping, Sequence

import numpy as np

from . import clifford
from .errors import CapacityExceeded, ImpossibleOutcome, InvalidArgument

MAX_QUBITS = 16
MAX_DENSITY_QUBITS = 12

_SQ2 = 1 / np.sqrt(2)
_EIGVECS = {
    ("Z", 0): np.array([1, 0], dtype=complex),
    ("Z", 1): np.array([0, 1], dtype=complex),
    ("X", 0): np.array([1, 1], dtype=complex) * _SQ2,
    ("X", 1): np.array([1, -1], dtype=complex) * _SQ2,
    ("Y", 0): np.array([1, 1j], dtype=complex) * _SQ2,
    ("Y", 1): np.array([1, -1j], dtype=complex) * _SQ2,
}
_H = clifford.matrix(clifford.H)


class LabelError(InvalidArgument):
    code = "label-error"


@dataclass
class StateVector:
    """Normalised pure state on ``labels``; axis ``k`` of ``tensor`` is ``labels[k]``."""

    tensor: np.ndarray
    labels: list

    def __post_init__(self):
        self.labels = list(self.labels)
        if len(self.labels) > MAX_QUBITS:
            raise CapacityExceeded(f"{len(self.labels)} qubits > {MAX_QUBITS}")
        self.tensor = np.asarray(self.tensor, dtype=complex).reshape((2,) * len(self.labels))

    @property
    def n(self) -> int:
        return len(self.labels)

    @property
    def amplitudes(self) -> np.ndarray:
        return self.tensor.reshape(-1)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def axis(self, q: Hashable) -> int:
        try:
            return self.labels.index(q)
        except ValueError:
            raise LabelError(f"qubit {q!r} not in state") from None

    def copy(self) -> "StateVector":
        return StateVector(self.tensor.copy(), list(self.labels))

    def reordered(self, labels: Sequence) -> "StateVector":
        if sorted(map(repr, labels)) != sorted(map(repr, self.labels)) or len(labels) != self.n:
            raise LabelError("label sets differ")
        perm = [self.labels.index(q) for q in labels]
        return StateVector(np.transpose(self.tensor, perm), list(labels))


@dataclass
class PauliString:
    ops: dict = field(default_factory=dict)
    phase: complex = 1

    def __post_init__(self):
        if self.phase not in (1, -1, 1j, -1j):
            raise InvalidArgument(f"phase {self.phase} not in {{+1,-1,+i,-i}}")
        for p in self.ops.values():
            if p not in "IXYZ" or len(p) != 1:
                raise InvalidArgument(f"bad Pauli {p!r}")


def correlation_operator(edges: Iterable, a: Hashable) -> PauliString:
    """``K_a = X_a`` times ``Z`` on every neighbour of ``a``."""
    ops = {a: "X"}
    for e in edges:
        u, v = tuple(e)
        if u == a:
            ops[v] = "Z"
        elif v == a:
            ops[u] = "Z"
    return PauliString(ops)


# --------------------------------------------------------------------------- #
# construction


def build_statevector(graph=None, *, vertices=None, edges=None, labels=None) -> StateVector:
    """Graph state ``prod CZ |+>^n``; accepts a GraphState or explicit vertices/edges.

    Byproducts are ignored here; use :func:`apply_byproducts` for the physical state.
    """
    if graph is not None:
        vertices, edges = graph.vertices, graph.edges
    labels = list(labels) if labels is not None else sorted(vertices)
    n = len(labels)
    if n > MAX_QUBITS:
        raise CapacityExceeded(f"{n} qubits > {MAX_QUBITS}")
    if n == 0:
        return StateVector(np.array(1.0 + 0j), [])
    pos = {q: i for i, q in enumerate(labels)}
    idx = np.arange(2**n)
    bits = (idx[:, None] >> (n - 1 - np.arange(n))[None, :]) & 1
    parity = np.zeros(2**n, dtype=int)
    for e in edges:
        u, v = tuple(e)
        parity ^= bits[:, pos[u]] & bits[:, pos[v]]
    amps = (1 - 2 * parity) / np.sqrt(2**n)
    return StateVector(amps.astype(complex), labels)


def ghz_statevector(labels: Sequence) -> StateVector:
    n = len(labels)
    amps = np.zeros(2**n, dtype=complex)
    amps[0] = amps[-1] = _SQ2
    return StateVector(amps, labels)


def tensor(a: StateVector, b: StateVector) -> StateVector:
    if set(a.labels) & set(b.labels):
        raise LabelError("tensor factors share labels")
    return StateVector(np.multiply.outer(a.tensor, b.tensor), a.labels + b.labels)


# --------------------------------------------------------------------------- #
# gates


def apply_1q(sv: StateVector, q: Hashable, u: np.ndarray) -> StateVector:
    k = sv.axis(q)
    t = np.tensordot(u, sv.tensor, axes=([1], [k]))
    return StateVector(np.moveaxis(t, 0, k), sv.labels)


def apply_clifford(sv: StateVector, q: Hashable, c: int) -> StateVector:
    return apply_1q(sv, q, clifford.matrix(c))


def apply_cz(sv: StateVector, a: Hashable, b: Hashable) -> StateVector:
    ka, kb = sv.axis(a), sv.axis(b)
    if ka == kb:
        raise InvalidArgument("CZ needs two distinct qubits", code="invalid-pair")
    t = sv.tensor.copy()
    sl = [slice(None)] * sv.n
    sl[ka] = 1
    sl[kb] = 1
    t[tuple(sl)] *= -1
    return StateVector(t, sv.labels)


def apply_cnot(sv: StateVector, control: Hashable, target: Hashable) -> StateVector:
    sv = apply_1q(sv, target, _H)
    sv = apply_cz(sv, control, target)
    return apply_1q(sv, target, _H)


def apply_byproducts(sv: StateVector, byproducts: Mapping) -> StateVector:
    for q, c in byproducts.items():
        if c != clifford.I:
            sv = apply_clifford(sv, q, c)
    return sv


def physical_state(graph) -> StateVector:
    """Byproduct frame applied to the canonical graph state of ``graph``."""
    return apply_byproducts(build_statevector(graph), graph.byproducts)


# --------------------------------------------------------------------------- #
# measurement and expectation


def expect_pauli(sv: StateVector, p: PauliString) -> complex | float:
    phi = sv
    for q, op in p.ops.items():
        if op != "I":
            phi = apply_1q(phi, q, clifford.PAULI[op])
    val = p.phase * np.vdot(sv.amplitudes, phi.amplitudes)
    if abs(val.imag) < 1e-10:
        return float(val.real)
    return complex(val)


def _project(sv: StateVector, q, vec: np.ndarray) -> tuple[float, StateVector]:
    k = sv.axis(q)
    t = np.tensordot(vec.conj(), sv.tensor, axes=([0], [k]))
    labels = sv.labels[:k] + sv.labels[k + 1:]
    prob = float(np.vdot(t.ravel(), t.ravel()).real)
    return prob, StateVector(t, labels) if prob == 0 else StateVector(t / np.sqrt(prob), labels)


def measure_projective(
    sv: StateVector,
    q: Hashable,
    basis: str,
    outcome,
    q2: Hashable | None = None,
    *,
    allow_zero: bool = False,
) -> tuple[float, StateVector]:
    """Project ``q`` (and ``q2`` for ``basis="bell"``) and drop the measured qubits.

    The Bell measurement is CNOT(q -> q2), H on q, then Z on both; ``outcome`` is
    then the bit pair ``(m_q, m_q2)``.
    """
    if basis == "bell":
        if q2 is None:
            raise InvalidArgument("Bell measurement needs a partner qubit")
        m1, m2 = outcome
        phi = apply_cnot(sv, q, q2)
        phi = apply_1q(phi, q, _H)
        p1, phi = _project(phi, q, _EIGVECS[("Z", m1)])
        if p1 < 1e-12:
            if allow_zero:
                return 0.0, phi
            raise ImpossibleOutcome(f"Bell outcome {outcome} has zero probability")
        p2, phi = _project(phi, q2, _EIGVECS[("Z", m2)])
        prob = p1 * p2
    else:
        if basis not in "XYZ" or len(basis) != 1:
            raise InvalidArgument(f"unknown basis {basis!r}")
        prob, phi = _project(sv, q, _EIGVECS[(basis, int(outcome))])
    if prob < 1e-12 and not allow_zero:
        raise ImpossibleOutcome(f"outcome {outcome} of {basis} on {q!r} has zero probability")
    return prob, phi


def equal_up_to_phase(a: StateVector, b: StateVector, tol: float = 1e-9) -> bool:
    if set(a.labels) != set(b.labels) or a.n != b.n:
        raise LabelError("states have different labels")
    b = b.reordered(a.labels)
    x, y = a.amplitudes, b.amplitudes
    ov = np.vdot(y, x)
    if abs(ov) < 1e-15:
        return bool(np.max(np.abs(x - y)) <= tol)
    phase = ov / abs(ov)
    return bool(np.max(np.abs(x - phase * y)) <= tol)


# --------------------------------------------------------------------------- #
# mixed states


@dataclass
class DensityOperator:
    matrix: np.ndarray
    labels: list

    @property
    def n(self) -> int:
        return len(self.labels)

    def _tensor(self) -> np.ndarray:
        return self.matrix.reshape((2,) * (2 * self.n))

    def _apply_left_right(self, q, u: np.ndarray) -> "DensityOperator":
        k = self.labels.index(q)
        t = self._tensor()
        t = np.moveaxis(np.tensordot(u, t, axes=([1], [k])), 0, k)
        t = np.moveaxis(np.tensordot(u.conj(), t, axes=([1], [self.n + k])), 0, self.n + k)
        return DensityOperator(t.reshape(2**self.n, 2**self.n), self.labels)

    def expect(self, p: PauliString) -> float:
        rho = self
        m = self.matrix
        op = np.eye(1, dtype=complex)
        for q in self.labels:
            op = np.kron(op, clifford.PAULI[p.ops.get(q, "I")])
        for q in p.ops:
            if q not in self.labels:
                raise LabelError(f"qubit {q!r} not in state")
        del rho
        return float((p.phase * np.trace(m @ op)).real)

    def measure(self, q, basis: str, outcome: int) -> tuple[float, "DensityOperator"]:
        k = self.labels.index(q)
        vec = _EIGVECS[(basis, int(outcome))]
        t = self._tensor()
        t = np.tensordot(vec.conj(), t, axes=([0], [k]))
        t = np.tensordot(vec, t, axes=([0], [self.n - 1 + k]))
        n = self.n - 1
        m = t.reshape(2**n, 2**n)
        prob = float(np.trace(m).real)
        labels = self.labels[:k] + self.labels[k + 1:]
        if prob < 1e-12:
            raise ImpossibleOutcome(f"outcome {outcome} has zero probability")
        return prob, DensityOperator(m / prob, labels)

    def apply_clifford(self, q, c: int) -> "DensityOperator":
        return self._apply_left_right(q, clifford.matrix(c))

    def fidelity(self, sv: StateVector) -> float:
        """``<psi| rho |psi>`` after aligning label order."""
        sv = sv.reordered(self.labels)
        v = sv.amplitudes
        return float(np.vdot(v, self.matrix @ v).real)

    def with_mixed(self, qubits: Iterable) -> "DensityOperator":
        """Append maximally mixed qubits (the replacement half of trace-out-and-replace)."""
        m = self.matrix
        labels = list(self.labels)
        for q in qubits:
            m = np.kron(m, np.eye(2) / 2)
            labels.append(q)
        return DensityOperator(m, labels)

    def trace_out(self, qubits: Iterable) -> "DensityOperator":
        qubits = [q for q in qubits if q in self.labels]
        if not qubits:
            return self
        keep = [q for q in self.labels if q not in qubits]
        perm = [self.labels.index(q) for q in keep + qubits]
        n = self.n
        t = np.transpose(self._tensor(), perm + [n + p for p in perm])
        a, b = 2 ** len(keep), 2 ** len(qubits)
        m = np.einsum("ikjk->ij", t.reshape(a, b, a, b))
        return DensityOperator(m, keep)

    def purity(self) -> float:
        return float(np.trace(self.matrix @ self.matrix).real)


def ptrace_replace(sv: StateVector, qubits: Iterable, *, replace: bool = False) -> DensityOperator:
    """Reduced density operator after tracing out ``qubits``.

    With ``replace=True`` the traced qubits are put back maximally mixed so that
    operators on the original labels can still be evaluated.
    """
    qubits = list(qubits)
    for q in qubits:
        sv.axis(q)
    keep = [q for q in sv.labels if q not in qubits]
    if len(keep) > MAX_DENSITY_QUBITS:
        raise CapacityExceeded(f"{len(keep)} qubits > {MAX_DENSITY_QUBITS} for a density operator")
    t = sv.reordered(keep + qubits).amplitudes.reshape(2 ** len(keep), -1)
    rho = DensityOperator(t @ t.conj().T, keep)
    return rho.with_mixed(qubits) if replace else rho


# --------------------------------------------------------------------------- #
# trace replay


class Replayer:
    """Replays a graph-state operation trace on dense amplitudes.

    Connected components of the initial state (and of attached fragments) are
    only materialised when an operation first touches them, so long traces over
    many resource states stay within the qubit cap as long as the live set does.
    """

    def __init__(self, initial=None, max_qubits: int = MAX_QUBITS):
        self.sv = StateVector(np.array(1.0 + 0j), [])
        self.max_qubits = max_qubits
        self.peak = 0
        self._pending: dict = {}
        self.probability = 1.0
        if initial is not None:
            self._add_pending(initial)

    def _add_pending(self, graph) -> None:
        for comp in _components(graph.vertices, graph.edges):
            frag = (comp, [e for e in graph.edges if set(e) <= comp],
                    {q: graph.byproducts.get(q, clifford.I) for q in comp})
            for q in comp:
                self._pending[q] = frag

    def _touch(self, q) -> None:
        if q in self.sv.labels:
            return
        frag = self._pending.get(q)
        if frag is None:
            raise LabelError(f"qubit {q!r} unknown to the replay")
        comp, edges, byp = frag
        if self.sv.n + len(comp) > self.max_qubits:
            raise CapacityExceeded(f"replay needs {self.sv.n + len(comp)} live qubits")
        part = apply_byproducts(build_statevector(vertices=comp, edges=edges), byp)
        self.sv = tensor(self.sv, part)
        self.peak = max(self.peak, self.sv.n)
        for v in comp:
            del self._pending[v]

    def step(self, rec: tuple) -> None:
        kind = rec[0]
        if kind == "attach":
            self._add_pending(rec[1])
        elif kind == "local":
            _, q, c = rec
            self._touch(q)
            self.sv = apply_clifford(self.sv, q, c)
        elif kind == "cz":
            _, a, b = rec
            self._touch(a)
            self._touch(b)
            self.sv = apply_cz(self.sv, a, b)
        elif kind == "measure":
            _, q, basis, outcome = rec
            self._touch(q)
            prob, self.sv = measure_projective(self.sv, q, basis, outcome)
            self.probability *= prob
        elif kind == "discard":
            live = [q for q in rec[1] if q in self.sv.labels]
            for q in rec[1]:
                self._pending.pop(q, None)
            if live:
                self.sv = _split_off(self.sv, live)
        elif kind == "relabel":
            _, old, new = rec
            if old in self._pending:
                self._touch(old)
            self.sv = StateVector(self.sv.tensor, [new if q == old else q for q in self.sv.labels])
        else:
            raise InvalidArgument(f"unknown trace record {kind!r}")

    def run(self, trace: Iterable[tuple]) -> "Replayer":
        for rec in trace:
            self.step(rec)
        return self

    def final(self, labels: Iterable | None = None) -> StateVector:
        """Materialise remaining components (or just ``labels``) and return the state."""
        for q in list(labels if labels is not None else self._pending):
            if q in self._pending:
                self._touch(q)
        return self.sv


def _split_off(sv: StateVector, qubits: list) -> StateVector:
    """Remove ``qubits`` that form a product factor of ``sv``."""
    keep = [q for q in sv.labels if q not in qubits]
    m = sv.reordered(keep + list(qubits)).amplitudes.reshape(2 ** len(keep), -1)
    u, s, _ = np.linalg.svd(m, full_matrices=False)
    if len(s) > 1 and s[1] > 1e-7:
        raise InvalidArgument("discarded qubits are entangled with the rest")
    return StateVector(u[:, 0], keep)


def _components(vertices, edges) -> list[set]:
    adj = {v: set() for v in vertices}
    for e in edges:
        u, v = tuple(e)
        adj[u].add(v)
        adj[v].add(u)
    seen, out = set(), []
    for v in sorted(adj):
        if v in seen:
            continue
        comp, stack = set(), [v]
        while stack:
            x = stack.pop()
            if x in comp:
                continue
            comp.add(x)
            stack.extend(adj[x] - comp)
        seen |= comp
        out.append(comp)
    return out


def replay_matches(initial, final_graph, trace, tol: float = 1e-9) -> bool:
    """Replay ``trace`` from ``initial`` and compare with ``final_graph``'s physical state."""
    rp = Replayer(initial).run(trace)
    got = rp.final(sorted(final_graph.vertices))
    extra = [q for q in got.labels if q not in final_graph.vertices]
    if extra:
        raise LabelError(f"replay left unmeasured qubits {extra!r}")
    return equal_up_to_phase(got, physical_state(final_graph), tol)
