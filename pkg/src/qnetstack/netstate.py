"""Multipartite network states shared by the devices of one network.

A network of ``m`` devices with ``c_i`` clients on device ``i`` stores, for
every ``i = 2..m``, ``c_i`` GHZ states of size ``i``.  Each one is rooted at
device ``i`` and has one leaf on every device ``1..i-1``.  Any subset of
devices (and hence of clients) can later be connected by
local operations on these states alone.

Beyond construction the module handles three ways a device can disappear:

* planned departure (:func:`device_leave`), which only shrinks states;
* unannounced failure (:func:`device_fail`), which destroys every state the
  device held a qubit of unless the layout is shielded;
* recovery of a shielded layout (:func:`recover_shielded`).

Storage costs of the three schemes are in :func:`cost_report`.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field, replace
from itertools import permutations
from typing import Iterable, Sequence

from . import graphstate as gs
from .errors import InvalidArgument, NotFound
from .graphstate import GraphState, OutcomeSource, QubitId

INTACT = "intact"
DESTROYED = "destroyed"
CONSUMED = "consumed"
PENDING = "pending"


class Allocator:
    """Hands out fresh qubit ids per device; share one across networks of a scenario."""

    def __init__(self):
        self._next: dict[str, int] = defaultdict(int)

    def new(self, device: str) -> QubitId:
        q = QubitId(device, self._next[device])
        self._next[device] += 1
        return q

    def many(self, device: str, n: int) -> list[QubitId]:
        return [self.new(device) for _ in range(n)]


@dataclass(frozen=True)
class NetworkSpec:
    clients: tuple[int, ...]
    devices: tuple[str, ...] = ()

    def __post_init__(self):
        clients = tuple(int(c) for c in self.clients)
        object.__setattr__(self, "clients", clients)
        if len(clients) < 2:
            raise InvalidArgument(f"a network needs at least 2 devices, got {len(clients)}",
                                  code="invalid-spec")
        if any(c < 0 for c in clients):
            raise InvalidArgument("client counts must be non-negative", code="invalid-spec")
        devices = tuple(self.devices) or tuple(f"N{i}" for i in range(1, len(clients) + 1))
        if len(devices) != len(clients) or len(set(devices)) != len(devices):
            raise InvalidArgument("device names must be distinct, one per client count",
                                  code="invalid-spec")
        object.__setattr__(self, "devices", devices)

    @classmethod
    def uniform(cls, m: int, c: int) -> "NetworkSpec":
        if m < 2:
            raise InvalidArgument(f"a network needs at least 2 devices, got {m}", code="invalid-spec")
        return cls(tuple([c] * m))

    @property
    def m(self) -> int:
        return len(self.clients)

    def device(self, d: str | int) -> str:
        """Resolve a device name or 1-based index."""
        if isinstance(d, int) and not isinstance(d, bool):
            if 1 <= d <= self.m:
                return self.devices[d - 1]
        elif d in self.devices:
            return d
        raise NotFound(f"unknown device {d!r}")

    def count(self, d: str) -> int:
        return self.clients[self.devices.index(d)]


@dataclass(frozen=True)
class GhzInstance:
    """One GHZ state (a star graph) of a network, possibly with shield qubits.

    ``shields`` pairs each shielded leaf with the qubit sitting between it and
    the root.  Shield qubits live on the root's device.
    """

    ident: str
    root: QubitId
    leaves: tuple[QubitId, ...]
    shields: tuple[tuple[QubitId, QubitId], ...] = ()
    status: str = INTACT
    copy: int = 0
    nominal: int = 0

    @property
    def size(self) -> int:
        return 1 + len(self.leaves)

    @property
    def devices(self) -> frozenset:
        return frozenset([self.root.device, *(q.device for q in self.leaves)])

    @property
    def qubits(self) -> tuple[QubitId, ...]:
        return (self.root, *self.leaves, *(s for _, s in self.shields))

    def shield_of(self, leaf: QubitId) -> QubitId | None:
        return dict(self.shields).get(leaf)

    def leaf_on(self, device: str) -> QubitId | None:
        for q in self.leaves:
            if q.device == device:
                return q
        return None

    def star_edges(self) -> list[tuple[QubitId, QubitId]]:
        sh = dict(self.shields)
        out = []
        for leaf in self.leaves:
            s = sh.get(leaf)
            out.extend([(self.root, leaf)] if s is None else [(self.root, s), (s, leaf)])
        return out


@dataclass(frozen=True)
class NetworkState:
    spec: NetworkSpec
    instances: tuple[GhzInstance, ...]
    backing: GraphState
    layout: str = "plain"
    configurations: tuple[tuple[str, ...], ...] | None = None
    failed: frozenset = frozenset()
    departed: frozenset = frozenset()
    alloc: Allocator = field(default_factory=Allocator, compare=False, repr=False)

    def live(self) -> list[GhzInstance]:
        return [i for i in self.instances if i.status == INTACT]

    def instance(self, ident: str) -> GhzInstance:
        for i in self.instances:
            if i.ident == ident:
                return i
        raise NotFound(f"no instance {ident!r}")

    def present(self) -> list[str]:
        return [d for d in self.spec.devices if d not in self.failed and d not in self.departed]

    def copies(self) -> dict[int, list[GhzInstance]]:
        out: dict[int, list[GhzInstance]] = defaultdict(list)
        for i in self.instances:
            out[i.copy].append(i)
        return dict(out)

    def census(self) -> int:
        """Number of qubits currently stored for this network."""
        return len(self.backing)


@dataclass(frozen=True)
class CostReport:
    M_M: int
    M_S: int
    M_B: int


# --------------------------------------------------------------------------- #
# construction


def _make_instances(order: Sequence[str], counts: Sequence[int], shielded: bool, alloc: Allocator,
                    copy: int, prefix: str) -> list[GhzInstance]:
    out = []
    for i in range(2, len(order) + 1):
        for j in range(counts[i - 1]):
            root = alloc.new(order[i - 1])
            leaves = tuple(alloc.new(order[k]) for k in range(i - 1))
            shields = ()
            if shielded and i >= 3:
                shields = tuple((leaf, alloc.new(order[i - 1])) for leaf in leaves)
            out.append(GhzInstance(f"{prefix}g{i}.{j}", root, leaves, shields, INTACT, copy, i))
    return out


def _backing_for(instances: Iterable[GhzInstance]) -> GraphState:
    vertices, edges = [], []
    for inst in instances:
        vertices.extend(inst.qubits)
        edges.extend(inst.star_edges())
    return GraphState(vertices, edges)


def build_network_state(spec: NetworkSpec, layout: str = "plain",
                        alloc: Allocator | None = None) -> NetworkState:
    """``c_i`` GHZ states of size ``i`` rooted at device ``i``, leaves on devices ``1..i-1``.

    With ``layout="shielded"`` every edge of a state of size 3 or more gets a
    shield qubit on the root's device.
    """
    if layout not in ("plain", "shielded"):
        raise InvalidArgument(f"unknown layout {layout!r}")
    alloc = alloc or Allocator()
    insts = _make_instances(spec.devices, spec.clients, layout == "shielded", alloc, 0, "")
    return NetworkState(spec, tuple(insts), _backing_for(insts), layout, None, alloc=alloc)


def configurations(spec: NetworkSpec, mode: str = "cyclic") -> list[tuple[str, ...]]:
    """Device order per configuration; position ``i`` of an order roots the size-``i`` state."""
    devs = spec.devices
    m = spec.m
    if mode == "cyclic":
        return [tuple(devs[(j + k) % m] for j in range(m)) for k in range(m)]
    if mode == "full":
        return list(permutations(devs))
    raise InvalidArgument(f"unknown symmetrization mode {mode!r}")


def symmetrize(spec: NetworkSpec, n_copies: int, mode: str = "cyclic", layout: str = "plain",
               alloc: Allocator | None = None) -> NetworkState:
    """``n_copies`` bundles, copy ``t`` laid out by configuration ``t mod len(configs)``.

    Configuration ``k`` of the cyclic mode shifts every role by ``k`` devices,
    so each device roots the largest state in exactly one configuration.
    """
    if n_copies < 1:
        raise InvalidArgument("n_copies must be at least 1", code="invalid-spec")
    alloc = alloc or Allocator()
    configs = configurations(spec, mode)
    insts: list[GhzInstance] = []
    for t in range(n_copies):
        order = configs[t % len(configs)]
        insts += _make_instances(order, spec.clients, layout == "shielded", alloc, t, f"c{t}.")
    return NetworkState(spec, tuple(insts), _backing_for(insts), layout, tuple(configs), alloc=alloc)


# --------------------------------------------------------------------------- #
# departures and failures


def _measure(g: GraphState, q: QubitId, basis: str, src: OutcomeSource, b0=None) -> GraphState:
    # the owning device knows the frame, so it can measure in the graph basis
    return gs.measure(gs.clear_frame(g, q), q, basis, src, b0)


def _drop_small_shields(g: GraphState, inst: GhzInstance, src: OutcomeSource) -> tuple[GraphState, GhzInstance]:
    if inst.size == 2 and inst.shields:
        for _, s in inst.shields:
            g = _measure(g, s, "Y", src)
        inst = replace(inst, shields=())
    return g, inst


def _check_device(state: NetworkState, d) -> str:
    d = state.spec.device(d)
    if d in state.failed or d in state.departed:
        raise InvalidArgument(f"device {d} is no longer part of the network", code="device-gone")
    return d


def device_leave(state: NetworkState, d, src: OutcomeSource | None = None) -> NetworkState:
    """Planned departure of ``d``: every state it held shrinks, none is lost.

    ``d`` first turns its own shields into plain edges (``Y``), then measures
    its leaves in ``Z`` and its roots in ``X``; the first remaining leaf becomes
    the new root.  Shields left dangling towards ``d`` are ``Z``-measured by
    their root device.  States reduced to one qubit are dropped.
    """
    d = _check_device(state, d)
    src = src or OutcomeSource.seeded(0)
    g = state.backing
    out = []
    for inst in state.instances:
        if inst.status != INTACT or d not in inst.devices:
            out.append(inst)
            continue
        if inst.root.device == d:
            for _, s in inst.shields:
                g = _measure(g, s, "Y", src)
            leaves = sorted(inst.leaves)
            g = _measure(g, inst.root, "X", src, b0=leaves[0])
            inst = replace(inst, root=leaves[0], leaves=tuple(leaves[1:]), shields=())
        else:
            leaf = inst.leaf_on(d)
            s = inst.shield_of(leaf)
            if s is not None:
                g = _measure(g, s, "Z", src)
            g = _measure(g, leaf, "Z", src)
            inst = replace(inst, leaves=tuple(q for q in inst.leaves if q != leaf),
                           shields=tuple(p for p in inst.shields if p[0] != leaf))
        if inst.size == 1:
            g = gs.discard(g, [inst.root])
            continue
        g, inst = _drop_small_shields(g, inst, src)
        out.append(inst)
    return replace(state, instances=tuple(out), backing=g, departed=state.departed | {d})


def device_fail(state: NetworkState, d) -> NetworkState:
    """Unannounced loss of ``d`` with all its qubits.

    Without shields every state holding a qubit of ``d`` is destroyed and the
    survivors discard their halves.  Shielded states are only marked pending
    until :func:`recover_shielded` runs.
    """
    d = _check_device(state, d)
    g = state.backing
    out = []
    for inst in state.instances:
        if inst.status != INTACT or d not in inst.devices:
            out.append(inst)
        elif state.layout == "shielded":
            out.append(replace(inst, status=PENDING))
        else:
            g = gs.discard(g, [inst.root])
            out.append(replace(inst, status=DESTROYED))
    return replace(state, instances=tuple(out), backing=g, failed=state.failed | {d})


def recover_shielded(state: NetworkState, failed=None, src: OutcomeSource | None = None) -> NetworkState:
    """Cut the failed device out of every pending shielded state.

    The root device measures the shield towards the lost leaf in ``Z``, which
    disentangles the rest of the state from it.  States rooted on the failed
    device, and unshielded Bell pairs touching it, cannot be saved.
    """
    if state.layout != "shielded":
        raise InvalidArgument("recovery needs the shielded layout", code="not-shielded")
    if failed is None:
        if len(state.failed) != 1:
            raise InvalidArgument("name the failed device to recover from")
        (failed,) = state.failed
    failed = state.spec.device(failed)
    if failed not in state.failed:
        raise InvalidArgument(f"device {failed} has not failed")
    src = src or OutcomeSource.seeded(0)
    g = state.backing
    out = []
    for inst in state.instances:
        if inst.status != PENDING or failed not in inst.devices:
            out.append(inst)
            continue
        leaf = inst.leaf_on(failed)
        s = inst.shield_of(leaf) if leaf is not None else None
        if s is None:
            g = gs.discard(g, [inst.root])
            out.append(replace(inst, status=DESTROYED))
            continue
        g = _measure(g, s, "Z", src)
        g = gs.discard(g, [leaf])
        inst = replace(inst, status=INTACT, leaves=tuple(q for q in inst.leaves if q != leaf),
                       shields=tuple(p for p in inst.shields if p[0] != leaf))
        g, inst = _drop_small_shields(g, inst, src)
        out.append(inst)
    return replace(state, instances=tuple(out), backing=g)


def _is_bundle(insts: Sequence[GhzInstance], alive: set) -> bool:
    by_size = sorted(insts, key=lambda i: i.size)
    sizes = [i.size for i in by_size]
    if sizes != list(range(2, len(alive) + 1)):
        return False
    if len(alive) < 2:
        return not by_size
    prev: frozenset = frozenset()
    for inst in by_size:
        if not prev < inst.devices or len(inst.devices) != inst.size:
            return False
        prev = inst.devices
    return prev == alive


def is_full_bundle(state: NetworkState) -> bool:
    """True when the intact states form one single-client network state over the present devices."""
    return _is_bundle(state.live(), set(state.present()))


def intact_full_copies(state: NetworkState) -> int:
    """Copies whose intact states still form a complete network state over the survivors.

    A copy qualifies when its intact states have sizes ``2..k`` over a nested
    chain of device sets ending at all ``k`` present devices and none of its
    smaller states was lost.  Copies with several states per size are counted
    by their single-client skeleton, which this check requires to be unique.
    """
    alive = set(state.present())
    count = 0
    for insts in state.copies().values():
        live = [i for i in insts if i.status == INTACT]
        lost = [i for i in insts if i.status != INTACT]
        if any(i.nominal < state.spec.m for i in lost):
            continue
        if _is_bundle(live, alive):
            count += 1
    return count


# --------------------------------------------------------------------------- #
# client expansion and costs


def expand_to_clients(state: NetworkState, src: OutcomeSource | None = None) -> NetworkState:
    """Grow each leaf on device ``k`` into ``c_k`` leaves using a local GHZ state.

    A device without clients measures its leaf away; a device with one client
    keeps it as is.  Afterwards the stored qubit count equals ``cost_report().M_M``.
    """
    if state.layout != "plain":
        raise InvalidArgument("expansion works on the plain layout")
    src = src or OutcomeSource.seeded(0)
    g = state.backing
    out = []
    for inst in state.instances:
        if inst.status != INTACT:
            out.append(inst)
            continue
        leaves: list[QubitId] = []
        for leaf in inst.leaves:
            c = state.spec.count(leaf.device)
            if c == 0:
                g = _measure(g, leaf, "Z", src)
            elif c == 1:
                leaves.append(leaf)
            else:
                local = state.alloc.many(leaf.device, c + 1)
                g = gs.tensor(g, gs.ghz_star(c + 1, local))
                g = gs.bell_merge(g, leaf, local[0], src, root=inst.root)
                leaves.extend(local[1:])
        out.append(replace(inst, leaves=tuple(leaves)))
    return replace(state, instances=tuple(out), backing=g)


def cost_report(spec: NetworkSpec) -> CostReport:
    """Stored qubits for the multipartite, shielded and bipartite schemes."""
    c = spec.clients
    m = spec.m
    prefix = 0
    mm = 0
    for i in range(m):
        if i >= 1:
            mm += c[i] * (1 + prefix)
        prefix += c[i]
    ms = mm + sum(c[i - 1] * (i - 1) for i in range(3, m + 1))
    mb = 0
    suffix = 0
    for i in reversed(range(m)):
        mb += 2 * c[i] * suffix
        suffix += c[i]
    return CostReport(mm, ms, mb)


def table_row(c: int, m: int) -> str:
    r = cost_report(NetworkSpec.uniform(m, c))
    return f"c={c} m={m} MB={r.M_B} MS={r.M_S} MM={r.M_M}"
