"""Layered network simulator: devices, provisioning, requests and monitoring.

Devices are grouped into networks (switches and a router each) and routers
are grouped into regions.  :func:`provision_dynamic` fills every network with
its GHZ bundle and every region with its resource states.  A request for a
graph state among clients is then served with local operations only:

1. the routers of the involved networks obtain GHZ states over themselves
   from the region resources (one routing round per needed state);
2. each router Bell-merges its part of such a state with a state of its own
   network, which moves the GHZ state onto the requesting switches;
3. the switches now hold a GHZ network state of their own, which is
   expanded to one qubit per client;
4. :func:`linking_protocol` turns it into the requested graph state;
5. handing each qubit to its client is modelled as relabelling.

Every step is recorded in the state's trace.  A :class:`ResourceLedger`
audits that trace: between two provisioning calls the only multi-device
states that may appear are provisioned ones, each used once, and every
two-qubit gate is local to one device.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import clifford as cl
from . import graphstate as gs
from . import oracle
from .errors import CapacityExceeded, DeviceDown, InsufficientResources, InvalidArgument, NoRoute, NotFound
from .graphstate import GraphState, OutcomeSource, QubitId
from .netstate import (CONSUMED, INTACT, Allocator, GhzInstance, NetworkSpec, NetworkState, build_network_state,
                       device_fail, expand_to_clients, recover_shielded, symmetrize)
from .routing import Region, RegionTopology, RouteStep, route_round
from .scenario import Scenario

ROLE_LAYER = {"client": 1, "repeater": 2, "switch": 3, "router": 4}
EVENT_KINDS = ("entanglement-ready", "ping", "ping-reply", "failure-detected", "request", "request-complete")

VERIFIED = "verified"
FAILED = "failed"
INCONCLUSIVE = "inconclusive"


@dataclass
class Device:
    ident: str
    role: str
    network: str
    alive: bool = True
    holdings: set = field(default_factory=set)

    def __post_init__(self):
        if self.role not in ROLE_LAYER:
            raise InvalidArgument(f"unknown role {self.role!r}")

    @property
    def layer(self) -> int:
        """Highest stack layer the device operates on."""
        return ROLE_LAYER[self.role]


@dataclass(frozen=True)
class Request:
    edges: tuple[tuple[str, str], ...]
    copies: int = 1
    name: str = ""

    def __post_init__(self):
        edges = tuple(tuple(sorted(e)) for e in self.edges)
        if any(a == b for a, b in edges):
            raise InvalidArgument("a request edge joins a client to itself")
        if len(set(edges)) != len(edges):
            raise InvalidArgument("duplicate request edge")
        if not edges:
            raise InvalidArgument("a request needs at least one edge")
        if self.copies < 1:
            raise InvalidArgument("copies must be positive")
        object.__setattr__(self, "edges", tuple(sorted(edges)))

    @property
    def clients(self) -> list[str]:
        return sorted({c for e in self.edges for c in e})


@dataclass(frozen=True)
class LayerEvent:
    kind: str
    payload: str
    timestamp: int

    def record(self) -> str:
        return f"t={self.timestamp} {self.kind} {self.payload}".rstrip()


class EventQueue:
    """Logical-time event log; every emitted event gets the next timestamp."""

    def __init__(self):
        self.events: list[LayerEvent] = []
        self.clock = 0

    def emit(self, kind: str, payload: str = "") -> LayerEvent:
        if kind not in EVENT_KINDS:
            raise InvalidArgument(f"unknown event kind {kind!r}")
        self.clock += 1
        ev = LayerEvent(kind, payload, self.clock)
        self.events.append(ev)
        return ev


class ResourceLedger:
    """Audits traces of the adaptive phase against the provisioned resources."""

    def __init__(self):
        self.provisioned: dict[frozenset, frozenset] = {}
        self.used: set[frozenset] = set()

    def reset(self) -> None:
        self.provisioned.clear()
        self.used.clear()

    def provision(self, state: GraphState) -> None:
        for comp in state.components():
            self.provisioned[comp] = state.subgraph_edges(comp)

    def audit(self, trace: Iterable[tuple]) -> list[str]:
        """Violations found in ``trace``; an empty list means it was LOCC on provisioned states."""
        bad = []
        for rec in trace:
            kind = rec[0]
            if kind == "attach":
                frag = rec[1]
                g = GraphState(frag.vertices, frag.edges)
                for comp in g.components():
                    if len({q.device for q in comp}) == 1:
                        continue
                    if self.provisioned.get(comp) != g.subgraph_edges(comp):
                        bad.append(f"entangled state {_names(comp)} was never provisioned")
                    elif comp in self.used:
                        bad.append(f"resource {_names(comp)} used twice")
                    else:
                        self.used.add(comp)
            elif kind == "cz" and rec[1].device != rec[2].device:
                bad.append(f"non-local gate {rec[1]}-{rec[2]}")
        return bad


def _names(qs: Iterable) -> str:
    return "{" + ",".join(str(q) for q in sorted(qs)) + "}"


# --------------------------------------------------------------------------- #
# the simulator


class Simulator:
    """State of one scenario run: devices, provisioned states, ledger and events."""

    def __init__(self, scenario: Scenario, seed: int | None = None):
        self.scenario = scenario
        self.seed = seed if seed is not None else (scenario.seed or 0)
        self.src = OutcomeSource.seeded(self.seed)
        self.alloc = Allocator()
        self.queue = EventQueue()
        self.ledger = ResourceLedger()
        self.networks: dict[str, NetworkState] = {}
        self.topology: RegionTopology | None = None
        self.recovered: set[str] = set()
        self.devices: dict[str, Device] = {}
        net_of = scenario.network_of()
        for d, role in scenario.device_role().items():
            network = net_of.get(d, net_of.get(scenario.clients.get(d, ""), d))
            self.devices[d] = Device(d, role, network)

    @property
    def events(self) -> list[LayerEvent]:
        return self.queue.events

    def device(self, d: str) -> Device:
        if d not in self.devices:
            raise NotFound(f"unknown device {d!r}")
        return self.devices[d]

    def router_of(self, network: str) -> str:
        routers = [d for d, role in self.scenario.networks[network].devices if role == "router"]
        if len(routers) != 1:
            raise NoRoute(f"network {network!r} needs exactly one router to reach other networks")
        return routers[0]

    def crash(self, d: str) -> None:
        """The device stops silently; monitoring has to notice."""
        self.device(d).alive = False

    def census(self) -> dict[str, int]:
        out = {n: len(s.live()) for n, s in sorted(self.networks.items())}
        if self.topology is not None:
            out["regions"] = len(self.topology.available())
        return out

    def links(self) -> dict[str, set[str]]:
        """Classical adjacency: devices of one network, routers of one region, a client and its switch."""
        adj: dict[str, set[str]] = {d: set() for d in self.devices}
        groups = [[d for d, _ in net.devices] for net in self.scenario.networks.values()]
        groups += [reg.members for reg in self.scenario.regions.values()]
        groups += [[c, s] for c, s in self.scenario.clients.items()]
        for g in groups:
            for a in g:
                adj[a].update(x for x in g if x != a)
        return adj


def provision_dynamic(sim: Simulator) -> None:
    """Build every network and region state from scratch over the live devices."""
    sc = sim.scenario
    sim.ledger.reset()
    sim.networks = {}
    for net in sc.networks.values():
        alive = [d for d, _ in net.devices if sim.devices[d].alive]
        if len(alive) < 2:
            continue
        spec = NetworkSpec(tuple(sc.client_count(net, d) for d in alive), tuple(alive))
        if net.layout == "symmetrized":
            state = symmetrize(spec, net.copies, alloc=sim.alloc)
        else:
            state = build_network_state(spec, net.layout, alloc=sim.alloc)
        sim.networks[net.ident] = state
        sim.ledger.provision(state.backing)
        sim.queue.emit("entanglement-ready", f"network={net.ident} instances={len(state.instances)}")
    regions = []
    for reg in sc.regions.values():
        members = [r for r in reg.members if sim.devices[r].alive]
        if len(members) >= 2:
            regions.append(Region(reg.ident, tuple(members), reg.copies))
    sim.topology = None
    if regions:
        sim.topology = RegionTopology.build(regions, sc.network_of(), sim.alloc)
        sim.ledger.provision(sim.topology.backing)
        for reg in regions:
            n = sum(1 for i in sim.topology.resources if sim.topology.region_of[i.ident] == reg.ident)
            sim.queue.emit("entanglement-ready", f"region={reg.ident} instances={n}")
    _refresh_holdings(sim)


def _refresh_holdings(sim: Simulator) -> None:
    for dev in sim.devices.values():
        dev.holdings = set()
    states = [s.backing for s in sim.networks.values()]
    if sim.topology is not None:
        states.append(sim.topology.backing)
    for g in states:
        for q in g.vertices:
            if q.device in sim.devices:
                sim.devices[q.device].holdings.add(q)


def recover(sim: Simulator, d: str) -> None:
    """React to a detected failure of ``d`` in every state that held one of its qubits."""
    if d in sim.recovered:
        return
    sim.recovered.add(d)
    for name, state in sim.networks.items():
        if d not in state.spec.devices:
            continue
        state = device_fail(state, d)
        if state.layout == "shielded":
            state = recover_shielded(state, d, sim.src)
        sim.networks[name] = state
    topo = sim.topology
    if topo is not None:
        hit = [i for i in topo.available() if d in i.devices]
        if hit:
            sim.topology = replace(topo, consumed=topo.consumed | {i.ident for i in hit},
                                   backing=gs.discard(topo.backing, [i.root for i in hit]))
    _refresh_holdings(sim)


def ping_classical(sim: Simulator, a: str, b: str) -> bool:
    """True iff ``b`` is alive and reachable from ``a`` over live devices.

    An unanswered ping to a failed device emits ``failure-detected`` and
    triggers recovery of the states it held.
    """
    sim.device(a)
    sim.device(b)
    sim.queue.emit("ping", f"from={a} to={b}")
    ok = False
    if sim.devices[a].alive and sim.devices[b].alive:
        adj = sim.links()
        seen, todo = {a}, deque([a])
        while todo:
            x = todo.popleft()
            for y in sorted(adj[x]):
                if y not in seen and sim.devices[y].alive:
                    seen.add(y)
                    todo.append(y)
        ok = b in seen
    if ok:
        sim.queue.emit("ping-reply", f"from={b} to={a}")
    elif not sim.devices[b].alive:
        sim.queue.emit("failure-detected", f"device={b}")
        recover(sim, b)
    return ok


def monitor(sim: Simulator) -> list[str]:
    """Ping every device from the first live one; returns the devices found down."""
    alive = sorted(d for d, dev in sim.devices.items() if dev.alive)
    if not alive:
        return sorted(sim.devices)
    origin = alive[0]
    return [d for d in sorted(sim.devices) if d != origin and not ping_classical(sim, origin, d)
            and not sim.devices[d].alive]


# --------------------------------------------------------------------------- #
# linking


def _local_cz(g: GraphState, a: QubitId, b: QubitId) -> GraphState:
    g = gs.clear_frame(gs.clear_frame(g, a), b)
    return gs.apply_cz(g, a, b)


def linking_protocol(net: NetworkState | None, target: Iterable[tuple[str, str]],
                     placement: Mapping[str, str], src: OutcomeSource | None = None,
                     alloc: Allocator | None = None) -> tuple[GraphState, dict[str, QubitId]]:
    """Turn an expanded network state into the graph state ``target`` over clients.

    ``placement`` maps each client to its device; the ``t``-th client of a
    device (by name) owns the root of that device's ``t``-th GHZ state and the
    matching leaf of every larger state.  Clients of the first device get a
    fresh qubit.  For a leaf that links clients ``x`` and ``y``, the device of
    ``y`` applies CZ between the leaf and ``y``'s qubit and measures the leaf
    in Y, which joins ``x`` and ``y``; an unused leaf is measured in Z.  Clients
    sharing a device are joined by a local CZ.  With ``net=None`` every client
    sits on one device and gets a fresh qubit.

    Returns the state (up to local Clifford byproducts on the client qubits)
    and each client's qubit.
    """
    src = src or OutcomeSource.seeded(0)
    target = {tuple(sorted(e)) for e in target}
    for c in {c for e in target for c in e}:
        if c not in placement:
            raise NotFound(f"target references unknown client {c!r}")
    by_device: dict[str, list[str]] = {}
    for c, d in sorted(placement.items()):
        by_device.setdefault(d, []).append(c)
    if net is None:
        if len(by_device) > 1:
            raise InvalidArgument("clients on several devices need a network state")
        devices: tuple[str, ...] = tuple(by_device)
        g = GraphState()
        alloc = alloc or Allocator()
    else:
        devices = net.spec.devices
        g = net.backing
        alloc = alloc or net.alloc
        for d in devices:
            if len(by_device.get(d, [])) != net.spec.count(d):
                raise InvalidArgument(f"device {d!r} has {net.spec.count(d)} client slots, "
                                      f"got {len(by_device.get(d, []))} clients")
        for d in by_device:
            if d not in devices:
                raise NotFound(f"client device {d!r} is not in the network")

    qubit: dict[str, QubitId] = {}
    stars: list[tuple[str, GhzInstance]] = []
    for j, d in enumerate(devices):
        clients = by_device.get(d, [])
        if j == 0:
            for c in clients:
                q = alloc.new(d)
                g = gs.tensor(g, GraphState([q]))
                qubit[c] = q
            continue
        roots = sorted((i for i in net.instances if i.status == INTACT and i.root.device == d),
                       key=lambda i: (i.copy, i.ident))
        if len(roots) < len(clients):
            raise InsufficientResources(f"device {d!r} holds {len(roots)} states for {len(clients)} clients")
        for c, inst in zip(clients, roots):
            qubit[c] = inst.root
            stars.append((c, inst))

    for x, inst in stars:
        for d in sorted({q.device for q in inst.leaves}):
            leaves = [q for q in inst.leaves if q.device == d]
            for y, leaf in zip(by_device[d], leaves):
                if tuple(sorted((x, y))) in target:
                    g = _local_cz(g, leaf, qubit[y])
                    g = gs.measure(g, leaf, "Y", src)
                else:
                    g = gs.measure(gs.clear_frame(g, leaf), leaf, "Z", src)
    for a, b in sorted(target):
        if placement[a] == placement[b]:
            g = _local_cz(g, qubit[a], qubit[b])
    unused = [q for c, q in qubit.items() if c not in {c for e in target for c in e}]
    if unused:
        g = gs.discard(g, unused)
    return g, {c: q for c, q in qubit.items() if q in g}


# --------------------------------------------------------------------------- #
# request pipeline


@dataclass
class CopyResult:
    state: GraphState
    consumed: tuple[str, ...]
    steps: tuple[RouteStep, ...]
    oracle: str
    violations: tuple[str, ...]
    peak: int = 0


@dataclass
class RequestResult:
    request: Request
    copies: list[CopyResult]

    @property
    def ok(self) -> bool:
        return all(c.oracle != "FAIL" and not c.violations for c in self.copies)


def _reduce(g: GraphState, inst: GhzInstance, keep: set[str], src: OutcomeSource
            ) -> tuple[GraphState, dict[str, QubitId]]:
    """Shrink a network GHZ state to the devices in ``keep``; returns each kept device's qubit."""
    for _, s in inst.shields:
        g = gs.measure(gs.clear_frame(g, s), s, "Y", src)
    held = {q.device: q for q in (inst.root, *inst.leaves)}
    for leaf in inst.leaves:
        if leaf.device not in keep:
            g = gs.measure(gs.clear_frame(g, leaf), leaf, "Z", src)
    if inst.root.device not in keep:
        g = gs.measure(gs.clear_frame(g, inst.root), inst.root, "X", src,
                       b0=min(held[d] for d in keep))
    return g, {d: held[d] for d in keep}


def _take_network_state(sim: Simulator, network: str, needed: set[str]) -> tuple[GraphState, GhzInstance, str]:
    state = sim.networks.get(network)
    cands = [] if state is None else [i for i in state.live() if needed <= i.devices]
    if not cands:
        raise InsufficientResources(f"network {network!r} has no state over {sorted(needed)}")
    inst = min(cands, key=lambda i: (i.size, i.ident))
    g = gs.induced(state.backing, [inst.root])
    insts = tuple(replace(i, status=CONSUMED) if i.ident == inst.ident else i for i in state.instances)
    sim.networks[network] = replace(state, instances=insts, backing=gs.discard(state.backing, [inst.root]))
    return g, inst, f"{network}/{inst.ident}"


def _switch_order(sim: Simulator, clients: Sequence[str]) -> list[str]:
    sc = sim.scenario
    net_of = sc.network_of()
    switches = sorted({sc.clients[c] for c in clients})
    per_net: dict[str, list[str]] = {}
    for s in switches:
        per_net.setdefault(net_of[s], []).append(s)
    nets = sorted(per_net, key=lambda n: (len(per_net[n]), sim.router_of(n) if len(per_net) > 1 else n))
    return [s for n in nets for s in per_net[n]]


def _ghz_over(sim: Simulator, switches: Sequence[str], step: int, src: OutcomeSource
              ) -> tuple[GraphState, dict[str, QubitId], list[str], RouteStep | None]:
    """GHZ state over ``switches``, built from one routing round and network states."""
    net_of = sim.scenario.network_of()
    groups: dict[str, set[str]] = {}
    for s in switches:
        groups.setdefault(net_of[s], set()).add(s)
    consumed: list[str] = []
    if len(groups) == 1:
        (network, need), = groups.items()
        g, inst, ident = _take_network_state(sim, network, need)
        g, held = _reduce(g, inst, need, src)
        return g, held, [ident], None
    routers = {sim.router_of(n): n for n in groups}
    first = sim.router_of(net_of[switches[0]])
    if sim.topology is None:
        raise NoRoute("no region states to route over")
    step_, sim.topology = route_round(sim.topology, routers, first, step, src=src, alloc=sim.alloc)
    consumed += step_.consumed
    g = step_.state
    virtual = {q.device: q for q in (step_.instance.root, *step_.instance.leaves)}
    held: dict[str, QubitId] = {}
    for r in sorted(routers):
        network = routers[r]
        gn, inst, ident = _take_network_state(sim, network, groups[network] | {r})
        consumed.append(ident)
        gn, part = _reduce(gn, inst, groups[network] | {r}, src)
        g = gs.tensor(g, gn)
        g = gs.bell_merge(g, virtual[r], part.pop(r), src)
        held.update(part)
    return g, held, consumed, step_


def _oracle_verdict(g: GraphState, edges: set) -> tuple[str, int]:
    want = {frozenset(e) for e in edges}
    if {frozenset(e) for e in g.edges} != want:
        return "FAIL", 0
    try:
        rep = oracle.Replayer().run(g.trace)
        ok = oracle.equal_up_to_phase(rep.final(sorted(g.vertices)), oracle.physical_state(g))
    except CapacityExceeded:
        return "SKIP", 0
    return ("PASS" if ok else "FAIL"), rep.peak


def fulfill_request(sim: Simulator, req: Request) -> RequestResult:
    """Serve ``req`` once per requested copy; each copy is oracle-checked and audited."""
    sc = sim.scenario
    clients = req.clients
    for c in clients:
        if c not in sc.clients:
            raise NotFound(f"unknown client {c!r}")
    sim.queue.emit("request", f"name={req.name or '-'} clients={','.join(clients)} copies={req.copies}")
    results = []
    for copy in range(req.copies):
        results.append(_serve_copy(sim, req, clients, copy))
    verdict = "PASS" if all(r.oracle != "FAIL" and not r.violations for r in results) else "FAIL"
    sim.queue.emit("request-complete", f"name={req.name or '-'} oracle={verdict}")
    _refresh_holdings(sim)
    return RequestResult(req, results)


def _serve_copy(sim: Simulator, req: Request, clients: list[str], copy: int) -> CopyResult:
    sc = sim.scenario
    src = sim.src.spawn(copy)
    placement = {c: sc.clients[c] for c in clients}
    for d in sorted({*clients, *placement.values()}):
        if not sim.devices[d].alive:
            raise DeviceDown(f"device {d!r} is down")
    order = _switch_order(sim, clients)
    consumed: list[str] = []
    steps: list[RouteStep] = []
    if len(order) == 1:
        g, qubit = linking_protocol(None, req.edges, placement, src, sim.alloc)
    else:
        for n in sorted({sc.network_of()[s] for s in order}):
            if len({sc.network_of()[s] for s in order}) > 1 and not sim.devices[sim.router_of(n)].alive:
                raise DeviceDown(f"router of network {n!r} is down")
        # device t_j of the switch-level bundle roots GHZ states over t_1..t_j
        levels = list(reversed(order))
        counts = [sum(1 for c in clients if placement[c] == s) for s in levels]
        parts, insts = [], []
        # largest first, so routing rounds run in the same order as region_routing
        for j in range(len(levels), 1, -1):
            for t in range(counts[j - 1]):
                g, held, used, step = _ghz_over(sim, order[len(levels) - j:], len(steps) + 1, src)
                consumed += used
                if step is not None:
                    steps.append(step)
                root = held[levels[j - 1]]
                g = gs.make_star(g, root)
                parts.append(g)
                insts.append(GhzInstance(f"s{j}.{t}", root, tuple(held[s] for s in levels[:j - 1]),
                                         copy=t, nominal=j))
        spec = NetworkSpec(tuple(counts), tuple(levels))
        net = NetworkState(spec, tuple(insts), gs.tensor(*parts), alloc=sim.alloc)
        net = expand_to_clients(net, src)
        g, qubit = linking_protocol(net, req.edges, placement, src, sim.alloc)
    # teleportation to the clients
    g = gs.relabel(g, {q: QubitId(c, 0) for c, q in qubit.items()})
    edges = {(QubitId(a, 0), QubitId(b, 0)) for a, b in req.edges}
    verdict, peak = _oracle_verdict(g, edges)
    violations = tuple(sim.ledger.audit(g.trace))
    return CopyResult(g, tuple(consumed), tuple(steps), verdict, violations, peak)


def run_requests(sim: Simulator) -> list[RequestResult]:
    """Provision, apply the scenario's failures in time order, monitor, then serve every request."""
    sc = sim.scenario
    provision_dynamic(sim)
    for f in sorted(sc.failures.values(), key=lambda f: (f.time, f.ident)):
        sim.crash(f.device)
    if sc.failures:
        monitor(sim)
    out = []
    for r in sc.requests.values():
        if r.edges:
            out.append(fulfill_request(sim, Request(tuple(r.edges), r.copies, r.name)))
    return out


# --------------------------------------------------------------------------- #
# verification


@dataclass(frozen=True)
class EnsembleCopy:
    """One copy of a GHZ state; ``lost`` qubits were traced out (e.g. a partner failed)."""

    state: GraphState
    instance: GhzInstance
    lost: frozenset = frozenset()


def ghz_ensemble(size: int, copies: int, lost_leaf: int = 0, alloc: Allocator | None = None
                 ) -> list[EnsembleCopy]:
    """``copies`` GHZ states over devices ``N1..N<size>``; ``lost_leaf > 0`` traces out that leaf in each."""
    alloc = alloc or Allocator()
    out = []
    for t in range(copies):
        qs = [alloc.new(f"N{k}") for k in range(1, size + 1)]
        inst = GhzInstance(f"e{t}", qs[0], tuple(qs[1:]), copy=t, nominal=size)
        lost = frozenset([qs[lost_leaf]]) if lost_leaf else frozenset()
        out.append(EnsembleCopy(gs.ghz_star(size, qs), inst, lost))
    return out


def root_generator_expectation(copy_: EnsembleCopy) -> float:
    """Expectation of ``X_root Z_leaves`` on the physical state, lost qubits maximally mixed."""
    g = gs.induced(copy_.state, [copy_.instance.root])
    sv = oracle.physical_state(g)
    rho = oracle.ptrace_replace(sv, copy_.lost, replace=True)
    sign = 1
    ops = {}
    for q, p in [(copy_.instance.root, "X"), *((q, "Z") for q in copy_.instance.leaves)]:
        # the stored graph differs from the physical state by the frame C: measure C P C^dagger
        s, p2 = cl.conjugate_pauli(cl.inv(g.byproducts[q]), p)
        sign *= s
        ops[q] = p2
    return sign * rho.expect(oracle.PauliString(ops))


def verify_state(ensemble: Sequence[EnsembleCopy], budget: int, rng: np.random.Generator
                 ) -> tuple[str, list[EnsembleCopy]]:
    """Spend ``budget`` copies measuring the root generator; returns the verdict and the unused copies.

    Any -1 outcome fails the ensemble, all +1 verifies it.  Without a budget or
    without a copy left over afterwards the result is inconclusive.
    """
    if budget < 1 or len(ensemble) < budget + 1:
        return INCONCLUSIVE, list(ensemble)
    verdict = VERIFIED
    for copy_ in ensemble[:budget]:
        p_minus = (1 - root_generator_expectation(copy_)) / 2
        if rng.random() < p_minus:
            verdict = FAILED
    return verdict, list(ensemble[budget:])
