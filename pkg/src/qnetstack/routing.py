"""Routing between networks whose routers share GHZ network states in regions.

A region is a set of routers holding copies of a network state (one GHZ
state of each size ``2..k`` over its ordered members).  To serve a request
between the routers in ``S`` the regions are collapsed into a weighted graph
with one vertex per router, a Steiner tree is grown over ``S`` and the
resources behind its edges are fused into a GHZ state rooted at a selected
router.  Repeating this with the selected router removed yields a virtual
network state over ``S``.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field, replace
from itertools import product
from typing import Callable, Iterable, Mapping, Sequence

from . import graphstate as gs
from .errors import InsufficientResources, InvalidArgument, NoRoute, NotFound
from .graphstate import GraphState, OutcomeSource, QubitId
from .netstate import Allocator, GhzInstance, _make_instances

CostFunction = Callable[[str, str, Sequence[GhzInstance]], float]


def unit_cost(u: str, v: str, resources: Sequence[GhzInstance]) -> float:
    return 1.0


@dataclass(frozen=True)
class Region:
    ident: str
    members: tuple[str, ...]
    copies: int = 1

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(self.members))
        if len(self.members) < 2 or len(set(self.members)) != len(self.members):
            raise InvalidArgument(f"region {self.ident} needs at least two distinct routers")
        if self.copies < 1:
            raise InvalidArgument(f"region {self.ident} needs at least one copy")


@dataclass(frozen=True)
class RegionTopology:
    """Routers, their regions and the GHZ resources each region currently holds."""

    routers: tuple[str, ...]
    regions: tuple[Region, ...]
    resources: tuple[GhzInstance, ...]
    region_of: Mapping[str, str]
    backing: GraphState
    consumed: frozenset = frozenset()
    router_network: Mapping[str, str] = field(default_factory=dict)

    @classmethod
    def build(cls, regions: Iterable[Region], router_network: Mapping[str, str] | None = None,
              alloc: Allocator | None = None) -> "RegionTopology":
        alloc = alloc or Allocator()
        regions = tuple(regions)
        ids = [r.ident for r in regions]
        if len(set(ids)) != len(ids):
            raise InvalidArgument("duplicate region id")
        resources, region_of = [], {}
        for reg in regions:
            for t in range(reg.copies):
                for inst in _make_instances(reg.members, [1] * len(reg.members), False, alloc, t,
                                            f"{reg.ident}.{t}."):
                    resources.append(inst)
                    region_of[inst.ident] = reg.ident
        routers = tuple(sorted({r for reg in regions for r in reg.members}))
        vertices = [q for inst in resources for q in inst.qubits]
        edges = [e for inst in resources for e in inst.star_edges()]
        rn = dict(router_network or {})
        return cls(routers, regions, tuple(resources), region_of, GraphState(vertices, edges),
                   frozenset(), {r: rn.get(r, r) for r in routers})

    def available(self) -> list[GhzInstance]:
        return [i for i in self.resources if i.ident not in self.consumed]

    def resource(self, ident: str) -> GhzInstance:
        for i in self.resources:
            if i.ident == ident:
                return i
        raise NotFound(f"no resource {ident!r}")

    def region(self, ident: str) -> Region:
        for r in self.regions:
            if r.ident == ident:
                return r
        raise NotFound(f"no region {ident!r}")


@dataclass(frozen=True)
class RouteEdge:
    u: str
    v: str
    cost: float
    resources: tuple[str, ...]


@dataclass(frozen=True)
class RoutingGraph:
    vertices: tuple[str, ...]
    edges: Mapping[frozenset, RouteEdge]

    def neighbours(self, v: str) -> list[tuple[str, float]]:
        return self._adj.get(v, [])

    def __post_init__(self):
        adj: dict[str, list] = {v: [] for v in self.vertices}
        for e in self.edges.values():
            adj[e.u].append((e.v, e.cost))
            adj[e.v].append((e.u, e.cost))
        for v in adj:
            adj[v].sort()
        object.__setattr__(self, "_adj", adj)

    def cost(self, u: str, v: str) -> float:
        return self.edges[frozenset((u, v))].cost


@dataclass(frozen=True)
class SteinerTree:
    vertices: frozenset
    edges: frozenset
    root: str
    terminals: frozenset
    cost: float

    def degree(self, v: str) -> int:
        return sum(v in e for e in self.edges)

    def neighbours(self, v: str) -> list[str]:
        return sorted(w for e in self.edges if v in e for w in e if w != v)

    def is_tree(self) -> bool:
        if len(self.edges) != len(self.vertices) - 1:
            return False
        seen, stack = set(), [self.root]
        while stack:
            x = stack.pop()
            if x not in seen:
                seen.add(x)
                stack.extend(self.neighbours(x))
        return seen == set(self.vertices)


@dataclass(frozen=True)
class RouteStep:
    step: int
    root: str
    tree: SteinerTree
    consumed: tuple[str, ...]
    instance: GhzInstance
    state: GraphState
    bell_measurements: int

    def record(self) -> str:
        edges = ",".join("-".join(sorted(e)) for e in sorted(self.tree.edges, key=sorted))
        return f"step={self.step} root={self.root} tree_edges=[{edges}] consumed=[{','.join(self.consumed)}]"


@dataclass(frozen=True)
class VirtualNetworkState:
    """One GHZ state per routing step: sizes ``|S|, |S|-1, ..., 2`` with distinct roots."""

    instances: tuple[GhzInstance, ...]
    steps: tuple[RouteStep, ...]
    topology: RegionTopology

    @property
    def consumed(self) -> tuple[str, ...]:
        return tuple(c for s in self.steps for c in s.consumed)

    @property
    def backing(self) -> GraphState:
        return gs.tensor(*(s.state for s in self.steps)) if self.steps else GraphState()


# --------------------------------------------------------------------------- #
# graph construction and shortest paths


def collapse_to_graph(topo: RegionTopology, cost: CostFunction = unit_cost) -> RoutingGraph:
    """One vertex per router; an edge wherever some unconsumed resource spans both routers."""
    spans: dict[frozenset, list[GhzInstance]] = {}
    for inst in topo.available():
        routers = sorted({q.device for q in (inst.root, *inst.leaves)})
        for i, u in enumerate(routers):
            for v in routers[i + 1:]:
                spans.setdefault(frozenset((u, v)), []).append(inst)
    edges = {}
    for key, insts in spans.items():
        u, v = sorted(key)
        insts = sorted(insts, key=lambda i: (i.size, i.ident))
        c = float(cost(u, v, insts))
        if c <= 0:
            raise InvalidArgument(f"edge {u}-{v} has non-positive cost {c}")
        edges[key] = RouteEdge(u, v, c, tuple(i.ident for i in insts))
    return RoutingGraph(topo.routers, edges)


def collapse_per_qubit(topo: RegionTopology, cost: CostFunction = unit_cost) -> RoutingGraph:
    """Alternative collapse with one vertex per router slot in each region.

    A slot ``router@region`` stands for the router's qubits in that region;
    slots of one region are joined when a resource spans both routers, and each
    slot hangs off its router by a free edge.  Router vertices keep their names.
    """
    fused = collapse_to_graph(topo, cost)
    vertices = set(topo.routers)
    edges = {}
    free = 1e-9
    for key, e in fused.edges.items():
        by_region: dict[str, list[str]] = {}
        for ident in e.resources:
            by_region.setdefault(topo.region_of[ident], []).append(ident)
        for reg, ids in sorted(by_region.items()):
            su, sv = f"{e.u}@{reg}", f"{e.v}@{reg}"
            vertices |= {su, sv}
            edges[frozenset((su, sv))] = RouteEdge(*sorted((su, sv)), e.cost, tuple(ids))
            for r, s in ((e.u, su), (e.v, sv)):
                edges.setdefault(frozenset((r, s)), RouteEdge(*sorted((r, s)), free, ()))
    return RoutingGraph(tuple(sorted(vertices)), edges)


def dijkstra(g: RoutingGraph, a: str, targets: Iterable[str]) -> tuple[str, list[tuple[str, str]], float]:
    """Cheapest path from ``a`` to the nearest member of ``targets``.

    Equal distances are resolved by the smallest target id, then by the
    lexicographically smallest vertex sequence.
    """
    targets = set(targets)
    if a not in g.vertices:
        raise NotFound(f"unknown router {a!r}")
    if not targets:
        raise InvalidArgument("empty target set")
    heap = [(0.0, (a,))]
    settled: dict[str, tuple[float, tuple]] = {}
    best = None
    while heap:
        d, path = heapq.heappop(heap)
        v = path[-1]
        if v in settled:
            continue
        if best is not None and d > best[0] + 1e-12:
            break
        settled[v] = (d, path)
        if v in targets:
            if best is None or (v, path) < (best[1][-1], best[1]):
                best = (d, path)
            continue
        for w, c in g.neighbours(v):
            if w not in settled:
                heapq.heappush(heap, (d + c, path + (w,)))
    if best is None:
        raise NoRoute(f"no path from {a} to any of {sorted(targets)}")
    d, path = best
    return path[-1], list(zip(path, path[1:])), d


def steiner(g: RoutingGraph, terminals: Iterable[str], start: str) -> SteinerTree:
    """Greedy Steiner tree: repeatedly attach the terminal closest to the tree.

    Distances are measured to every vertex already in the tree, so the union
    of attached paths stays a tree.  With all vertices as terminals this is
    Prim's minimum spanning tree.
    """
    terminals = frozenset(terminals)
    if start not in terminals:
        raise InvalidArgument("start must be one of the terminals")
    for t in terminals:
        if t not in g.vertices:
            raise NotFound(f"unknown router {t!r}")
    tree_v = {start}
    tree_e: set[frozenset] = set()
    total = 0.0
    while not terminals <= tree_v:
        choice = None
        for x in sorted(terminals - tree_v):
            _, path, d = dijkstra(g, x, tree_v)
            if choice is None or d < choice[0] - 1e-12:
                choice = (d, x, path)
        d, x, path = choice
        for u, v in path:
            tree_e.add(frozenset((u, v)))
            tree_v |= {u, v}
        total += d
    return SteinerTree(frozenset(tree_v), frozenset(tree_e), start, terminals, total)


# --------------------------------------------------------------------------- #
# turning trees into GHZ states


def _assign_resources(graph: RoutingGraph, tree: SteinerTree, topo: RegionTopology) -> dict:
    """Distinct resource per tree edge by augmenting paths, smallest resources preferred."""
    order = sorted(tree.edges, key=sorted)
    owner: dict[str, frozenset] = {}

    def candidates(e):
        return sorted(graph.edges[e].resources, key=lambda i: (topo.resource(i).size, i))

    def augment(e, seen):
        for r in candidates(e):
            if r in seen:
                continue
            seen.add(r)
            if r not in owner or augment(owner[r], seen):
                owner[r] = e
                return True
        return False

    for e in order:
        if not augment(e, set()):
            raise InsufficientResources(f"no free resource left for edge {'-'.join(sorted(e))}")
    return {e: r for r, e in owner.items()}


def _reduce_to_pair(state: GraphState, inst: GhzInstance, u: str, v: str,
                    src: OutcomeSource) -> tuple[GraphState, QubitId, QubitId]:
    """Shrink a star-shaped GHZ resource to a Bell pair between routers ``u`` and ``v``."""
    qu = inst.root if inst.root.device == u else inst.leaf_on(u)
    qv = inst.root if inst.root.device == v else inst.leaf_on(v)
    for leaf in inst.leaves:
        if leaf not in (qu, qv):
            state = gs.measure(gs.clear_frame(state, leaf), leaf, "Z", src)
    if inst.root not in (qu, qv):
        state = gs.measure(gs.clear_frame(state, inst.root), inst.root, "X", src, b0=min(qu, qv))
    return state, qu, qv


def tree_to_ghz(state: GraphState, tree: SteinerTree, edge_qubits: Mapping[frozenset, Mapping[str, QubitId]],
                targets: Iterable[str], alloc: Allocator, src: OutcomeSource) -> tuple[GraphState, GhzInstance, int]:
    """Fuse the Bell pairs along ``tree`` into one GHZ state over ``targets``.

    ``edge_qubits[e][x]`` is router ``x``'s half of the pair on tree edge ``e``.
    A target with one tree edge keeps its half.  A router with several edges
    prepares a local GHZ state (one qubit more if it is a target, to keep) and
    Bell-measures each half against it; a non-target on a path needs no local
    state.  Returns the new state, the GHZ instance rooted at ``tree.root`` and
    the number of Bell measurements used.
    """
    targets = frozenset(targets)
    if not tree.is_tree() or not targets <= tree.vertices or tree.root not in targets:
        raise InvalidArgument("malformed tree", code="malformed-tree")
    keep: dict[str, QubitId] = {}
    merges = 0
    for x in sorted(tree.vertices):
        halves = [edge_qubits[e][x] for e in sorted(tree.edges, key=sorted) if x in e]
        deg = len(halves)
        if x in targets and deg == 1:
            keep[x] = halves[0]
            continue
        if x not in targets and deg == 1:
            raise InvalidArgument(f"non-target leaf {x} in tree", code="malformed-tree")
        if x not in targets and deg == 2:
            state = gs.bell_merge(state, halves[0], halves[1], src)
            merges += 1
            continue
        size = deg + 1 if x in targets else deg
        local = alloc.many(x, size)
        state = gs.tensor(state, gs.ghz_star(size, local))
        if x in targets:
            keep[x] = local[0]
            local = local[1:]
        for half, q in zip(halves, local):
            state = gs.bell_merge(state, half, q, src)
            merges += 1
    if set(keep) != targets:
        raise InvalidArgument("tree left a target without a qubit", code="malformed-tree")
    root = keep[tree.root]
    state = gs.make_star(state, root)
    leaves = tuple(keep[t] for t in sorted(targets) if t != tree.root)
    return state, GhzInstance(f"ghz{len(targets)}@{tree.root}", root, leaves, nominal=len(targets)), merges


def route_round(topo: RegionTopology, remaining: Iterable[str], root: str, step: int = 1,
                cost: CostFunction = unit_cost, per_qubit: bool = False, src: OutcomeSource | None = None,
                alloc: Allocator | None = None) -> tuple[RouteStep, RegionTopology]:
    """One round of region routing: a GHZ state over ``remaining`` rooted at ``root``.

    The round works on a fresh state holding only the resources it consumes,
    so its trace can be replayed on its own.  Returns the step and the
    topology with those resources marked consumed.
    """
    remaining = frozenset(remaining)
    src = src or OutcomeSource.seeded(0)
    alloc = alloc or _fresh_allocator(topo)
    graph = collapse_per_qubit(topo, cost) if per_qubit else collapse_to_graph(topo, cost)
    cut_off = remaining - set(graph.vertices)
    if cut_off:
        raise NoRoute(f"routers {sorted(cut_off)} hold no region resources")
    tree = steiner(graph, remaining, root)
    if per_qubit:
        tree, graph = _contract(tree, graph, topo, cost)
    chosen = _assign_resources(graph, tree, topo)
    edges = sorted(tree.edges, key=sorted)
    insts = [topo.resource(chosen[e]) for e in edges]
    state = gs.induced(topo.backing, [i.root for i in insts])
    halves = {}
    for e in edges:
        u, w = sorted(e)
        state, qu, qw = _reduce_to_pair(state, topo.resource(chosen[e]), u, w, src)
        halves[e] = {u: qu, w: qw}
    state, inst, merges = tree_to_ghz(state, tree, halves, remaining, alloc, src)
    inst = replace(inst, ident=f"v{step}.{inst.ident}", copy=step)
    used = tuple(sorted(chosen.values()))
    topo = replace(topo, consumed=topo.consumed | set(used),
                   backing=gs.discard(topo.backing, [i.root for i in insts]))
    return RouteStep(step, root, tree, used, inst, state, merges), topo


def region_routing(topo: RegionTopology, requested: Iterable[str], cost: CostFunction = unit_cost,
                   select: Callable[[Iterable[str]], str] = min, per_qubit: bool = False,
                   src: OutcomeSource | None = None, alloc: Allocator | None = None) -> VirtualNetworkState:
    """Build a virtual network state over the ``requested`` routers.

    Each round picks a root (smallest id by default), grows a Steiner tree
    over the routers still in the request, consumes one resource per tree edge
    and fuses them into a GHZ state rooted at the chosen router.  The root then
    leaves the request.
    """
    remaining = set(requested)
    if len(remaining) < 2:
        raise InvalidArgument("a request needs at least two routers")
    for r in remaining:
        if r not in topo.routers:
            raise NotFound(f"unknown router {r!r}")
    src = src or OutcomeSource.seeded(0)
    alloc = alloc or _fresh_allocator(topo)
    steps = []
    while len(remaining) >= 2:
        v = select(remaining)
        step, topo = route_round(topo, remaining, v, len(steps) + 1, cost, per_qubit, src, alloc)
        steps.append(step)
        remaining.discard(v)
    return VirtualNetworkState(tuple(s.instance for s in steps), tuple(steps), topo)


def _fresh_allocator(topo: RegionTopology) -> Allocator:
    alloc = Allocator()
    for q in topo.backing.vertices:
        alloc._next[q.device] = max(alloc._next[q.device], q.index + 1)
    for inst in topo.resources:
        for q in inst.qubits:
            alloc._next[q.device] = max(alloc._next[q.device], q.index + 1)
    return alloc


def _contract(tree: SteinerTree, graph: RoutingGraph, topo: RegionTopology,
              cost: CostFunction) -> tuple[SteinerTree, RoutingGraph]:
    """Map a tree over router slots back onto routers, keeping a spanning tree."""
    fused = collapse_to_graph(topo, cost)
    router = {v: v.split("@")[0] for v in tree.vertices}
    edges = sorted({frozenset((router[a], router[b])) for a, b in map(sorted, tree.edges)
                    if router[a] != router[b]}, key=sorted)
    parent = {v: v for v in router.values()}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    kept = []
    for e in edges:
        a, b = sorted(e)
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
            kept.append(e)
    verts = frozenset(router.values())
    total = sum(fused.edges[e].cost for e in kept)
    return SteinerTree(verts, frozenset(kept), tree.root, tree.terminals, total), fused


# --------------------------------------------------------------------------- #
# hierarchical regions and symmetrized region states


@dataclass
class Hierarchy:
    """Regions by level; level 0 holds routers, each higher level their designated routers."""

    m_max: int
    levels: list[list[list[str]]] = field(default_factory=list)

    def __post_init__(self):
        if self.m_max < 2:
            raise InvalidArgument("regions need room for at least two routers")

    def depth(self) -> int:
        return len(self.levels)

    def regions(self) -> list[tuple[int, list[str]]]:
        return [(lv, reg) for lv, regs in enumerate(self.levels) for reg in regs]


def hierarchy_insert(h: Hierarchy, router: str) -> list[tuple[str, int, int]]:
    """Place a newly started router; returns every ``(router, level, region index)`` placement made.

    The router joins the first region of the bottom level with room.  When
    none has room it opens a new region as its designated router, and that
    router (plus the first region's designated router, when the level has just
    grown to two regions) is placed one level up in the same way.
    """
    placed: list[tuple[int, int]] = []
    _insert(h, 0, router, placed)
    return placed


def _insert(h: Hierarchy, level: int, router: str, placed: list) -> None:
    if level == len(h.levels):
        h.levels.append([])
    regions = h.levels[level]
    for i, reg in enumerate(regions):
        if router in reg:
            return
        if len(reg) < h.m_max:
            reg.append(router)
            placed.append((router, level, i))
            return
    regions.append([router])
    placed.append((router, level, len(regions) - 1))
    if len(regions) == 1:
        return
    if len(regions) == 2:
        _insert(h, level + 1, regions[0][0], placed)
    _insert(h, level + 1, router, placed)


def symmetrize_region_state(regions: Sequence[Sequence[str]], ghz_size: int) -> tuple[int, list[tuple[str, ...]]]:
    """Every way of placing one GHZ qubit per region on one of its routers.

    The first assignment (first router of every region) is the one used in
    regular operation; the others stand by for router failures.
    """
    if ghz_size != len(regions):
        raise InvalidArgument("one region per GHZ qubit is required")
    assignments = list(product(*[tuple(r) for r in regions]))
    return len(assignments), assignments


def build_region_states(regions: Sequence[Sequence[str]], alloc: Allocator | None = None
                        ) -> tuple[GraphState, list[tuple[tuple[str, ...], GhzInstance]]]:
    """One GHZ state per assignment of :func:`symmetrize_region_state`, rooted in the first region."""
    alloc = alloc or Allocator()
    _, assignments = symmetrize_region_state(regions, len(regions))
    out = []
    parts = []
    for a in assignments:
        qs = [alloc.new(r) for r in a]
        parts.append(gs.ghz_star(len(qs), qs))
        out.append((a, GhzInstance("x".join(a), qs[0], tuple(qs[1:]), nominal=len(qs))))
    return gs.tensor(*parts), out
