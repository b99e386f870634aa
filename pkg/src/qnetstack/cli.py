"""Command line: ``qnetstack {costs,route,drill,e2e,verify} [--scenario F] ...``.

Every verb prints a deterministic report.  ``--format records`` prints flat
``key=value`` records only; ``text`` adds section headings and indentation.
The exit status is 0 iff every oracle check and audit in the report passed
(and the report matches ``--golden`` when given), 1 otherwise, 2 on errors.
"""

from __future__ import annotations

import argparse
import difflib
import sys
from dataclasses import dataclass, field
from importlib import resources
from typing import Sequence

import numpy as np

from . import clifford as cl
from . import oracle
from .errors import CapacityExceeded, QNetError
from .graphstate import OutcomeSource
from .netstate import (NetworkSpec, build_network_state, device_fail, intact_full_copies, is_full_bundle,
                       recover_shielded, symmetrize, table_row)
from .routing import Hierarchy, Region, RegionTopology, hierarchy_insert, region_routing
from .scenario import Scenario, load_scenario, parse_scenario
from .stack import FAILED, INCONCLUSIVE, VERIFIED, Simulator, ghz_ensemble, run_requests, verify_state

VERBS = ("costs", "route", "drill", "e2e", "verify")
DEFAULT_C = (3, 5, 7)
DEFAULT_M = (5, 10, 15)


@dataclass
class Report:
    title: str
    lines: list[tuple[int, str]] = field(default_factory=list)
    ok: bool = True

    def add(self, line: str, depth: int = 0) -> None:
        self.lines.append((depth, line))

    def check(self, passed: bool) -> str:
        self.ok = self.ok and passed
        return "PASS" if passed else "FAIL"

    def render(self, fmt: str = "text") -> str:
        if fmt == "records":
            body = [line for _, line in self.lines]
        else:
            body = [f"# {self.title}"] + ["  " * d + line for d, line in self.lines]
            body.append(f"# result: {'PASS' if self.ok else 'FAIL'}")
        return "\n".join(body) + "\n"


def _replay_ok(g) -> tuple[str, int]:
    try:
        rep = oracle.Replayer().run(g.trace)
        same = oracle.equal_up_to_phase(rep.final(sorted(g.vertices)), oracle.physical_state(g))
    except CapacityExceeded:
        return "SKIP", 0
    return ("PASS" if same else "FAIL"), rep.peak


# --------------------------------------------------------------------------- #
# verbs


def run_costs(sc: Scenario, seed: int) -> Report:
    rep = Report("costs")
    for c in sc.costs_c or DEFAULT_C:
        for m in sc.costs_m or DEFAULT_M:
            rep.add(table_row(c, m))
    return rep


def run_route(sc: Scenario, seed: int) -> Report:
    rep = Report("route")
    regions = [Region(r.ident, tuple(r.members), r.copies) for r in sc.regions.values()]
    for req in sc.requests.values():
        if not req.routers:
            continue
        topo = RegionTopology.build(regions, sc.network_of())
        virt = region_routing(topo, req.routers, src=OutcomeSource.seeded(seed))
        rep.add(f"request={req.ident} routers={','.join(sorted(req.routers))}")
        for step in virt.steps:
            rep.add(step.record(), 1)
            verdict, peak = _replay_ok(step.state)
            rep.add(f"step={step.step} size={step.instance.size} bell_measurements={step.bell_measurements} "
                    f"tree_cost={step.tree.cost:g} oracle={rep.check(verdict != 'FAIL')} replay={verdict} "
                    f"peak={peak}", 1)
        sizes = [i.size for i in virt.instances]
        roots = [i.root.device for i in virt.instances]
        covered = set(roots) | {q.device for i in virt.instances for q in i.leaves}
        distinct = len(set(roots)) == len(roots) and covered == set(req.routers)
        rep.add(f"census instances={len(sizes)} sizes={','.join(map(str, sizes))} roots={','.join(roots)} "
                f"consumed={len(virt.consumed)} cover={rep.check(distinct)}", 1)
    if sc.m_max is not None and sc.hierarchy:
        h = Hierarchy(sc.m_max)
        for r in sc.hierarchy:
            hierarchy_insert(h, r)
        rep.add(f"hierarchy m_max={sc.m_max} depth={h.depth()}")
        for level, members in h.regions():
            rep.add(f"level={level} region={','.join(members)}", 1)
    return rep


def _drill_state(net, sc: Scenario):
    devices = tuple(d for d, _ in net.devices)
    spec = NetworkSpec(tuple(sc.client_count(net, d) for d in devices), devices)
    if net.layout == "symmetrized":
        return symmetrize(spec, net.copies)
    return build_network_state(spec, net.layout)


def run_drill(sc: Scenario, seed: int) -> Report:
    rep = Report("drill")
    for net in sc.networks.values():
        devices = [d for d, _ in net.devices]
        failing = [f.device for f in sorted(sc.failures.values(), key=lambda f: (f.time, f.ident))
                   if f.device in devices] or devices
        rep.add(f"network={net.ident} layout={net.layout_text()} devices={len(devices)}")
        for k, d in enumerate(failing):
            state = _drill_state(net, sc)
            before = len(state.live())
            state = device_fail(state, d)
            line = f"fail={d}"
            if state.layout == "shielded":
                state = recover_shielded(state, d, OutcomeSource.seeded(seed).spawn(k))
                verdict, _ = _replay_ok(state.backing)
                line += f" oracle={rep.check(verdict != 'FAIL')} replay={verdict}"
            line += f" survivors={len(state.live())}/{before}"
            if state.layout == "shielded":
                line += f" full_bundle={rep.check(is_full_bundle(state))}"
                rep.add(line, 1)
                continue
            intact = intact_full_copies(state)
            line += f" intact_full_copies={intact}"
            if net.layout == "symmetrized":
                floor = net.copies // len(devices)
                line += f" floor={floor} {rep.check(intact >= floor)}"
            rep.add(line, 1)
    return rep


def run_e2e(sc: Scenario, seed: int) -> Report:
    rep = Report("e2e")
    sim = Simulator(sc, seed)
    results = run_requests(sim)
    for ev in sim.events:
        rep.add(ev.record())
    for res in results:
        req = res.request
        name = req.name or "-"
        for k, c in enumerate(res.copies):
            rep.add(f"request={name} copy={k} clients={','.join(req.clients)}")
            for step in c.steps:
                rep.add(step.record(), 1)
            rep.add(f"consumed=[{','.join(c.consumed)}]", 1)
            edges = sorted("-".join(sorted(q.device for q in e)) for e in c.state.edges)
            rep.add(f"edges=[{','.join(edges)}]", 1)
            byp = sorted((q.device, cl.name(v)) for q, v in c.state.byproducts.items() if v != cl.I)
            rep.add(f"byproducts=[{','.join(f'{q}:{v}' for q, v in byp)}]", 1)
            for v in c.violations:
                rep.add(f"violation {v}", 1)
            rep.add(f"ledger={rep.check(not c.violations)} violations={len(c.violations)}", 1)
            rep.add(f"oracle={rep.check(c.oracle != 'FAIL')} target={name} replay={c.oracle} peak={c.peak}", 1)
    rep.add("census " + " ".join(f"{k}={v}" for k, v in sim.census().items()))
    return rep


def run_verify(sc: Scenario, seed: int) -> Report:
    rep = Report("verify")
    for k, v in enumerate(sc.verifies.values()):
        rng = np.random.default_rng([seed, k])
        counts = {VERIFIED: 0, FAILED: 0, INCONCLUSIVE: 0}
        for _ in range(v.trials):
            verdict, _ = verify_state(ghz_ensemble(v.size, v.copies, v.lost), v.budget, rng)
            counts[verdict] += 1
        line = (f"verify={v.ident} size={v.size} copies={v.copies} budget={v.budget} lost={v.lost} "
                f"trials={v.trials} " + " ".join(f"{x}={n}" for x, n in counts.items()))
        if v.expect:
            kind, _, thr = v.expect.partition(">=")
            line += f" expect={v.expect} {rep.check(counts[kind] >= float(thr) * v.trials)}"
        rep.add(line)
    return rep


RUNNERS = {"costs": run_costs, "route": run_route, "drill": run_drill, "e2e": run_e2e, "verify": run_verify}


def run(sc: Scenario, command: str, seed: int | None = None) -> Report:
    if command not in RUNNERS:
        raise ValueError(f"unknown command {command!r}")
    return RUNNERS[command](sc, seed if seed is not None else (sc.seed or 0))


def fixture_path(name: str):
    """Path of a scenario or golden file shipped with the package."""
    return resources.files("qnetstack") / "fixtures" / name


def main(argv: Sequence[str] | None = None) -> int:
    ap = argparse.ArgumentParser(prog="qnetstack", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=VERBS)
    ap.add_argument("--scenario", help="scenario file (default: empty scenario)")
    ap.add_argument("--seed", type=int, help="override the scenario seed")
    ap.add_argument("--golden", help="compare the report byte for byte with this file")
    ap.add_argument("--format", choices=("text", "records"), default="text")
    args = ap.parse_args(argv)
    try:
        sc = load_scenario(args.scenario) if args.scenario else parse_scenario("")
        report = run(sc, args.command, args.seed)
    except (QNetError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    text = report.render(args.format)
    sys.stdout.write(text)
    ok = report.ok
    if args.golden:
        with open(args.golden, encoding="utf-8") as fh:
            want = fh.read()
        if want != text:
            sys.stderr.writelines(difflib.unified_diff(want.splitlines(True), text.splitlines(True),
                                                       "golden", "report"))
            ok = False
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
