"""Scenario files: networks, regions, clients, requests and failures.

The format is line oriented.  Each record is ``section.key = value``; ``#``
starts a comment and blank lines are ignored::

    seed = 7
    network.blue.devices = Sb:switch Rb:router
    network.blue.layout = plain
    network.blue.counts = Rb:2
    client.c1 = Sb
    region.P.members = Rb Rg1
    region.P.copies = 2
    request.r1.edges = c1-c2 c2-c3
    request.r1.name = cluster4
    failure.f1 = 3:Rg1

Devices of a network are listed in root order: the ``i``-th device roots the
GHZ states of size ``i``.  A device's client count is the number of clients
attached to it unless ``counts`` overrides it.  ``serialize`` writes records
back in the order they were read, so parse/serialize round trips are stable.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import ScenarioError

ROLES = ("repeater", "switch", "router", "client")
LAYOUTS = ("plain", "shielded", "symmetrized")

_NAME = re.compile(r"^[A-Za-z0-9_]+$")
_LAYOUT = re.compile(r"^(plain|shielded|symmetrized\((\d+)\))$")


@dataclass
class NetworkDef:
    ident: str
    devices: list[tuple[str, str]] = field(default_factory=list)
    layout: str = "plain"
    copies: int = 1
    counts: dict[str, int] = field(default_factory=dict)

    def layout_text(self) -> str:
        return f"symmetrized({self.copies})" if self.layout == "symmetrized" else self.layout


@dataclass
class RegionDef:
    ident: str
    members: list[str] = field(default_factory=list)
    copies: int = 1


@dataclass
class RequestDef:
    ident: str
    edges: list[tuple[str, str]] = field(default_factory=list)
    routers: list[str] = field(default_factory=list)
    copies: int = 1
    name: str = ""


@dataclass
class FailureDef:
    ident: str
    time: int
    device: str


@dataclass
class VerifyDef:
    ident: str
    size: int = 3
    copies: int = 5
    budget: int = 4
    lost: int = 0
    trials: int = 1
    expect: str = ""


@dataclass
class Scenario:
    seed: int | None = None
    networks: dict[str, NetworkDef] = field(default_factory=dict)
    clients: dict[str, str] = field(default_factory=dict)
    regions: dict[str, RegionDef] = field(default_factory=dict)
    requests: dict[str, RequestDef] = field(default_factory=dict)
    failures: dict[str, FailureDef] = field(default_factory=dict)
    verifies: dict[str, VerifyDef] = field(default_factory=dict)
    m_max: int | None = None
    hierarchy: list[str] = field(default_factory=list)
    costs_c: list[int] = field(default_factory=list)
    costs_m: list[int] = field(default_factory=list)

    def device_role(self) -> dict[str, str]:
        out = {d: role for net in self.networks.values() for d, role in net.devices}
        for reg in self.regions.values():
            for r in reg.members:
                out.setdefault(r, "router")
        out.update({c: "client" for c in self.clients})
        return out

    def network_of(self) -> dict[str, str]:
        return {d: net.ident for net in self.networks.values() for d, _ in net.devices}

    def client_count(self, net: NetworkDef, device: str) -> int:
        if device in net.counts:
            return net.counts[device]
        return sum(1 for s in self.clients.values() if s == device)


# --------------------------------------------------------------------------- #
# parsing


def _int(text: str, what: str, minimum: int = 0) -> int:
    try:
        v = int(text)
    except ValueError:
        raise ValueError(f"{what} must be an integer, got {text!r}") from None
    if v < minimum:
        raise ValueError(f"{what} must be >= {minimum}")
    return v


def _name(text: str, what: str) -> str:
    if not _NAME.match(text):
        raise ValueError(f"bad {what} {text!r}")
    return text


def _pairs(text: str, what: str) -> list[tuple[str, str]]:
    out = []
    for tok in text.split():
        a, sep, b = tok.partition(":")
        if not sep:
            raise ValueError(f"{what} entries look like name:value, got {tok!r}")
        out.append((_name(a, "name"), b))
    return out


def _ints(text: str) -> list[int]:
    return [_int(t, "value", 1) for t in text.replace(",", " ").split()]


class _Parser:
    def __init__(self):
        self.sc = Scenario()
        self.errors: list[tuple[int, str]] = []
        self.seen: set[str] = set()
        self.lines: dict[str, int] = {}

    def _get(self, table: dict, cls, ident: str, line: int):
        if ident not in table:
            table[ident] = cls(_name(ident, "id"))
            self.lines[f"{cls.__name__}:{ident}"] = line
        return table[ident]

    def record(self, line: int, key: str, value: str) -> None:
        sc = self.sc
        parts = key.split(".")
        head = parts[0]
        if head == "seed" and len(parts) == 1:
            sc.seed = _int(value, "seed")
        elif head == "costs" and len(parts) == 2 and parts[1] in ("c", "m"):
            setattr(sc, f"costs_{parts[1]}", _ints(value))
        elif head == "hierarchy" and len(parts) == 2 and parts[1] == "m_max":
            sc.m_max = _int(value, "m_max", 2)
        elif head == "hierarchy" and len(parts) == 2 and parts[1] == "routers":
            sc.hierarchy = [_name(r, "router") for r in value.split()]
        elif head == "client" and len(parts) == 2:
            sc.clients[_name(parts[1], "client")] = _name(value, "device")
            self.lines[f"client:{parts[1]}"] = line
        elif head == "failure" and len(parts) == 2:
            t, sep, d = value.partition(":")
            if not sep:
                raise ValueError("failure looks like time:device")
            sc.failures[parts[1]] = FailureDef(_name(parts[1], "id"), _int(t, "time"), _name(d, "device"))
            self.lines[f"FailureDef:{parts[1]}"] = line
        elif head == "network" and len(parts) == 3:
            net = self._get(sc.networks, NetworkDef, parts[1], line)
            field_ = parts[2]
            if field_ == "devices":
                net.devices = _pairs(value, "device")
                for _, role in net.devices:
                    if role not in ROLES:
                        raise ValueError(f"unknown role {role!r}")
            elif field_ == "layout":
                m = _LAYOUT.match(value)
                if not m:
                    raise ValueError(f"unknown layout {value!r}")
                net.layout = "symmetrized" if m.group(2) else m.group(1)
                net.copies = int(m.group(2)) if m.group(2) else 1
                if net.layout == "symmetrized" and net.copies < 1:
                    raise ValueError("symmetrized needs at least one copy")
            elif field_ == "counts":
                net.counts = {d: _int(v, "count") for d, v in _pairs(value, "count")}
            else:
                raise ValueError(f"unknown network field {field_!r}")
        elif head == "region" and len(parts) == 3:
            reg = self._get(sc.regions, RegionDef, parts[1], line)
            if parts[2] == "members":
                reg.members = [_name(r, "router") for r in value.split()]
            elif parts[2] == "copies":
                reg.copies = _int(value, "copies", 1)
            else:
                raise ValueError(f"unknown region field {parts[2]!r}")
        elif head == "request" and len(parts) == 3:
            req = self._get(sc.requests, RequestDef, parts[1], line)
            if parts[2] == "edges":
                edges = []
                for tok in value.split():
                    a, sep, b = tok.partition("-")
                    if not sep or a == b:
                        raise ValueError(f"bad edge {tok!r}")
                    edges.append((_name(a, "client"), _name(b, "client")))
                req.edges = edges
            elif parts[2] == "routers":
                req.routers = [_name(r, "router") for r in value.split()]
            elif parts[2] == "copies":
                req.copies = _int(value, "copies", 1)
            elif parts[2] == "name":
                req.name = _name(value, "name")
            else:
                raise ValueError(f"unknown request field {parts[2]!r}")
        elif head == "verify" and len(parts) == 3:
            ver = self._get(sc.verifies, VerifyDef, parts[1], line)
            if parts[2] in ("size", "copies", "trials"):
                setattr(ver, parts[2], _int(value, parts[2], 1))
            elif parts[2] in ("budget", "lost"):
                setattr(ver, parts[2], _int(value, parts[2]))
            elif parts[2] == "expect":
                ver.expect = value
            else:
                raise ValueError(f"unknown verify field {parts[2]!r}")
        else:
            raise ValueError(f"unknown key {key!r}")

    def check(self) -> None:
        sc = self.sc
        roles = sc.device_role()
        owner: dict[str, str] = {}
        for net in sc.networks.values():
            ln = self.lines[f"NetworkDef:{net.ident}"]
            if not net.devices:
                self.errors.append((ln, f"network {net.ident!r} has no devices"))
            for d, _ in net.devices:
                if d in owner:
                    self.errors.append((ln, f"duplicate id: device {d!r} is in networks "
                                            f"{owner[d]!r} and {net.ident!r}"))
                owner[d] = net.ident
            for d in net.counts:
                if d not in dict(net.devices):
                    self.errors.append((ln, f"unknown reference: count for {d!r} outside network"))
        for c, dev in sc.clients.items():
            ln = self.lines[f"client:{c}"]
            if c in owner:
                self.errors.append((ln, f"duplicate id: {c!r} is both a client and a device"))
            if roles.get(dev) != "switch" or dev not in owner:
                self.errors.append((ln, f"unknown reference: client {c!r} needs a switch, got {dev!r}"))
        for reg in sc.regions.values():
            ln = self.lines[f"RegionDef:{reg.ident}"]
            if len(reg.members) < 2 or len(set(reg.members)) != len(reg.members):
                self.errors.append((ln, f"region {reg.ident!r} needs at least two distinct routers"))
            for r in reg.members:
                if r in owner and roles[r] != "router":
                    self.errors.append((ln, f"unknown reference: region member {r!r} is not a router"))
        for req in sc.requests.values():
            ln = self.lines[f"RequestDef:{req.ident}"]
            if bool(req.edges) == bool(req.routers):
                self.errors.append((ln, f"request {req.ident!r} needs exactly one of edges or routers"))
            for a, b in req.edges:
                for x in (a, b):
                    if x not in sc.clients:
                        self.errors.append((ln, f"unknown reference: client {x!r}"))
            for r in req.routers:
                if roles.get(r) != "router":
                    self.errors.append((ln, f"unknown reference: router {r!r}"))
            if req.edges and sc.seed is None:
                self.errors.append((ln, "a seed is required for requests"))
        for f in sc.failures.values():
            if f.device not in roles:
                self.errors.append((self.lines[f"FailureDef:{f.ident}"],
                                    f"unknown reference: device {f.device!r}"))
        for ver in sc.verifies.values():
            ln = self.lines[f"VerifyDef:{ver.ident}"]
            if ver.lost >= ver.size:
                self.errors.append((ln, "lost must name a leaf index below size"))
            if ver.expect and not re.match(r"^(verified|failed|inconclusive)>=(0|1|0?\.\d+)$", ver.expect):
                self.errors.append((ln, f"bad expectation {ver.expect!r}"))


def parse_scenario(text: str) -> Scenario:
    """Parse and validate scenario text; raises :class:`ScenarioError` listing every problem."""
    p = _Parser()
    for ln, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key or not value:
            p.errors.append((ln, f"syntax error: expected 'key = value', got {raw.strip()!r}"))
            continue
        if key in p.seen:
            p.errors.append((ln, f"duplicate id: key {key!r} given twice"))
            continue
        p.seen.add(key)
        try:
            p.record(ln, key, value)
        except ValueError as e:
            p.errors.append((ln, f"syntax error: {e}"))
    if not p.errors:
        p.check()
    if p.errors:
        raise ScenarioError(sorted(p.errors))
    return p.sc


def load_scenario(path) -> Scenario:
    with open(path, encoding="utf-8") as fh:
        return parse_scenario(fh.read())


def serialize(sc: Scenario) -> str:
    """Canonical text for ``sc``; ``parse_scenario(serialize(sc)) == sc``."""
    out = []
    if sc.seed is not None:
        out.append(f"seed = {sc.seed}")
    if sc.costs_c:
        out.append("costs.c = " + ",".join(map(str, sc.costs_c)))
    if sc.costs_m:
        out.append("costs.m = " + ",".join(map(str, sc.costs_m)))
    if sc.m_max is not None:
        out.append(f"hierarchy.m_max = {sc.m_max}")
    if sc.hierarchy:
        out.append("hierarchy.routers = " + " ".join(sc.hierarchy))
    for net in sc.networks.values():
        out.append(f"network.{net.ident}.devices = " + " ".join(f"{d}:{r}" for d, r in net.devices))
        out.append(f"network.{net.ident}.layout = {net.layout_text()}")
        if net.counts:
            out.append(f"network.{net.ident}.counts = " + " ".join(f"{d}:{c}" for d, c in net.counts.items()))
    for c, dev in sc.clients.items():
        out.append(f"client.{c} = {dev}")
    for reg in sc.regions.values():
        out.append(f"region.{reg.ident}.members = " + " ".join(reg.members))
        out.append(f"region.{reg.ident}.copies = {reg.copies}")
    for req in sc.requests.values():
        if req.edges:
            out.append(f"request.{req.ident}.edges = " + " ".join(f"{a}-{b}" for a, b in req.edges))
        if req.routers:
            out.append(f"request.{req.ident}.routers = " + " ".join(req.routers))
        out.append(f"request.{req.ident}.copies = {req.copies}")
        if req.name:
            out.append(f"request.{req.ident}.name = {req.name}")
    for f in sc.failures.values():
        out.append(f"failure.{f.ident} = {f.time}:{f.device}")
    for v in sc.verifies.values():
        for k in ("size", "copies", "budget", "lost", "trials"):
            out.append(f"verify.{v.ident}.{k} = {getattr(v, k)}")
        if v.expect:
            out.append(f"verify.{v.ident}.expect = {v.expect}")
    return "\n".join(out) + ("\n" if out else "")
