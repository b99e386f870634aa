import pytest
from hypothesis import given, settings, strategies as st

from qnetstack.cli import fixture_path
from qnetstack.errors import ScenarioError
from qnetstack.scenario import (FailureDef, NetworkDef, RegionDef, RequestDef, Scenario, VerifyDef,
                                parse_scenario, serialize)

FIXTURES = ["four_networks.scn", "three_networks.scn", "three_networks_detour.scn", "symmetrized_drill.scn",
            "table_costs.scn", "verify_ghz3.scn"]


def errors_of(text):
    with pytest.raises(ScenarioError) as e:
        parse_scenario(text)
    return e.value.errors


def test_empty():
    assert parse_scenario("") == Scenario()
    assert parse_scenario("# only a comment\n\n") == Scenario()
    assert serialize(Scenario()) == ""


def test_four_network_fixture():
    sc = parse_scenario(fixture_path("four_networks.scn").read_text())
    assert len(sc.regions) == 8
    assert sc.regions["A"].members == ["N1", "R1", "R2", "R3"]
    assert all(r.copies == 2 for r in sc.regions.values())
    assert sc.requests["r1"].routers == ["N1", "N2", "N3", "N4"]
    assert sc.m_max == 3 and len(sc.hierarchy) == 10


def test_network_fields():
    sc = parse_scenario("network.n.devices = A:switch B:router\nnetwork.n.layout = symmetrized(6)\n"
                        "network.n.counts = B:2\nclient.x = A\nclient.y = A\n")
    net = sc.networks["n"]
    assert net.layout == "symmetrized" and net.copies == 6 and net.layout_text() == "symmetrized(6)"
    assert sc.client_count(net, "A") == 2 and sc.client_count(net, "B") == 2
    assert sc.device_role() == {"A": "switch", "B": "router", "x": "client", "y": "client"}


@pytest.mark.parametrize("name", FIXTURES)
def test_round_trip_fixtures(name):
    sc = parse_scenario(fixture_path(name).read_text())
    text = serialize(sc)
    assert parse_scenario(text) == sc
    assert serialize(parse_scenario(text)) == text


def test_unknown_client_reported_with_line():
    errs = errors_of("seed = 1\nnetwork.n.devices = A:switch B:switch\nclient.x = A\n"
                     "request.r.edges = x-ghost\n")
    assert errs == [(4, "unknown reference: client 'ghost'")]


@pytest.mark.parametrize("text,line,fragment", [
    ("seed 4\n", 1, "syntax error"),
    ("seed = four\n", 1, "integer"),
    ("\n\nbogus.key = 1\n", 3, "unknown key"),
    ("seed = 1\nseed = 2\n", 2, "duplicate id"),
    ("network.a.devices = X:switch\nnetwork.b.devices = X:switch\n", 2, "duplicate id"),
    ("network.a.devices = X:hub\n", 1, "unknown role"),
    ("network.a.devices = X:switch\nnetwork.a.layout = symmetrized(0)\n", 2, "copy"),
    ("network.a.devices = X:switch Y:router\nclient.c = Y\n", 2, "needs a switch"),
    ("region.r.members = A\n", 1, "two distinct"),
    ("network.a.devices = X:switch Y:router\nregion.r.members = X Y\n", 2, "not a router"),
    ("failure.f = 3:nowhere\n", 1, "unknown reference"),
    ("failure.f = nowhere\n", 1, "time:device"),
    ("network.a.devices = X:switch Y:switch\nclient.c = X\nclient.d = Y\nrequest.r.edges = c-d\n", 4, "seed"),
    ("request.r.edges = a-a\n", 1, "bad edge"),
    ("verify.v.size = 3\nverify.v.lost = 3\n", 1, "lost"),
    ("verify.v.expect = maybe\n", 1, "expectation"),
])
def test_errors(text, line, fragment):
    errs = errors_of(text)
    assert any(ln == line and fragment in msg for ln, msg in errs), errs


def test_all_errors_listed():
    errs = errors_of("seed = x\nfoo = 1\n")
    assert [ln for ln, _ in errs] == [1, 2]


names = st.text("abcdefgh", min_size=1, max_size=4)


@st.composite
def scenarios(draw):
    sc = Scenario(seed=draw(st.none() | st.integers(0, 99)))
    n_nets = draw(st.integers(0, 3))
    devices = []
    for k in range(n_nets):
        devs = [(f"D{k}_{j}", draw(st.sampled_from(["switch", "router", "repeater"]))) for j in range(
            draw(st.integers(1, 4)))]
        devices += devs
        layout = draw(st.sampled_from(["plain", "shielded", "symmetrized"]))
        sc.networks[f"n{k}"] = NetworkDef(f"n{k}", devs, layout, draw(st.integers(1, 9)) if layout ==
                                          "symmetrized" else 1, {devs[0][0]: draw(st.integers(0, 3))})
    switches = [d for d, r in devices if r == "switch"]
    for k in range(draw(st.integers(0, 4)) if switches else 0):
        sc.clients[f"c{k}"] = draw(st.sampled_from(switches))
    routers = [f"R{k}" for k in range(4)]
    for k in range(draw(st.integers(0, 3))):
        members = draw(st.lists(st.sampled_from(routers), min_size=2, max_size=4, unique=True))
        sc.regions[f"g{k}"] = RegionDef(f"g{k}", members, draw(st.integers(1, 3)))
    if len(sc.clients) >= 2 and sc.seed is not None:
        a, b = list(sc.clients)[:2]
        sc.requests["r"] = RequestDef("r", [(a, b)], [], draw(st.integers(1, 3)), draw(names))
    if sc.regions:
        sc.requests["q"] = RequestDef("q", [], sc.regions["g0"].members, 1, "")
        sc.failures["f"] = FailureDef("f", draw(st.integers(0, 9)), sc.regions["g0"].members[0])
    if draw(st.booleans()):
        sc.verifies["v"] = VerifyDef("v", 3, draw(st.integers(1, 9)), draw(st.integers(0, 4)), 1, 2, "failed>=0.5")
    if draw(st.booleans()):
        sc.costs_c, sc.costs_m = [3, 5], [5]
    return sc


@settings(max_examples=60, deadline=None)
@given(scenarios())
def test_round_trip_property(sc):
    assert parse_scenario(serialize(sc)) == sc
