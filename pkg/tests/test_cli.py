import subprocess
import sys

import pytest

from qnetstack.cli import fixture_path, main, run
from qnetstack.scenario import parse_scenario

FIXTURE_VERBS = [("costs", "table_costs.scn"), ("route", "four_networks.scn"), ("drill", "symmetrized_drill.scn"),
                 ("e2e", "three_networks.scn"), ("e2e", "three_networks_detour.scn"), ("verify", "verify_ghz3.scn")]


def cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def fx(name):
    return str(fixture_path(name))


@pytest.mark.parametrize("verb,name", FIXTURE_VERBS)
def test_fixture_passes_and_is_deterministic(capsys, verb, name):
    code, first, _ = cli(capsys, verb, "--scenario", fx(name))
    assert code == 0
    _, second, _ = cli(capsys, verb, "--scenario", fx(name))
    assert first == second
    assert first.endswith("# result: PASS\n")


def test_costs_golden(capsys):
    code, out, err = cli(capsys, "costs", "--scenario", fx("table_costs.scn"), "--format", "records",
                         "--golden", fx("table_costs.golden"))
    assert code == 0 and err == ""
    assert out.splitlines()[0] == "c=3 m=5 MB=180 MS=129 MM=102"
    assert len(out.splitlines()) == 9


def test_costs_defaults_without_scenario(capsys):
    code, out, _ = cli(capsys, "costs", "--format", "records")
    assert code == 0
    assert out == fixture_path("table_costs.golden").read_text()


def test_golden_mismatch(capsys, tmp_path):
    bad = tmp_path / "bad.golden"
    bad.write_text("c=3 m=5 MB=0 MS=0 MM=0\n")
    code, _, err = cli(capsys, "costs", "--format", "records", "--golden", str(bad))
    assert code == 1
    assert "-c=3 m=5 MB=0 MS=0 MM=0" in err


def test_e2e_golden(capsys):
    code, out, _ = cli(capsys, "e2e", "--scenario", fx("three_networks.scn"), "--golden", fx("three_networks.golden"))
    assert code == 0
    assert "  oracle=PASS target=cluster4 replay=PASS peak=10" in out.splitlines()
    assert "  edges=[c1-c2,c2-c3,c3-c4]" in out.splitlines()
    assert "  ledger=PASS violations=0" in out.splitlines()


def test_seed_override(capsys):
    _, a, _ = cli(capsys, "e2e", "--scenario", fx("three_networks.scn"), "--seed", "1", "--format", "records")
    _, b, _ = cli(capsys, "e2e", "--scenario", fx("three_networks.scn"), "--seed", "2", "--format", "records")
    edges = [line for line in a.splitlines() if line.startswith("edges=")]
    assert edges == [line for line in b.splitlines() if line.startswith("edges=")]
    assert "oracle=PASS target=cluster4" in a and "oracle=PASS target=cluster4" in b


def test_route_census(capsys):
    code, out, _ = cli(capsys, "route", "--scenario", fx("four_networks.scn"), "--format", "records")
    assert code == 0
    assert "census instances=3 sizes=4,3,2 roots=N1,N2,N3 consumed=10 cover=PASS" in out.splitlines()
    assert "step=3 root=N3 tree_edges=[N3-R6,N4-R6] consumed=[C.1.g3.0,H.1.g2.0]" in out.splitlines()


def test_drill_floor(capsys):
    code, out, _ = cli(capsys, "drill", "--scenario", fx("symmetrized_drill.scn"), "--format", "records")
    assert code == 0
    lines = [line for line in out.splitlines() if line.startswith("fail=N")]
    assert len(lines) == 4 and all("intact_full_copies=2 floor=2 PASS" in line for line in lines)


def test_drill_scenario_failures_only():
    sc = parse_scenario(fixture_path("symmetrized_drill.scn").read_text() + "failure.f1 = 1:N3\n")
    rep = run(sc, "drill")
    assert [line for _, line in rep.lines if line.startswith("fail=N")] == [
        "fail=N3 survivors=6/24 intact_full_copies=2 floor=2 PASS"]


def test_failed_check_exit_status(capsys, tmp_path):
    f = tmp_path / "v.scn"
    f.write_text("seed = 1\nverify.v.lost = 1\nverify.v.trials = 50\nverify.v.expect = verified>=1\n")
    code, out, _ = cli(capsys, "verify", "--scenario", str(f))
    assert code == 1
    assert out.endswith("# result: FAIL\n")


def test_module_error_exit_status(capsys, tmp_path):
    f = tmp_path / "e.scn"
    f.write_text(fixture_path("three_networks.scn").read_text() + "failure.f1 = 1:Sy\n")
    code, _, err = cli(capsys, "e2e", "--scenario", str(f))
    assert code == 2 and "[device-down]" in err


def test_scenario_errors(capsys, tmp_path):
    f = tmp_path / "bad.scn"
    f.write_text("seed = 1\nrequest.r.edges = a-b\n")
    code, out, err = cli(capsys, "e2e", "--scenario", str(f))
    assert code == 2 and out == ""
    assert "line 2: unknown reference: client 'a'" in err


def test_missing_file(capsys, tmp_path):
    code, _, err = cli(capsys, "costs", "--scenario", str(tmp_path / "none.scn"))
    assert code == 2 and err.startswith("error:")


def test_text_and_records(capsys):
    _, text, _ = cli(capsys, "route", "--scenario", fx("four_networks.scn"))
    _, records, _ = cli(capsys, "route", "--scenario", fx("four_networks.scn"), "--format", "records")
    assert text.startswith("# route\n")
    assert [line.strip() for line in text.splitlines() if not line.startswith("#")] == records.splitlines()


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "qnetstack.cli", "costs", "--format", "records"],
                         capture_output=True, text=True, check=True).stdout
    assert out == fixture_path("table_costs.golden").read_text()
