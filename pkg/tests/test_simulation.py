import dataclasses
import random

import pytest
from hypothesis import given, settings

from sdnsec.errors import (InvalidModel, ScenarioError, ScenarioMismatch,
                           TargetNotController, TargetNotFound, UnknownFlow,
                           UnknownHost)
from sdnsec.ranking import builtin_threat_categories
from sdnsec.simulation import (DEFAULT_PASSWORD_INDEX, TICK, TOOL_RATES,
                               CredentialService, Dictionary, Eavesdrop,
                               SimTestbed, SynFlood, TestbedParams,
                               make_testbed, parse_scenario, ping,
                               reconfigure_vpls, run_dictionary_attack,
                               run_eavesdrop, run_syn_flood, verify_impact)
from sdnsec.topology import ComponentKind, reference_testbed

from test_topology import models

HOSTS = [f"h{n}" for n in range(1, 10)]
TC = {r.id: r for r in builtin_threat_categories()}


@pytest.fixture()
def testbed():
    return make_testbed(reference_testbed())


# -- testbed construction -----------------------------------------------------

def test_make_testbed_defaults(testbed):
    assert list(testbed.services_up.values()) == [True, True, True]
    assert not testbed.saturated
    assert testbed.clock == 0.0
    assert "switch-mgmt" in testbed.credentials


def test_flow_rules_are_directed_intra_domain_pairs(testbed):
    assert len(testbed.flow_rules) == 3 * 3 * 2
    assert ("h1", "h4") in testbed.flow_rules
    assert ("h1", "h2") not in testbed.flow_rules


def test_make_testbed_requires_vpls():
    bare = dataclasses.replace(reference_testbed(), vpls=())
    with pytest.raises(InvalidModel):
        make_testbed(bare)


def test_make_testbed_requires_valid_model():
    broken = dataclasses.replace(reference_testbed(), components=())
    with pytest.raises(InvalidModel):
        make_testbed(broken)


# -- reachability -------------------------------------------------------------

def test_ping_same_vpls(testbed):
    assert ping(testbed, "h1", "h4")
    assert ping(testbed, "h7", "h1")


def test_ping_cross_vpls(testbed):
    assert not ping(testbed, "h1", "h2")


def test_ping_unknown_or_non_host(testbed):
    with pytest.raises(UnknownHost):
        ping(testbed, "h1", "nope")
    with pytest.raises(UnknownHost):
        ping(testbed, "h1", "s1")
    with pytest.raises(UnknownHost):
        ping(testbed, "kali1", "h1")


def test_isolation_biconditional_exhaustive(testbed):
    model = testbed.model
    for src in HOSTS:
        for dst in HOSTS:
            if src == dst:
                continue
            same = model.vpls_of(src) is model.vpls_of(dst)
            assert ping(testbed, src, dst) == same


@settings(max_examples=40, deadline=None)
@given(models())
def test_isolation_biconditional_on_generated_models(m):
    tb = make_testbed(m) if m.vpls else None
    if tb is None:
        return
    hosts = [c.id for c in m.components_of_kind(ComponentKind.HOST)]
    rng = random.Random(42)
    pairs = [(a, b) for a in hosts for b in hosts if a != b]
    for src, dst in rng.sample(pairs, min(60, len(pairs))) if pairs else []:
        same = m.vpls_of(src) is not None and m.vpls_of(src) is m.vpls_of(dst)
        assert ping(tb, src, dst) == same


def test_ping_fails_when_service_down(testbed):
    testbed.services_up["vpls1"] = False
    assert not ping(testbed, "h1", "h4")
    assert ping(testbed, "h2", "h5")  # other tenants unaffected


# -- dictionary attack ----------------------------------------------------------

def test_dictionary_fast_preset_timing(testbed):
    result = run_dictionary_attack(
        testbed, Dictionary(service="switch-mgmt", rate=TOOL_RATES["patator"]))
    assert result.outcome["success"]
    assert result.outcome["attempts"] == DEFAULT_PASSWORD_INDEX + 1
    assert result.outcome["elapsed"] == 4.0


def test_dictionary_slow_preset_timing(testbed):
    result = run_dictionary_attack(
        testbed, Dictionary(service="switch-mgmt", rate=TOOL_RATES["hydra"]))
    assert abs(result.outcome["elapsed"] - 1320.0) <= TICK


def test_dictionary_first_guess_correct():
    params = TestbedParams(services=(CredentialService(
        "svc", "s1", "Telnet", "admin", "admin", password_index=0),))
    tb = make_testbed(reference_testbed(), params)
    result = run_dictionary_attack(tb, Dictionary(service="svc", rate=100))
    assert result.outcome["attempts"] == 1
    assert result.outcome["success"]


def test_dictionary_password_beyond_wordlist_fails():
    params = TestbedParams(services=(CredentialService(
        "svc", "s1", "Telnet", "admin", "Xq9!", password_index=5000),))
    tb = make_testbed(reference_testbed(), params)
    result = run_dictionary_attack(tb, Dictionary(service="svc", wordlist_size=1000,
                                                  rate=100))
    assert not result.outcome["success"]
    assert result.outcome["attempts"] == 1000
    assert result.outcome["credentials"] is None


def test_dictionary_unknown_service(testbed):
    with pytest.raises(TargetNotFound):
        run_dictionary_attack(testbed, Dictionary(service="nope"))


def test_dictionary_timing_arithmetic_random_pairs():
    rng = random.Random(1234)
    for _ in range(100):
        index = rng.randrange(0, 200_000)
        rate = rng.uniform(0.5, 100_000)
        params = TestbedParams(services=(CredentialService(
            "svc", "s1", "Telnet", "u", "p", password_index=index),))
        tb = make_testbed(reference_testbed(), params)
        result = run_dictionary_attack(tb, Dictionary(service="svc", rate=rate))
        assert result.outcome["elapsed"] == (index + 1) / rate


# -- eavesdropping --------------------------------------------------------------

def test_eavesdrop_cleartext_telnet_captures_credentials(testbed):
    result = run_eavesdrop(testbed, Eavesdrop(flow="f-mgmt-telnet"))
    assert result.outcome["credentials_captured"]
    creds = [a for a in result.outcome["artifacts"] if a["kind"] == "credentials"]
    assert creds[0]["username"] == "karaf"
    assert creds[0]["password"] == "karaf"


def test_eavesdrop_cleartext_openflow_exposes_topology(testbed):
    result = run_eavesdrop(testbed, Eavesdrop(flow="f-sb-s1"))
    topo = [a for a in result.outcome["artifacts"] if a["kind"] == "topology"]
    assert topo and topo[0]["switches"] == ["s1", "s2", "s3"]
    assert topo[0]["services"] == ["vpls1", "vpls2", "vpls3"]


def test_eavesdrop_encrypted_flow_yields_metadata_only(testbed):
    testbed.channel_encrypted["f-mgmt-telnet"] = True
    result = run_eavesdrop(testbed, Eavesdrop(flow="f-mgmt-telnet"))
    assert result.outcome["payloads_captured"] == 0
    assert not result.outcome["credentials_captured"]
    assert [a["kind"] for a in result.outcome["artifacts"]] == ["metadata"]


def test_encrypting_everything_silences_every_flow(testbed):
    for flow_id in testbed.channel_encrypted:
        testbed.channel_encrypted[flow_id] = True
    for flow_id in sorted(testbed.channel_encrypted):
        result = run_eavesdrop(testbed, Eavesdrop(flow=flow_id, duration=1))
        assert result.outcome["payloads_captured"] == 0


def test_eavesdrop_unknown_flow(testbed):
    with pytest.raises(UnknownFlow):
        run_eavesdrop(testbed, Eavesdrop(flow="f-none"))


# -- syn flood -------------------------------------------------------------------

def test_syn_flood_default_scenario(testbed):
    result = run_syn_flood(testbed, SynFlood(target="c1"))
    assert result.outcome["disrupted"]
    assert result.outcome["time_to_disruption"] == 8.0
    assert result.outcome["packets_sent"] == 4_000_000
    assert result.outcome["services_terminated"] == ["vpls1", "vpls2", "vpls3"]
    assert testbed.saturated


def test_syn_flood_below_capacity_has_no_effect(testbed):
    result = run_syn_flood(testbed, SynFlood(target="c1", rate=1000, duration=5))
    assert not result.outcome["disrupted"]
    assert result.outcome["packets_sent"] == 5000
    assert all(testbed.services_up.values())
    assert ping(testbed, "h1", "h4")


def test_syn_flood_blocks_all_pings_until_reconfiguration(testbed):
    run_syn_flood(testbed, SynFlood(target="c1"))
    assert all(not ping(testbed, a, b)
               for a in HOSTS for b in HOSTS if a != b)
    reconfigure_vpls(testbed)
    for src in HOSTS:
        for dst in HOSTS:
            if src == dst:
                continue
            same = testbed.model.vpls_of(src) is testbed.model.vpls_of(dst)
            assert ping(testbed, src, dst) == same


def test_reconfigure_is_idempotent_on_fresh_testbed(testbed):
    before = (dict(testbed.services_up), testbed.saturated, testbed.clock)
    reconfigure_vpls(testbed)
    assert (dict(testbed.services_up), testbed.saturated, testbed.clock) == before


def test_syn_flood_rejects_non_controller_targets(testbed):
    with pytest.raises(TargetNotController):
        run_syn_flood(testbed, SynFlood(target="h1"))
    with pytest.raises(TargetNotController):
        run_syn_flood(testbed, SynFlood(target="ghost"))


def test_syn_flood_monotone_in_rate():
    previous = float("inf")
    for rate in (100_000, 250_000, 500_000, 1_000_000, 4_000_000):
        tb = make_testbed(reference_testbed())
        result = run_syn_flood(tb, SynFlood(target="c1", rate=rate, duration=60))
        t = result.outcome["time_to_disruption"]
        assert t is not None
        assert t <= previous
        previous = t


def test_syn_flood_packet_conservation():
    for rate, duration in ((500_000, 8.0), (750_000, 4.0), (123_456, 2.5),
                           (4_000_000, 30.0), (10_000, 1.0)):
        tb = make_testbed(reference_testbed())
        result = run_syn_flood(tb, SynFlood(target="c1", rate=rate, duration=duration))
        t = result.outcome["time_to_disruption"]
        expected = rate * (duration if t is None else min(duration, t))
        assert result.outcome["packets_sent"] == int(expected)


def test_identical_runs_yield_identical_timelines():
    def run():
        tb = make_testbed(reference_testbed())
        flood = run_syn_flood(tb, SynFlood(target="c1"))
        sniff = run_eavesdrop(tb, Eavesdrop(flow="f-mgmt-telnet"))
        return flood.events + sniff.events
    assert run() == run()


# -- impact verification ---------------------------------------------------------

def test_verify_flood_against_its_category(testbed):
    result = run_syn_flood(testbed, SynFlood(target="c1"))
    report = verify_impact(result, TC["TC4"])
    assert report.consistent
    assert report.scope == "whole-network"


def test_verify_eavesdrop_against_its_category(testbed):
    result = run_eavesdrop(testbed, Eavesdrop(flow="f-mgmt-telnet"))
    report = verify_impact(result, TC["TC3"])
    assert report.consistent


def test_verify_dictionary_against_its_category(testbed):
    result = run_dictionary_attack(testbed, Dictionary(service="switch-mgmt"))
    report = verify_impact(result, TC["TC2"])
    assert report.consistent


def test_verify_rejects_wrong_pairing(testbed):
    result = run_syn_flood(testbed, SynFlood(target="c1"))
    with pytest.raises(ScenarioMismatch):
        verify_impact(result, TC["TC2"])


def test_verify_flood_without_disruption_is_inconsistent(testbed):
    result = run_syn_flood(testbed, SynFlood(target="c1", rate=10, duration=1))
    report = verify_impact(result, TC["TC4"])
    assert not report.consistent
    assert report.scope == "none"


# -- scenario files ---------------------------------------------------------------

def test_bundled_scenarios_parse():
    from importlib import resources
    scenarios = resources.files("sdnsec.data").joinpath("scenarios")
    parsed = {name: parse_scenario(scenarios.joinpath(name).read_text())
              for name in ("syn_flood.scenario", "dictionary.scenario",
                           "eavesdrop.scenario")}
    assert isinstance(parsed["syn_flood.scenario"], SynFlood)
    assert parsed["syn_flood.scenario"].port == 6653
    assert isinstance(parsed["dictionary.scenario"], Dictionary)
    assert parsed["dictionary.scenario"].rate == TOOL_RATES["patator"]
    assert isinstance(parsed["eavesdrop.scenario"], Eavesdrop)


def test_parse_scenario_rejects_unknown_type():
    with pytest.raises(ScenarioError):
        parse_scenario("scenario s\n  type = ransomware\n")


def test_parse_scenario_rejects_unknown_preset():
    with pytest.raises(ScenarioError):
        parse_scenario("scenario s\n  type = dictionary\n  service = x\n  preset = gpu\n")


def test_specs_reject_nonpositive_rates():
    with pytest.raises(ScenarioError):
        SynFlood(target="c1", rate=0)
    with pytest.raises(ScenarioError):
        Dictionary(service="x", rate=-1)
    with pytest.raises(ScenarioError):
        Eavesdrop(flow="f", duration=0)
