"""Acceptance suite: the ten exit criteria, each at its stated tolerance.

One test per criterion; the conftest summary hook prints one PASS/FAIL
line per criterion at the end of the run.
"""

import dataclasses
import json
import random
import time
from pathlib import Path

from hypothesis import given, settings

from sdnsec import cvss
from sdnsec.catalog import coverage_report, load_catalog
from sdnsec.correlation import NodeKind, build_map, check_tree, export_dot
from sdnsec.ranking import builtin_threat_categories, rank
from sdnsec.simulation import (DEFAULT_PASSWORD_INDEX, TICK, TOOL_RATES,
                               CredentialService, Dictionary, Eavesdrop,
                               SynFlood, TestbedParams, make_testbed, ping,
                               reconfigure_vpls, run_dictionary_attack,
                               run_eavesdrop, run_syn_flood)
from sdnsec.topology import ComponentKind, reference_testbed

from dot_grammar import check_dot
from pipeline import GOLDEN_FILES, run_reference_pipeline
from test_topology import models

FIXTURES = Path(__file__).parent / "fixtures"
GOLDEN = Path(__file__).parent / "golden"

HOSTS = [f"h{n}" for n in range(1, 10)]


def test_criterion_1_table4_reproduction():
    started = time.perf_counter()
    records = rank(builtin_threat_categories()).records
    by_id = sorted(records, key=lambda r: r.number)

    assert [r.rank for r in by_id] == [1, 1, 2, 3, 4, 4, 5, 5, 5, 5, 6, 6, 7, 7]
    assert [r.base for r in by_id] == [9.0, 9.0, 8.9, 6.8, 6.5, 6.5,
                                       5.9, 5.9, 5.9, 5.9, 4.0, 4.0, 3.7, 3.7]
    assert [r.overall for r in by_id] == [7.9, 7.9, 7.9, 7.7, 5.6, 4.6,
                                          6.7, 6.7, 6.7, 6.7, 2.7, 3.5, 2.6, 2.6]
    assert [r.severity.value for r in by_id] == [
        "Critical", "Critical", "High", "Medium", "Medium", "Medium", "Medium",
        "Medium", "Medium", "Medium", "Medium", "Medium", "Low", "Low"]
    assert time.perf_counter() - started < 1.0


def test_criterion_2_cvss_oracle_equivalence():
    started = time.perf_counter()
    corpus = json.loads((FIXTURES / "cvss_corpus.json").read_text())
    assert len(corpus) >= 50
    for entry in corpus:
        vector = cvss.parse_vector(entry["vector"])
        assert cvss.base_score(vector) == entry["base"], entry["vector"]
        assert cvss.temporal_score(vector) == entry["temporal"], entry["vector"]
        assert cvss.environmental_score(vector) == entry["environmental"], entry["vector"]
    assert time.perf_counter() - started < 1.0


def test_criterion_3_severity_banding():
    anchors = [(9.0, "Critical"), (8.9, "High"), (6.8, "Medium"),
               (4.0, "Medium"), (3.7, "Low")]
    edges = [(0.0, "None"), (0.1, "Low"), (3.9, "Low"), (4.0, "Medium"),
             (6.9, "Medium"), (7.0, "High"), (8.9, "High"), (9.0, "Critical"),
             (10.0, "Critical")]
    for score, expected in anchors + edges:
        assert cvss.severity(score).value == expected, score


def test_criterion_4_catalog_integrity():
    catalog = load_catalog()
    assert len(catalog.threats) == 18
    assert len(catalog.vulnerabilities) == 18
    assert len(catalog.mitigations) == 18
    assert {m.id for m in catalog.mitigations if not m.applicable} == {"M5", "M7"}
    assert all(covered for _, covered in coverage_report(catalog))
    stripped = dataclasses.replace(catalog, solutions=())
    uncovered = [tid for tid, covered in coverage_report(stripped) if not covered]
    assert uncovered == ["T5", "T7"]


def test_criterion_5_syn_flood_scenario():
    started = time.perf_counter()
    testbed = make_testbed(reference_testbed())
    result = run_syn_flood(testbed, SynFlood(target="c1", rate=500_000,
                                             duration=8.0))
    assert result.outcome["time_to_disruption"] == 8.0
    assert result.outcome["packets_sent"] == 4_000_000

    ordered_pairs = [(a, b) for a in HOSTS for b in HOSTS if a != b]
    assert len(ordered_pairs) == 72
    assert all(not ping(testbed, a, b) for a, b in ordered_pairs)

    reconfigure_vpls(testbed)
    model = testbed.model
    for a, b in ordered_pairs:
        same = model.vpls_of(a) is model.vpls_of(b)
        assert ping(testbed, a, b) == same
    assert time.perf_counter() - started < 1.0


def test_criterion_6_isolation_exhaustive():
    testbed = make_testbed(reference_testbed())
    model = testbed.model
    checked = 0
    for a in HOSTS:
        for b in HOSTS:
            if a == b:
                continue
            same = model.vpls_of(a) is model.vpls_of(b)
            assert ping(testbed, a, b) == same
            checked += 1
    assert checked == 72


@settings(max_examples=40, deadline=None)
@given(models())
def test_criterion_6_isolation_generated_models(m):
    if not m.vpls:
        return
    testbed = make_testbed(m)
    hosts = [c.id for c in m.components_of_kind(ComponentKind.HOST)]
    for a in hosts:
        for b in hosts:
            if a == b:
                continue
            same = m.vpls_of(a) is not None and m.vpls_of(a) is m.vpls_of(b)
            assert ping(testbed, a, b) == same


def test_criterion_7_eavesdropping_contract():
    testbed = make_testbed(reference_testbed())
    captured = run_eavesdrop(testbed, Eavesdrop(flow="f-mgmt-telnet"))
    credentials = [a for a in captured.outcome["artifacts"]
                   if a["kind"] == "credentials"]
    service = testbed.credentials["switch-mgmt"]
    assert credentials
    assert credentials[0]["username"] == service.username
    assert credentials[0]["password"] == service.password

    for flow_id in testbed.channel_encrypted:
        testbed.channel_encrypted[flow_id] = True
    for flow_id in sorted(testbed.channel_encrypted):
        silent = run_eavesdrop(testbed, Eavesdrop(flow=flow_id, duration=1))
        assert silent.outcome["payloads_captured"] == 0, flow_id


def test_criterion_8_dictionary_timing_arithmetic():
    rng = random.Random(0xD1C7)
    for _ in range(100):
        index = rng.randrange(0, 1_000_000)
        rate = rng.uniform(0.1, 500_000)
        params = TestbedParams(services=(CredentialService(
            "svc", "s1", "Telnet", "u", "p", password_index=index),))
        testbed = make_testbed(reference_testbed(), params)
        result = run_dictionary_attack(testbed, Dictionary(service="svc", rate=rate))
        assert result.outcome["elapsed"] == (index + 1) / rate

    testbed = make_testbed(reference_testbed())
    assert testbed.credentials["switch-mgmt"].password_index == DEFAULT_PASSWORD_INDEX
    fast = run_dictionary_attack(
        testbed, Dictionary(service="switch-mgmt", rate=TOOL_RATES["patator"]))
    assert fast.outcome["elapsed"] == 4.0
    slow = run_dictionary_attack(
        testbed, Dictionary(service="switch-mgmt", rate=TOOL_RATES["hydra"]))
    assert abs(slow.outcome["elapsed"] - 1320.0) <= TICK


def test_criterion_9_correlation_map_structure():
    catalog = load_catalog()
    tree = build_map(catalog, rank(builtin_threat_categories()))
    check_tree(tree)  # acyclic, single-parent, kind-ordered

    for node in tree.nodes.values():
        if node.kind is NodeKind.VULNERABILITY:
            assert node.children, f"{node.id} lacks a mitigation leaf"

    dot = export_dot(tree)
    check_dot(dot)  # external grammar validation
    rebuilt = export_dot(build_map(catalog, rank(builtin_threat_categories())))
    assert rebuilt == dot


def test_criterion_10_end_to_end_golden_run(tmp_path):
    started = time.perf_counter()
    out_dir = run_reference_pipeline(str(tmp_path))  # asserts every exit is 0
    for name in GOLDEN_FILES:
        produced = Path(out_dir, name).read_bytes()
        expected = (GOLDEN / name).read_bytes()
        assert produced == expected, f"{name} deviates from the committed golden"
    assert time.perf_counter() - started < 5.0
