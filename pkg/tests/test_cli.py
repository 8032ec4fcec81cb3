import dataclasses
import json
import os

import pytest

from sdnsec.cli import main
from sdnsec.stride import default_rules
from sdnsec.topology import (reference_stride_model, reference_testbed,
                             render_model)


@pytest.fixture()
def model_file(tmp_path):
    path = tmp_path / "testbed.model"
    path.write_text(render_model(reference_testbed()))
    return str(path)


@pytest.fixture()
def out_dir(tmp_path):
    return str(tmp_path / "run")


def _read_json(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _analyze(model_file, out_dir, *extra):
    assert main(["analyze", "--model", model_file, "--out", out_dir, *extra]) == 0


def _rank(out_dir, *extra):
    assert main(["rank", "--out", out_dir, *extra]) == 0


# -- validate -------------------------------------------------------------------

def test_validate_ok(model_file, capsys):
    assert main(["validate", "--model", model_file]) == 0
    assert "model ok" in capsys.readouterr().out


def test_validate_reports_dangling_reference(tmp_path, capsys):
    path = tmp_path / "bad.model"
    path.write_text("component c1\n  kind = Controller\n"
                    "flow f1\n  src = c1\n  dst = sw9\n"
                    "  interface = southbound\n  protocol = OpenFlow\n")
    assert main(["validate", "--model", str(path)]) == 1
    assert "sw9" in capsys.readouterr().out


def test_validate_unreadable_path(tmp_path):
    assert main(["validate", "--model", str(tmp_path / "missing.model")]) == 2


# -- analyze --------------------------------------------------------------------

def test_analyze_writes_stage1(model_file, out_dir, capsys):
    _analyze(model_file, out_dir)
    artifact = _read_json(os.path.join(out_dir, "stage1.json"))
    assert artifact["schema_version"] == 1
    assert len(artifact["candidates"]) == 90
    assert os.path.exists(os.path.join(out_dir, "model.txt"))


def test_analyze_stride_model_covers_all_categories(tmp_path, out_dir, capsys):
    path = tmp_path / "stride.model"
    path.write_text(render_model(reference_stride_model()))
    _analyze(str(path), out_dir)
    artifact = _read_json(os.path.join(out_dir, "stage1.json"))
    categories = {c["category"] for c in artifact["candidates"]}
    assert categories == {"Spoofing", "Tampering", "Repudiation",
                          "InformationDisclosure", "DenialOfService",
                          "ElevationOfPrivilege"}


def test_analyze_testbed_has_no_northbound_findings(model_file, out_dir):
    _analyze(model_file, out_dir)
    artifact = _read_json(os.path.join(out_dir, "stage1.json"))
    assert not any(c["subject_class"] == "northbound"
                   for c in artifact["candidates"])


def test_analyze_echoes_rejections_for_audit(model_file, out_dir):
    _analyze(model_file, out_dir, "--reject", "host-spoofing,host-denialofservice")
    artifact = _read_json(os.path.join(out_dir, "stage1.json"))
    assert artifact["rejected_rule_ids"] == ["host-denialofservice", "host-spoofing"]
    assert artifact["rejected_count"] == 18
    assert not any(c["rule_id"] == "host-spoofing" for c in artifact["candidates"])


def test_analyze_invalid_model_exits_1(tmp_path, out_dir):
    path = tmp_path / "bad.model"
    path.write_text("component h1\n  kind = Host\n")  # no controller
    assert main(["analyze", "--model", str(path), "--out", str(out_dir)]) == 1


# -- rank -----------------------------------------------------------------------

def test_rank_requires_stage1(out_dir):
    assert main(["rank", "--out", out_dir]) == 2


def test_rank_with_no_candidates_reproduces_full_table(model_file, out_dir, capsys):
    all_rules = ",".join(r.id for r in default_rules())
    _analyze(model_file, out_dir, "--reject", all_rules)
    capsys.readouterr()
    _rank(out_dir)
    out = capsys.readouterr().out
    artifact = _read_json(os.path.join(out_dir, "stage2.json"))
    assert [r["id"] for r in artifact["records"]] == [
        "TC1", "TC2", "TC3", "TC4", "TC5", "TC6", "TC7", "TC8", "TC9", "TC10",
        "TC11", "TC12", "TC13", "TC14"]
    assert [r["rank"] for r in artifact["records"]] == [
        1, 1, 2, 3, 4, 4, 5, 5, 5, 5, 6, 6, 7, 7]
    assert "| 1 | TC1 |" in out


def test_rank_on_testbed_has_tc4_not_tc14(model_file, out_dir):
    _analyze(model_file, out_dir)
    _rank(out_dir)
    ids = [r["id"] for r in _read_json(os.path.join(out_dir, "stage2.json"))["records"]]
    assert "TC4" in ids and "TC14" not in ids


def test_rank_flags_vector_mismatch(model_file, out_dir, tmp_path, capsys):
    _analyze(model_file, out_dir)
    vectors = tmp_path / "vectors.txt"
    vectors.write_text("vector TC4\n"
                       "  cvss = CVSS:3.1/AV:N/AC:L/PR:N/UI:N/S:U/C:H/I:H/A:H\n")
    _rank(out_dir, "--vectors", str(vectors))
    err = capsys.readouterr().err
    assert "differ from stored" in err
    artifact = _read_json(os.path.join(out_dir, "stage2.json"))
    assert artifact["vector_mismatches"][0]["tc"] == "TC4"
    assert artifact["vector_mismatches"][0]["supplied_base"] == 9.8


def test_rank_ignores_vector_for_absent_category(model_file, out_dir, tmp_path, capsys):
    _analyze(model_file, out_dir)
    vectors = tmp_path / "vectors.txt"
    vectors.write_text("vector TC14\n"
                       "  cvss = CVSS:3.1/AV:N/AC:L/PR:N/UI:N/S:U/C:H/I:H/A:H\n")
    _rank(out_dir, "--vectors", str(vectors))
    assert "ignored" in capsys.readouterr().err


# -- simulate ---------------------------------------------------------------------

def _write_scenario(tmp_path, text):
    path = tmp_path / "attack.scenario"
    path.write_text(text)
    return str(path)


def test_simulate_requires_stage2(model_file, out_dir, tmp_path):
    _analyze(model_file, out_dir)
    scenario = _write_scenario(tmp_path, "scenario s\n  type = syn_flood\n  target = c1\n")
    assert main(["simulate", "--out", out_dir, "--scenario", scenario]) == 2


def test_simulate_flood_timeline(model_file, out_dir, tmp_path, capsys):
    _analyze(model_file, out_dir)
    _rank(out_dir)
    scenario = _write_scenario(tmp_path, "scenario s\n  type = syn_flood\n  target = c1\n")
    capsys.readouterr()
    assert main(["simulate", "--out", out_dir, "--scenario", scenario]) == 0
    out = capsys.readouterr().out
    assert "t=     8.0s  controller-saturated" in out
    assert "consistent" in out
    artifact = _read_json(os.path.join(out_dir, "stage3.json"))
    assert artifact["results"][0]["outcome"]["time_to_disruption"] == 8.0


def test_simulate_eavesdrop_on_encrypted_flow(tmp_path, out_dir, capsys):
    model = reference_testbed()
    flows = tuple(dataclasses.replace(f, encrypted=True) if f.id == "f-mgmt-telnet"
                  else f for f in model.flows)
    path = tmp_path / "hardened.model"
    path.write_text(render_model(dataclasses.replace(model, flows=flows)))
    _analyze(str(path), out_dir)
    _rank(out_dir)
    scenario = _write_scenario(
        tmp_path, "scenario s\n  type = eavesdrop\n  flow = f-mgmt-telnet\n")
    capsys.readouterr()
    assert main(["simulate", "--out", out_dir, "--scenario", scenario]) == 0
    assert "no payloads captured" in capsys.readouterr().out


def test_simulate_dictionary_failure_still_exits_0(model_file, out_dir, tmp_path, capsys):
    _analyze(model_file, out_dir)
    _rank(out_dir)
    scenario = _write_scenario(
        tmp_path,
        "scenario s\n  type = dictionary\n  service = switch-mgmt\n"
        "  wordlist_size = 500\n  rate = 100\n")
    assert main(["simulate", "--out", out_dir, "--scenario", scenario]) == 0
    artifact = _read_json(os.path.join(out_dir, "stage3.json"))
    assert artifact["results"][0]["outcome"]["success"] is False
    assert artifact["results"][0]["verification"]["consistent"] is False


# -- map and report ----------------------------------------------------------------

def test_map_writes_dot_with_three_roots(model_file, out_dir):
    _analyze(model_file, out_dir)
    _rank(out_dir)
    assert main(["map", "--out", out_dir]) == 0
    dot = open(os.path.join(out_dir, "map.dot"), encoding="utf-8").read()
    assert dot.count("shape=circle") == 3
    stage4 = _read_json(os.path.join(out_dir, "stage4.json"))
    assert stage4["root_count"] == 3
    assert all(row["covered"] for row in stage4["coverage"])


def test_map_records_format(model_file, out_dir):
    _analyze(model_file, out_dir)
    _rank(out_dir)
    assert main(["map", "--out", out_dir, "--format", "records"]) == 0
    records = _read_json(os.path.join(out_dir, "map-records.json"))
    assert records["schema_version"] == 1
    assert len(records["roots"]) == 3


def test_map_requires_both_predecessors(model_file, out_dir):
    _analyze(model_file, out_dir)
    assert main(["map", "--out", out_dir]) == 2


def test_report_marks_missing_stages(model_file, out_dir, capsys):
    _analyze(model_file, out_dir)
    capsys.readouterr()
    assert main(["report", "--out", out_dir]) == 0
    out = capsys.readouterr().out
    assert out.count("not executed") == 3
    assert "Stage 1 - threat and vulnerability analysis" in out


def test_report_without_any_stage_is_usage_error(out_dir):
    assert main(["report", "--out", out_dir]) == 2


def test_report_records_format(model_file, out_dir):
    _analyze(model_file, out_dir)
    assert main(["report", "--out", out_dir, "--format", "records"]) == 0
    payload = _read_json(os.path.join(out_dir, "report.json"))
    assert payload["schema_version"] == 1
    assert payload["artifacts"]["rank"] is None


# -- catalog overrides ---------------------------------------------------------

def _trimmed_catalog_file(tmp_path):
    from importlib import resources
    text = resources.files("sdnsec.data").joinpath("catalog.txt").read_text("utf-8")
    # drop the central solutions so T5/T7 lose their only coverage
    head = text.split("solution PbSA")[0]
    path = tmp_path / "catalog.txt"
    path.write_text(head)
    return str(path)


def test_map_honors_catalog_flag(model_file, out_dir, tmp_path):
    _analyze(model_file, out_dir)
    _rank(out_dir)
    catalog_file = _trimmed_catalog_file(tmp_path)
    assert main(["map", "--out", out_dir, "--catalog", catalog_file]) == 0
    stage4 = _read_json(os.path.join(out_dir, "stage4.json"))
    uncovered = [row["threat"] for row in stage4["coverage"] if not row["covered"]]
    assert uncovered == ["T5", "T7"]


def test_map_honors_catalog_env_var(model_file, out_dir, tmp_path, monkeypatch):
    _analyze(model_file, out_dir)
    _rank(out_dir)
    monkeypatch.setenv("SDNSEC_CATALOG", _trimmed_catalog_file(tmp_path))
    assert main(["map", "--out", out_dir]) == 0
    stage4 = _read_json(os.path.join(out_dir, "stage4.json"))
    assert sum(1 for row in stage4["coverage"] if not row["covered"]) == 2
