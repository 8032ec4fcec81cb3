"""Command-line front end driving the four-stage evaluation pipeline.

Stages persist their outputs as files in an artifact directory, so they
can run in one session or as separate CI steps:

    sdnsec validate --model lab.model
    sdnsec analyze  --model lab.model --out run/
    sdnsec rank     --out run/
    sdnsec simulate --scenario flood.scenario --out run/
    sdnsec map      --out run/ --format dot
    sdnsec report   --out run/

Exit codes: 0 success, 1 validation or consistency findings, 2 usage or
I/O errors (including invoking a stage before its predecessor has run).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import warnings
from datetime import datetime, timezone

from . import cvss, report
from .catalog import ThreatCatalog, coverage_report, load_catalog
from .correlation import build_map, export_dot, to_records
from .errors import SdnSecError
from .modelfile import check_keys, read_sections
from .ranking import (RankedAssessment, RootThreat, builtin_threat_categories,
                      default_grouping_table, environmental_effect,
                      exclude_unpredictable, group_into_categories,
                      load_grouping_table, rank)
from .report import render_ranking_table, render_timeline
from .simulation import (SCENARIO_CATEGORY, make_testbed, parse_scenario,
                         reconfigure_vpls, run_dictionary_attack, run_eavesdrop,
                         run_syn_flood, verify_impact, Dictionary, Eavesdrop, SynFlood)
from .stride import (CandidateThreat, StrideCategory, analyze, default_rules,
                     filter_candidates, load_rules)
from .topology import SdnModel, parse_model, render_model, validate_model

CATALOG_ENV = "SDNSEC_CATALOG"

_RUN_FILE = "run.json"
_MODEL_FILE = "model.txt"
_STAGE_FILES = {
    "analyze": "stage1.json",
    "rank": "stage2.json",
    "simulate": "stage3.json",
    "map": "stage4.json",
}

_CATEGORY_BY_WORD = {c.word: c for c in StrideCategory}


class _Usage(Exception):
    """Raised for exit-code-2 conditions; message goes to stderr."""


def _read_text(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise _Usage(f"cannot read {path}: {exc.strerror}") from None


def _write_text(path: str, text: str) -> None:
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise _Usage(f"cannot write {path}: {exc.strerror}") from None


def _write_json(path: str, obj: object) -> None:
    _write_text(path, json.dumps(obj, indent=2) + "\n")


def _load_json(path: str) -> dict:
    return json.loads(_read_text(path))


def _artifact_path(out_dir: str, stage: str) -> str:
    return os.path.join(out_dir, _STAGE_FILES[stage])


def _require_stage(out_dir: str, stage: str) -> dict:
    path = _artifact_path(out_dir, stage)
    if not os.path.exists(path):
        raise _Usage(f"stage '{stage}' has not run yet ({path} missing); "
                     "stages feed each other in order: "
                     "analyze, rank, simulate, map, report")
    return _load_json(path)


def _update_run(out_dir: str, model_name: str | None, stage: str) -> None:
    path = os.path.join(out_dir, _RUN_FILE)
    if os.path.exists(path):
        run = _load_json(path)
    else:
        run = {"schema_version": 1, "model": model_name, "stages": {}}
    if model_name is not None:
        run["model"] = model_name
    run["stages"][stage] = _STAGE_FILES[stage]
    _write_json(path, run)


def _load_model_file(path: str) -> SdnModel:
    return parse_model(_read_text(path))


def _pipeline_model(out_dir: str) -> SdnModel:
    path = os.path.join(out_dir, _MODEL_FILE)
    if not os.path.exists(path):
        raise _Usage(f"{path} missing; run 'analyze' first")
    return parse_model(_read_text(path))


def _catalog_from(args) -> ThreatCatalog:
    path = args.catalog or os.environ.get(CATALOG_ENV)
    return load_catalog(path)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_validate(args) -> int:
    try:
        model = _load_model_file(args.model)
    except SdnSecError as exc:
        print(f"{type(exc).__name__}: {exc}")
        return 1
    violations = validate_model(model)
    for v in violations:
        print(str(v))
    if violations:
        return 1
    print(f"model ok: {len(model.components)} components, {len(model.flows)} flows, "
          f"{len(model.boundaries)} boundaries, {len(model.vpls)} vpls domains")
    return 0


def _catalog_overlay(model: SdnModel, catalog: ThreatCatalog) -> list[dict]:
    rows = []
    for threat in catalog.threats:
        subjects = [c.id for c in model.components
                    if c.layer.value in threat.layers]
        subjects += [f.id for f in model.flows
                     if f.interface.value in threat.layers]
        rows.append({"threat": threat.id, "name": threat.name,
                     "subjects": sorted(subjects)})
    return rows


def cmd_analyze(args) -> int:
    try:
        model = _load_model_file(args.model)
    except SdnSecError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    violations = validate_model(model)
    if violations:
        for v in violations:
            print(str(v), file=sys.stderr)
        return 1

    rules = default_rules()
    if args.rules:
        overrides = load_rules(_read_text(args.rules))
        by_id = {r.id: r for r in rules}
        by_id.update({r.id: r for r in overrides})
        rules = list(by_id.values())

    rejects = set()
    for chunk in args.reject or []:
        rejects.update(x.strip() for x in chunk.split(",") if x.strip())

    candidates = analyze(model, rules)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        kept = filter_candidates(candidates, rejects)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)

    catalog = _catalog_from(args)
    os.makedirs(args.out, exist_ok=True)
    _write_text(os.path.join(args.out, _MODEL_FILE), render_model(model))
    artifact = {
        "schema_version": 1,
        "model": os.path.basename(args.model),
        "candidates": [
            {"id": c.id, "subject": c.subject, "subject_class": c.subject_class,
             "category": c.category.word, "description": c.description,
             "rule_id": c.rule_id}
            for c in kept
        ],
        "rejected_rule_ids": sorted(rejects),
        "rejected_count": len(candidates) - len(kept),
        "catalog_overlay": _catalog_overlay(model, catalog),
    }
    _write_json(_artifact_path(args.out, "analyze"), artifact)
    _update_run(args.out, os.path.basename(args.model), "analyze")

    categories = sorted({c.category.word for c in kept})
    print(f"{len(kept)} candidate threats ({len(candidates) - len(kept)} rejected); "
          "categories: " + ", ".join(categories))
    return 0


def _candidates_from_artifact(stage1: dict) -> list[CandidateThreat]:
    return [
        CandidateThreat(
            id=row["id"], subject=row["subject"],
            subject_class=row["subject_class"],
            category=_CATEGORY_BY_WORD[row["category"]],
            description=row["description"], rule_id=row["rule_id"],
        )
        for row in stage1["candidates"]
    ]


_VECTOR_KEYS = {"cvss"}


def _load_vectors(path: str) -> dict[str, str]:
    vectors = {}
    for section in read_sections(_read_text(path), {"vector"}):
        check_keys(section, _VECTOR_KEYS)
        vectors[section.name] = section.require("cvss")
    return vectors


def cmd_rank(args) -> int:
    stage1 = _require_stage(args.out, "analyze")
    candidates = _candidates_from_artifact(stage1)

    excluded_candidates = []
    if not candidates:
        # nothing model-specific to group; assess the full category table
        records = builtin_threat_categories()
    else:
        model = _pipeline_model(args.out)
        table = (load_grouping_table(_read_text(args.grouping))
                 if args.grouping else default_grouping_table())
        result = group_into_categories(candidates, _catalog_from(args),
                                       table.with_model(model))
        records = list(result.records)
        excluded_candidates = list(result.excluded)

    assessment = rank(records)
    _, excluded_roots = exclude_unpredictable(list(RootThreat))

    mismatches = []
    vectors = _load_vectors(args.vectors) if args.vectors else {}
    vector_strings: dict[str, str] = {}
    for tc_id, vector_string in sorted(vectors.items()):
        parsed = cvss.parse_vector(vector_string)
        record = assessment.record(tc_id)
        if record is None:
            print(f"warning: vector for {tc_id} ignored (category not in assessment)",
                  file=sys.stderr)
            continue
        vector_strings[tc_id] = parsed.to_string()
        recomputed_base = cvss.base_score(parsed)
        recomputed_overall = cvss.overall_score(parsed)
        if (round(recomputed_base * 10) != round(record.base * 10)
                or round(recomputed_overall * 10) != round(record.overall * 10)):
            mismatches.append({
                "tc": tc_id,
                "supplied_base": recomputed_base,
                "stored_base": record.base,
                "supplied_overall": recomputed_overall,
                "stored_overall": record.overall,
            })

    record_rows = [
        {"id": r.id, "name": r.name, "base": r.base, "overall": r.overall,
         "severity": r.severity.value, "rank": r.rank, "root": r.root.value,
         "environmental_effect": environmental_effect(r).value,
         "threats": list(r.threats), "members": sorted(r.members),
         "vector": vector_strings.get(r.id)}
        for r in assessment.records
    ]
    artifact = {
        "schema_version": 1,
        "records": record_rows,
        "excluded_candidates": [
            {"candidate": e.candidate.id, "reason": e.reason}
            for e in sorted(excluded_candidates, key=lambda e: e.candidate.id)
        ],
        "excluded_roots": [
            {"root": e.root.value, "reason": e.reason} for e in excluded_roots
        ],
        "vector_mismatches": mismatches,
    }
    _write_json(_artifact_path(args.out, "rank"), artifact)
    _update_run(args.out, None, "rank")

    print(render_ranking_table(record_rows))
    for mm in mismatches:
        print(f"warning: {mm['tc']} supplied vector scores "
              f"{mm['supplied_base']:.1f}/{mm['supplied_overall']:.1f} differ from "
              f"stored {mm['stored_base']:.1f}/{mm['stored_overall']:.1f}",
              file=sys.stderr)
    return 0


def _record_for(tc_id: str):
    for record in builtin_threat_categories():
        if record.id == tc_id:
            return record
    raise _Usage(f"unknown threat category {tc_id}")


def cmd_simulate(args) -> int:
    _require_stage(args.out, "rank")
    model = _pipeline_model(args.out)
    spec = parse_scenario(_read_text(args.scenario))

    testbed = make_testbed(model)
    if isinstance(spec, Dictionary):
        result = run_dictionary_attack(testbed, spec)
    elif isinstance(spec, Eavesdrop):
        result = run_eavesdrop(testbed, spec)
    else:
        result = run_syn_flood(testbed, spec)
        if args.reconfigure:
            reconfigure_vpls(testbed)

    tc = _record_for(SCENARIO_CATEGORY[result.scenario])
    verification = verify_impact(result, tc)

    result_row = {
        "scenario": result.scenario,
        "events": [{"t": e.t, "kind": e.kind, "detail": e.detail}
                   for e in result.events],
        "outcome": result.outcome,
        "verification": {
            "tc_id": verification.tc_id,
            "scope": verification.scope,
            "consistent": verification.consistent,
            "notes": list(verification.notes),
        },
    }
    path = _artifact_path(args.out, "simulate")
    artifact = (_load_json(path) if os.path.exists(path)
                else {"schema_version": 1, "results": []})
    artifact["results"].append(result_row)
    _write_json(path, artifact)
    _update_run(args.out, None, "simulate")

    print(render_timeline(result_row))
    verdict = "consistent" if verification.consistent else "INCONSISTENT"
    print(f"verification against {verification.tc_id}: {verdict} "
          f"(scope: {verification.scope})")
    return 0


def cmd_map(args) -> int:
    _require_stage(args.out, "analyze")
    stage2 = _require_stage(args.out, "rank")
    catalog = _catalog_from(args)

    by_id = {r.id: r for r in builtin_threat_categories()}
    records = []
    for row in stage2["records"]:
        record = by_id.get(row["id"])
        if record is None:
            raise _Usage(f"stage 2 artifact names unknown category {row['id']}")
        records.append(record)
    assessment = rank(records) if records else RankedAssessment(records=())

    tree = build_map(catalog, assessment)
    if args.format == "dot":
        map_file = "map.dot"
        _write_text(os.path.join(args.out, map_file), export_dot(tree))
    else:
        map_file = "map-records.json"
        _write_json(os.path.join(args.out, map_file), to_records(tree))

    coverage = [{"threat": tid, "covered": covered}
                for tid, covered in coverage_report(catalog)]
    artifact = {
        "schema_version": 1,
        "map_file": map_file,
        "format": args.format,
        "node_count": len(tree.nodes),
        "root_count": len(tree.roots),
        "coverage": coverage,
    }
    _write_json(_artifact_path(args.out, "map"), artifact)
    _update_run(args.out, None, "map")

    uncovered = [row["threat"] for row in coverage if not row["covered"]]
    print(f"correlation map written to {os.path.join(args.out, map_file)} "
          f"({len(tree.nodes)} nodes)")
    print(f"coverage: {len(coverage) - len(uncovered)}/{len(coverage)} threats covered"
          + ("" if not uncovered else "; uncovered: " + ", ".join(uncovered)))
    return 0


def cmd_report(args) -> int:
    run_path = os.path.join(args.out, _RUN_FILE)
    if not os.path.exists(run_path):
        raise _Usage(f"no pipeline run found in {args.out}; run at least one stage")
    run = _load_json(run_path)
    artifacts = {}
    for stage in ("analyze", "rank", "simulate", "map"):
        path = _artifact_path(args.out, stage)
        artifacts[stage] = _load_json(path) if os.path.exists(path) else None

    timestamp = (datetime.now(timezone.utc).strftime("%Y-%m-%d %H:%M:%SZ")
                 if args.timestamp else None)
    if args.format == "records":
        payload = {"schema_version": 1, "run": run, "artifacts": artifacts}
        if timestamp:
            payload["generated"] = timestamp
        text = json.dumps(payload, indent=2) + "\n"
        out_file = os.path.join(args.out, "report.json")
    else:
        text = report.render_report(run, artifacts, timestamp)
        out_file = os.path.join(args.out, "report.md")
    _write_text(out_file, text)
    print(text, end="")
    return 0


# ---------------------------------------------------------------------------
# parser plumbing
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sdnsec",
        description="Four-stage SDN security evaluation: threat analysis, "
                    "risk ranking, attack simulation, mitigation mapping.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, model=False, out=True, catalog=False):
        if model:
            p.add_argument("--model", required=True, help="model file to evaluate")
        if out:
            p.add_argument("--out", default="sdnsec-out",
                           help="artifact directory (default: sdnsec-out)")
        if catalog:
            p.add_argument("--catalog",
                           help=f"catalog file (default: bundled, or ${CATALOG_ENV})")

    p = sub.add_parser("validate", help="check a model file against all invariants")
    p.add_argument("--model", required=True)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("analyze", help="stage 1: per-element threat analysis")
    add_common(p, model=True, catalog=True)
    p.add_argument("--rules", help="rule override file")
    p.add_argument("--reject", action="append", metavar="RULE_IDS",
                   help="comma-separated rule ids to reject (audited)")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("rank", help="stage 2: group, score, and rank categories")
    add_common(p, catalog=True)
    p.add_argument("--grouping", help="grouping table file")
    p.add_argument("--vectors", help="vector file for recomputing stored scores")
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("simulate", help="stage 3: run an attack scenario")
    add_common(p)
    p.add_argument("--scenario", required=True, help="scenario file")
    p.add_argument("--reconfigure", action="store_true",
                   help="reconfigure VPLS services after a flood scenario")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("map", help="stage 4: correlation map and coverage")
    add_common(p, catalog=True)
    p.add_argument("--format", choices=("dot", "records"), default="dot")
    p.set_defaults(func=cmd_map)

    p = sub.add_parser("report", help="render the consolidated report")
    add_common(p)
    p.add_argument("--format", choices=("markdown", "records"), default="markdown")
    p.add_argument("--timestamp", action="store_true",
                   help="include a generation timestamp (breaks reproducibility)")
    p.set_defaults(func=cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _Usage as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SdnSecError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
