"""Rendering of pipeline artifacts into human-readable reports.

Reports are reproducible: equal artifacts render to byte-identical
markdown. A generation timestamp is added only when explicitly requested.
"""

from __future__ import annotations

_SEVERITY_ORDER = ("Critical", "High", "Medium", "Low", "None")


def render_ranking_table(records: list[dict]) -> str:
    """Ranking table with one row per threat category, rank-ordered."""
    lines = [
        "| Rank | TC | Threat Category | Base Score | Overall Score | Severity |",
        "|------|----|-----------------|------------|---------------|----------|",
    ]
    for r in records:
        lines.append(
            f"| {r['rank']} | {r['id']} | {r['name']} | {r['base']:.1f} "
            f"| {r['overall']:.1f} | {r['severity']} |")
    return "\n".join(lines)


def render_timeline(result: dict) -> str:
    lines = [f"scenario: {result['scenario']}"]
    for event in result["events"]:
        lines.append(f"  t={event['t']:8.1f}s  {event['kind']}: {event['detail']}")
    return "\n".join(lines)


def _stage_header(title: str) -> list[str]:
    return [f"## {title}", ""]


def _not_executed(title: str) -> list[str]:
    return [f"## {title}", "", "not executed", ""]


def render_report(run: dict, artifacts: dict[str, dict | None],
                  timestamp: str | None = None) -> str:
    """Assemble the consolidated report from whatever stages have run.

    ``artifacts`` maps stage names (analyze, rank, simulate, map) to their
    loaded artifact dicts, or None for stages that have not executed.
    """
    out: list[str] = ["# SDN security evaluation report", ""]
    out.append(f"Model: {run.get('model', 'unknown')}")
    if timestamp:
        out.append(f"Generated: {timestamp}")
    out.append("")

    stage1 = artifacts.get("analyze")
    if stage1 is None:
        out += _not_executed("Stage 1 - threat and vulnerability analysis")
    else:
        out += _stage_header("Stage 1 - threat and vulnerability analysis")
        candidates = stage1["candidates"]
        by_category: dict[str, int] = {}
        for c in candidates:
            by_category[c["category"]] = by_category.get(c["category"], 0) + 1
        out.append(f"{len(candidates)} candidate threats over "
                   f"{len({c['subject'] for c in candidates})} elements.")
        out.append("")
        out.append("| STRIDE category | Findings |")
        out.append("|-----------------|----------|")
        for category in ("Spoofing", "Tampering", "Repudiation",
                         "InformationDisclosure", "DenialOfService",
                         "ElevationOfPrivilege"):
            out.append(f"| {category} | {by_category.get(category, 0)} |")
        out.append("")
        if stage1.get("rejected_rule_ids"):
            out.append("Rejected rule ids (audit): "
                       + ", ".join(stage1["rejected_rule_ids"])
                       + f" ({stage1.get('rejected_count', 0)} candidates dropped)")
            out.append("")
        overlay = [row for row in stage1.get("catalog_overlay", []) if row["subjects"]]
        out.append(f"Knowledge-base overlay: {len(overlay)} of "
                   f"{len(stage1.get('catalog_overlay', []))} catalog threats "
                   "apply to modeled elements.")
        for row in overlay:
            out.append(f"- {row['threat']} ({row['name']}): "
                       + ", ".join(row["subjects"]))
        out.append("")

    stage2 = artifacts.get("rank")
    if stage2 is None:
        out += _not_executed("Stage 2 - risk and impact analysis")
    else:
        out += _stage_header("Stage 2 - risk and impact analysis")
        out.append(render_ranking_table(stage2["records"]))
        out.append("")
        amplified = [r["id"] for r in stage2["records"]
                     if r["environmental_effect"] == "GreaterThanAssumed"]
        if amplified:
            out.append("Categories whose deployment impact exceeds the "
                       "generic assessment: " + ", ".join(amplified) + ".")
            out.append("")
        out.append("Overall scores are stored assessments of the deployment "
                   "context; supply vectors to recompute them.")
        if stage2.get("vector_mismatches"):
            out.append("")
            out.append("Vector mismatches:")
            for mm in stage2["vector_mismatches"]:
                out.append(f"- {mm['tc']}: supplied base {mm['supplied_base']:.1f} "
                           f"vs stored {mm['stored_base']:.1f}")
        if stage2.get("excluded_roots"):
            out.append("")
            for row in stage2["excluded_roots"]:
                out.append(f"Excluded from scoring: {row['root']} ({row['reason']})")
        out.append("")

    stage3 = artifacts.get("simulate")
    if stage3 is None:
        out += _not_executed("Stage 3 - attack simulation")
    else:
        out += _stage_header("Stage 3 - attack simulation")
        for result in stage3["results"]:
            out.append("```")
            out.append(render_timeline(result))
            out.append("```")
            verification = result.get("verification")
            if verification:
                verdict = "consistent" if verification["consistent"] else "INCONSISTENT"
                out.append(f"Verification against {verification['tc_id']}: {verdict} "
                           f"(observed scope: {verification['scope']}).")
                for note in verification["notes"]:
                    out.append(f"- {note}")
            out.append("")

    stage4 = artifacts.get("map")
    if stage4 is None:
        out += _not_executed("Stage 4 - threat and vulnerability mitigation")
    else:
        out += _stage_header("Stage 4 - threat and vulnerability mitigation")
        out.append(f"Correlation map: {stage4['map_file']} "
                   f"({stage4['node_count']} nodes, {stage4['root_count']} root threats).")
        out.append("")
        uncovered = [row["threat"] for row in stage4["coverage"] if not row["covered"]]
        covered_count = len(stage4["coverage"]) - len(uncovered)
        out.append(f"Mitigation coverage: {covered_count}/{len(stage4['coverage'])} "
                   "threats covered by a direct mitigation or central solution.")
        if uncovered:
            out.append("Uncovered threats: " + ", ".join(uncovered) + ".")
        out.append("")

    return "\n".join(out).rstrip() + "\n"
