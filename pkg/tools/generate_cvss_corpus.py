#!/usr/bin/env python3
"""Generate the frozen CVSS v3.1 scoring corpus used by the test suite.

This script is the oracle side of the dual-route check: it is a direct,
branch-for-branch transliteration of the published FIRST CVSS v3.1
reference calculator (the cvsscalc31.js listing, including the Appendix A
scaled-integer Roundup), kept deliberately separate from the production
module in src/. The production calculator is table-driven; this one
mirrors the reference's literal style so a bug would have to be made
twice, independently, to go unnoticed.

Usage:
    python3 tools/generate_cvss_corpus.py > tests/fixtures/cvss_corpus.json

The output is deterministic (seeded RNG). Regenerate only if the corpus
layout itself changes; the fixtures are committed.
"""

import json
import math
import random

AV = {"N": 0.85, "A": 0.62, "L": 0.55, "P": 0.2}
AC = {"L": 0.77, "H": 0.44}
PR_UNCHANGED = {"N": 0.85, "L": 0.62, "H": 0.27}
PR_CHANGED = {"N": 0.85, "L": 0.68, "H": 0.5}
UI = {"N": 0.85, "R": 0.62}
CIA = {"H": 0.56, "L": 0.22, "N": 0.0}
E = {"X": 1.0, "H": 1.0, "F": 0.97, "P": 0.94, "U": 0.91}
RL = {"X": 1.0, "U": 1.0, "W": 0.97, "T": 0.96, "O": 0.95}
RC = {"X": 1.0, "C": 1.0, "R": 0.96, "U": 0.92}
REQ = {"X": 1.0, "H": 1.5, "M": 1.0, "L": 0.5}

EXPLOITABILITY_COEFFICIENT = 8.22
SCOPE_COEFFICIENT = 1.08


def roundup(value):
    # Appendix A: scale by 10^5, round half away from zero, then ceil to
    # one decimal. JS Math.round is floor(x + 0.5) for positive x.
    int_input = math.floor(value * 100000 + 0.5)
    if int_input % 10000 == 0:
        return int_input / 100000.0
    return (math.floor(int_input / 10000) + 1) / 10.0


def base_score(m):
    iss = 1 - (1 - CIA[m["C"]]) * (1 - CIA[m["I"]]) * (1 - CIA[m["A"]])
    if m["S"] == "U":
        impact = 6.42 * iss
    else:
        impact = 7.52 * (iss - 0.029) - 3.25 * math.pow(iss - 0.02, 15)
    pr = PR_CHANGED[m["PR"]] if m["S"] == "C" else PR_UNCHANGED[m["PR"]]
    exploitability = EXPLOITABILITY_COEFFICIENT * AV[m["AV"]] * AC[m["AC"]] * pr * UI[m["UI"]]
    if impact <= 0:
        return 0.0
    if m["S"] == "U":
        return roundup(min(impact + exploitability, 10))
    return roundup(min(SCOPE_COEFFICIENT * (impact + exploitability), 10))


def temporal_score(m):
    return roundup(base_score(m) * E[m.get("E", "X")] * RL[m.get("RL", "X")] * RC[m.get("RC", "X")])


def _modified(m, name):
    value = m.get("M" + name, "X")
    if value == "X":
        return m[name]
    return value


def environmental_score(m):
    mc = CIA[_modified(m, "C")]
    mi = CIA[_modified(m, "I")]
    ma = CIA[_modified(m, "A")]
    cr = REQ[m.get("CR", "X")]
    ir = REQ[m.get("IR", "X")]
    ar = REQ[m.get("AR", "X")]
    miss = min(1 - (1 - cr * mc) * (1 - ir * mi) * (1 - ar * ma), 0.915)
    ms = _modified(m, "S")
    if ms == "U":
        modified_impact = 6.42 * miss
    else:
        modified_impact = 7.52 * (miss - 0.029) - 3.25 * math.pow(miss * 0.9731 - 0.02, 13)
    mpr_value = _modified(m, "PR")
    mpr = PR_CHANGED[mpr_value] if ms == "C" else PR_UNCHANGED[mpr_value]
    modified_exploitability = (
        EXPLOITABILITY_COEFFICIENT
        * AV[_modified(m, "AV")]
        * AC[_modified(m, "AC")]
        * mpr
        * UI[_modified(m, "UI")]
    )
    if modified_impact <= 0:
        return 0.0
    temporal_product = E[m.get("E", "X")] * RL[m.get("RL", "X")] * RC[m.get("RC", "X")]
    if ms == "U":
        return roundup(
            roundup(min(modified_impact + modified_exploitability, 10)) * temporal_product
        )
    return roundup(
        roundup(min(SCOPE_COEFFICIENT * (modified_impact + modified_exploitability), 10))
        * temporal_product
    )


BASE_ORDER = [("AV", "NALP"), ("AC", "LH"), ("PR", "NLH"), ("UI", "NR"),
              ("S", "UC"), ("C", "HLN"), ("I", "HLN"), ("A", "HLN")]
TEMPORAL_ORDER = [("E", "XHFPU"), ("RL", "XUWTO"), ("RC", "XCRU")]
ENV_ORDER = [("CR", "XHML"), ("IR", "XHML"), ("AR", "XHML"),
             ("MAV", "XNALP"), ("MAC", "XLH"), ("MPR", "XNLH"), ("MUI", "XNR"),
             ("MS", "XUC"), ("MC", "XHLN"), ("MI", "XHLN"), ("MA", "XHLN")]


def random_vector(rng, with_temporal, with_environmental):
    m = {key: rng.choice(values) for key, values in BASE_ORDER}
    if with_temporal:
        for key, values in TEMPORAL_ORDER:
            m[key] = rng.choice(values)
    if with_environmental:
        for key, values in ENV_ORDER:
            m[key] = rng.choice(values)
    return m


def vector_string(m):
    parts = ["CVSS:3.1"]
    for key, _ in BASE_ORDER + TEMPORAL_ORDER + ENV_ORDER:
        if key in m and m[key] != "X":
            parts.append(f"{key}:{m[key]}")
    return "/".join(parts)


def main():
    rng = random.Random(31337)
    entries = []
    # 30 base-only, 20 base+temporal, 40 fully populated vectors
    plan = [(False, False)] * 30 + [(True, False)] * 20 + [(True, True)] * 40
    for with_temporal, with_environmental in plan:
        m = random_vector(rng, with_temporal, with_environmental)
        entries.append({
            "vector": vector_string(m),
            "base": base_score(m),
            "temporal": temporal_score(m),
            "environmental": environmental_score(m),
        })
    print(json.dumps(entries, indent=2))


if __name__ == "__main__":
    main()
