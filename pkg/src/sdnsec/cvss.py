"""CVSS v3.1 scoring: vector parsing, base/temporal/environmental scores,
and severity banding.

Scores are one-decimal floats in [0.0, 10.0]. All intermediate math runs
in double precision; the final rounding uses the scaled-integer rule, so
results match the standard's reference calculator bit for bit. Vectors
are immutable; every function here is pure.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, fields

from .errors import BadPrefix, DuplicateMetric, MissingBaseMetric, UnknownMetric

PREFIX = "CVSS:3.1/"

#: Metric names in the standard's order, with their admissible values.
METRIC_VALUES: dict[str, str] = {
    "AV": "NALP", "AC": "LH", "PR": "NLH", "UI": "NR", "S": "UC",
    "C": "HLN", "I": "HLN", "A": "HLN",
    "E": "XHFPU", "RL": "XUWTO", "RC": "XCRU",
    "CR": "XHML", "IR": "XHML", "AR": "XHML",
    "MAV": "XNALP", "MAC": "XLH", "MPR": "XNLH", "MUI": "XNR", "MS": "XUC",
    "MC": "XHLN", "MI": "XHLN", "MA": "XHLN",
}

BASE_METRICS = ("AV", "AC", "PR", "UI", "S", "C", "I", "A")
OPTIONAL_METRICS = tuple(m for m in METRIC_VALUES if m not in BASE_METRICS)
ENVIRONMENTAL_METRICS = ("CR", "IR", "AR", "MAV", "MAC", "MPR", "MUI",
                         "MS", "MC", "MI", "MA")

#: Numeric weights for every metric value. PR is special-cased: its weight
#: depends on whether the (effective) scope is Changed.
WEIGHTS: dict[str, dict[str, float]] = {
    "AV": {"N": 0.85, "A": 0.62, "L": 0.55, "P": 0.2},
    "AC": {"L": 0.77, "H": 0.44},
    "PR": {"N": 0.85, "L": 0.62, "H": 0.27},
    "PR_CHANGED": {"N": 0.85, "L": 0.68, "H": 0.5},
    "UI": {"N": 0.85, "R": 0.62},
    "C": {"H": 0.56, "L": 0.22, "N": 0.0},
    "E": {"X": 1.0, "H": 1.0, "F": 0.97, "P": 0.94, "U": 0.91},
    "RL": {"X": 1.0, "U": 1.0, "W": 0.97, "T": 0.96, "O": 0.95},
    "RC": {"X": 1.0, "C": 1.0, "R": 0.96, "U": 0.92},
    "CR": {"X": 1.0, "H": 1.5, "M": 1.0, "L": 0.5},
}
WEIGHTS["I"] = WEIGHTS["A"] = WEIGHTS["C"]
WEIGHTS["IR"] = WEIGHTS["AR"] = WEIGHTS["CR"]

_EXPLOITABILITY_COEFF = 8.22
_SCOPE_COEFF = 1.08

Score = float


class Severity(enum.Enum):
    NONE = "None"
    LOW = "Low"
    MEDIUM = "Medium"
    HIGH = "High"
    CRITICAL = "Critical"


@dataclass(frozen=True)
class CvssVector:
    """A parsed metric vector. Base metrics are required; the temporal and
    environmental groups default to X (not defined)."""

    AV: str
    AC: str
    PR: str
    UI: str
    S: str
    C: str
    I: str
    A: str
    E: str = "X"
    RL: str = "X"
    RC: str = "X"
    CR: str = "X"
    IR: str = "X"
    AR: str = "X"
    MAV: str = "X"
    MAC: str = "X"
    MPR: str = "X"
    MUI: str = "X"
    MS: str = "X"
    MC: str = "X"
    MI: str = "X"
    MA: str = "X"

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if value not in METRIC_VALUES[f.name]:
                raise UnknownMetric(f"{f.name}:{value}")

    def get(self, metric: str) -> str:
        return getattr(self, metric)

    def modified(self, metric: str) -> str:
        """Effective value of a base metric under the environmental group:
        the M-counterpart when defined, the base value otherwise."""
        override = getattr(self, "M" + metric)
        return self.get(metric) if override == "X" else override

    def has_environmental(self) -> bool:
        return any(self.get(m) != "X" for m in ENVIRONMENTAL_METRICS)

    def to_string(self) -> str:
        """Canonical serialization: prefix plus defined metrics in
        the standard's metric order (X-valued optional metrics are omitted)."""
        parts = [f"{m}:{self.get(m)}" for m in BASE_METRICS]
        parts += [f"{m}:{self.get(m)}" for m in OPTIONAL_METRICS if self.get(m) != "X"]
        return PREFIX + "/".join(parts)


def parse_vector(s: str) -> CvssVector:
    """Parse a ``CVSS:3.1/...`` vector string, order-insensitively."""
    if not s.startswith(PREFIX):
        raise BadPrefix(f"vector must start with {PREFIX!r}: {s!r}")
    found: dict[str, str] = {}
    for pair in s[len(PREFIX):].split("/"):
        key, sep, value = pair.partition(":")
        if not sep or key not in METRIC_VALUES:
            raise UnknownMetric(pair)
        if value not in METRIC_VALUES[key]:
            raise UnknownMetric(pair)
        if key in found:
            raise DuplicateMetric(key)
        found[key] = value
    for required in BASE_METRICS:
        if required not in found:
            raise MissingBaseMetric(required)
    return CvssVector(**found)


def roundup(x: float) -> Score:
    """Smallest one-decimal value >= x, via integer arithmetic on x scaled
    by 100,000 so float noise like 8.000001 still lands on 8.0."""
    scaled = math.floor(x * 100000 + 0.5)
    if scaled % 10000 == 0:
        return scaled / 100000
    return (scaled // 10000 + 1) / 10


def _pr_weight(pr: str, scope: str) -> float:
    table = WEIGHTS["PR_CHANGED"] if scope == "C" else WEIGHTS["PR"]
    return table[pr]


def _impact_subscore(v: CvssVector) -> float:
    iss = 1 - (1 - WEIGHTS["C"][v.C]) * (1 - WEIGHTS["I"][v.I]) * (1 - WEIGHTS["A"][v.A])
    if v.S == "U":
        return 6.42 * iss
    return 7.52 * (iss - 0.029) - 3.25 * (iss - 0.02) ** 15


def _exploitability(v: CvssVector) -> float:
    return (_EXPLOITABILITY_COEFF * WEIGHTS["AV"][v.AV] * WEIGHTS["AC"][v.AC]
            * _pr_weight(v.PR, v.S) * WEIGHTS["UI"][v.UI])


def base_score(v: CvssVector) -> Score:
    impact = _impact_subscore(v)
    if impact <= 0:
        return 0.0
    total = impact + _exploitability(v)
    if v.S == "U":
        return roundup(min(total, 10))
    return roundup(min(_SCOPE_COEFF * total, 10))


def _temporal_product(v: CvssVector) -> float:
    return WEIGHTS["E"][v.E] * WEIGHTS["RL"][v.RL] * WEIGHTS["RC"][v.RC]


def temporal_score(v: CvssVector) -> Score:
    return roundup(base_score(v) * _temporal_product(v))


def environmental_score(v: CvssVector) -> Score:
    """Score under the modified metrics and C/I/A requirements. Undefined
    modified metrics fall back to their base counterparts; undefined
    requirements weigh 1.0."""
    miss = min(
        1 - (1 - WEIGHTS["CR"][v.CR] * WEIGHTS["C"][v.modified("C")])
          * (1 - WEIGHTS["IR"][v.IR] * WEIGHTS["I"][v.modified("I")])
          * (1 - WEIGHTS["AR"][v.AR] * WEIGHTS["A"][v.modified("A")]),
        0.915,
    )
    scope = v.modified("S")
    if scope == "U":
        modified_impact = 6.42 * miss
    else:
        modified_impact = 7.52 * (miss - 0.029) - 3.25 * (miss * 0.9731 - 0.02) ** 13
    if modified_impact <= 0:
        return 0.0
    modified_exploitability = (
        _EXPLOITABILITY_COEFF
        * WEIGHTS["AV"][v.modified("AV")]
        * WEIGHTS["AC"][v.modified("AC")]
        * _pr_weight(v.modified("PR"), scope)
        * WEIGHTS["UI"][v.modified("UI")]
    )
    total = modified_impact + modified_exploitability
    if scope == "U":
        inner = roundup(min(total, 10))
    else:
        inner = roundup(min(_SCOPE_COEFF * total, 10))
    return roundup(inner * _temporal_product(v))


def overall_score(v: CvssVector) -> Score:
    """The score a deployment should act on: environmental when any
    environmental metric is defined, temporal otherwise."""
    if v.has_environmental():
        return environmental_score(v)
    return temporal_score(v)


def severity(s: Score) -> Severity:
    """Band a one-decimal score: 0.0 None, 0.1-3.9 Low, 4.0-6.9 Medium,
    7.0-8.9 High, 9.0-10.0 Critical."""
    tenths = int(round(s * 10))
    if not 0 <= tenths <= 100:
        raise ValueError(f"score out of range: {s!r}")
    if tenths == 0:
        return Severity.NONE
    if tenths <= 39:
        return Severity.LOW
    if tenths <= 69:
        return Severity.MEDIUM
    if tenths <= 89:
        return Severity.HIGH
    return Severity.CRITICAL
