"""Risk ranking: grouping raw findings into threat categories, scoring
them, and ordering them by severity.

Fourteen built-in threat-category records ship with base and overall
scores as data; the records' severity always derives from the base score
(the overall score reflects deployment context and never changes the
band). Ranking is dense: equal base scores share a rank, and the next
distinct score takes the following rank.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field, replace

from . import cvss
from .catalog import ThreatCatalog
from .cvss import CvssVector, Score, Severity
from .errors import ModelSyntaxError, UnmappedCandidate
from .modelfile import check_keys, read_sections
from .stride import CandidateThreat, StrideCategory
from .topology import ComponentKind, Interface, SdnModel


class RootThreat(enum.Enum):
    UNAUTHORIZED_ACCESS = "UnauthorizedAccess"
    INFORMATION_DISCLOSURE = "InformationDisclosure"
    DENIAL_OF_SERVICE = "DenialOfService"
    HUMAN_ERRORS = "HumanErrors"

    @property
    def unpredictable(self) -> bool:
        """Roots whose severity cannot be scored; they are tracked but kept
        out of the ranked assessment."""
        return self is RootThreat.HUMAN_ERRORS


class EnvironmentalEffect(enum.Enum):
    GREATER_THAN_ASSUMED = "GreaterThanAssumed"
    LESS_THAN_ASSUMED = "LessThanAssumed"
    AS_ASSUMED = "AsAssumed"


@dataclass(frozen=True)
class ThreatCategoryRecord:
    id: str
    name: str
    base: Score
    overall: Score
    severity: Severity
    root: RootThreat
    rank: int = 0
    vector: CvssVector | None = None
    threats: tuple[str, ...] = ()  # linked knowledge-base threat ids
    members: frozenset[str] = frozenset()  # candidate ids grouped here

    @property
    def number(self) -> int:
        return int(self.id[2:])


@dataclass(frozen=True)
class ExcludedRoot:
    root: RootThreat
    reason: str


@dataclass(frozen=True)
class ExcludedCandidate:
    candidate: CandidateThreat
    reason: str


@dataclass(frozen=True)
class RankedAssessment:
    records: tuple[ThreatCategoryRecord, ...]  # rank-ordered
    excluded: tuple[ExcludedRoot, ...] = ()

    def record(self, tc_id: str) -> ThreatCategoryRecord | None:
        for r in self.records:
            if r.id == tc_id:
                return r
        return None


# ---------------------------------------------------------------------------
# the built-in category table
# ---------------------------------------------------------------------------

_UA = RootThreat.UNAUTHORIZED_ACCESS
_ID = RootThreat.INFORMATION_DISCLOSURE
_DOS = RootThreat.DENIAL_OF_SERVICE

# id, name, base, overall, root, linked threats
_BUILTIN = [
    ("TC1", "Unauthorized SDN application access with CSP user permissions",
     9.0, 7.9, _UA, ("T9", "T15")),
    ("TC2", "Unauthorized SDN controller access",
     9.0, 7.9, _UA, ("T2", "T15")),
    ("TC3", "Man-in-the-middle",
     8.9, 7.9, _ID, ("T5", "T6", "T7", "T10")),
    ("TC4", "DoS - SDN controller in a single controller setup",
     6.8, 7.7, _DOS, ("T12", "T13")),
    ("TC5", "Unauthorized SDN application access with tenant user permissions",
     6.5, 5.6, _UA, ("T9",)),
    ("TC6", "Unauthorized OpenFlow switch access",
     6.5, 4.6, _UA, ("T2", "T4")),
    ("TC7", "Information disclosure of all OpenFlow connections",
     5.9, 6.7, _ID, ("T6", "T10")),
    ("TC8", "Information disclosure of the northbound interface",
     5.9, 6.7, _ID, ("T6", "T10")),
    ("TC9", "Information disclosure of the BGP connection between controllers",
     5.9, 6.7, _ID, ("T6",)),
    ("TC10", "Information disclosure of data traffic",
     5.9, 6.7, _ID, ("T6", "T8")),
    ("TC11", "DoS - OpenFlow switch",
     4.0, 2.7, _DOS, ("T12",)),
    ("TC12", "DoS - SDN application",
     4.0, 3.5, _DOS, ("T12", "T18")),
    ("TC13", "Information disclosure of a single OpenFlow connection",
     3.7, 2.6, _ID, ("T6",)),
    ("TC14", "DoS - SDN controller in a multiple controller setup",
     3.7, 2.6, _DOS, ("T12",)),
]


def builtin_threat_categories() -> list[ThreatCategoryRecord]:
    """The 14 shipped category records, id-ordered, ranks assigned.

    Base and overall scores are stored data: the overall values encode
    environmental assumptions whose underlying vectors are not published,
    so they cannot be recomputed here. Severity is derived from base.
    """
    records = [
        ThreatCategoryRecord(
            id=tc_id, name=name, base=base, overall=overall,
            severity=cvss.severity(base), root=root, threats=threats,
        )
        for tc_id, name, base, overall, root, threats in _BUILTIN
    ]
    ranked = rank(records).records
    return sorted(ranked, key=lambda r: r.number)


def rank(records: list[ThreatCategoryRecord]) -> RankedAssessment:
    """Order by base score descending with dense ranks; ties share a rank
    and are listed in ascending id order."""
    ordered = sorted(records, key=lambda r: (-round(r.base * 10), r.number))
    ranked: list[ThreatCategoryRecord] = []
    current_rank = 0
    previous_base: int | None = None
    for record in ordered:
        tenths = round(record.base * 10)
        if tenths != previous_base:
            current_rank += 1
            previous_base = tenths
        ranked.append(replace(record, rank=current_rank))
    return RankedAssessment(records=tuple(ranked))


def environmental_effect(r: ThreatCategoryRecord) -> EnvironmentalEffect:
    """Whether deployment context amplifies or dampens the category's
    assumed impact: overall above base means the environment is hit harder
    than the generic assessment assumed."""
    base, overall = round(r.base * 10), round(r.overall * 10)
    if overall > base:
        return EnvironmentalEffect.GREATER_THAN_ASSUMED
    if overall < base:
        return EnvironmentalEffect.LESS_THAN_ASSUMED
    return EnvironmentalEffect.AS_ASSUMED


def exclude_unpredictable(
    roots: list[RootThreat],
) -> tuple[list[RootThreat], list[ExcludedRoot]]:
    """Partition root threats into scorable ones and those whose severity
    is inherently unpredictable (ships with one: human errors)."""
    scored: list[RootThreat] = []
    excluded: list[ExcludedRoot] = []
    for root in roots:
        if root.unpredictable:
            excluded.append(ExcludedRoot(
                root, "severity is unpredictable; impact can be of any kind, "
                      "so scoring tools give no reliable result"))
        else:
            scored.append(root)
    return scored, excluded


# ---------------------------------------------------------------------------
# grouping candidates into categories
# ---------------------------------------------------------------------------

class Scope(enum.Enum):
    ANY = "any"
    SINGLE = "single"  # one affected element / single-controller deployment
    ALL = "all"        # every same-interface flow affected
    MULTI = "multi"    # multi-controller deployment


EXCLUDED = "excluded"

_SUBJECT_CLASSES = {k.value for k in ComponentKind} | {i.value for i in Interface}


@dataclass(frozen=True)
class GroupingEntry:
    subject_class: str  # component kind name or flow interface name
    category: StrideCategory
    scope: Scope
    target: str  # TC id, or EXCLUDED
    reason: str = ""


@dataclass(frozen=True)
class GroupingTable:
    """Declarative candidate-to-category mapping keyed on (subject class,
    category, scope). Bind a model before grouping: the model supplies the
    controller count and per-interface flow totals that the single/multi
    and single/all scope qualifiers depend on."""

    entries: tuple[GroupingEntry, ...]
    controller_count: int = 1
    flow_totals: dict[str, int] = field(default_factory=dict)

    def with_model(self, m: SdnModel) -> "GroupingTable":
        totals: dict[str, int] = {}
        for f in m.flows:
            totals[f.interface.value] = totals.get(f.interface.value, 0) + 1
        return replace(
            self,
            controller_count=len(m.components_of_kind(ComponentKind.CONTROLLER)),
            flow_totals=totals,
        )

    def lookup(self, subject_class: str, category: StrideCategory,
               scope: Scope) -> GroupingEntry:
        fallback = None
        for entry in self.entries:
            if entry.subject_class != subject_class or entry.category is not category:
                continue
            if entry.scope is scope:
                return entry
            if entry.scope is Scope.ANY:
                fallback = entry
        if fallback is not None:
            return fallback
        raise UnmappedCandidate(subject_class, category.word)


def _scope_of(candidate: CandidateThreat, table: GroupingTable,
              affected: dict[tuple[str, StrideCategory], int]) -> Scope:
    cls = candidate.subject_class
    if cls == ComponentKind.CONTROLLER.value or cls in (
            Interface.SOUTHBOUND.value, Interface.EASTWEST.value):
        if candidate.category is StrideCategory.DENIAL_OF_SERVICE:
            return Scope.SINGLE if table.controller_count <= 1 else Scope.MULTI
    if cls in {i.value for i in Interface}:
        total = table.flow_totals.get(cls, 0)
        hit = affected.get((cls, candidate.category), 0)
        return Scope.ALL if total and hit == total else Scope.SINGLE
    return Scope.ANY


@dataclass(frozen=True)
class GroupingResult:
    records: tuple[ThreatCategoryRecord, ...]
    excluded: tuple[ExcludedCandidate, ...]


def group_into_categories(candidates: list[CandidateThreat],
                          catalog: ThreatCatalog,
                          mapping: GroupingTable) -> GroupingResult:
    """Assign every candidate to exactly one threat category or to the
    excluded list; categories nothing mapped to are omitted. Raises
    UnmappedCandidate when the table has a hole for some candidate."""
    del catalog  # categories link catalog threats via the builtin table
    affected: dict[tuple[str, StrideCategory], int] = {}
    for c in candidates:
        key = (c.subject_class, c.category)
        affected[key] = affected.get(key, 0) + 1

    members: dict[str, set[str]] = {}
    excluded: list[ExcludedCandidate] = []
    for c in candidates:
        scope = _scope_of(c, mapping, affected)
        entry = mapping.lookup(c.subject_class, c.category, scope)
        if entry.target == EXCLUDED:
            excluded.append(ExcludedCandidate(c, entry.reason))
        else:
            members.setdefault(entry.target, set()).add(c.id)

    records = [
        replace(record, members=frozenset(members[record.id]))
        for record in builtin_threat_categories()
        if record.id in members
    ]
    return GroupingResult(tuple(records), tuple(excluded))


# ---------------------------------------------------------------------------
# the default grouping table
# ---------------------------------------------------------------------------

_S = StrideCategory.SPOOFING
_T = StrideCategory.TAMPERING
_R = StrideCategory.REPUDIATION
_I = StrideCategory.INFORMATION_DISCLOSURE
_D = StrideCategory.DENIAL_OF_SERVICE
_E = StrideCategory.ELEVATION_OF_PRIVILEGE

_NO_REPUDIATION_TC = ("no scored category covers repudiation; address it "
                      "with audit logging controls")
_HOST_DOS = "outage of one tenant VM stays below the scored impact threshold"

_DEFAULT_GROUPING: list[tuple[str, StrideCategory, Scope, str, str]] = [
    # component kinds
    ("Application", _S, Scope.ANY, "TC5", ""),
    ("Application", _T, Scope.ANY, "TC1", ""),
    ("Application", _R, Scope.ANY, EXCLUDED, _NO_REPUDIATION_TC),
    ("Application", _I, Scope.ANY, "TC8", ""),
    ("Application", _D, Scope.ANY, "TC12", ""),
    ("Application", _E, Scope.ANY, "TC1", ""),
    ("Controller", _S, Scope.ANY, "TC2", ""),
    ("Controller", _T, Scope.ANY, "TC2", ""),
    ("Controller", _R, Scope.ANY, EXCLUDED, _NO_REPUDIATION_TC),
    ("Controller", _I, Scope.ANY, "TC7", ""),
    ("Controller", _D, Scope.SINGLE, "TC4", ""),
    ("Controller", _D, Scope.MULTI, "TC14", ""),
    ("Controller", _E, Scope.ANY, "TC2", ""),
    ("ForwardingDevice", _S, Scope.ANY, "TC6", ""),
    ("ForwardingDevice", _T, Scope.ANY, "TC6", ""),
    ("ForwardingDevice", _I, Scope.ANY, "TC13", ""),
    ("ForwardingDevice", _D, Scope.ANY, "TC11", ""),
    ("ForwardingDevice", _E, Scope.ANY, "TC6", ""),
    ("Host", _S, Scope.ANY, "TC3", ""),
    ("Host", _I, Scope.ANY, "TC10", ""),
    ("Host", _D, Scope.ANY, EXCLUDED, _HOST_DOS),
    # flow interfaces
    ("northbound", _S, Scope.ANY, "TC3", ""),
    ("northbound", _T, Scope.ANY, "TC3", ""),
    ("northbound", _I, Scope.ANY, "TC8", ""),
    ("northbound", _D, Scope.ANY, "TC12", ""),
    ("southbound", _S, Scope.ANY, "TC3", ""),
    ("southbound", _T, Scope.ANY, "TC3", ""),
    ("southbound", _I, Scope.ALL, "TC7", ""),
    ("southbound", _I, Scope.SINGLE, "TC13", ""),
    ("southbound", _D, Scope.SINGLE, "TC4", ""),
    ("southbound", _D, Scope.MULTI, "TC14", ""),
    ("eastwest", _S, Scope.ANY, "TC3", ""),
    ("eastwest", _T, Scope.ANY, "TC3", ""),
    ("eastwest", _I, Scope.ANY, "TC9", ""),
    ("eastwest", _D, Scope.SINGLE, "TC4", ""),
    ("eastwest", _D, Scope.MULTI, "TC14", ""),
    ("dataplane", _S, Scope.ANY, "TC3", ""),
    ("dataplane", _T, Scope.ANY, "TC3", ""),
    ("dataplane", _I, Scope.ANY, "TC10", ""),
    ("dataplane", _D, Scope.ANY, "TC11", ""),
    ("management", _S, Scope.ANY, "TC3", ""),
    ("management", _T, Scope.ANY, "TC3", ""),
    ("management", _I, Scope.ANY, "TC10", ""),
    ("management", _D, Scope.ANY, "TC11", ""),
]


def default_grouping_table() -> GroupingTable:
    return GroupingTable(tuple(
        GroupingEntry(cls, category, scope, target, reason)
        for cls, category, scope, target, reason in _DEFAULT_GROUPING
    ))


_GROUP_KEYS = {"subject", "category", "scope", "tc", "reason"}
_CATEGORY_NAMES = {c.word: c for c in StrideCategory}
_CATEGORY_NAMES.update({c.value: c for c in StrideCategory})
_TC_RE = re.compile(r"^TC\d+$")


def load_grouping_table(text: str) -> GroupingTable:
    """Read ``group`` sections: subject (kind or interface), category,
    optional scope (any/single/all/multi), and a tc target or
    ``tc = excluded`` with a reason."""
    entries: list[GroupingEntry] = []
    for section in read_sections(text, {"group"}):
        check_keys(section, _GROUP_KEYS)
        subject = section.require("subject")
        if subject not in _SUBJECT_CLASSES:
            raise ModelSyntaxError(f"unknown subject class {subject!r}", section.line)
        category_name = section.require("category")
        if category_name not in _CATEGORY_NAMES:
            raise ModelSyntaxError(f"unknown category {category_name!r}", section.line)
        scope_raw = section.get("scope", Scope.ANY.value)
        try:
            scope = Scope(scope_raw)
        except ValueError:
            raise ModelSyntaxError(f"unknown scope {scope_raw!r}", section.line)
        target = section.require("tc")
        if target != EXCLUDED and not _TC_RE.match(target):
            raise ModelSyntaxError(f"tc must be TC<n> or 'excluded', got {target!r}",
                                   section.line)
        entries.append(GroupingEntry(subject, _CATEGORY_NAMES[category_name],
                                     scope, target, section.get("reason", "")))
    return GroupingTable(tuple(entries))
