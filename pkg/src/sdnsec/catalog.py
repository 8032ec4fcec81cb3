"""The threat knowledge base: 18 threats, their vulnerabilities and
mitigations, and three central solutions.

The catalog ships as a data asset (data/catalog.txt) in the same file
format as network models, so users can extend or replace it. The loader
enforces the structural rules: T1-T18 pair one-to-one with V1-V18 and
M1-M18, T1-T8 come from the MITRE corpus and T9-T18 from the OWASP one,
and every cross-reference resolves. A catalog is immutable once loaded.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from importlib import resources

from .errors import CatalogError, UnknownThreatId
from .modelfile import check_keys, parse_bool, parse_id_list, read_sections

LAYER_TOKENS = ("application", "control", "data",
                "northbound", "southbound", "eastwest")

#: Root-level threat effects used for category grouping and solution coverage.
ROOT_NAMES = ("UnauthorizedAccess", "InformationDisclosure",
              "DenialOfService", "HumanErrors")

_ID_RE = re.compile(r"^([TVM])(\d+)$")


class CatalogSource(enum.Enum):
    MITRE = "MITRE"
    OWASP = "OWASP"


@dataclass(frozen=True)
class Threat:
    id: str
    name: str
    source: CatalogSource
    bullets: tuple[str, ...]
    layers: frozenset[str]

    @property
    def number(self) -> int:
        return int(self.id[1:])


@dataclass(frozen=True)
class Vulnerability:
    id: str
    threat_id: str
    bullets: tuple[str, ...]
    no_easy_mapping: bool = False


@dataclass(frozen=True)
class Mitigation:
    id: str
    threat_id: str
    bullets: tuple[str, ...]
    applicable: bool = True
    note: str | None = None


@dataclass(frozen=True)
class CentralSolution:
    id: str
    name: str
    summary: str
    layers: frozenset[str]
    mitigated_threats: frozenset[str]
    mitigated_roots: frozenset[str]
    coverage_notes: tuple[str, ...]


@dataclass(frozen=True)
class ThreatCatalog:
    schema_version: int
    threats: tuple[Threat, ...]
    vulnerabilities: tuple[Vulnerability, ...]
    mitigations: tuple[Mitigation, ...]
    solutions: tuple[CentralSolution, ...]

    def threat(self, threat_id: str) -> Threat:
        for t in self.threats:
            if t.id == threat_id:
                return t
        raise UnknownThreatId(threat_id)

    def vulnerability_for(self, threat_id: str) -> Vulnerability:
        n = self.threat(threat_id).number
        return self.vulnerabilities[n - 1]

    def mitigation_for(self, threat_id: str) -> Mitigation:
        n = self.threat(threat_id).number
        return self.mitigations[n - 1]

    def solution(self, solution_id: str) -> CentralSolution | None:
        for s in self.solutions:
            if s.id == solution_id:
                return s
        return None


# ---------------------------------------------------------------------------
# loading
# ---------------------------------------------------------------------------

def _id_number(entity_id: str, want_kind: str, line: int) -> int:
    m = _ID_RE.match(entity_id)
    if not m or m.group(1) != want_kind:
        raise CatalogError(f"line {line}: bad id {entity_id!r}, expected {want_kind}<n>")
    return int(m.group(2))


def _parse_layers(raw: str | None, line: int) -> frozenset[str]:
    if raw is None:
        return frozenset(LAYER_TOKENS)
    layers = parse_id_list(raw)
    for layer in layers:
        if layer not in LAYER_TOKENS:
            raise CatalogError(f"line {line}: unknown layer {layer!r}")
    return frozenset(layers)


def parse_catalog(text: str) -> ThreatCatalog:
    sections = read_sections(
        text, {"catalog", "threat", "vulnerability", "mitigation", "solution"})

    schema_version = 1
    threats: dict[int, Threat] = {}
    vulnerabilities: dict[int, Vulnerability] = {}
    mitigations: dict[int, Mitigation] = {}
    solutions: list[CentralSolution] = []

    for section in sections:
        if section.kind == "catalog":
            check_keys(section, {"schema_version"})
            schema_version = int(section.require("schema_version"))
        elif section.kind == "threat":
            check_keys(section, {"name", "source", "layers", "bullet"})
            n = _id_number(section.name, "T", section.line)
            source_name = section.require("source")
            try:
                source = CatalogSource(source_name)
            except ValueError:
                raise CatalogError(f"line {section.line}: unknown source {source_name!r}")
            threats[n] = Threat(
                id=section.name,
                name=section.require("name"),
                source=source,
                bullets=tuple(section.values("bullet")),
                layers=_parse_layers(section.get("layers"), section.line),
            )
        elif section.kind == "vulnerability":
            check_keys(section, {"threat", "bullet", "no_easy_mapping"})
            n = _id_number(section.name, "V", section.line)
            flag_raw = section.get("no_easy_mapping")
            vulnerabilities[n] = Vulnerability(
                id=section.name,
                threat_id=section.require("threat"),
                bullets=tuple(section.values("bullet")),
                no_easy_mapping=parse_bool(flag_raw, section.line) if flag_raw else False,
            )
        elif section.kind == "mitigation":
            check_keys(section, {"threat", "bullet", "applicable", "note"})
            n = _id_number(section.name, "M", section.line)
            applicable_raw = section.get("applicable")
            mitigations[n] = Mitigation(
                id=section.name,
                threat_id=section.require("threat"),
                bullets=tuple(section.values("bullet")),
                applicable=parse_bool(applicable_raw, section.line) if applicable_raw else True,
                note=section.get("note"),
            )
        else:
            check_keys(section, {"name", "layers", "summary", "covers"})
            covered_threats: set[str] = set()
            covered_roots: set[str] = set()
            notes: list[str] = []
            for entry in section.values("covers"):
                target = entry.split(" - ", 1)[0].strip()
                notes.append(entry)
                if _ID_RE.match(target):
                    covered_threats.add(target)
                elif target in ROOT_NAMES:
                    covered_roots.add(target)
                else:
                    raise CatalogError(
                        f"solution {section.name}: covers target {target!r} is neither "
                        "a threat id nor a root threat")
            solutions.append(CentralSolution(
                id=section.name,
                name=section.require("name"),
                summary=section.require("summary"),
                layers=_parse_layers(section.get("layers"), section.line),
                mitigated_threats=frozenset(covered_threats),
                mitigated_roots=frozenset(covered_roots),
                coverage_notes=tuple(notes),
            ))

    catalog = ThreatCatalog(
        schema_version=schema_version,
        threats=tuple(threats[n] for n in sorted(threats)),
        vulnerabilities=tuple(vulnerabilities[n] for n in sorted(vulnerabilities)),
        mitigations=tuple(mitigations[n] for n in sorted(mitigations)),
        solutions=tuple(solutions),
    )
    _check_structure(catalog)
    return catalog


def _check_structure(c: ThreatCatalog) -> None:
    counts = (len(c.threats), len(c.vulnerabilities), len(c.mitigations))
    if len(set(counts)) != 1:
        raise CatalogError(f"threat/vulnerability/mitigation counts differ: {counts}")
    for i, t in enumerate(c.threats, start=1):
        if t.number != i:
            raise CatalogError(f"threat ids must be contiguous from T1; found {t.id} at {i}")
        if i <= 8 and t.source is not CatalogSource.MITRE:
            raise CatalogError(f"{t.id} must come from the MITRE corpus")
        if 9 <= i <= 18 and t.source is not CatalogSource.OWASP:
            raise CatalogError(f"{t.id} must come from the OWASP corpus")
    for v, m, t in zip(c.vulnerabilities, c.mitigations, c.threats):
        if v.threat_id != t.id:
            raise CatalogError(f"{v.id} must pair with {t.id}, not {v.threat_id}")
        if m.threat_id != t.id:
            raise CatalogError(f"{m.id} must pair with {t.id}, not {m.threat_id}")
    threat_ids = {t.id for t in c.threats}
    for s in c.solutions:
        unresolved = s.mitigated_threats - threat_ids
        if unresolved:
            raise CatalogError(f"solution {s.id} covers unknown threats: {sorted(unresolved)}")


def load_catalog(path: str | None = None) -> ThreatCatalog:
    """Load the bundled catalog, or the file at ``path`` when given."""
    if path is not None:
        with open(path, encoding="utf-8") as fh:
            return parse_catalog(fh.read())
    text = resources.files("sdnsec.data").joinpath("catalog.txt").read_text("utf-8")
    return parse_catalog(text)


# ---------------------------------------------------------------------------
# queries
# ---------------------------------------------------------------------------

def mitigations_for(threat_id: str, c: ThreatCatalog
                    ) -> tuple[Mitigation | None, list[CentralSolution]]:
    """The direct mitigation (when applicable) and every central solution
    covering the threat. Threats whose direct mitigation is marked not
    applicable rely on central solutions alone."""
    mitigation = c.mitigation_for(threat_id)  # raises UnknownThreatId
    direct = mitigation if mitigation.applicable else None
    central = [s for s in c.solutions if threat_id in s.mitigated_threats]
    return direct, central


def threats_by_source(source: CatalogSource, c: ThreatCatalog) -> list[Threat]:
    return [t for t in c.threats if t.source is source]


def coverage_report(c: ThreatCatalog) -> list[tuple[str, bool]]:
    """(threat id, covered) for every threat: covered means an applicable
    direct mitigation exists or at least one central solution applies."""
    report = []
    for t in c.threats:
        direct, central = mitigations_for(t.id, c)
        report.append((t.id, direct is not None or bool(central)))
    return report


def to_records(c: ThreatCatalog) -> dict:
    """Structured export of the whole catalog, schema-versioned."""
    return {
        "schema_version": c.schema_version,
        "threats": [
            {"id": t.id, "name": t.name, "source": t.source.value,
             "layers": sorted(t.layers), "bullets": list(t.bullets)}
            for t in c.threats
        ],
        "vulnerabilities": [
            {"id": v.id, "threat": v.threat_id, "bullets": list(v.bullets),
             "no_easy_mapping": v.no_easy_mapping}
            for v in c.vulnerabilities
        ],
        "mitigations": [
            {"id": m.id, "threat": m.threat_id, "bullets": list(m.bullets),
             "applicable": m.applicable, "note": m.note}
            for m in c.mitigations
        ],
        "solutions": [
            {"id": s.id, "name": s.name, "summary": s.summary,
             "layers": sorted(s.layers),
             "mitigated_threats": sorted(s.mitigated_threats),
             "mitigated_roots": sorted(s.mitigated_roots),
             "coverage_notes": list(s.coverage_notes)}
            for s in c.solutions
        ],
    }
