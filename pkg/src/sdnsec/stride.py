"""Per-element STRIDE analysis over an SDN model.

A rule table pairs element classes (component kinds, or flow predicates)
with threat categories; analysis walks every element and emits one
candidate threat per matching rule. Candidates are raw material for the
risk-ranking stage; rejection of non-applicable findings is an explicit,
audited step, never silent.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass

from .errors import InvalidModel, ModelSyntaxError, UnknownRuleIdWarning
from .modelfile import check_keys, parse_bool, read_sections
from .topology import Component, ComponentKind, DataFlow, SdnModel, validate_model


class StrideCategory(enum.Enum):
    SPOOFING = "S"
    TAMPERING = "T"
    REPUDIATION = "R"
    INFORMATION_DISCLOSURE = "I"
    DENIAL_OF_SERVICE = "D"
    ELEVATION_OF_PRIVILEGE = "E"

    @property
    def word(self) -> str:
        return _CATEGORY_WORDS[self]


_CATEGORY_WORDS = {
    StrideCategory.SPOOFING: "Spoofing",
    StrideCategory.TAMPERING: "Tampering",
    StrideCategory.REPUDIATION: "Repudiation",
    StrideCategory.INFORMATION_DISCLOSURE: "InformationDisclosure",
    StrideCategory.DENIAL_OF_SERVICE: "DenialOfService",
    StrideCategory.ELEVATION_OF_PRIVILEGE: "ElevationOfPrivilege",
}

_CATEGORY_ORDER = {c: n for n, c in enumerate(StrideCategory)}


class FlowCondition(enum.Enum):
    ALWAYS = "always"
    UNENCRYPTED = "unencrypted"
    BOUNDARY_CROSSING = "boundary_crossing"


@dataclass(frozen=True)
class StrideRule:
    """One row of the rule table.

    Component rules set ``kind``; flow rules set ``condition`` instead.
    The predicate is decidable from model data alone, so analysis is a
    pure function of (model, rules).
    """

    id: str
    category: StrideCategory
    description: str
    kind: ComponentKind | None = None
    condition: FlowCondition | None = None
    enabled: bool = True

    @property
    def targets_flows(self) -> bool:
        return self.condition is not None


@dataclass(frozen=True)
class CandidateThreat:
    id: str
    subject: str
    subject_class: str  # component kind name, or flow interface name
    category: StrideCategory
    description: str
    rule_id: str


# ---------------------------------------------------------------------------
# the built-in rule table
# ---------------------------------------------------------------------------

_COMPONENT_TABLE: list[tuple[ComponentKind, str, StrideCategory, str]] = []


def _component_rules(kind: ComponentKind, slug: str,
                     rows: list[tuple[StrideCategory, str]]) -> None:
    for category, text in rows:
        _COMPONENT_TABLE.append((kind, f"{slug}-{category.word.lower()}", category, text))


_component_rules(ComponentKind.CONTROLLER, "controller", [
    (StrideCategory.SPOOFING,
     "an attacker could impersonate controller {subject} to switches or applications"),
    (StrideCategory.TAMPERING,
     "flow tables and configuration pushed by {subject} could be altered in transit or at rest"),
    (StrideCategory.REPUDIATION,
     "administrative actions on {subject} may be deniable without tamper-evident audit logs"),
    (StrideCategory.INFORMATION_DISCLOSURE,
     "{subject} holds the full network view; compromise exposes every connection it manages"),
    (StrideCategory.DENIAL_OF_SERVICE,
     "flooding {subject} exhausts its capacity and stalls the network it controls"),
    (StrideCategory.ELEVATION_OF_PRIVILEGE,
     "a foothold on {subject} grants network-wide administrative control"),
])

_component_rules(ComponentKind.APPLICATION, "application", [
    (StrideCategory.SPOOFING,
     "a client could pose as a legitimate tenant of application {subject}"),
    (StrideCategory.TAMPERING,
     "policies or data served by {subject} could be modified without authorization"),
    (StrideCategory.REPUDIATION,
     "tenant actions in {subject} may be deniable without sufficient logging"),
    (StrideCategory.INFORMATION_DISCLOSURE,
     "{subject} may leak tenant or network data through its interfaces"),
    (StrideCategory.DENIAL_OF_SERVICE,
     "request floods against {subject} deny service to its tenants"),
    (StrideCategory.ELEVATION_OF_PRIVILEGE,
     "privilege bugs in {subject} let a tenant act with operator permissions"),
])

_component_rules(ComponentKind.FORWARDING_DEVICE, "forwarding-device", [
    (StrideCategory.SPOOFING,
     "a rogue device could register as switch {subject} with the controller"),
    (StrideCategory.TAMPERING,
     "flow entries installed on {subject} could be inserted or rewritten by an intruder"),
    (StrideCategory.INFORMATION_DISCLOSURE,
     "{subject} exposes its own control connection and the traffic it forwards"),
    (StrideCategory.DENIAL_OF_SERVICE,
     "table-overflow or packet floods can exhaust {subject}"),
    (StrideCategory.ELEVATION_OF_PRIVILEGE,
     "management access to {subject} yields data-plane control"),
])

_component_rules(ComponentKind.HOST, "host", [
    (StrideCategory.SPOOFING,
     "host {subject} addresses can be forged to intercept or redirect tenant traffic"),
    (StrideCategory.INFORMATION_DISCLOSURE,
     "traffic to and from {subject} can be observed on shared segments"),
    (StrideCategory.DENIAL_OF_SERVICE,
     "{subject} can be driven offline by targeted resource exhaustion"),
])

_FLOW_TABLE: list[tuple[str, FlowCondition, StrideCategory, str]] = [
    ("flow-cleartext-disclosure", FlowCondition.UNENCRYPTED,
     StrideCategory.INFORMATION_DISCLOSURE,
     "{subject} carries {protocol} in cleartext; anyone on the path can read it"),
    ("flow-cleartext-tampering", FlowCondition.UNENCRYPTED,
     StrideCategory.TAMPERING,
     "{subject} carries {protocol} without integrity protection; payloads can be rewritten"),
    ("flow-dos", FlowCondition.ALWAYS,
     StrideCategory.DENIAL_OF_SERVICE,
     "{subject} can be saturated, cutting the {protocol} channel"),
    ("flow-boundary-spoofing", FlowCondition.BOUNDARY_CROSSING,
     StrideCategory.SPOOFING,
     "{subject} crosses a trust boundary; either endpoint can be impersonated"),
]


def default_rules() -> list[StrideRule]:
    """The built-in rule table. Controllers and applications match all six
    categories, forwarding devices five, hosts three; unencrypted flows add
    disclosure and tampering, every flow is a DoS target, and flows that
    cross a trust boundary add spoofing. The attacker host is the threat
    source, not an asset, so nothing targets it."""
    rules = [StrideRule(rule_id, category, text, kind=kind)
             for kind, rule_id, category, text in _COMPONENT_TABLE]
    rules += [StrideRule(rule_id, category, text, condition=condition)
              for rule_id, condition, category, text in _FLOW_TABLE]
    return rules


# ---------------------------------------------------------------------------
# analysis
# ---------------------------------------------------------------------------

def _crosses_boundary(flow: DataFlow, m: SdnModel) -> bool:
    for boundary in m.boundaries:
        if (flow.src in boundary.members) != (flow.dst in boundary.members):
            return True
    return False


def _match_component(rule: StrideRule, c: Component) -> bool:
    return rule.kind is c.kind


def _match_flow(rule: StrideRule, f: DataFlow, m: SdnModel) -> bool:
    if rule.condition is FlowCondition.ALWAYS:
        return True
    if rule.condition is FlowCondition.UNENCRYPTED:
        return not f.encrypted
    return _crosses_boundary(f, m)


def analyze(m: SdnModel, rules: list[StrideRule]) -> list[CandidateThreat]:
    """Emit one candidate per (element, matching rule), sorted by subject id
    then category. Raises InvalidModel if the model has violations."""
    violations = validate_model(m)
    if violations:
        raise InvalidModel(violations)

    active = [r for r in rules if r.enabled]
    found: list[CandidateThreat] = []
    for c in m.components:
        for rule in active:
            if rule.kind is not None and _match_component(rule, c):
                found.append(CandidateThreat(
                    id=f"{rule.id}@{c.id}",
                    subject=c.id,
                    subject_class=c.kind.value,
                    category=rule.category,
                    description=rule.description.format(subject=c.id),
                    rule_id=rule.id,
                ))
    for f in m.flows:
        for rule in active:
            if rule.targets_flows and _match_flow(rule, f, m):
                found.append(CandidateThreat(
                    id=f"{rule.id}@{f.id}",
                    subject=f.id,
                    subject_class=f.interface.value,
                    category=rule.category,
                    description=rule.description.format(subject=f.id, protocol=f.protocol),
                    rule_id=rule.id,
                ))
    found.sort(key=lambda t: (t.subject, _CATEGORY_ORDER[t.category], t.rule_id))
    return found


def filter_candidates(cs: list[CandidateThreat],
                      reject: set[str]) -> list[CandidateThreat]:
    """Drop candidates whose rule id is in ``reject``, preserving order.
    A reject id that matches nothing raises an UnknownRuleIdWarning and is
    otherwise ignored; rejections are recorded by the caller's report."""
    present = {c.rule_id for c in cs}
    for rule_id in sorted(reject):
        if rule_id not in present:
            warnings.warn(f"reject id {rule_id!r} matched no candidate",
                          UnknownRuleIdWarning, stacklevel=2)
    return [c for c in cs if c.rule_id not in reject]


# ---------------------------------------------------------------------------
# rule override files
# ---------------------------------------------------------------------------

_RULE_KEYS = {"target", "when", "category", "description", "enabled"}
_KIND_NAMES = {k.value: k for k in ComponentKind}
_CATEGORY_NAMES = {c.word: c for c in StrideCategory}
_CATEGORY_NAMES.update({c.value: c for c in StrideCategory})


def load_rules(text: str) -> list[StrideRule]:
    """Read ``rule`` sections. ``target`` is a component kind or the word
    ``flow``; flow rules take ``when = always|unencrypted|boundary_crossing``.
    """
    rules: list[StrideRule] = []
    for section in read_sections(text, {"rule"}):
        check_keys(section, _RULE_KEYS)
        target = section.require("target")
        category_name = section.require("category")
        if category_name not in _CATEGORY_NAMES:
            raise ModelSyntaxError(f"unknown category {category_name!r}", section.line)
        category = _CATEGORY_NAMES[category_name]
        description = section.get("description") or "{subject}: " + category.word
        enabled_raw = section.get("enabled")
        enabled = parse_bool(enabled_raw, section.line) if enabled_raw is not None else True
        if target == "flow":
            when = section.get("when", FlowCondition.ALWAYS.value)
            try:
                condition = FlowCondition(when)
            except ValueError:
                raise ModelSyntaxError(f"unknown flow condition {when!r}", section.line)
            rules.append(StrideRule(section.name, category, description,
                                    condition=condition, enabled=enabled))
        elif target in _KIND_NAMES:
            rules.append(StrideRule(section.name, category, description,
                                    kind=_KIND_NAMES[target], enabled=enabled))
        else:
            raise ModelSyntaxError(f"unknown rule target {target!r}", section.line)
    return rules
