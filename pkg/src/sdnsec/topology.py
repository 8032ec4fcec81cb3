"""Declarative model of an SDN deployment: the evaluation target.

A model is a typed graph of components (applications, controllers,
forwarding devices, hosts, attacker hosts), data flows between them,
trust boundaries, and VPLS tenant domains. Models are immutable value
objects; every operation here is side-effect free.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .errors import DanglingReference, DuplicateId, ModelSyntaxError
from .modelfile import Section, check_keys, parse_bool, parse_id_list, read_sections


class ComponentKind(enum.Enum):
    APPLICATION = "Application"
    CONTROLLER = "Controller"
    FORWARDING_DEVICE = "ForwardingDevice"
    HOST = "Host"
    ATTACKER_HOST = "AttackerHost"


class Layer(enum.Enum):
    APPLICATION = "application"
    CONTROL = "control"
    DATA = "data"


#: Canonical layer for each component kind.
KIND_LAYER = {
    ComponentKind.APPLICATION: Layer.APPLICATION,
    ComponentKind.CONTROLLER: Layer.CONTROL,
    ComponentKind.FORWARDING_DEVICE: Layer.DATA,
    ComponentKind.HOST: Layer.DATA,
    ComponentKind.ATTACKER_HOST: Layer.DATA,
}


class Interface(enum.Enum):
    NORTHBOUND = "northbound"
    SOUTHBOUND = "southbound"
    EASTWEST = "eastwest"
    DATAPLANE = "dataplane"
    MANAGEMENT = "management"


# Endpoint-layer constraints; dataplane and management links are free-form.
INTERFACE_LAYERS = {
    Interface.NORTHBOUND: {Layer.APPLICATION, Layer.CONTROL},
    Interface.SOUTHBOUND: {Layer.CONTROL, Layer.DATA},
    Interface.EASTWEST: {Layer.CONTROL},
}


@dataclass(frozen=True)
class Component:
    id: str
    kind: ComponentKind
    layer: Layer
    attributes: dict[str, str] = field(default_factory=dict)


@dataclass(frozen=True)
class DataFlow:
    id: str
    src: str
    dst: str
    interface: Interface
    protocol: str
    encrypted: bool = False


@dataclass(frozen=True)
class TrustBoundary:
    name: str
    members: frozenset[str]


@dataclass(frozen=True)
class VplsDomain:
    name: str
    members: frozenset[str]


@dataclass(frozen=True)
class SdnModel:
    components: tuple[Component, ...]
    flows: tuple[DataFlow, ...] = ()
    boundaries: tuple[TrustBoundary, ...] = ()
    vpls: tuple[VplsDomain, ...] = ()

    def component(self, component_id: str) -> Component:
        for c in self.components:
            if c.id == component_id:
                return c
        raise KeyError(component_id)

    def flow(self, flow_id: str) -> DataFlow:
        for f in self.flows:
            if f.id == flow_id:
                return f
        raise KeyError(flow_id)

    def components_of_kind(self, kind: ComponentKind) -> tuple[Component, ...]:
        return tuple(c for c in self.components if c.kind == kind)

    def vpls_of(self, host_id: str) -> VplsDomain | None:
        for domain in self.vpls:
            if host_id in domain.members:
                return domain
        return None


@dataclass(frozen=True)
class Violation:
    code: str
    subject: str
    message: str

    def __str__(self) -> str:
        return f"{self.code}({self.subject}): {self.message}"


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------

def validate_model(m: SdnModel) -> list[Violation]:
    """Check every structural invariant; an empty list means the model is sound.

    Violations are data, not exceptions, so callers can report all of
    them at once. The result is independent of declaration order.
    """
    violations: list[Violation] = []

    seen: set[str] = set()
    for c in m.components:
        if c.id in seen:
            violations.append(Violation("DuplicateId", c.id, "component id declared twice"))
        seen.add(c.id)
        if KIND_LAYER[c.kind] is not c.layer:
            violations.append(Violation(
                "KindLayerMismatch", c.id,
                f"kind {c.kind.value} belongs to layer {KIND_LAYER[c.kind].value}, "
                f"not {c.layer.value}",
            ))

    by_id = {c.id: c for c in m.components}

    flow_ids: set[str] = set()
    for f in m.flows:
        if f.id in flow_ids or f.id in by_id:
            violations.append(Violation("DuplicateId", f.id, "flow id declared twice"))
        flow_ids.add(f.id)
        endpoints_ok = True
        for endpoint in (f.src, f.dst):
            if endpoint not in by_id:
                violations.append(Violation(
                    "DanglingReference", f.id, f"flow endpoint {endpoint!r} is not declared"))
                endpoints_ok = False
        if f.src == f.dst:
            violations.append(Violation("SelfLoopFlow", f.id, "flow src equals dst"))
        if endpoints_ok and f.interface in INTERFACE_LAYERS:
            wanted = INTERFACE_LAYERS[f.interface]
            got = {by_id[f.src].layer, by_id[f.dst].layer}
            if got != wanted:
                violations.append(Violation(
                    "InterfaceLayerMismatch", f.id,
                    f"{f.interface.value} links layers "
                    + "/".join(sorted(l.value for l in wanted))
                    + ", got " + "/".join(sorted(l.value for l in got)),
                ))

    for b in m.boundaries:
        if not b.members:
            violations.append(Violation("EmptyBoundary", b.name, "boundary has no members"))
        for member in sorted(b.members):
            if member not in by_id:
                violations.append(Violation(
                    "DanglingReference", b.name, f"boundary member {member!r} is not declared"))

    assigned: dict[str, str] = {}
    for domain in m.vpls:
        for member in sorted(domain.members):
            if member not in by_id:
                violations.append(Violation(
                    "DanglingReference", domain.name,
                    f"vpls member {member!r} is not declared"))
            elif by_id[member].kind is not ComponentKind.HOST:
                violations.append(Violation(
                    "VplsMemberNotHost", domain.name,
                    f"vpls member {member!r} is a {by_id[member].kind.value}, not a Host"))
            if member in assigned:
                first, second = sorted((assigned[member], domain.name))
                violations.append(Violation(
                    "VplsOverlap", member,
                    f"host in both {first!r} and {second!r}"))
            assigned.setdefault(member, domain.name)

    if not any(c.kind is ComponentKind.CONTROLLER for c in m.components):
        violations.append(Violation("NoController", "-", "model declares no Controller"))

    violations.sort(key=lambda v: (v.code, v.subject, v.message))
    return violations


# ---------------------------------------------------------------------------
# parsing and rendering
# ---------------------------------------------------------------------------

_SECTION_KINDS = {"component", "flow", "boundary", "vpls"}
_FLOW_KEYS = {"src", "dst", "interface", "protocol", "encrypted"}
_GROUP_KEYS = {"members"}


def _parse_component(section: Section) -> Component:
    kind_name = section.require("kind")
    try:
        kind = ComponentKind(kind_name)
    except ValueError:
        raise ModelSyntaxError(f"unknown component kind {kind_name!r}", section.line)
    layer_name = section.get("layer")
    if layer_name is None:
        layer = KIND_LAYER[kind]
    else:
        try:
            layer = Layer(layer_name)
        except ValueError:
            raise ModelSyntaxError(f"unknown layer {layer_name!r}", section.line)
    attributes = {
        e.key: e.value for e in section.entries if e.key not in ("kind", "layer")
    }
    return Component(section.name, kind, layer, attributes)


def _parse_flow(section: Section) -> DataFlow:
    check_keys(section, _FLOW_KEYS)
    interface_name = section.require("interface")
    try:
        interface = Interface(interface_name)
    except ValueError:
        raise ModelSyntaxError(f"unknown interface {interface_name!r}", section.line)
    encrypted_raw = section.get("encrypted")
    # TLS is off unless the model says otherwise, mirroring OpenFlow defaults.
    encrypted = parse_bool(encrypted_raw, section.line) if encrypted_raw is not None else False
    return DataFlow(
        id=section.name,
        src=section.require("src"),
        dst=section.require("dst"),
        interface=interface,
        protocol=section.require("protocol"),
        encrypted=encrypted,
    )


def parse_model(text: str) -> SdnModel:
    """Parse model-file text into a fully resolved SdnModel.

    Raises ModelSyntaxError for grammar problems, DuplicateId for a
    repeated declaration, and DanglingReference when a flow, boundary,
    or vpls section names an undeclared component.
    """
    sections = read_sections(text, _SECTION_KINDS)

    components: list[Component] = []
    flows: list[DataFlow] = []
    boundaries: list[TrustBoundary] = []
    vpls: list[VplsDomain] = []
    declared: set[str] = set()

    for section in sections:
        if section.name in declared:
            raise DuplicateId(section.name)
        declared.add(section.name)
        if section.kind == "component":
            components.append(_parse_component(section))
        elif section.kind == "flow":
            flows.append(_parse_flow(section))
        elif section.kind == "boundary":
            check_keys(section, _GROUP_KEYS)
            members = frozenset(parse_id_list(section.require("members")))
            boundaries.append(TrustBoundary(section.name, members))
        else:
            check_keys(section, _GROUP_KEYS)
            members = frozenset(parse_id_list(section.require("members")))
            vpls.append(VplsDomain(section.name, members))

    component_ids = {c.id for c in components}
    for f in flows:
        for endpoint in (f.src, f.dst):
            if endpoint not in component_ids:
                raise DanglingReference(endpoint, f"flow {f.id}")
    for group in (*boundaries, *vpls):
        for member in sorted(group.members):
            if member not in component_ids:
                raise DanglingReference(member, f"section {group.name}")

    return SdnModel(tuple(components), tuple(flows), tuple(boundaries), tuple(vpls))


def render_model(m: SdnModel) -> str:
    """Serialize a model in canonical order: components, flows, boundaries,
    vpls, each sorted by id; attributes sorted by key. parse_model is the
    exact inverse on canonically ordered models."""
    out: list[str] = []
    for c in sorted(m.components, key=lambda c: c.id):
        out.append(f"component {c.id}")
        out.append(f"  kind = {c.kind.value}")
        out.append(f"  layer = {c.layer.value}")
        for key in sorted(c.attributes):
            out.append(f"  {key} = {c.attributes[key]}")
        out.append("")
    for f in sorted(m.flows, key=lambda f: f.id):
        out.append(f"flow {f.id}")
        out.append(f"  src = {f.src}")
        out.append(f"  dst = {f.dst}")
        out.append(f"  interface = {f.interface.value}")
        out.append(f"  protocol = {f.protocol}")
        out.append(f"  encrypted = {'true' if f.encrypted else 'false'}")
        out.append("")
    for b in sorted(m.boundaries, key=lambda b: b.name):
        out.append(f"boundary {b.name}")
        out.append(f"  members = {', '.join(sorted(b.members))}")
        out.append("")
    for domain in sorted(m.vpls, key=lambda d: d.name):
        out.append(f"vpls {domain.name}")
        out.append(f"  members = {', '.join(sorted(domain.members))}")
        out.append("")
    return "\n".join(out)


# ---------------------------------------------------------------------------
# built-in reference models
# ---------------------------------------------------------------------------

def reference_testbed() -> SdnModel:
    """The desk-scale lab: one controller, three switches, nine tenant VMs
    spread over three cross-switch VPLS domains, plus an attacker box.

    Southbound OpenFlow runs unencrypted, as does the Telnet management
    session to the first switch; those two defaults are what the bundled
    eavesdropping scenario exploits.
    """
    components = [Component("c1", ComponentKind.CONTROLLER, Layer.CONTROL,
                            {"os": "onos"})]
    for n in range(1, 4):
        components.append(Component(f"s{n}", ComponentKind.FORWARDING_DEVICE, Layer.DATA,
                                    {"os": "ovs"}))
    for n in range(1, 10):
        components.append(Component(f"h{n}", ComponentKind.HOST, Layer.DATA))
    components.append(Component("kali1", ComponentKind.ATTACKER_HOST, Layer.DATA,
                                {"os": "kali"}))
    components.sort(key=lambda c: c.id)

    flows = []
    for n in range(1, 4):
        flows.append(DataFlow(f"f-sb-s{n}", "c1", f"s{n}", Interface.SOUTHBOUND,
                              "OpenFlow", encrypted=False))
    # hosts h1-h3 hang off s1, h4-h6 off s2, h7-h9 off s3
    for n in range(1, 10):
        switch = f"s{(n - 1) // 3 + 1}"
        flows.append(DataFlow(f"f-dp-h{n}", f"h{n}", switch, Interface.DATAPLANE,
                              "ICMP", encrypted=False))
    flows.append(DataFlow("f-dp-kali1", "kali1", "s1", Interface.DATAPLANE,
                          "ICMP", encrypted=False))
    flows.append(DataFlow("f-mgmt-telnet", "h1", "s1", Interface.MANAGEMENT,
                          "Telnet", encrypted=False))
    flows.sort(key=lambda f: f.id)

    # tenants span the switches: one VM per switch per domain
    vpls = [
        VplsDomain("vpls1", frozenset({"h1", "h4", "h7"})),
        VplsDomain("vpls2", frozenset({"h2", "h5", "h8"})),
        VplsDomain("vpls3", frozenset({"h3", "h6", "h9"})),
    ]
    return SdnModel(tuple(components), tuple(flows), (), tuple(vpls))


def reference_stride_model() -> SdnModel:
    """Minimal per-element analysis target: one application, two controllers
    (the usual DC pairing), one forwarding device, wired over northbound,
    east-west, and southbound flows."""
    components = (
        Component("app1", ComponentKind.APPLICATION, Layer.APPLICATION),
        Component("c1", ComponentKind.CONTROLLER, Layer.CONTROL),
        Component("c2", ComponentKind.CONTROLLER, Layer.CONTROL),
        Component("s1", ComponentKind.FORWARDING_DEVICE, Layer.DATA),
    )
    flows = (
        DataFlow("f-ew-c1c2", "c1", "c2", Interface.EASTWEST, "BGP", encrypted=False),
        DataFlow("f-nb-app1", "app1", "c1", Interface.NORTHBOUND, "REST", encrypted=False),
        DataFlow("f-sb-c1s1", "c1", "s1", Interface.SOUTHBOUND, "OpenFlow", encrypted=False),
        DataFlow("f-sb-c2s1", "c2", "s1", Interface.SOUTHBOUND, "OpenFlow", encrypted=False),
    )
    return SdnModel(components, flows)
