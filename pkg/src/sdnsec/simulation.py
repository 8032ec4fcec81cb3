"""Deterministic desk-scale simulation of attacks against an SDN testbed.

The testbed mirrors the lab setup: VPLS tenant isolation enforced by
controller-installed flow rules, a credentialed management service, and
cleartext control channels unless a flow says otherwise. Three attack
scenarios run against it: a dictionary attack on a credentialed service,
eavesdropping on a flow, and a SYN flood against the controller's
OpenFlow port.

Time is simulated in fixed 0.1-second ticks; nothing depends on the wall
clock, so identical inputs always produce identical event timelines. The
controller saturates as a cumulative-threshold latch: once the flood
delivers enough packets, every VPLS service terminates and stays down
until an explicit reconfiguration, matching observed non-recovery of the
data plane after control-plane loss.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import (InvalidModel, ScenarioError, ScenarioMismatch, TargetNotController,
                     TargetNotFound, UnknownFlow, UnknownHost)
from .modelfile import check_keys, read_sections
from .ranking import ThreatCategoryRecord
from .topology import ComponentKind, SdnModel, Violation, validate_model

#: Simulation tick, in simulated seconds.
TICK = 0.1

OPENFLOW_PORT = 6653

#: Packets the controller absorbs before saturating; an 8-second flood at
#: the default rate below lands exactly on this threshold.
DEFAULT_CONTROLLER_CAPACITY = 4_000_000
DEFAULT_FLOOD_RATE = 500_000
DEFAULT_FLOOD_DURATION = 8.0

#: Entry count of the stock "rockyou" password list; only the size matters
#: to the simulation, the list itself is not shipped.
ROCKYOU_WORDLIST_SIZE = 14_344_392

#: Position of the default service password in the wordlist.
DEFAULT_PASSWORD_INDEX = 999

#: Guess rates calibrated so cracking password index 999 takes 4.0 s with
#: the fast preset and 22 minutes with the slow one, the spread observed
#: between common cracking tools on a small two-CPU VM. Calibrations, not
#: measurements.
TOOL_RATES = {
    "patator": 250.0,
    "hydra": 1000.0 / 1320.0,
}


@dataclass(frozen=True)
class CredentialService:
    name: str
    component: str
    protocol: str
    username: str
    password: str
    password_index: int = DEFAULT_PASSWORD_INDEX


@dataclass(frozen=True)
class TestbedParams:
    __test__ = False  # not a test class, despite the name

    controller_capacity: int = DEFAULT_CONTROLLER_CAPACITY
    services: tuple[CredentialService, ...] | None = None  # None: derive default


# -- attack specs -------------------------------------------------------------

@dataclass(frozen=True)
class Dictionary:
    service: str
    wordlist_size: int = ROCKYOU_WORDLIST_SIZE
    rate: float = TOOL_RATES["patator"]

    def __post_init__(self):
        if self.rate <= 0 or self.wordlist_size <= 0:
            raise ScenarioError("dictionary rate and wordlist size must be positive")


@dataclass(frozen=True)
class Eavesdrop:
    flow: str
    duration: float = 10.0

    def __post_init__(self):
        if self.duration <= 0:
            raise ScenarioError("eavesdrop duration must be positive")


@dataclass(frozen=True)
class SynFlood:
    target: str
    port: int = OPENFLOW_PORT
    rate: int = DEFAULT_FLOOD_RATE
    duration: float = DEFAULT_FLOOD_DURATION

    def __post_init__(self):
        if self.rate <= 0 or self.duration <= 0:
            raise ScenarioError("flood rate and duration must be positive")


AttackSpec = Dictionary | Eavesdrop | SynFlood


@dataclass(frozen=True)
class SimEvent:
    t: float
    kind: str
    detail: str


@dataclass(frozen=True)
class SimResult:
    scenario: str
    events: tuple[SimEvent, ...]
    outcome: dict


@dataclass
class SimTestbed:
    """Mutable single-owner simulation state over an immutable model."""

    model: SdnModel
    controller_capacity: int
    flow_rules: frozenset[tuple[str, str]]
    credentials: dict[str, CredentialService]
    channel_encrypted: dict[str, bool]
    services_up: dict[str, bool]
    saturated: bool = False
    clock: float = 0.0


def _intra_vpls_pairs(m: SdnModel) -> frozenset[tuple[str, str]]:
    pairs = set()
    for domain in m.vpls:
        for a in domain.members:
            for b in domain.members:
                if a != b:
                    pairs.add((a, b))
    return frozenset(pairs)


def _default_services(m: SdnModel) -> tuple[CredentialService, ...]:
    # a Telnet management flow implies a credentialed login on its far end
    for f in sorted(m.flows, key=lambda f: f.id):
        if f.protocol == "Telnet":
            return (CredentialService(
                name="switch-mgmt", component=f.dst, protocol="Telnet",
                username="karaf", password="karaf"),)
    return ()


def make_testbed(m: SdnModel, params: TestbedParams | None = None) -> SimTestbed:
    """Build simulation state: flow rules permit exactly the intra-VPLS
    host pairs, every tenant service starts up, the clock starts at zero.
    Requires a valid model with at least one VPLS domain."""
    params = params or TestbedParams()
    violations = validate_model(m)
    if violations:
        raise InvalidModel(violations)
    if not m.vpls:
        raise InvalidModel([Violation("NoVplsDomain", "-",
                                      "simulation needs at least one VPLS domain")])
    services = params.services if params.services is not None else _default_services(m)
    return SimTestbed(
        model=m,
        controller_capacity=params.controller_capacity,
        flow_rules=_intra_vpls_pairs(m),
        credentials={s.name: s for s in services},
        channel_encrypted={f.id: f.encrypted for f in m.flows},
        services_up={d.name: True for d in m.vpls},
    )


def ping(tb: SimTestbed, src: str, dst: str) -> bool:
    """Reachability between two hosts: same VPLS domain, that domain's
    service up, and the controller not saturated."""
    for host in (src, dst):
        try:
            component = tb.model.component(host)
        except KeyError:
            raise UnknownHost(host) from None
        if component.kind is not ComponentKind.HOST:
            raise UnknownHost(host)
    domain = tb.model.vpls_of(src)
    if domain is None or tb.model.vpls_of(dst) is not domain:
        return False
    return tb.services_up[domain.name] and not tb.saturated


def run_dictionary_attack(tb: SimTestbed, spec: Dictionary) -> SimResult:
    """Guess passwords against a credentialed service at a fixed rate.
    The stored password sits at a known wordlist index, so the attack
    succeeds after index+1 attempts in (index+1)/rate simulated seconds;
    an index beyond the wordlist means the attack runs dry and fails."""
    service = tb.credentials.get(spec.service)
    if service is None:
        raise TargetNotFound(spec.service)
    t0 = tb.clock
    events = [SimEvent(t0, "attack-start",
                       f"dictionary attack against {spec.service} on "
                       f"{service.component} ({spec.rate:g} attempts/s, "
                       f"wordlist {spec.wordlist_size} entries)")]
    success = service.password_index < spec.wordlist_size
    attempts = service.password_index + 1 if success else spec.wordlist_size
    elapsed = attempts / spec.rate
    if success:
        events.append(SimEvent(t0 + elapsed, "credentials-found",
                               f"password for {service.username!r} found after "
                               f"{attempts} attempts"))
    else:
        events.append(SimEvent(t0 + elapsed, "wordlist-exhausted",
                               f"no match in {spec.wordlist_size} entries"))
    tb.clock = t0 + elapsed
    outcome = {
        "success": success,
        "attempts": attempts,
        "elapsed": elapsed,
        "service": service.name,
        "credentials": [service.username, service.password] if success else None,
    }
    return SimResult("dictionary", tuple(events), outcome)


def _eavesdrop_artifacts(tb: SimTestbed, flow_id: str) -> list[dict]:
    flow = tb.model.flow(flow_id)
    artifacts: list[dict] = [{
        "kind": "payload",
        "detail": f"{flow.protocol} payloads between {flow.src} and {flow.dst}",
    }]
    if flow.protocol == "Telnet":
        for service in sorted(tb.credentials.values(), key=lambda s: s.name):
            if service.component in (flow.src, flow.dst) and service.protocol == "Telnet":
                artifacts.append({
                    "kind": "credentials",
                    "detail": f"plaintext login to {service.component}",
                    "username": service.username,
                    "password": service.password,
                })
    if flow.protocol == "OpenFlow":
        artifacts.append({
            "kind": "topology",
            "detail": "control messages expose switches and network services",
            "switches": sorted(c.id for c in tb.model.components_of_kind(
                ComponentKind.FORWARDING_DEVICE)),
            "services": sorted(d.name for d in tb.model.vpls),
        })
    return artifacts


def run_eavesdrop(tb: SimTestbed, spec: Eavesdrop) -> SimResult:
    """Capture a flow for a fixed duration. Cleartext flows yield their
    payloads (plus credentials on Telnet and topology details on control
    channels); encrypted flows yield connection metadata only."""
    try:
        flow = tb.model.flow(spec.flow)
    except KeyError:
        raise UnknownFlow(spec.flow) from None
    t0 = tb.clock
    events = [SimEvent(t0, "capture-start",
                       f"capturing {flow.protocol} on {spec.flow} for "
                       f"{spec.duration:g} s")]
    encrypted = tb.channel_encrypted[spec.flow]
    if encrypted:
        artifacts: list[dict] = [{
            "kind": "metadata",
            "detail": f"endpoints {flow.src}<->{flow.dst}, payload encrypted",
            "packets": int(spec.duration / TICK),
        }]
        events.append(SimEvent(t0 + spec.duration, "capture-end",
                               "no payloads captured (channel encrypted)"))
    else:
        artifacts = _eavesdrop_artifacts(tb, spec.flow)
        for artifact in artifacts:
            events.append(SimEvent(t0 + spec.duration, "captured",
                                   f"{artifact['kind']}: {artifact['detail']}"))
        events.append(SimEvent(t0 + spec.duration, "capture-end",
                               f"{len(artifacts)} artifacts captured"))
    tb.clock = t0 + spec.duration
    payloads = [a for a in artifacts if a["kind"] != "metadata"]
    outcome = {
        "flow": spec.flow,
        "encrypted": encrypted,
        "artifacts": artifacts,
        "payloads_captured": len(payloads),
        "credentials_captured": any(a["kind"] == "credentials" for a in artifacts),
    }
    return SimResult("eavesdrop", tuple(events), outcome)


def run_syn_flood(tb: SimTestbed, spec: SynFlood) -> SimResult:
    """Flood the controller with SYN packets at a constant rate. At the
    first tick where cumulative packets reach the controller's capacity
    the controller saturates, all VPLS services terminate, and they stay
    down (no drain, no recovery) until reconfigure_vpls."""
    try:
        target = tb.model.component(spec.target)
    except KeyError:
        raise TargetNotController(spec.target) from None
    if target.kind is not ComponentKind.CONTROLLER:
        raise TargetNotController(spec.target)

    t0 = tb.clock
    events = [SimEvent(t0, "flood-start",
                       f"SYN flood against {spec.target}:{spec.port} at "
                       f"{spec.rate} pkt/s")]
    ticks = math.ceil(round(spec.duration / TICK, 9))
    disruption_tick = None
    for k in range(1, ticks + 1):
        # cumulative packets rate*k/10 >= capacity, kept in integers
        if spec.rate * k >= tb.controller_capacity * 10:
            disruption_tick = k
            break
    disrupted = disruption_tick is not None
    if disrupted:
        t_disrupt = disruption_tick / 10
        tb.saturated = True
        events.append(SimEvent(t0 + t_disrupt, "controller-saturated",
                               f"{spec.target} exceeded capacity of "
                               f"{tb.controller_capacity} packets"))
        for name in sorted(tb.services_up):
            tb.services_up[name] = False
            events.append(SimEvent(t0 + t_disrupt, "service-terminated",
                                   f"VPLS service {name} terminated"))
        packets = int(spec.rate * min(spec.duration, t_disrupt))
    else:
        t_disrupt = None
        packets = int(spec.rate * spec.duration)
    events.append(SimEvent(t0 + spec.duration, "flood-end",
                           f"{packets} packets sent"))
    tb.clock = t0 + spec.duration
    outcome = {
        "target": spec.target,
        "port": spec.port,
        "disrupted": disrupted,
        "time_to_disruption": t_disrupt,
        "packets_sent": packets,
        "services_terminated": sorted(tb.services_up) if disrupted else [],
    }
    return SimResult("syn_flood", tuple(events), outcome)


def reconfigure_vpls(tb: SimTestbed) -> SimTestbed:
    """Restore the testbed to its initial service state: every VPLS
    service up, controller unsaturated, flow rules recomputed. The clock
    keeps running; restoring service does not rewind time."""
    tb.saturated = False
    for name in tb.services_up:
        tb.services_up[name] = True
    tb.flow_rules = _intra_vpls_pairs(tb.model)
    return tb


# ---------------------------------------------------------------------------
# verification against the ranked categories
# ---------------------------------------------------------------------------

SCENARIO_CATEGORY = {
    "dictionary": "TC2",
    "eavesdrop": "TC3",
    "syn_flood": "TC4",
}


@dataclass(frozen=True)
class VerificationReport:
    scenario: str
    tc_id: str
    scope: str  # single-host | all-tenants | whole-network | none
    consistent: bool
    notes: tuple[str, ...] = field(default_factory=tuple)


def verify_impact(result: SimResult, tc: ThreatCategoryRecord) -> VerificationReport:
    """Check an attack's observed impact against the threat category it
    exercises. Each scenario verifies exactly one category; pairing it
    with any other raises ScenarioMismatch."""
    expected = SCENARIO_CATEGORY[result.scenario]
    if tc.id != expected:
        raise ScenarioMismatch(result.scenario, tc.id, expected)

    if result.scenario == "syn_flood":
        whole_network = (result.outcome["disrupted"]
                         and bool(result.outcome["services_terminated"]))
        scope = "whole-network" if whole_network else "none"
        notes = (
            f"flood delivered {result.outcome['packets_sent']} packets",
            ("all VPLS services terminated; a single-controller denial of "
             "service must take down the whole network" if whole_network
             else "controller capacity not reached; no service impact"),
        )
        return VerificationReport(result.scenario, tc.id, scope, whole_network, notes)

    if result.scenario == "eavesdrop":
        captured = result.outcome["payloads_captured"] > 0
        scope = "single-host" if captured else "none"
        notes = (
            ("captured " + ", ".join(sorted({a["kind"] for a in result.outcome["artifacts"]}))
             if captured else "channel encrypted; metadata only"),
        )
        return VerificationReport(result.scenario, tc.id, scope, captured, notes)

    success = result.outcome["success"]
    scope = "single-host" if success else "none"
    notes = (
        (f"credentials recovered after {result.outcome['attempts']} attempts "
         f"in {result.outcome['elapsed']:g} s" if success
         else "password not in wordlist; access not gained"),
    )
    return VerificationReport(result.scenario, tc.id, scope, success, notes)


# ---------------------------------------------------------------------------
# scenario files
# ---------------------------------------------------------------------------

_SCENARIO_KEYS = {"type", "service", "wordlist_size", "rate", "preset",
                  "flow", "duration", "target", "port"}


def parse_scenario(text: str) -> AttackSpec:
    """Read the first ``scenario`` section into an attack spec."""
    sections = read_sections(text, {"scenario"})
    if not sections:
        raise ScenarioError("no scenario section found")
    section = sections[0]
    check_keys(section, _SCENARIO_KEYS)
    kind = section.require("type")
    if kind == "dictionary":
        preset = section.get("preset")
        if preset is not None and preset not in TOOL_RATES:
            raise ScenarioError(f"unknown preset {preset!r}; "
                                f"known: {', '.join(sorted(TOOL_RATES))}")
        rate = TOOL_RATES[preset] if preset else float(section.get("rate", "250"))
        return Dictionary(
            service=section.require("service"),
            wordlist_size=int(section.get("wordlist_size", str(ROCKYOU_WORDLIST_SIZE))),
            rate=rate,
        )
    if kind == "eavesdrop":
        return Eavesdrop(
            flow=section.require("flow"),
            duration=float(section.get("duration", "10")),
        )
    if kind == "syn_flood":
        return SynFlood(
            target=section.require("target"),
            port=int(section.get("port", str(OPENFLOW_PORT))),
            rate=int(section.get("rate", str(DEFAULT_FLOOD_RATE))),
            duration=float(section.get("duration", str(DEFAULT_FLOOD_DURATION))),
        )
    raise ScenarioError(f"unknown scenario type {kind!r}")
