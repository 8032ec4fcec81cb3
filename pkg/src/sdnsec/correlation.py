"""The remediation map: a tree from root threats down to sub-threats,
their vulnerabilities, and the mitigations or central solutions that
address each one.

The tree is derived mechanically from the knowledge base plus a ranked
assessment, so it stays correct when either is extended. A vulnerability
shared by several categories appears as one node per parent (the drawing
stays a tree) but all instances carry the same concept reference, and
queries aggregate over references. Child relations are disjunctive unless
a node is explicitly marked conjunctive.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .catalog import ThreatCatalog
from .errors import InconsistentInputs, UnknownNode
from .ranking import RankedAssessment, RootThreat


class NodeKind(enum.Enum):
    ROOT_THREAT = "RootThreat"
    SUB_THREAT = "SubThreat"
    VULNERABILITY = "Vulnerability"
    MITIGATION_REF = "MitigationRef"
    CENTRAL_SOLUTION_REF = "CentralSolutionRef"


class Junction(enum.Enum):
    DISJUNCTIVE = "disjunctive"
    CONJUNCTIVE = "conjunctive"


_LEAF_KINDS = (NodeKind.MITIGATION_REF, NodeKind.CENTRAL_SOLUTION_REF)

#: Permitted child kinds; enforced on every build.
_CHILD_KINDS = {
    NodeKind.ROOT_THREAT: {NodeKind.SUB_THREAT},
    NodeKind.SUB_THREAT: {NodeKind.SUB_THREAT, NodeKind.VULNERABILITY},
    NodeKind.VULNERABILITY: set(_LEAF_KINDS),
    NodeKind.MITIGATION_REF: set(),
    NodeKind.CENTRAL_SOLUTION_REF: set(),
}


@dataclass(frozen=True)
class CorrelationNode:
    id: str            # unique within the tree (path-scoped for instances)
    kind: NodeKind
    label: str
    ref: str           # concept id: root name, TC id, Vn, Mn, or solution id
    children: tuple[str, ...] = ()
    junction: Junction = Junction.DISJUNCTIVE


@dataclass(frozen=True)
class CorrelationTree:
    roots: tuple[str, ...]
    nodes: dict[str, CorrelationNode] = field(default_factory=dict)

    def node(self, node_id: str) -> CorrelationNode:
        try:
            return self.nodes[node_id]
        except KeyError:
            raise UnknownNode(node_id) from None

    def by_ref(self, ref: str) -> list[CorrelationNode]:
        return [n for n in self.nodes.values() if n.ref == ref]


_SCORED_ROOTS = (RootThreat.UNAUTHORIZED_ACCESS,
                 RootThreat.INFORMATION_DISCLOSURE,
                 RootThreat.DENIAL_OF_SERVICE)


def build_map(catalog: ThreatCatalog, assessment: RankedAssessment) -> CorrelationTree:
    """Assemble the tree: one root per scorable root threat, categories as
    sub-threats under their root, each category's linked threats expanded
    to vulnerability nodes, and each vulnerability closed off with its
    applicable mitigation and/or the central solutions that cover it.

    Solutions attach by threat coverage, and additionally under every
    vulnerability of a category whose root they cover (a flood defense
    guards all denial-of-service categories, whichever vulnerability is
    exercised). Raises InconsistentInputs when an assessment record links
    a threat the catalog does not define.
    """
    nodes: dict[str, CorrelationNode] = {}
    root_ids: list[str] = []
    root_children: dict[RootThreat, list[str]] = {r: [] for r in _SCORED_ROOTS}

    records = sorted(assessment.records, key=lambda r: r.number)
    for record in records:
        if record.root not in root_children:
            raise InconsistentInputs(
                f"record {record.id} has unscorable root {record.root.value}")
        vuln_ids: list[str] = []
        for threat_id in record.threats:
            try:
                threat = catalog.threat(threat_id)
            except Exception:
                raise InconsistentInputs(
                    f"record {record.id} links {threat_id}, which the catalog "
                    "does not define") from None
            vulnerability = catalog.vulnerability_for(threat_id)
            vuln_node_id = f"{record.id}/{vulnerability.id}"
            leaf_ids: list[str] = []
            mitigation = catalog.mitigation_for(threat_id)
            if mitigation.applicable:
                leaf_id = f"{vuln_node_id}/{mitigation.id}"
                nodes[leaf_id] = CorrelationNode(
                    leaf_id, NodeKind.MITIGATION_REF, mitigation.id, mitigation.id)
                leaf_ids.append(leaf_id)
            for solution in catalog.solutions:
                if (threat_id in solution.mitigated_threats
                        or record.root.value in solution.mitigated_roots):
                    leaf_id = f"{vuln_node_id}/{solution.id}"
                    if leaf_id not in nodes:
                        nodes[leaf_id] = CorrelationNode(
                            leaf_id, NodeKind.CENTRAL_SOLUTION_REF,
                            solution.id, solution.id)
                        leaf_ids.append(leaf_id)
            nodes[vuln_node_id] = CorrelationNode(
                vuln_node_id, NodeKind.VULNERABILITY,
                f"{vulnerability.id} ({threat.name})", vulnerability.id,
                children=tuple(leaf_ids))
            vuln_ids.append(vuln_node_id)
        nodes[record.id] = CorrelationNode(
            record.id, NodeKind.SUB_THREAT, f"{record.id}: {record.name}",
            record.id, children=tuple(vuln_ids))
        root_children[record.root].append(record.id)

    for root in _SCORED_ROOTS:
        root_id = f"root-{root.value}"
        nodes[root_id] = CorrelationNode(
            root_id, NodeKind.ROOT_THREAT, root.value, root.value,
            children=tuple(root_children[root]))
        root_ids.append(root_id)

    tree = CorrelationTree(tuple(root_ids), nodes)
    check_tree(tree)
    return tree


def check_tree(tree: CorrelationTree) -> None:
    """Verify acyclicity (topological walk), single-parent reachability,
    and the kind ordering along every path."""
    parents: dict[str, str] = {}
    for node in tree.nodes.values():
        for child_id in node.children:
            child = tree.node(child_id)
            if child.kind not in _CHILD_KINDS[node.kind]:
                raise InconsistentInputs(
                    f"{node.kind.value} node {node.id} cannot parent "
                    f"{child.kind.value} node {child.id}")
            if child_id in parents:
                raise InconsistentInputs(f"node {child_id} has two parents")
            parents[child_id] = node.id

    seen: set[str] = set()
    stack = [(root_id, 0) for root_id in tree.roots]
    while stack:
        node_id, depth = stack.pop()
        if depth > len(tree.nodes):
            raise InconsistentInputs("cycle detected")
        seen.add(node_id)
        stack.extend((c, depth + 1) for c in tree.node(node_id).children)

    unreachable = set(tree.nodes) - seen
    if unreachable:
        raise InconsistentInputs(f"unreachable nodes: {sorted(unreachable)}")


# ---------------------------------------------------------------------------
# queries
# ---------------------------------------------------------------------------

def _resolve(tree: CorrelationTree, some_id: str) -> list[CorrelationNode]:
    if some_id in tree.nodes:
        return [tree.nodes[some_id]]
    matches = tree.by_ref(some_id)
    if not matches and some_id.startswith("T") and some_id[1:].isdigit():
        # threat ids resolve through their paired vulnerability
        matches = tree.by_ref("V" + some_id[1:])
    if not matches:
        raise UnknownNode(some_id)
    return matches


def _leaf_sort_key(ref: str) -> tuple[int, int, str]:
    if ref.startswith("M") and ref[1:].isdigit():
        return (0, int(ref[1:]), ref)
    return (1, 0, ref)


def query_mitigations(tree: CorrelationTree, some_id: str) -> list[str]:
    """Every mitigation or central solution reachable below the given
    node, vulnerability, threat, or category id; deduplicated refs in a
    fixed order (numbered mitigations first, then solutions)."""
    found: set[str] = set()
    stack = [n.id for n in _resolve(tree, some_id)]
    while stack:
        node = tree.node(stack.pop())
        if node.kind in _LEAF_KINDS:
            found.add(node.ref)
        stack.extend(node.children)
    return sorted(found, key=_leaf_sort_key)


def query_threats(tree: CorrelationTree, mitigation_id: str) -> list[str]:
    """The sub-threat and root-threat refs above every instance of the
    given mitigation or solution (the reverse of query_mitigations)."""
    instances = {n.id for n in _resolve(tree, mitigation_id)}
    parents: dict[str, str] = {}
    for node in tree.nodes.values():
        for child_id in node.children:
            parents[child_id] = node.id
    found: set[str] = set()
    for node_id in instances:
        current = parents.get(node_id)
        while current is not None:
            node = tree.node(current)
            if node.kind in (NodeKind.SUB_THREAT, NodeKind.ROOT_THREAT):
                found.add(node.ref)
            current = parents.get(current)
    return sorted(found)


# ---------------------------------------------------------------------------
# exports
# ---------------------------------------------------------------------------

_DOT_SHAPES = {
    NodeKind.ROOT_THREAT: "circle",
    NodeKind.SUB_THREAT: "box",
    NodeKind.VULNERABILITY: "ellipse",
    NodeKind.MITIGATION_REF: "note",
    NodeKind.CENTRAL_SOLUTION_REF: "hexagon",
}


def _dot_quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def export_dot(tree: CorrelationTree) -> str:
    """Render the tree as a DOT digraph. Root threats keep their circular
    shape; conjunctive junctions carry an AND annotation. Output is
    byte-stable for equal trees."""
    lines = ["digraph correlation_map {", "  rankdir=TB;"]
    order = _walk_order(tree)
    for node_id in order:
        node = tree.nodes[node_id]
        attrs = [f"label={_dot_quote(node.label)}",
                 f"shape={_DOT_SHAPES[node.kind]}"]
        if node.junction is Junction.CONJUNCTIVE:
            attrs.append('xlabel="AND"')
            attrs.append("peripheries=2")
        lines.append(f"  {_dot_quote(node_id)} [{', '.join(attrs)}];")
    for node_id in order:
        for child_id in tree.nodes[node_id].children:
            lines.append(f"  {_dot_quote(node_id)} -> {_dot_quote(child_id)};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _walk_order(tree: CorrelationTree) -> list[str]:
    order: list[str] = []
    stack = list(reversed(tree.roots))
    while stack:
        node_id = stack.pop()
        order.append(node_id)
        stack.extend(reversed(tree.nodes[node_id].children))
    return order


def to_records(tree: CorrelationTree) -> dict:
    """Structured export mirroring the tree, schema-versioned."""
    return {
        "schema_version": 1,
        "roots": list(tree.roots),
        "nodes": [
            {
                "id": node_id,
                "kind": tree.nodes[node_id].kind.value,
                "label": tree.nodes[node_id].label,
                "ref": tree.nodes[node_id].ref,
                "junction": tree.nodes[node_id].junction.value,
                "children": list(tree.nodes[node_id].children),
            }
            for node_id in _walk_order(tree)
        ],
    }
