"""Exception hierarchy shared across the toolkit."""


class SdnSecError(Exception):
    """Base class for all toolkit errors."""


# -- model files and topology -------------------------------------------------

class ModelSyntaxError(SdnSecError):
    """Malformed model-family file (bad line, unknown key, bad section)."""

    def __init__(self, message: str, line: int, column: int = 1):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class DuplicateId(SdnSecError):
    def __init__(self, entity_id: str):
        super().__init__(f"duplicate id: {entity_id!r}")
        self.entity_id = entity_id


class DanglingReference(SdnSecError):
    def __init__(self, missing_id: str, context: str = ""):
        detail = f" ({context})" if context else ""
        super().__init__(f"reference to undeclared id {missing_id!r}{detail}")
        self.missing_id = missing_id


class InvalidModel(SdnSecError):
    """Operation requires a model that passes validation."""

    def __init__(self, violations):
        codes = ", ".join(v.code for v in violations)
        super().__init__(f"model has violations: {codes}")
        self.violations = list(violations)


# -- stride engine ------------------------------------------------------------

class UnknownRuleIdWarning(UserWarning):
    """A rejected rule id matched no rule; the rejection was ignored."""


# -- cvss vectors -------------------------------------------------------------

class VectorError(SdnSecError):
    """Base class for CVSS vector string problems."""


class BadPrefix(VectorError):
    pass


class UnknownMetric(VectorError):
    def __init__(self, metric: str):
        super().__init__(f"unknown metric or value: {metric!r}")
        self.metric = metric


class DuplicateMetric(VectorError):
    def __init__(self, metric: str):
        super().__init__(f"metric given twice: {metric!r}")
        self.metric = metric


class MissingBaseMetric(VectorError):
    def __init__(self, metric: str):
        super().__init__(f"required base metric missing: {metric!r}")
        self.metric = metric


# -- knowledge base -----------------------------------------------------------

class UnknownThreatId(SdnSecError):
    def __init__(self, threat_id: str):
        super().__init__(f"no such threat: {threat_id!r}")
        self.threat_id = threat_id


class CatalogError(SdnSecError):
    """Catalog file violated the catalog schema."""


# -- risk ranking -------------------------------------------------------------

class UnmappedCandidate(SdnSecError):
    """The grouping table has no row for a candidate's (subject, category)."""

    def __init__(self, subject_class: str, category: str):
        super().__init__(
            f"grouping table has no row for ({subject_class}, {category}); "
            "add a group entry or mark the pair excluded"
        )
        self.subject_class = subject_class
        self.category = category


# -- correlation map ----------------------------------------------------------

class InconsistentInputs(SdnSecError):
    pass


class UnknownNode(SdnSecError):
    def __init__(self, node_id: str):
        super().__init__(f"no such node: {node_id!r}")
        self.node_id = node_id


# -- simulation ---------------------------------------------------------------

class UnknownHost(SdnSecError):
    def __init__(self, host_id: str):
        super().__init__(f"not a host in this testbed: {host_id!r}")
        self.host_id = host_id


class UnknownFlow(SdnSecError):
    def __init__(self, flow_id: str):
        super().__init__(f"no such flow: {flow_id!r}")
        self.flow_id = flow_id


class TargetNotFound(SdnSecError):
    def __init__(self, target: str):
        super().__init__(f"no credentialed service named {target!r}")
        self.target = target


class TargetNotController(SdnSecError):
    def __init__(self, target: str):
        super().__init__(f"flood target must be a controller: {target!r}")
        self.target = target


class ScenarioMismatch(SdnSecError):
    def __init__(self, scenario: str, tc_id: str, expected: str):
        super().__init__(
            f"{scenario} results verify against {expected}, not {tc_id}"
        )
        self.scenario = scenario
        self.tc_id = tc_id
        self.expected = expected


class ScenarioError(SdnSecError):
    """Scenario file is malformed or incomplete."""
