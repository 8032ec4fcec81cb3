"""sdnsec: security evaluation toolkit for software-defined networks.

Four stages, each feeding the next: per-element threat analysis over a
declarative network model, risk ranking with full CVSS v3.1 scoring,
deterministic attack simulation against a tenant-isolated testbed, and a
correlation map linking root threats through vulnerabilities to their
mitigations.
"""

from .catalog import (CatalogSource, CentralSolution, Mitigation, Threat,
                      ThreatCatalog, Vulnerability, coverage_report,
                      load_catalog, mitigations_for, threats_by_source)
from .correlation import (CorrelationNode, CorrelationTree, build_map,
                          export_dot, query_mitigations, query_threats)
from .cvss import (CvssVector, Severity, base_score, environmental_score,
                   overall_score, parse_vector, roundup, severity,
                   temporal_score)
from .ranking import (EnvironmentalEffect, GroupingTable, RankedAssessment,
                      RootThreat, ThreatCategoryRecord,
                      builtin_threat_categories, default_grouping_table,
                      environmental_effect, exclude_unpredictable,
                      group_into_categories, rank)
from .simulation import (AttackSpec, Dictionary, Eavesdrop, SimResult,
                         SimTestbed, SynFlood, make_testbed, ping,
                         reconfigure_vpls, run_dictionary_attack,
                         run_eavesdrop, run_syn_flood, verify_impact)
from .stride import (CandidateThreat, StrideCategory, StrideRule, analyze,
                     default_rules, filter_candidates)
from .topology import (Component, ComponentKind, DataFlow, Interface, Layer,
                       SdnModel, TrustBoundary, Violation, VplsDomain,
                       parse_model, reference_stride_model, reference_testbed,
                       render_model, validate_model)

__version__ = "0.1.0"
