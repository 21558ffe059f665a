"""Rewrite-rule engine for pandas code.

Rules pair an AST pattern containing typed holes with a replacement
template and a list of runtime preconditions. Matching is purely
structural; preconditions are emitted as an ``if``-guard so the original
code still runs whenever a rule turns out not to apply at runtime.
"""

from ruleflow.subject_ast import parse_source, print_source, structurally_equal
from ruleflow.rule_dsl import (
    AbstractVarKind,
    AbstractVariable,
    Pattern,
    Template,
    RewriteRule,
    RuleMeta,
    extract_holes,
    parse_rule_file,
    serialize_rule,
    validate_rule,
)
from ruleflow.matcher import (
    Identifier,
    Literal,
    Subtree,
    Substitution,
    Match,
    compile_pattern,
    match_at,
    find_matches,
)
from ruleflow.rewriter import RewrittenCell, instantiate, build_guard, apply_rule, rewrite_cell
from ruleflow.scheduler import ApplicationPlan, schedule
from ruleflow.corpus import RuleCorpus, HitLog, HitReport, load_corpus, record_hit, report

__all__ = [
    "AbstractVarKind",
    "AbstractVariable",
    "ApplicationPlan",
    "HitLog",
    "HitReport",
    "Identifier",
    "Literal",
    "Match",
    "Pattern",
    "RewriteRule",
    "RewrittenCell",
    "RuleCorpus",
    "RuleMeta",
    "Substitution",
    "Subtree",
    "Template",
    "apply_rule",
    "build_guard",
    "compile_pattern",
    "extract_holes",
    "find_matches",
    "instantiate",
    "load_corpus",
    "match_at",
    "parse_rule_file",
    "parse_source",
    "print_source",
    "record_hit",
    "report",
    "rewrite_cell",
    "schedule",
    "serialize_rule",
    "structurally_equal",
    "validate_rule",
]
