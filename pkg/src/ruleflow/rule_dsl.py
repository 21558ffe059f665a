"""Rule file format: parse `@{...}` holes and sectioned rule text.

A rule file has four sections, in order::

    == LHS ==
    <python code with @{Kind: name} holes>
    == RHS ==
    <python code with @{name} holes>
    == PRE ==
    <one expression per line, @{name} holes allowed; may be empty>
    == META ==
    id = <string>
    avg_speedup = <decimal>       # optional, default 1.0
    max_speedup = <decimal>       # optional
    enabled = true|false          # optional, default true

Unknown META keys are preserved verbatim. Hole occurrences are replaced
by reserved placeholder identifiers before parsing, then re-marked as
holes in the resulting AST.
"""

from __future__ import annotations

import ast
import copy
import enum
import re
from dataclasses import dataclass, field

from ruleflow import subject_ast

PLACEHOLDER_FORMAT = "__rf_hole_{}__"
_PLACEHOLDER_RE = re.compile(r"__rf_hole_\d+__")
_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")

_SECTIONS = ("LHS", "RHS", "PRE", "META")


class RuleError(Exception):
    """Base for rule-file errors; carries a machine-readable code."""

    code = "RULE_ERROR"

    def __init__(self, message: str, section: str = ""):
        super().__init__(message)
        self.message = message
        self.section = section


class MalformedHole(RuleError):
    code = "MALFORMED_HOLE"


class UnknownKind(RuleError):
    code = "UNKNOWN_KIND"


class UnboundVariable(RuleError):
    code = "UNBOUND_VARIABLE"


class KindMismatch(RuleError):
    code = "KIND_MISMATCH"


class RuleSyntaxError(RuleError):
    code = "SYNTAX_ERROR"


class IllegalHolePosition(RuleError):
    """A hole landed somewhere that is not an expression slot (e.g. an
    attribute name), or inside a string literal."""

    code = "ILLEGAL_HOLE_POSITION"


class MalformedRule(RuleError):
    code = "MALFORMED_RULE"


class AbstractVarKind(enum.Enum):
    NAME = "Name"
    EXPR = "expr"
    CONST_STR = "Const(str)"
    CONST_INT = "Const(int)"
    CONST_FLOAT = "Const(float)"
    LIST = "List"
    SLICE = "Slice"
    SUBSCRIPT = "Subscript"


_KIND_BY_SPELLING = {k.value: k for k in AbstractVarKind}


@dataclass(frozen=True)
class AbstractVariable:
    name: str
    kind: AbstractVarKind


@dataclass
class HoleOccurrence:
    """One `@{...}` occurrence, in position order."""

    placeholder: str
    name: str
    kind: AbstractVarKind | None  # None for the use form @{name}


@dataclass
class Pattern:
    """LHS code with placeholder Names standing in for typed holes."""

    body: ast.Module
    holes: dict[str, AbstractVariable]  # placeholder id -> variable


@dataclass
class Template:
    """RHS or precondition code whose placeholder Names are hole uses."""

    body: ast.Module
    holes: dict[str, str]  # placeholder id -> variable name


@dataclass
class RuleMeta:
    avg_speedup: float = 1.0
    max_speedup: float | None = None
    provenance: str = ""
    enabled: bool = True
    extra: dict[str, str] = field(default_factory=dict)


@dataclass
class RewriteRule:
    id: str
    lhs: Pattern
    rhs: Template
    preconditions: list[Template]
    meta: RuleMeta

    @property
    def variables(self) -> dict[str, AbstractVarKind]:
        return {v.name: v.kind for v in self.lhs.holes.values()}


@dataclass(frozen=True)
class Diagnostic:
    code: str
    section: str
    message: str


def extract_holes(text: str) -> tuple[str, dict[str, HoleOccurrence]]:
    """Replace each `@{...}` occurrence with a fresh reserved identifier.

    Returns the sanitized text and a table of occurrences in position
    order. Raises MalformedHole / UnknownKind on bad hole syntax.
    """
    if _PLACEHOLDER_RE.search(text):
        raise MalformedHole("reserved placeholder identifier present in rule text")
    out: list[str] = []
    table: dict[str, HoleOccurrence] = {}
    pos = 0
    count = 0
    while True:
        start = text.find("@{", pos)
        if start == -1:
            out.append(text[pos:])
            break
        out.append(text[pos:start])
        end = text.find("}", start)
        inner = text[start + 2 : end] if end != -1 else ""
        if end == -1 or "\n" in inner:
            raise MalformedHole("unterminated hole '@{'")
        kind: AbstractVarKind | None = None
        if ":" in inner:
            kind_text, _, name = inner.partition(":")
            kind_text = kind_text.strip()
            name = name.strip()
            if kind_text not in _KIND_BY_SPELLING:
                raise UnknownKind(f"unknown hole kind {kind_text!r}")
            kind = _KIND_BY_SPELLING[kind_text]
        else:
            name = inner.strip()
        if not name or not _IDENT_RE.match(name):
            raise MalformedHole(f"bad hole variable name {inner.strip()!r}")
        placeholder = PLACEHOLDER_FORMAT.format(count)
        count += 1
        table[placeholder] = HoleOccurrence(placeholder, name, kind)
        out.append(placeholder)
        pos = end + 1
    return "".join(out), table


def _parse_section_ast(sanitized: str, table: dict[str, HoleOccurrence], section: str) -> ast.Module:
    try:
        tree = subject_ast.parse_source(sanitized)
    except SyntaxError as exc:
        raise RuleSyntaxError(f"invalid code: {exc}", section=section) from exc
    # Every placeholder must surface as a Name node; anything else means
    # the hole sits in a non-expression slot (attribute name, string
    # literal contents, keyword name, ...).
    seen: set[str] = set()
    for node in ast.walk(tree):
        if isinstance(node, ast.Name) and node.id in table:
            seen.add(node.id)
    missing = set(table) - seen
    if missing:
        occ = table[sorted(missing)[0]]
        raise IllegalHolePosition(
            f"hole {occ.name!r} is not in an expression position", section=section
        )
    return tree


def _split_sections(text: str) -> dict[str, list[str]]:
    sections: dict[str, list[str]] = {}
    current: str | None = None
    order: list[str] = []
    for line in text.splitlines():
        header = line.strip()
        if header.startswith("== ") and header.endswith(" =="):
            name = header[3:-3].strip()
            if name not in _SECTIONS:
                raise MalformedRule(f"unknown section header {name!r}")
            if name in sections:
                raise MalformedRule(f"duplicate section {name!r}")
            sections[name] = []
            order.append(name)
            current = name
            continue
        if current is None:
            if line.strip():
                raise MalformedRule("content before the first section header")
            continue
        sections[current].append(line)
    if order != list(_SECTIONS):
        raise MalformedRule(
            "sections must appear exactly once in order == LHS ==, == RHS ==, == PRE ==, == META =="
        )
    return sections


def _parse_meta(lines: list[str]) -> tuple[str, RuleMeta]:
    meta = RuleMeta()
    rule_id: str | None = None
    for line in lines:
        if not line.strip():
            continue
        if "=" not in line:
            raise MalformedRule(f"bad META line {line!r}", section="META")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key == "id":
            rule_id = value
        elif key == "avg_speedup":
            meta.avg_speedup = _parse_decimal(value, key)
        elif key == "max_speedup":
            meta.max_speedup = _parse_decimal(value, key)
        elif key == "enabled":
            if value not in ("true", "false"):
                raise MalformedRule(f"enabled must be true or false, got {value!r}", section="META")
            meta.enabled = value == "true"
        elif key == "provenance":
            meta.provenance = value
        else:
            meta.extra[key] = value
    if not rule_id:
        raise MalformedRule("missing rule id", section="META")
    if meta.avg_speedup < 0 or (meta.max_speedup is not None and meta.max_speedup < 0):
        raise MalformedRule("speedups must be >= 0", section="META")
    if meta.max_speedup is not None and meta.max_speedup < meta.avg_speedup:
        raise MalformedRule("max_speedup must be >= avg_speedup", section="META")
    return rule_id, meta


def _parse_decimal(value: str, key: str) -> float:
    try:
        return float(value)
    except ValueError:
        raise MalformedRule(f"{key} must be a decimal, got {value!r}", section="META") from None


def parse_rule_file(text: str) -> RewriteRule:
    """Parse sectioned rule text into a validated RewriteRule.

    Raises MalformedHole, UnknownKind, RuleSyntaxError, UnboundVariable,
    KindMismatch, IllegalHolePosition, or MalformedRule.
    """
    sections = _split_sections(text)

    # LHS: every hole must use the binding form @{Kind: name}.
    lhs_text = "\n".join(sections["LHS"])
    try:
        sanitized, table = extract_holes(lhs_text)
    except RuleError as exc:
        exc.section = exc.section or "LHS"
        raise
    kinds: dict[str, AbstractVarKind] = {}
    for occ in table.values():
        if occ.kind is None:
            raise MalformedHole(
                f"LHS hole {occ.name!r} must use the binding form @{{Kind: name}}", section="LHS"
            )
        if occ.name in kinds and kinds[occ.name] is not occ.kind:
            raise KindMismatch(
                f"variable {occ.name!r} declared as both {kinds[occ.name].value} "
                f"and {occ.kind.value}",
                section="LHS",
            )
        kinds[occ.name] = occ.kind
    lhs_body = _parse_section_ast(sanitized, table, "LHS")
    lhs = Pattern(lhs_body, {p: AbstractVariable(o.name, o.kind) for p, o in table.items()})
    if not lhs_body.body:
        raise MalformedRule("LHS must contain at least one statement", section="LHS")

    rhs = _parse_template("\n".join(sections["RHS"]), kinds, "RHS", allow_empty=True)

    preconditions: list[Template] = []
    for line in sections["PRE"]:
        if not line.strip():
            continue
        preconditions.append(_parse_template(line, kinds, "PRE", allow_empty=False))

    if not rhs.body.body and preconditions:
        raise MalformedRule("empty RHS is only allowed for rules with no preconditions")

    rule_id, meta = _parse_meta(sections["META"])
    return RewriteRule(rule_id, lhs, rhs, preconditions, meta)


def _parse_template(
    text: str, bound: dict[str, AbstractVarKind], section: str, allow_empty: bool
) -> Template:
    try:
        sanitized, table = extract_holes(text)
    except RuleError as exc:
        exc.section = exc.section or section
        raise
    for occ in table.values():
        if occ.kind is not None:
            raise MalformedHole(
                f"{section} hole {occ.name!r} must use the use form @{{name}}", section=section
            )
        if occ.name not in bound:
            raise UnboundVariable(
                f"{section} references {occ.name!r} which is not bound in the LHS", section=section
            )
    if allow_empty and not sanitized.strip():
        return Template(ast.Module(body=[], type_ignores=[]), {})
    body = _parse_section_ast(sanitized, table, section)
    return Template(body, {p: o.name for p, o in table.items()})


def validate_rule(rule: RewriteRule) -> list[Diagnostic]:
    """Post-parse checks; returns diagnostics instead of raising.

    Empty iff every precondition is a single expression, every hole sits
    in a position compatible with its kind, and the LHS differs from the
    RHS after hole-name normalization.
    """
    diags: list[Diagnostic] = []
    for pre in rule.preconditions:
        stmts = pre.body.body
        if len(stmts) != 1 or not isinstance(stmts[0], ast.Expr):
            diags.append(
                Diagnostic(
                    "PRECONDITION_NOT_EXPRESSION",
                    "PRE",
                    f"precondition is not a single expression: "
                    f"{ast.unparse(pre.body)!r}",
                )
            )

    kinds = rule.variables
    diags.extend(_check_slice_positions(rule.lhs.body, rule.lhs.holes, kinds, "LHS"))
    diags.extend(_check_slice_positions(rule.rhs.body, rule.rhs.holes, kinds, "RHS"))
    for pre in rule.preconditions:
        diags.extend(_check_slice_positions(pre.body, pre.holes, kinds, "PRE"))

    if _normalized_equal(rule):
        diags.append(
            Diagnostic("LHS_EQUALS_RHS", "RHS", "RHS is identical to LHS after hole normalization")
        )
    return diags


def _check_slice_positions(
    body: ast.Module,
    holes: dict[str, AbstractVariable] | dict[str, str],
    kinds: dict[str, AbstractVarKind],
    section: str,
) -> list[Diagnostic]:
    # A Slice binding only makes sense where a slice can appear: as a
    # subscript's index, possibly inside a tuple of indices.
    slice_placeholders = set()
    for placeholder, hole in holes.items():
        name = hole.name if isinstance(hole, AbstractVariable) else hole
        if kinds.get(name) is AbstractVarKind.SLICE:
            slice_placeholders.add(placeholder)
    if not slice_placeholders:
        return []
    legal: set[str] = set()
    for node in ast.walk(body):
        if isinstance(node, ast.Subscript):
            index = node.slice
            candidates = index.elts if isinstance(index, ast.Tuple) else [index]
            for cand in candidates:
                if isinstance(cand, ast.Name) and cand.id in slice_placeholders:
                    legal.add(cand.id)
    diags = []
    for node in ast.walk(body):
        if isinstance(node, ast.Name) and node.id in slice_placeholders and node.id not in legal:
            hole = holes[node.id]
            name = hole.name if isinstance(hole, AbstractVariable) else hole
            diags.append(
                Diagnostic(
                    "KIND_POSITION",
                    section,
                    f"Slice hole {name!r} must appear as a subscript index",
                )
            )
    return diags


def _normalized_equal(rule: RewriteRule) -> bool:
    def normalize(body: ast.Module, hole_names: dict[str, str]) -> ast.Module:
        tree = copy.deepcopy(body)
        mapping: dict[str, str] = {}
        for node in ast.walk(tree):
            if isinstance(node, ast.Name) and node.id in hole_names:
                var = hole_names[node.id]
                if var not in mapping:
                    mapping[var] = f"__norm_{len(mapping)}__"
                node.id = mapping[var]
        return tree

    lhs_names = {p: v.name for p, v in rule.lhs.holes.items()}
    lhs_norm = normalize(rule.lhs.body, lhs_names)
    rhs_norm = normalize(rule.rhs.body, rule.rhs.holes)
    return subject_ast.structurally_equal(lhs_norm, rhs_norm)


def serialize_rule(rule: RewriteRule) -> str:
    """Render a RewriteRule back into the sectioned file format.

    Re-parsing the output yields a structurally equal rule.
    """
    def render(body: ast.Module, holes: dict[str, str], kinds: dict[str, AbstractVarKind] | None) -> str:
        text = ast.unparse(body)
        for placeholder, name in holes.items():
            if kinds is None:
                replacement = f"@{{{name}}}"
            else:
                replacement = f"@{{{kinds[name].value}: {name}}}"
            text = text.replace(placeholder, replacement)
        return text

    kinds = rule.variables
    lhs_holes = {p: v.name for p, v in rule.lhs.holes.items()}
    lines = ["== LHS ==", render(rule.lhs.body, lhs_holes, kinds), "== RHS =="]
    if rule.rhs.body.body:
        lines.append(render(rule.rhs.body, rule.rhs.holes, None))
    lines.append("== PRE ==")
    for pre in rule.preconditions:
        lines.append(render(pre.body, pre.holes, None))
    lines.append("== META ==")
    lines.append(f"id = {rule.id}")
    lines.append(f"avg_speedup = {rule.meta.avg_speedup!r}")
    if rule.meta.max_speedup is not None:
        lines.append(f"max_speedup = {rule.meta.max_speedup!r}")
    if rule.meta.provenance:
        lines.append(f"provenance = {rule.meta.provenance}")
    lines.append(f"enabled = {'true' if rule.meta.enabled else 'false'}")
    for key, value in rule.meta.extra.items():
        lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"
