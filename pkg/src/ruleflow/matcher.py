"""Structural matching of LHS patterns against cell ASTs.

A compiled matcher slides over contiguous statement windows. Holes absorb
kind-compatible subtrees; everything else must match exactly (same call
arguments, same keyword names and values, nothing extra or missing).
Repeated hole names must bind structurally equal subtrees.
"""

from __future__ import annotations

import ast
from dataclasses import dataclass, field

from ruleflow import subject_ast
from ruleflow.rule_dsl import AbstractVariable, AbstractVarKind, Pattern, RewriteRule

# Marker attribute set on If nodes the rewriter emits, so a second pass
# over the same (in-memory) cell does not re-match inside its own output.
GUARD_MARKER = "_ruleflow_guard"


@dataclass(frozen=True)
class Identifier:
    name: str


@dataclass(frozen=True)
class Literal:
    value: object

    @property
    def value_type(self) -> type:
        return type(self.value)


@dataclass
class Subtree:
    node: ast.AST


BoundValue = Identifier | Literal | Subtree


@dataclass
class Substitution:
    bindings: dict[str, BoundValue] = field(default_factory=dict)

    def __getitem__(self, name: str) -> BoundValue:
        return self.bindings[name]

    def __contains__(self, name: str) -> bool:
        return name in self.bindings


ContextPath = tuple[tuple[int, str], ...]


@dataclass
class Match:
    rule_id: str
    path: ContextPath  # navigates from the module body into nested blocks
    start: int
    stop: int  # half-open statement window within the context
    theta: Substitution

    @property
    def stmt_range(self) -> tuple[int, int]:
        return (self.start, self.stop)


@dataclass
class Matcher:
    stmts: list[ast.stmt]
    holes: dict[str, AbstractVariable]

    def __len__(self) -> int:
        return len(self.stmts)


def compile_pattern(lhs: Pattern) -> Matcher:
    """Compile an LHS pattern into a reusable structural matcher."""
    return Matcher(lhs.body.body, dict(lhs.holes))


def match_at(cell: ast.Module, index: int, m: Matcher) -> Substitution | None:
    """Match a pattern against the statement window starting at index.

    Returns the substitution on success, None (no match) otherwise.
    """
    return _match_window(cell.body, index, m)


def _match_window(stmts: list[ast.stmt], index: int, m: Matcher) -> Substitution | None:
    if index < 0 or index + len(m.stmts) > len(stmts):
        return None
    theta = Substitution()
    for offset, pat in enumerate(m.stmts):
        if not _match_node(pat, stmts[index + offset], m, theta):
            return None
    return theta


def _match_node(pat: object, subj: object, m: Matcher, theta: Substitution) -> bool:
    if isinstance(pat, ast.Name) and pat.id in m.holes:
        return _bind(m.holes[pat.id], subj, theta)
    if isinstance(pat, ast.AST) or isinstance(subj, ast.AST):
        if type(pat) is not type(subj):
            return False
        for fname in pat._fields:
            if fname in ("ctx", "type_comment"):
                continue
            if not _match_node(getattr(pat, fname, None), getattr(subj, fname, None), m, theta):
                return False
        return True
    if isinstance(pat, list) or isinstance(subj, list):
        if not isinstance(pat, list) or not isinstance(subj, list) or len(pat) != len(subj):
            return False
        return all(_match_node(p, s, m, theta) for p, s in zip(pat, subj))
    return type(pat) is type(subj) and pat == subj


def _bind(var: AbstractVariable, subj: object, theta: Substitution) -> bool:
    value = _absorb(var.kind, subj)
    if value is None:
        return False
    if var.name in theta:
        return _bound_equal(theta[var.name], value)
    theta.bindings[var.name] = value
    return True


def _absorb(kind: AbstractVarKind, subj: object) -> BoundValue | None:
    if not isinstance(subj, ast.AST):
        return None
    if kind is AbstractVarKind.NAME:
        return Identifier(subj.id) if isinstance(subj, ast.Name) else None
    if kind is AbstractVarKind.CONST_STR:
        if isinstance(subj, ast.Constant) and type(subj.value) is str:
            return Literal(subj.value)
        return None
    if kind is AbstractVarKind.CONST_INT:
        # bool is excluded: AST-level int literals only.
        if isinstance(subj, ast.Constant) and type(subj.value) is int:
            return Literal(subj.value)
        return None
    if kind is AbstractVarKind.CONST_FLOAT:
        if isinstance(subj, ast.Constant) and type(subj.value) is float:
            return Literal(subj.value)
        return None
    if kind is AbstractVarKind.LIST:
        return Subtree(subj) if isinstance(subj, ast.List) else None
    if kind is AbstractVarKind.SLICE:
        return Subtree(subj) if isinstance(subj, ast.Slice) else None
    if kind is AbstractVarKind.SUBSCRIPT:
        return Subtree(subj) if isinstance(subj, ast.Subscript) else None
    # expr: any expression except starred fragments and bare slices,
    # which only exist inside calls/subscripts respectively.
    if isinstance(subj, ast.expr) and not isinstance(subj, (ast.Starred, ast.Slice)):
        return Subtree(subj)
    return None


def _bound_equal(a: BoundValue, b: BoundValue) -> bool:
    if type(a) is not type(b):
        return False
    if isinstance(a, Identifier):
        return a.name == b.name
    if isinstance(a, Literal):
        return type(a.value) is type(b.value) and a.value == b.value
    return subject_ast.structurally_equal(a.node, b.node)


_BLOCK_FIELDS = {
    ast.If: ("body", "orelse"),
    ast.For: ("body", "orelse"),
    ast.While: ("body", "orelse"),
    ast.With: ("body",),
}


def iter_contexts(cell: ast.Module) -> list[tuple[ContextPath, list[ast.stmt]]]:
    """Eligible statement-list contexts in document (pre-)order.

    Top-level module body plus the bodies of if/for/while/with blocks,
    recursively. Function and class bodies are excluded, as are guard
    blocks the rewriter itself emitted.
    """
    contexts: list[tuple[ContextPath, list[ast.stmt]]] = []

    def walk(stmts: list[ast.stmt], path: ContextPath) -> None:
        contexts.append((path, stmts))
        for i, stmt in enumerate(stmts):
            if getattr(stmt, GUARD_MARKER, None) is not None:
                continue
            fields = _BLOCK_FIELDS.get(type(stmt))
            if not fields:
                continue
            for fname in fields:
                child = getattr(stmt, fname)
                if child:
                    walk(child, path + ((i, fname),))

    walk(cell.body, ())
    return contexts


def find_matches(cell: ast.Module, rules: list[RewriteRule]) -> list[Match]:
    """All (rule, window) matches over all eligible contexts.

    Deterministic: (context order, window index order, rule order).
    """
    matchers = [(rule, compile_pattern(rule.lhs)) for rule in rules]
    matches: list[Match] = []
    for path, stmts in iter_contexts(cell):
        for index in range(len(stmts)):
            for rule, matcher in matchers:
                if index + len(matcher) > len(stmts):
                    continue
                theta = _match_window(stmts, index, matcher)
                if theta is not None:
                    matches.append(Match(rule.id, path, index, index + len(matcher), theta))
    return matches
