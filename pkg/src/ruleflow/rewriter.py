"""Template instantiation and guarded splicing of rewritten windows.

Applying a rule replaces the matched window with::

    if <preconditions conjoined>:
        <instantiated RHS>
    else:
        <original window, untouched>

A rule with no preconditions splices its RHS directly. The else branch is
exactly the original statements, so a guard that fails at runtime leaves
behavior unchanged.
"""

from __future__ import annotations

import ast
import copy
from dataclasses import dataclass, field

from ruleflow.matcher import (
    GUARD_MARKER,
    Identifier,
    Literal,
    Match,
    Substitution,
    Subtree,
    _match_window,
    compile_pattern,
    find_matches,
)
from ruleflow.rule_dsl import RewriteRule, RuleError, Template
from ruleflow.scheduler import schedule


class UnboundTemplateVariable(RuleError):
    code = "UNBOUND_VARIABLE"


class StaleMatch(RuleError):
    code = "STALE_MATCH"


@dataclass(frozen=True)
class Application:
    rule_id: str
    path: tuple[tuple[int, str], ...]
    stmt_range: tuple[int, int]


@dataclass
class RewrittenCell:
    ast: ast.Module
    applications: list[Application] = field(default_factory=list)


def instantiate(tmpl: Template, theta: Substitution) -> ast.Module:
    """Deep-copy the template body with each hole replaced by its binding."""
    tree = copy.deepcopy(tmpl.body)

    class Filler(ast.NodeTransformer):
        def visit_Name(self, node: ast.Name) -> ast.AST:
            if node.id not in tmpl.holes:
                return node
            name = tmpl.holes[node.id]
            if name not in theta:
                raise UnboundTemplateVariable(f"template variable {name!r} is unbound")
            value = theta[name]
            if isinstance(value, Identifier):
                return ast.copy_location(ast.Name(id=value.name, ctx=node.ctx), node)
            if isinstance(value, Literal):
                return ast.copy_location(ast.Constant(value=value.value), node)
            return ast.copy_location(copy.deepcopy(value.node), node)

    tree = Filler().visit(tree)
    ast.fix_missing_locations(tree)
    return tree


def build_guard(preconds: list[Template], theta: Substitution) -> ast.expr | None:
    """Left-to-right `and`-conjunction of instantiated preconditions.

    Returns None for an empty list (always applicable).
    """
    exprs: list[ast.expr] = []
    for pre in preconds:
        body = instantiate(pre, theta).body
        stmt = body[0]
        assert isinstance(stmt, ast.Expr), "validated rules have expression preconditions"
        exprs.append(stmt.value)
    if not exprs:
        return None
    if len(exprs) == 1:
        return exprs[0]
    return ast.BoolOp(op=ast.And(), values=exprs)


def _navigate(cell: ast.Module, path: tuple[tuple[int, str], ...]) -> list[ast.stmt]:
    stmts: list[ast.stmt] = cell.body
    for index, fname in path:
        stmts = getattr(stmts[index], fname)
    return stmts


def _splice(cell: ast.Module, rule: RewriteRule, m: Match) -> Application:
    stmts = _navigate(cell, m.path)
    matcher = compile_pattern(rule.lhs)
    theta = _match_window(stmts, m.start, matcher)
    if theta is None:
        raise StaleMatch(f"window no longer matches rule {rule.id!r}")

    rhs_stmts = instantiate(rule.rhs, theta).body
    guard = build_guard(rule.preconditions, theta)
    original = stmts[m.start : m.stop]
    if guard is None:
        replacement = rhs_stmts
    else:
        conditional = ast.If(test=guard, body=rhs_stmts, orelse=original)
        setattr(conditional, GUARD_MARKER, rule.id)
        replacement = [conditional]
    stmts[m.start : m.stop] = replacement
    ast.fix_missing_locations(cell)
    return Application(rule.id, m.path, (m.start, m.stop))


def apply_rule(cell: ast.Module, rule: RewriteRule, m: Match) -> RewrittenCell:
    """Apply one match on a copy of the cell.

    Raises StaleMatch if the window no longer matches the rule.
    """
    new_cell = copy.deepcopy(cell)
    application = _splice(new_cell, rule, m)
    return RewrittenCell(new_cell, [application])


def rewrite_cell(cell: ast.Module, corpus) -> RewrittenCell:
    """Match, schedule, and apply all selected rules in a single pass.

    A cell with no matches comes back as an equal AST with an empty
    application log.
    """
    matches = find_matches(cell, corpus.rules)
    plan = schedule(matches, corpus)
    new_cell = copy.deepcopy(cell)
    applications: list[Application] = []
    # Descending window order per context keeps earlier indices valid.
    for m in sorted(plan.selected, key=lambda m: (m.path, m.start), reverse=True):
        applications.append(_splice(new_cell, corpus.by_id[m.rule_id], m))
    applications.reverse()
    _ensure_pandas_import(new_cell)
    return RewrittenCell(new_cell, applications)


def _ensure_pandas_import(cell: ast.Module) -> None:
    # Guards are emitted verbatim; rules written against the `pandas`
    # root name must not depend on the user's import alias.
    needs_pandas = False
    for stmt in ast.walk(cell):
        if getattr(stmt, GUARD_MARKER, None) is None:
            continue
        for node in ast.walk(stmt.test):
            if isinstance(node, ast.Name) and node.id == "pandas":
                needs_pandas = True
                break
    if not needs_pandas or _binds_name(cell, "pandas"):
        return
    cell.body.insert(0, ast.Import(names=[ast.alias(name="pandas", asname=None)]))
    ast.fix_missing_locations(cell)


def _binds_name(cell: ast.Module, name: str) -> bool:
    for node in ast.walk(cell):
        if isinstance(node, ast.Import):
            for alias in node.names:
                bound = alias.asname or alias.name.split(".")[0]
                if bound == name:
                    return True
        elif isinstance(node, ast.ImportFrom):
            if any((alias.asname or alias.name) == name for alias in node.names):
                return True
        elif isinstance(node, ast.Name) and isinstance(node.ctx, ast.Store) and node.id == name:
            return True
        elif isinstance(node, (ast.FunctionDef, ast.AsyncFunctionDef, ast.ClassDef)):
            if node.name == name:
                return True
    return False
