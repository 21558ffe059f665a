"""Parse, print, and structurally compare Python source as ASTs.

Everything downstream (patterns, matching, rewriting) operates on the
standard-library ``ast`` representation. Comments and formatting are
discarded at parse time; rewriting is not format-preserving.
"""

from __future__ import annotations

import ast

# Fields that carry no structural information: expression context
# (load/store) is implied by syntactic position, type comments are trivia.
_IGNORED_FIELDS = frozenset({"ctx", "type_comment"})


def parse_source(src: str) -> ast.Module:
    """Parse source text into a module AST.

    Raises SyntaxError (with line/column) on invalid input, including
    input that is empty after whitespace stripping.
    """
    if not src.strip():
        raise SyntaxError("empty source text")
    tree = ast.parse(src)
    _canonicalize_slices(tree)
    return tree


def print_source(tree: ast.Module) -> str:
    """Render a module AST back to source text.

    The output re-parses to a structurally equal AST.
    """
    ast.fix_missing_locations(tree)
    return ast.unparse(tree) + "\n"


def _canonicalize_slices(tree: ast.AST) -> None:
    # An explicit `None` slice component means the same thing as an
    # absent one; normalize to absent so `x[0:10]` == `x[0:10:None]`.
    for node in ast.walk(tree):
        if isinstance(node, ast.Slice):
            for field in ("lower", "upper", "step"):
                child = getattr(node, field)
                if isinstance(child, ast.Constant) and child.value is None:
                    setattr(node, field, None)


def structurally_equal(a: ast.AST | list | None, b: ast.AST | list | None) -> bool:
    """True iff two trees agree on kinds, names, literal values, and shape.

    Spans, formatting, and expression contexts are ignored. Constant
    values compare with their value type, so `1`, `1.0`, and `True` are
    all distinct.
    """
    if isinstance(a, ast.AST) or isinstance(b, ast.AST):
        if type(a) is not type(b):
            return False
        for field in a._fields:
            if field in _IGNORED_FIELDS:
                continue
            if not structurally_equal(getattr(a, field, None), getattr(b, field, None)):
                return False
        return True
    if isinstance(a, list) or isinstance(b, list):
        if not isinstance(a, list) or not isinstance(b, list) or len(a) != len(b):
            return False
        return all(structurally_equal(x, y) for x, y in zip(a, b))
    # Leaf values: identifier strings, constants, operator-free fields.
    if type(a) is not type(b):
        return False
    return a == b


def node_span(node: ast.AST) -> tuple[tuple[int, int], tuple[int, int]] | None:
    """((lineno, col), (end_lineno, end_col)) for nodes that carry spans."""
    if not hasattr(node, "lineno") or node.end_lineno is None:
        return None
    return (node.lineno, node.col_offset), (node.end_lineno, node.end_col_offset)


def span_contains(outer: ast.AST, inner: ast.AST) -> bool:
    """True if inner's span lies within outer's span (or spans are absent)."""
    outer_span = node_span(outer)
    inner_span = node_span(inner)
    if outer_span is None or inner_span is None:
        return True
    return outer_span[0] <= inner_span[0] and inner_span[1] <= outer_span[1]
