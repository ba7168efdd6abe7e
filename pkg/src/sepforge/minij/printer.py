"""Deterministic canonical pretty-printer for MiniJ trees.

print_method(parse_method(s)) re-parses to a structurally equal tree, and the
second round trip is byte-identical.
"""

from __future__ import annotations

from sepforge.errors import MalformedTreeError
from sepforge.minij import ast as A

_INDENT = "    "

# Binding strength used to decide where parentheses are required.
_PRECEDENCE = {"||": 1, "&&": 2, "==": 3, "!=": 3, "<": 4, ">": 4, "+": 5, "-": 5}


def print_method(root: A.AstNode) -> str:
    A.validate_tree(root)
    ret_type = root.children[0]
    if ret_type.kind != A.TYPE_NAME:
        raise MalformedTreeError("first child of MethodDecl must be the return type")
    params = [c for c in root.children[1:-1]]
    body = root.children[-1]
    if body.kind != A.BLOCK:
        raise MalformedTreeError("last child of MethodDecl must be the body block")
    rendered_params = ", ".join(_param(p) for p in params)
    lines = [f"{ret_type.label} {root.label}({rendered_params}) {{"]
    for stmt in body.children:
        lines.extend(_statement(stmt, 1))
    lines.append("}")
    return "\n".join(lines) + "\n"


def _param(p: A.AstNode) -> str:
    if p.kind != A.PARAM or len(p.children) != 2:
        raise MalformedTreeError("malformed parameter")
    return f"{p.children[0].label} {p.children[1].label}"


def _statement(stmt: A.AstNode, depth: int) -> list[str]:
    pad = _INDENT * depth
    if stmt.kind == A.VAR_DECL_STMT:
        vtype, frag = stmt.children
        if frag.kind != A.VAR_DECL_FRAGMENT or not frag.children:
            raise MalformedTreeError("malformed variable declaration")
        name = frag.children[0].label
        if len(frag.children) > 1:
            return [f"{pad}{vtype.label} {name} = {_expr(frag.children[1], 0)};"]
        return [f"{pad}{vtype.label} {name};"]
    if stmt.kind == A.ASSIGN:
        target, value = stmt.children
        return [f"{pad}{target.label} = {_expr(value, 0)};"]
    if stmt.kind == A.EXPR_STMT:
        if len(stmt.children) != 1:
            raise MalformedTreeError("expression statement must wrap one expression")
        return [f"{pad}{_expr(stmt.children[0], 0)};"]
    if stmt.kind == A.RETURN_STMT:
        if stmt.children:
            return [f"{pad}return {_expr(stmt.children[0], 0)};"]
        return [f"{pad}return;"]
    if stmt.kind == A.IF_STMT:
        cond = stmt.children[0]
        then_block = stmt.children[1]
        lines = [f"{pad}if ({_expr(cond, 0)}) {{"]
        for inner in then_block.children:
            lines.extend(_statement(inner, depth + 1))
        if len(stmt.children) == 3:
            lines.append(f"{pad}}} else {{")
            for inner in stmt.children[2].children:
                lines.extend(_statement(inner, depth + 1))
        lines.append(f"{pad}}}")
        return lines
    raise MalformedTreeError(f"node kind {stmt.kind} cannot appear as a statement")


def _expr(node: A.AstNode, parent_prec: int) -> str:
    if node.kind == A.IDENTIFIER:
        return node.label
    if node.kind == A.LITERAL:
        if node.lit_category == A.LIT_STRING:
            return f'"{node.label}"'
        return node.label
    if node.kind == A.FIELD_ACCESS:
        return f"{_expr(node.children[0], 99)}.{node.label}"
    if node.kind == A.METHOD_INVOCATION:
        args = node.children
        recv = ""
        if node.has_receiver:
            if not args:
                raise MalformedTreeError("invocation marked as having a receiver has none")
            recv = f"{_expr(args[0], 99)}."
            args = args[1:]
        rendered = ", ".join(_expr(a, 0) for a in args)
        return f"{recv}{node.label}({rendered})"
    if node.kind == A.BINARY_OP:
        prec = _PRECEDENCE.get(node.label)
        if prec is None or len(node.children) != 2:
            raise MalformedTreeError(f"malformed binary operator {node.label!r}")
        lhs = _expr(node.children[0], prec)
        rhs = _expr(node.children[1], prec + 1)  # left-associative
        text = f"{lhs} {node.label} {rhs}"
        if prec < parent_prec:
            return f"({text})"
        return text
    raise MalformedTreeError(f"node kind {node.kind} cannot appear in an expression")
