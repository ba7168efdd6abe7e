"""AST node type for MiniJ methods.

One tree per method. Nodes are mutable dataclasses so the transformer can
rewrite client trees in place, but the parser/printer treat them as frozen.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Optional

from sepforge.errors import MalformedTreeError

# Node kinds.
METHOD_DECL = "MethodDecl"
PARAM = "Param"
BLOCK = "Block"
VAR_DECL_STMT = "VarDeclStmt"
EXPR_STMT = "ExprStmt"
IF_STMT = "IfStmt"
RETURN_STMT = "ReturnStmt"
ASSIGN = "Assign"
METHOD_INVOCATION = "MethodInvocation"
FIELD_ACCESS = "FieldAccess"
IDENTIFIER = "Identifier"
LITERAL = "Literal"
BINARY_OP = "BinaryOp"
TYPE_NAME = "TypeName"
VAR_DECL_FRAGMENT = "VarDeclFragment"

ALL_KINDS = frozenset({
    METHOD_DECL, PARAM, BLOCK, VAR_DECL_STMT, EXPR_STMT, IF_STMT, RETURN_STMT,
    ASSIGN, METHOD_INVOCATION, FIELD_ACCESS, IDENTIFIER, LITERAL, BINARY_OP,
    TYPE_NAME, VAR_DECL_FRAGMENT,
})

# Kinds that occupy a statement slot inside a Block.
STATEMENT_KINDS = frozenset({VAR_DECL_STMT, EXPR_STMT, IF_STMT, RETURN_STMT, ASSIGN})

# Literal categories.
LIT_NUMBER = "number"
LIT_STRING = "string"
LIT_BOOLEAN = "boolean"
LIT_NULL = "null"


@dataclass
class AstNode:
    id: int
    kind: str
    label: str = ""
    children: list["AstNode"] = field(default_factory=list)
    parent: Optional["AstNode"] = None
    lit_category: Optional[str] = None
    # MethodInvocation only: whether children[0] is the receiver expression.
    has_receiver: bool = False
    span: Optional[tuple[int, int, int, int]] = None  # (line, col, end_line, end_col)

    def __repr__(self):
        return f"AstNode({self.id}, {self.kind}, {self.label!r})"

    def walk(self) -> Iterator["AstNode"]:
        """Pre-order traversal of the subtree rooted here."""
        yield self
        for child in self.children:
            yield from child.walk()

    def add_child(self, child: "AstNode") -> None:
        child.parent = self
        self.children.append(child)

    def child_index(self) -> int:
        if self.parent is None:
            raise MalformedTreeError("root node has no child index")
        return self.parent.children.index(self)

    def is_statement(self) -> bool:
        return self.kind in STATEMENT_KINDS

    def has_receiver_expr(self) -> bool:
        """True when children[0] is a receiver (field accesses always have one)."""
        if self.kind == FIELD_ACCESS:
            return True
        return self.kind == METHOD_INVOCATION and self.has_receiver

    def height(self) -> int:
        if not self.children:
            return 1
        return 1 + max(c.height() for c in self.children)


def iter_nodes(root: AstNode) -> list[AstNode]:
    return list(root.walk())


def node_by_id(root: AstNode, node_id: int) -> AstNode:
    for node in root.walk():
        if node.id == node_id:
            return node
    raise MalformedTreeError(f"no node with id {node_id} in tree")


def structurally_equal(a: AstNode, b: AstNode) -> bool:
    """Equality ignoring ids, spans and parent identity."""
    if a.kind != b.kind or a.label != b.label or a.lit_category != b.lit_category \
            or a.has_receiver != b.has_receiver:
        return False
    if len(a.children) != len(b.children):
        return False
    return all(structurally_equal(x, y) for x, y in zip(a.children, b.children))


def copy_tree(root: AstNode, id_counter: Optional[Iterator[int]] = None) -> AstNode:
    """Deep copy; keeps original ids unless a fresh id iterator is supplied."""
    new = AstNode(
        id=next(id_counter) if id_counter is not None else root.id,
        kind=root.kind,
        label=root.label,
        lit_category=root.lit_category,
        has_receiver=root.has_receiver,
        span=root.span,
    )
    for child in root.children:
        new.add_child(copy_tree(child, id_counter))
    return new


def validate_tree(root: AstNode) -> None:
    """Checks the documented tree invariants; raises MalformedTreeError."""
    if root.kind != METHOD_DECL:
        raise MalformedTreeError(f"root must be MethodDecl, got {root.kind}")
    seen: set[int] = set()
    for node in root.walk():
        if node.kind not in ALL_KINDS:
            raise MalformedTreeError(f"unknown node kind {node.kind!r}")
        if node.id in seen:
            raise MalformedTreeError(f"duplicate node id {node.id}")
        seen.add(node.id)
        for child in node.children:
            if child.parent is not node:
                raise MalformedTreeError(
                    f"parent link of node {child.id} does not match its container")
        if node.kind == LITERAL and node.lit_category is None:
            raise MalformedTreeError(f"literal node {node.id} lacks a category")
