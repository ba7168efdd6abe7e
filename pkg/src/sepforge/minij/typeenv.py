"""Per-method type environment.

MiniJ has no class declarations, so invocation return types come from a
builtin signature table: a JSON mapping "ReceiverType#method" -> return type.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from sepforge.errors import DuplicateDeclarationError
from sepforge.minij import ast as A

UNKNOWN = "Unknown"

# Literal category -> type name used for label abstraction.
LITERAL_TYPES = {
    A.LIT_NUMBER: "int",
    A.LIT_STRING: "String",
    A.LIT_BOOLEAN: "boolean",
    A.LIT_NULL: "null",
}


@dataclass
class TypeEnv:
    variables: dict[str, str] = field(default_factory=dict)
    signatures: dict[str, str] = field(default_factory=dict)

    def lookup(self, name: str) -> str:
        return self.variables.get(name, UNKNOWN)

    def return_type(self, receiver_type: str, method: str) -> str:
        return self.signatures.get(f"{receiver_type}#{method}", UNKNOWN)

    def expr_type(self, node: A.AstNode) -> str:
        """Static type of an expression; UNKNOWN where it cannot be derived."""
        if node.kind == A.IDENTIFIER:
            return self.lookup(node.label)
        if node.kind == A.LITERAL:
            return LITERAL_TYPES[node.lit_category]
        if node.kind == A.METHOD_INVOCATION:
            if node.has_receiver:
                return self.return_type(self.expr_type(node.children[0]), node.label)
            return self.return_type("", node.label)
        if node.kind == A.FIELD_ACCESS:
            return self.return_type(self.expr_type(node.children[0]), node.label)
        if node.kind == A.BINARY_OP:
            if node.label in ("==", "!=", "&&", "||", "<", ">"):
                return "boolean"
            return "int"
        return UNKNOWN


def build_type_env(root: A.AstNode, signatures: dict[str, str] | None = None) -> TypeEnv:
    """Collects parameter and local declarations, one flat scope per method.

    Undeclared names used as receivers are recorded with the Unknown type so
    that every receiver resolves to something.
    """
    env = TypeEnv(signatures=dict(signatures or {}))
    for node in root.walk():
        if node.kind == A.PARAM:
            _declare(env, node.children[1].label, node.children[0].label)
        elif node.kind == A.VAR_DECL_STMT:
            vtype, frag = node.children
            _declare(env, frag.children[0].label, vtype.label)
    for node in root.walk():
        if node.kind in (A.METHOD_INVOCATION, A.FIELD_ACCESS) \
                and node.has_receiver_expr():
            recv = node.children[0]
            if recv.kind == A.IDENTIFIER and recv.label not in env.variables:
                env.variables[recv.label] = UNKNOWN
    return env


def _declare(env: TypeEnv, name: str, type_name: str) -> None:
    if name in env.variables:
        raise DuplicateDeclarationError(f"variable {name!r} declared twice")
    env.variables[name] = type_name


def load_signatures(path: str | Path) -> dict[str, str]:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(data, dict):
        raise ValueError("signature table must be a JSON object")
    return {str(k): str(v) for k, v in data.items()}
