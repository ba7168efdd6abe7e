"""Fine-grained program dependence graphs for MiniJ methods.

Nodes are data (variables per def-use segment, literals per occurrence),
actions (invocations, field accesses, binary operators, plain assignments)
and controls (if statements). Every node records the AST nodes it was built
from, giving the bidirectional AST<->graph correspondence the transformer
needs.

Edge labels:
    def   action -> data it defines
    ref   data -> action reading it (binary operands, assignment sources)
    recv  receiver value -> invocation / field access
    para  argument value -> invocation (also action operands of binary ops)
    cond  condition action -> control node
    ctrl  control node -> actions it directly dominates
    dep   transitive closure edges added at change-graph time
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from sepforge.errors import ForeignAstNodeError, UnresolvedReceiverError
from sepforge.minij import ast as A
from sepforge.minij.typeenv import LITERAL_TYPES, UNKNOWN, TypeEnv

DATA = "data"
ACTION = "action"
CONTROL = "control"

MODE_SIRIUS = "sirius"
MODE_CPATMINER = "cpatminer"


@dataclass
class FgpdgNode:
    id: int
    category: str
    label: str
    ast_anchors: list[int] = field(default_factory=list)
    # Concrete program text behind the abstracted label: variable name,
    # literal text, or method name. Used by the naming rules, never by matching.
    name: str = ""

    def __repr__(self):
        return f"FgpdgNode({self.id}, {self.category}, {self.label!r})"


@dataclass(frozen=True)
class FgpdgEdge:
    source: int
    target: int
    label: str
    transitive: bool = False


class Fgpdg:
    def __init__(self, method_id: str, ast_root_id: int, mode: str):
        self.method_id = method_id
        self.ast_root_id = ast_root_id
        self.mode = mode
        self.nodes: list[FgpdgNode] = []
        self.edges: list[FgpdgEdge] = []
        self._anchor_index: dict[int, list[int]] = {}
        self._ast_ids: set[int] = set()
        self._edge_keys: set[tuple[int, int, str]] = set()

    # -- construction helpers -------------------------------------------

    def new_node(self, category: str, label: str, anchor: int | None, name: str = "") -> FgpdgNode:
        node = FgpdgNode(id=len(self.nodes), category=category, label=label, name=name)
        self.nodes.append(node)
        if anchor is not None:
            self.add_anchor(node, anchor)
        return node

    def add_anchor(self, node: FgpdgNode, ast_id: int) -> None:
        if ast_id not in node.ast_anchors:
            node.ast_anchors.append(ast_id)
        self._anchor_index.setdefault(ast_id, [])
        if node.id not in self._anchor_index[ast_id]:
            self._anchor_index[ast_id].append(node.id)

    def add_edge(self, source: int, target: int, label: str, transitive: bool = False) -> None:
        if source == target:
            return
        key = (source, target, label)
        if key in self._edge_keys:
            return
        self._edge_keys.add(key)
        self.edges.append(FgpdgEdge(source, target, label, transitive))

    # -- queries ---------------------------------------------------------

    def node(self, node_id: int) -> FgpdgNode:
        return self.nodes[node_id]

    def g_nodes(self, ast_id: int) -> list[FgpdgNode]:
        if ast_id not in self._ast_ids:
            raise ForeignAstNodeError(
                f"AST node {ast_id} does not belong to method {self.method_id!r}")
        return [self.nodes[i] for i in self._anchor_index.get(ast_id, [])]

    def out_edges(self, node_id: int) -> list[FgpdgEdge]:
        return [e for e in self.edges if e.source == node_id]

    def in_edges(self, node_id: int) -> list[FgpdgEdge]:
        return [e for e in self.edges if e.target == node_id]

    def base_edges(self) -> list[FgpdgEdge]:
        return [e for e in self.edges if not e.transitive]


def get_g_nodes(graph: Fgpdg, ast_id: int) -> list[FgpdgNode]:
    """All graph nodes anchored at the given AST node; [] for blocks etc."""
    return graph.g_nodes(ast_id)


def abstract_label(node: A.AstNode, env: TypeEnv, mode: str) -> str:
    """Label a variable, literal or invocation AST node under the given mode."""
    if node.kind == A.IDENTIFIER:
        return env.lookup(node.label) if mode == MODE_SIRIUS else "*"
    if node.kind == A.LITERAL:
        return LITERAL_TYPES[node.lit_category]
    if node.kind in (A.METHOD_INVOCATION, A.FIELD_ACCESS):
        if mode != MODE_SIRIUS or not node.has_receiver_expr():
            return node.label
        return f"{env.expr_type(node.children[0])}#{node.label}"
    raise ValueError(f"no label abstraction for {node.kind}")


def _variable_label(type_name: str, mode: str) -> str:
    return type_name if mode == MODE_SIRIUS else "*"


class _Builder:
    def __init__(self, graph: Fgpdg, env: TypeEnv, mode: str, strict: bool):
        self.g = graph
        self.env = env
        self.mode = mode
        self.strict = strict
        self.current: dict[str, FgpdgNode] = {}  # live data node per variable
        self.param_decl: dict[str, int] = {}     # name -> Param ast id
        self.control: FgpdgNode | None = None    # innermost dominating if

    # -- variables -------------------------------------------------------

    def define(self, name: str, decl_anchor: int) -> FgpdgNode:
        """Starts a new def-use segment for a variable."""
        label = _variable_label(self.env.lookup(name), self.mode)
        node = self.g.new_node(DATA, label, decl_anchor, name=name)
        self.current[name] = node
        return node

    def use(self, ident: A.AstNode) -> FgpdgNode:
        name = ident.label
        node = self.current.get(name)
        if node is None:
            label = _variable_label(self.env.lookup(name), self.mode)
            decl = self.param_decl.get(name)
            node = self.g.new_node(DATA, label, decl, name=name)
            self.current[name] = node
        self.g.add_anchor(node, ident.id)
        return node

    # -- expressions -------------------------------------------------------

    def expr(self, node: A.AstNode) -> FgpdgNode:
        if node.kind == A.IDENTIFIER:
            return self.use(node)
        if node.kind == A.LITERAL:
            return self.g.new_node(DATA, LITERAL_TYPES[node.lit_category],
                                   node.id, name=node.label)
        if node.kind in (A.METHOD_INVOCATION, A.FIELD_ACCESS):
            return self.invocation(node)
        if node.kind == A.BINARY_OP:
            lhs = self.expr(node.children[0])
            rhs = self.expr(node.children[1])
            op = self.new_action(node.label, node.id, name=node.label)
            for operand in (lhs, rhs):
                self.g.add_edge(operand.id, op.id,
                                "ref" if operand.category == DATA else "para")
            return op
        raise ValueError(f"unexpected expression kind {node.kind}")

    def invocation(self, node: A.AstNode) -> FgpdgNode:
        receiver = None
        args = node.children
        if node.has_receiver_expr():
            receiver = self.expr(args[0])
            args = args[1:]
        arg_nodes = [self.expr(a) for a in args]
        if self.mode == MODE_SIRIUS and node.has_receiver_expr():
            recv_type = self.env.expr_type(node.children[0])
            if recv_type == UNKNOWN and self.strict:
                raise UnresolvedReceiverError(
                    f"cannot type the receiver of {node.label!r}")
            label = f"{recv_type}#{node.label}"
        else:
            label = node.label
        action = self.new_action(label, node.id, name=node.label)
        if receiver is not None:
            self.g.add_edge(receiver.id, action.id, "recv")
        for arg in arg_nodes:
            self.g.add_edge(arg.id, action.id, "para")
        return action

    def new_action(self, label: str, anchor: int, name: str = "") -> FgpdgNode:
        action = self.g.new_node(ACTION, label, anchor, name=name)
        if self.control is not None:
            self.g.add_edge(self.control.id, action.id, "ctrl")
        return action

    # -- statements --------------------------------------------------------

    def block(self, node: A.AstNode) -> None:
        for stmt in node.children:
            self.statement(stmt)

    def statement(self, node: A.AstNode) -> None:
        if node.kind == A.VAR_DECL_STMT:
            _, frag = node.children
            init = frag.children[1] if len(frag.children) > 1 else None
            value = self.expr(init) if init is not None else None
            target = self.define(frag.children[0].label, frag.id)
            self._connect_definition(value, target, frag.id)
        elif node.kind == A.ASSIGN:
            ident, rhs = node.children
            value = self.expr(rhs)
            target = self.define(ident.label, ident.id)
            self._connect_definition(value, target, node.id)
        elif node.kind == A.EXPR_STMT:
            self.expr(node.children[0])
        elif node.kind == A.RETURN_STMT:
            if node.children:
                self.expr(node.children[0])
        elif node.kind == A.IF_STMT:
            cond = self.expr(node.children[0])
            control = self.g.new_node(CONTROL, "if", node.id)
            if cond.category == ACTION:
                self.g.add_edge(cond.id, control.id, "cond")
            outer = self.control
            self.control = control
            self.block(node.children[1])
            if len(node.children) == 3:
                self.block(node.children[2])
            self.control = outer
        else:
            raise ValueError(f"unexpected statement kind {node.kind}")

    def _connect_definition(self, value: FgpdgNode | None, target: FgpdgNode,
                            assign_anchor: int) -> None:
        if value is None:
            return
        if value.category == ACTION:
            self.g.add_edge(value.id, target.id, "def")
        else:
            assign = self.new_action("=", assign_anchor, name="=")
            self.g.add_edge(value.id, assign.id, "ref")
            self.g.add_edge(assign.id, target.id, "def")


def build_fgpdg(root: A.AstNode, env: TypeEnv, mode: str = MODE_SIRIUS,
                strict: bool = False, method_id: str | None = None) -> Fgpdg:
    """Builds the dependence graph of one method; pure and deterministic."""
    graph = Fgpdg(method_id=method_id or root.label, ast_root_id=root.id, mode=mode)
    graph._ast_ids = {n.id for n in root.walk()}
    builder = _Builder(graph, env, mode, strict)
    body = root.children[-1]
    for child in root.children[1:-1]:
        builder.param_decl[child.children[1].label] = child.id
    builder.block(body)
    return graph


# -- canonical serialization ------------------------------------------------

FORMAT_VERSION = 1


def _node_sort_key(graph: Fgpdg, node: FgpdgNode):
    first_anchor = min(node.ast_anchors) if node.ast_anchors else -1
    return (node.category, node.label, first_anchor, node.id)


def to_canonical_dict(graph: Fgpdg) -> dict:
    order = sorted(graph.nodes, key=lambda n: _node_sort_key(graph, n))
    renum = {n.id: i for i, n in enumerate(order)}
    nodes = [{
        "id": renum[n.id],
        "category": n.category,
        "label": n.label,
        "name": n.name,
        "astAnchors": n.ast_anchors,
    } for n in order]
    edges = sorted(
        [{"source": renum[e.source], "target": renum[e.target],
          "label": e.label, "transitive": e.transitive} for e in graph.edges],
        key=lambda d: (d["source"], d["target"], d["label"], d["transitive"]))
    return {
        "formatVersion": FORMAT_VERSION,
        "methodId": graph.method_id,
        "mode": graph.mode,
        "nodes": nodes,
        "edges": edges,
    }


def to_canonical_json(graph: Fgpdg) -> str:
    return json.dumps(to_canonical_dict(graph), indent=2, sort_keys=True)
