"""Change graphs: old and new fgPDGs side by side, linked by map edges.

Map edges connect category-compatible nodes whose AST anchors are mapped by
the AST differencing result; ambiguity is resolved one-to-one by maximum
cardinality matching scored by the number of shared mapped anchors.

Transitive dependence closure is computed per side: composite paths over the
data-dependence relation ({ref, def} edges) and over ctrl chains, up to a
configurable path length, are materialized as edges labeled "dep" and flagged
transitive.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from sepforge.astdiff import AstMapping
from sepforge.fgpdg import Fgpdg, build_fgpdg
from sepforge.matching import max_cardinality_matching
from sepforge.minij import ast as A
from sepforge.minij.typeenv import TypeEnv

DEFAULT_CLOSURE_DEPTH = 4

# Edge-label classes participating in transitive closure.
_CLOSURE_CLASSES = (frozenset({"ref", "def"}), frozenset({"ctrl"}))


@dataclass(frozen=True, order=True)
class ChangeId:
    method_id: str
    time: int

    def __post_init__(self):
        if not self.method_id:
            raise ValueError("methodId must be nonempty")
        if self.time < 0:
            raise ValueError("time must be >= 0")


@dataclass
class ChangeGraph:
    change_id: ChangeId
    old_graph: Fgpdg
    new_graph: Fgpdg
    map_edges: list[tuple[int, int]]  # (old node id, new node id)

    @property
    def mode(self) -> str:
        return self.old_graph.mode

    def changed_old(self) -> set[int]:
        mapped = {o for o, _ in self.map_edges}
        return {n.id for n in self.old_graph.nodes} - mapped

    def changed_new(self) -> set[int]:
        mapped = {n for _, n in self.map_edges}
        return {n.id for n in self.new_graph.nodes} - mapped


def transitive_closure(graph: Fgpdg, depth: int = DEFAULT_CLOSURE_DEPTH) -> None:
    """Adds "dep" edges for composite base-edge paths of length 2..depth.

    Only base (non-transitive) edges form paths, so re-running after stripping
    transitive edges reproduces the same edge set.
    """
    for labels in _CLOSURE_CLASSES:
        adjacency: dict[int, list[int]] = {}
        for e in graph.base_edges():
            if e.label in labels:
                adjacency.setdefault(e.source, []).append(e.target)
        for start in sorted(adjacency):
            frontier = list(adjacency[start])
            seen = set(frontier)
            for _ in range(depth - 1):
                nxt = []
                for node in frontier:
                    for succ in adjacency.get(node, []):
                        if succ not in seen:
                            seen.add(succ)
                            nxt.append(succ)
                            graph.add_edge(start, succ, "dep", transitive=True)
                frontier = nxt
                if not frontier:
                    break


def strip_transitive(graph: Fgpdg) -> None:
    graph.edges = [e for e in graph.edges if not e.transitive]
    graph._edge_keys = {(e.source, e.target, e.label) for e in graph.edges}


def compute_map_edges(old_g: Fgpdg, new_g: Fgpdg, ast_map: AstMapping) -> list[tuple[int, int]]:
    """One-to-one map edges between category-compatible anchor-mapped nodes."""
    candidates: dict[tuple[int, int], Fraction] = {}
    new_by_anchor: dict[int, list[int]] = {}
    for node in new_g.nodes:
        for anchor in node.ast_anchors:
            new_by_anchor.setdefault(anchor, []).append(node.id)
    for old_node in old_g.nodes:
        counts: dict[int, int] = {}
        for anchor in old_node.ast_anchors:
            mapped = ast_map.get(anchor)
            if mapped is None:
                continue
            for new_id in new_by_anchor.get(mapped, []):
                if new_g.node(new_id).category == old_node.category:
                    counts[new_id] = counts.get(new_id, 0) + 1
        for new_id, score in counts.items():
            # Equal labels break ties between anchor-count-equal candidates.
            bonus = Fraction(1, 2) if new_g.node(new_id).label == old_node.label else 0
            candidates[(old_node.id, new_id)] = Fraction(score) + bonus
    lefts = [n.id for n in old_g.nodes]
    rights = [n.id for n in new_g.nodes]
    matching = max_cardinality_matching(lefts, rights, candidates)
    return sorted(matching.items())


def build_change_graph(old_ast: A.AstNode, new_ast: A.AstNode,
                       env_old: TypeEnv, env_new: TypeEnv,
                       ast_map: AstMapping, change_id: ChangeId,
                       mode: str = "sirius",
                       closure_depth: int = DEFAULT_CLOSURE_DEPTH) -> ChangeGraph:
    old_g = build_fgpdg(old_ast, env_old, mode, method_id=f"{change_id.method_id}@old")
    new_g = build_fgpdg(new_ast, env_new, mode, method_id=f"{change_id.method_id}@new")
    map_edges = compute_map_edges(old_g, new_g, ast_map)
    transitive_closure(old_g, closure_depth)
    transitive_closure(new_g, closure_depth)
    return ChangeGraph(change_id=change_id, old_graph=old_g, new_graph=new_g,
                       map_edges=map_edges)
