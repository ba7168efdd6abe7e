"""Detection of client locations where a pattern's old graph embeds.

Matching is a label- and edge-label-preserving injective monomorphism: the
client may carry extra edges between matched nodes (patterns sit inside more
context), and the pattern may be disconnected on its old side (the change
graph is only connected across both sides). Backtracking assigns the most
constrained pattern node first, preferring nodes adjacent to the partial
assignment.
"""

from __future__ import annotations

from dataclasses import dataclass

from sepforge.errors import ModeMismatchError
from sepforge.fgpdg import Fgpdg
from sepforge.miner import PatternGraph, Sep


@dataclass
class Match:
    sep_id: str
    client_method_id: str
    g_map: dict[int, int]  # pattern old-graph index -> client node id

    def image(self) -> frozenset[int]:
        return frozenset(self.g_map.values())


def embed_pattern(pattern: PatternGraph, client: Fgpdg) -> list[dict[int, int]]:
    """All embeddings of a pattern graph into a client graph, deduplicated by
    image node set, in deterministic order. The empty pattern embeds once,
    trivially."""
    n = len(pattern.nodes)
    if n == 0:
        return [{}]
    # Candidate lists per pattern node by (category, label).
    candidates: list[list[int]] = []
    for category, label in pattern.nodes:
        candidates.append(sorted(
            node.id for node in client.nodes
            if node.category == category and node.label == label))
    if any(not c for c in candidates):
        return []

    out_adj: dict[int, set[tuple[int, str]]] = {}
    in_adj: dict[int, set[tuple[int, str]]] = {}
    for e in client.edges:
        out_adj.setdefault(e.source, set()).add((e.target, e.label))
        in_adj.setdefault(e.target, set()).add((e.source, e.label))

    pattern_out: dict[int, list[tuple[int, str]]] = {i: [] for i in range(n)}
    pattern_in: dict[int, list[tuple[int, str]]] = {i: [] for i in range(n)}
    for i, j, label in pattern.edges:
        pattern_out[i].append((j, label))
        pattern_in[j].append((i, label))

    # Static order: most constrained first, then adjacency to already-ordered.
    order: list[int] = []
    remaining = set(range(n))
    while remaining:
        adjacent = {j for i in order
                    for j, _ in pattern_out[i] + pattern_in[i] if j in remaining}
        pool = adjacent if adjacent else remaining
        nxt = min(pool, key=lambda i: (len(candidates[i]), i))
        order.append(nxt)
        remaining.discard(nxt)

    results: list[dict[int, int]] = []
    seen_images: set[frozenset[int]] = set()
    assignment: dict[int, int] = {}
    used: set[int] = set()

    def ok(i: int, c: int) -> bool:
        for j, label in pattern_out[i]:
            if j in assignment and (assignment[j], label) not in out_adj.get(c, ()):
                return False
        for j, label in pattern_in[i]:
            if j in assignment and (assignment[j], label) not in in_adj.get(c, ()):
                return False
        return True

    def search(depth: int) -> None:
        if depth == n:
            image = frozenset(assignment.values())
            if image not in seen_images:
                seen_images.add(image)
                results.append(dict(assignment))
            return
        i = order[depth]
        for c in candidates[i]:
            if c in used or not ok(i, c):
                continue
            assignment[i] = c
            used.add(c)
            search(depth + 1)
            del assignment[i]
            used.discard(c)

    search(0)
    results.sort(key=lambda m: tuple(m[i] for i in range(n)))
    return results


def detect(client: Fgpdg, sep: Sep) -> list[Match]:
    """All locations in the client where the pattern's old graph embeds.

    A pattern whose old graph is empty (pure insertion) has no locatable
    application site, so nothing is reported for it.
    """
    if client.mode != sep.mode:
        raise ModeMismatchError(
            f"client graph mode {client.mode!r} != pattern mode {sep.mode!r}")
    if not sep.old_graph.nodes:
        return []
    return [Match(sep.sep_id, client.method_id, emb)
            for emb in embed_pattern(sep.old_graph, client)]


def filter_already_applied(client: Fgpdg, sep: Sep, matches: list[Match]) -> list[Match]:
    """Drops matches overlapping any embedding of the pattern's new graph,
    so an already-applied edit is not applied again."""
    new_embeddings = embed_pattern(sep.new_graph, client)
    if not new_embeddings:
        return list(matches)
    covered: set[int] = set()
    for emb in new_embeddings:
        covered.update(emb.values())
    return [m for m in matches if not (set(m.g_map.values()) & covered)]
