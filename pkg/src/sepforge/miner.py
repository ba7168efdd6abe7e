"""Frequent connected change-subgraph mining.

Change graphs are flattened into single labeled multigraphs: old-side nodes,
new-side nodes, dependence edges per side, and map edges as a third edge class
crossing sides. Patterns grow one edge at a time from frequent single nodes
(Apriori-style, complete for exact monomorphic embeddings); duplicates are
collapsed by their occurrence sets, which identify a pattern up to isomorphism
because every embedding is tracked. Support counts distinct change graphs.

Reported patterns (default: only maximal ones) must represent an actual
change: at least one node without an incident in-pattern map edge.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from sepforge.changegraph import ChangeGraph, ChangeId
from sepforge.errors import DisconnectedFragmentError, InternalInvariantError

OLD = "old"
NEW = "new"
MAP = "map"

DEFAULT_MAX_NODES = 20


@dataclass(frozen=True)
class PatternGraph:
    """One side of a pattern: nodes indexed densely, labeled directed edges."""
    nodes: tuple[tuple[str, str], ...]          # (category, label)
    edges: tuple[tuple[int, int, str], ...]     # (source idx, target idx, label)


@dataclass
class SepInstance:
    change_id: ChangeId
    old_embedding: dict[int, int]   # old pattern idx -> old fgPDG node id
    new_embedding: dict[int, int]   # new pattern idx -> new fgPDG node id


@dataclass
class Sep:
    sep_id: str
    mode: str
    old_graph: PatternGraph
    new_graph: PatternGraph
    internal_map_edges: tuple[tuple[int, int], ...]
    instances: list[SepInstance]
    support: int
    code: str
    closure_depth: int = 4
    sources: dict = field(default_factory=dict)  # attached by the pipeline

    @property
    def size(self) -> int:
        return len(self.old_graph.nodes) + len(self.new_graph.nodes)


# -- host graphs --------------------------------------------------------------


class _Host:
    def __init__(self, gid: int, cg: ChangeGraph):
        self.gid = gid
        self.change_id = cg.change_id
        self.labels: list[tuple[str, str, str]] = []   # (side, category, label)
        self.origin: list[tuple[str, int]] = []        # (side, fgPDG node id)
        self.edges: list[tuple[int, int, str]] = []
        self.adjacent: dict[int, list[int]] = {}
        index: dict[tuple[str, int], int] = {}
        for side, graph in ((OLD, cg.old_graph), (NEW, cg.new_graph)):
            for node in graph.nodes:
                uid = len(self.labels)
                index[(side, node.id)] = uid
                self.labels.append((side, node.category, node.label))
                self.origin.append((side, node.id))
                self.adjacent[uid] = []
        for side, graph in ((OLD, cg.old_graph), (NEW, cg.new_graph)):
            for e in graph.edges:
                self._add_edge(index[(side, e.source)], index[(side, e.target)], e.label)
        for o, n in cg.map_edges:
            self._add_edge(index[(OLD, o)], index[(NEW, n)], MAP)

    def _add_edge(self, u: int, v: int, label: str) -> None:
        eid = len(self.edges)
        self.edges.append((u, v, label))
        self.adjacent[u].append(eid)
        self.adjacent[v].append(eid)


# -- mining -------------------------------------------------------------------


@dataclass
class _Pattern:
    nodes: tuple[tuple[str, str, str], ...]
    edges: tuple[tuple[int, int, str], ...]
    # gid -> set of (node image tuple, frozenset of host edge ids)
    embeddings: dict[int, set[tuple[tuple[int, ...], frozenset[int]]]]
    children: list = field(default_factory=list)  # signatures of frequent children

    def support(self) -> int:
        return len(self.embeddings)

    def valid(self) -> bool:
        return _has_unmapped_node(self)

    def occurrence_signature(self) -> tuple:
        return tuple(sorted(
            (gid, frozenset((frozenset(nodes), eids) for nodes, eids in embs))
            for gid, embs in self.embeddings.items()))


def mine_seps(change_graphs: list[ChangeGraph], min_support: int,
              max_nodes: int = DEFAULT_MAX_NODES,
              all_frequent: bool = False) -> list[Sep]:
    """All maximal (or all, with all_frequent) frequent connected change
    subgraphs with at least one unmapped node, sorted by canonical code.

    The default (maximal) search jumps over forced back edges: when every
    embedding of a pattern admits a missing edge between two already-matched
    nodes, any maximal pattern containing this one must contain that edge as
    well (otherwise the extension would be frequent wherever the maximal
    pattern embeds), so only the jump extension needs exploring. This keeps
    the result set exact while skipping the cycle-induced lattice blowup.
    """
    if min_support < 2:
        raise ValueError("min_support must be >= 2")
    if not change_graphs:
        return []
    modes = {cg.mode for cg in change_graphs}
    if len(modes) != 1:
        raise InternalInvariantError("change graphs mix abstraction modes")
    mode = modes.pop()
    depths = [getattr(cg, "closure_depth", 4) for cg in change_graphs]
    hosts = [_Host(i, cg) for i, cg in enumerate(change_graphs)]

    level = _seed_patterns(hosts, min_support)
    all_patterns: dict = dict(level)
    while level:
        level = _grow(level, hosts, min_support, max_nodes,
                      jump_forced=not all_frequent)
        for sig, child in level.items():
            all_patterns.setdefault(sig, child)

    if all_frequent:
        chosen = [p for p in all_patterns.values() if p.valid()]
    else:
        # Maximality among invariant-satisfying patterns: a pattern is out
        # only when some frequent valid (strict) superpattern exists, found by
        # walking the recorded growth links.
        has_valid_super: dict[int, bool] = {}

        def walk(sig) -> bool:
            p = all_patterns[sig]
            key = id(p)
            if key in has_valid_super:
                return has_valid_super[key]
            has_valid_super[key] = False  # DAG; edge counts strictly increase
            result = any(all_patterns[c].valid() or walk(c)
                         for c in p.children if c in all_patterns)
            has_valid_super[key] = result
            return result

        chosen = [p for sig, p in all_patterns.items()
                  if p.valid() and not walk(sig)]
    seps = [_to_sep(p, hosts, mode, depths[0]) for p in chosen]
    seps.sort(key=lambda s: s.code)
    for i, sep in enumerate(seps):
        sep.sep_id = f"sep-{i:03d}"
    return seps


def _seed_patterns(hosts: list[_Host], min_support: int) -> dict:
    by_label: dict[tuple[str, str, str], dict[int, set]] = {}
    for host in hosts:
        for uid, label in enumerate(host.labels):
            by_label.setdefault(label, {}).setdefault(host.gid, set()).add(
                ((uid,), frozenset()))
    level = {}
    for label in sorted(by_label):
        embeddings = by_label[label]
        if len(embeddings) >= min_support:
            p = _Pattern(nodes=(label,), edges=(), embeddings=embeddings)
            level[p.occurrence_signature()] = p
    return level


def _grow(level: dict, hosts: list[_Host], min_support: int, max_nodes: int,
          jump_forced: bool = False) -> dict:
    next_level: dict = {}
    for parent in level.values():
        # descriptor -> embeddings of the extended pattern, and how many of the
        # parent's embeddings admit each extension.
        candidates: dict[tuple, dict[int, set]] = {}
        coverage: dict[tuple, set] = {}
        total_embeddings = 0
        for gid, embs in parent.embeddings.items():
            host = hosts[gid]
            for node_img, edge_ids in embs:
                total_embeddings += 1
                img_index = {uid: i for i, uid in enumerate(node_img)}
                adjacent_eids = sorted({
                    eid for uid in node_img for eid in host.adjacent[uid]
                    if eid not in edge_ids})
                for eid in adjacent_eids:
                    u, v, elabel = host.edges[eid]
                    iu, iv = img_index.get(u), img_index.get(v)
                    if iu is not None and iv is not None:
                        if (iu, iv, elabel) in parent.edges:
                            continue
                        desc = ("back", iu, iv, elabel)
                        new_img = node_img
                    elif iu is not None:
                        if len(parent.nodes) >= max_nodes:
                            continue
                        desc = ("fwd_out", iu, elabel, host.labels[v])
                        new_img = node_img + (v,)
                    elif iv is not None:
                        if len(parent.nodes) >= max_nodes:
                            continue
                        desc = ("fwd_in", iv, elabel, host.labels[u])
                        new_img = node_img + (u,)
                    else:
                        continue
                    candidates.setdefault(desc, {}).setdefault(gid, set()).add(
                        (new_img, edge_ids | {eid}))
                    coverage.setdefault(desc, set()).add((gid, node_img, edge_ids))

        chosen = sorted(candidates, key=repr)
        if jump_forced:
            # Only non-map edges may be jumped: map edges can invalidate a
            # pattern (covering its last unmapped node), and maximality is
            # judged among valid patterns only.
            forced = [d for d in chosen
                      if d[0] == "back" and d[3] != MAP
                      and len(coverage[d]) == total_embeddings]
            if forced:
                chosen = forced[:1]
        for desc in chosen:
            embeddings = candidates[desc]
            if len(embeddings) < min_support:
                continue
            child = _build_child(parent, desc, embeddings)
            sig = child.occurrence_signature()
            if sig not in next_level:
                next_level[sig] = child
            parent.children.append(sig)
    return next_level


def _build_child(parent: _Pattern, desc: tuple, embeddings: dict) -> _Pattern:
    kind = desc[0]
    if kind == "back":
        _, iu, iv, elabel = desc
        nodes = parent.nodes
        edges = tuple(sorted(parent.edges + ((iu, iv, elabel),)))
    elif kind == "fwd_out":
        _, iu, elabel, nlabel = desc
        nodes = parent.nodes + (nlabel,)
        edges = tuple(sorted(parent.edges + ((iu, len(parent.nodes), elabel),)))
    else:
        _, iv, elabel, nlabel = desc
        nodes = parent.nodes + (nlabel,)
        edges = tuple(sorted(parent.edges + ((len(parent.nodes), iv, elabel),)))
    return _Pattern(nodes=nodes, edges=edges, embeddings=embeddings)


def _has_unmapped_node(p: _Pattern) -> bool:
    mapped = set()
    for i, j, elabel in p.edges:
        if elabel == MAP:
            mapped.add(i)
            mapped.add(j)
    return any(i not in mapped for i in range(len(p.nodes)))


def _to_sep(p: _Pattern, hosts: list[_Host], mode: str, closure_depth: int) -> Sep:
    old_idx = [i for i, (side, _, _) in enumerate(p.nodes) if side == OLD]
    new_idx = [i for i, (side, _, _) in enumerate(p.nodes) if side == NEW]
    old_local = {i: k for k, i in enumerate(old_idx)}
    new_local = {i: k for k, i in enumerate(new_idx)}
    old_edges, new_edges, map_pairs = [], [], []
    for i, j, elabel in p.edges:
        side_i, side_j = p.nodes[i][0], p.nodes[j][0]
        if elabel == MAP:
            map_pairs.append((old_local[i], new_local[j]))
        elif side_i == OLD and side_j == OLD:
            old_edges.append((old_local[i], old_local[j], elabel))
        elif side_i == NEW and side_j == NEW:
            new_edges.append((new_local[i], new_local[j], elabel))
        else:
            raise InternalInvariantError("non-map edge crosses sides")
    instances = []
    for gid in sorted(p.embeddings):
        host = hosts[gid]
        for node_img, _eids in sorted(p.embeddings[gid]):
            old_emb = {old_local[i]: host.origin[node_img[i]][1] for i in old_idx}
            new_emb = {new_local[i]: host.origin[node_img[i]][1] for i in new_idx}
            instances.append(SepInstance(host.change_id, old_emb, new_emb))
    code = canonical_code(p.nodes, p.edges)
    return Sep(
        sep_id="",
        mode=mode,
        old_graph=PatternGraph(
            nodes=tuple((c, l) for _, c, l in (p.nodes[i] for i in old_idx)),
            edges=tuple(sorted(old_edges))),
        new_graph=PatternGraph(
            nodes=tuple((c, l) for _, c, l in (p.nodes[i] for i in new_idx)),
            edges=tuple(sorted(new_edges))),
        internal_map_edges=tuple(sorted(map_pairs)),
        instances=instances,
        support=p.support(),
        code=code,
        closure_depth=closure_depth,
    )


# -- canonical codes ----------------------------------------------------------


def canonical_code(nodes, edges) -> str:
    """Canonical text for a connected fragment; isomorphism-invariant.

    Minimizes, over all connected vertex orders, the sequence of (node label,
    sorted incident-edge block against already-placed vertices). The minimum
    is found by breadth-first search over tied-minimal prefixes, so two
    fragments get equal codes exactly when they are isomorphic.
    """
    n = len(nodes)
    if n == 0:
        return "#empty"
    adjacency: dict[int, list[tuple[int, int]]] = {i: [] for i in range(n)}
    for eid, (u, v, _l) in enumerate(edges):
        adjacency[u].append((v, eid))
        adjacency[v].append((u, eid))
    _check_connected(n, adjacency)

    def entry(state: tuple[int, ...], cand: int):
        placed = {u: pos for pos, u in enumerate(state)}
        block = []
        for other, eid in adjacency[cand]:
            if other in placed:
                u, _v, elabel = edges[eid]
                # Direction seen from the candidate: does the edge leave it?
                direction = "out" if u == cand else "in"
                block.append((placed[other], direction, elabel))
        return (tuple(sorted(block)), nodes[cand])

    best_label = min(nodes)
    states = [(i,) for i in sorted(range(n)) if nodes[i] == best_label]
    code_parts = [repr(((), best_label))]
    for _step in range(n - 1):
        scored = []
        for state in states:
            placed_set = set(state)
            frontier = sorted({
                other for u in state for other, _eid in adjacency[u]
                if other not in placed_set})
            for cand in frontier:
                scored.append((entry(state, cand), state, cand))
        if not scored:
            raise DisconnectedFragmentError("fragment is not connected")
        best = min(s[0] for s in scored)
        code_parts.append(repr(best))
        new_states = []
        seen = set()
        for e, state, cand in scored:
            if e == best:
                ns = state + (cand,)
                if ns not in seen:
                    seen.add(ns)
                    new_states.append(ns)
        states = new_states
    return "|".join(code_parts)


def _check_connected(n: int, adjacency: dict[int, list]) -> None:
    if n <= 1:
        return
    seen = {0}
    stack = [0]
    while stack:
        u = stack.pop()
        for v, _eid in adjacency[u]:
            if v not in seen:
                seen.add(v)
                stack.append(v)
    if len(seen) != n:
        raise DisconnectedFragmentError("fragment is not connected")


def sep_fragment(sep: Sep):
    """Rebuilds the flattened (nodes, edges) fragment from a Sep."""
    nodes = tuple((OLD, c, l) for c, l in sep.old_graph.nodes) + \
        tuple((NEW, c, l) for c, l in sep.new_graph.nodes)
    offset = len(sep.old_graph.nodes)
    edges = list(sep.old_graph.edges)
    edges += [(i + offset, j + offset, l) for i, j, l in sep.new_graph.edges]
    edges += [(o, n + offset, MAP) for o, n in sep.internal_map_edges]
    return nodes, tuple(sorted(edges))
