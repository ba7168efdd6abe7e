"""Maximum-cardinality bipartite matching with deterministic tie-breaking.

The one-to-one resolution step of the node-mapping algorithm needs: maximum
cardinality first, maximum total similarity among those, and a deterministic
choice among remaining ties (lexicographically smallest by left index, then
right index). Weights should be exact (int or Fraction); floats work but lose
the exactness guarantee.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Hashable, Mapping, Sequence


def max_cardinality_matching(
    lefts: Sequence[Hashable],
    rights: Sequence[Hashable],
    weights: Mapping[tuple[Hashable, Hashable], object],
) -> dict[Hashable, Hashable]:
    """Returns {left: right} for the canonical optimal matching.

    `weights` lists the eligible pairs; missing pairs cannot be matched.
    """
    li = {l: i for i, l in enumerate(lefts)}
    ri = {r: i for i, r in enumerate(rights)}
    edges: dict[tuple[int, int], Fraction] = {}
    for (l, r), w in weights.items():
        if l in li and r in ri:
            edges[(li[l], ri[r])] = Fraction(w)
    best_card, best_weight = _solve(len(lefts), len(rights), edges, {})
    pins: dict[int, int | None] = {}
    for i in range(len(lefts)):
        candidates: list[int | None] = sorted(
            j for (a, j) in edges if a == i and j not in
            {p for p in pins.values() if p is not None})
        candidates.append(None)
        for choice in candidates:
            trial = dict(pins)
            trial[i] = choice
            card, weight = _solve(len(lefts), len(rights), edges, trial)
            if card == best_card and weight == best_weight:
                pins[i] = choice
                break
    return {lefts[i]: rights[j] for i, j in pins.items() if j is not None}


def _solve(n_left: int, n_right: int,
           edges: dict[tuple[int, int], Fraction],
           pins: dict[int, int | None]) -> tuple[int, Fraction]:
    """(max cardinality, max total weight at that cardinality) under pins.

    Pinned pairs are contracted out of the network so they are truly forced.
    Successive shortest augmenting paths on the cost network (cost = -weight)
    yield the weight-optimal matching at every cardinality prefix.
    """
    base_card = 0
    base_weight = Fraction(0)
    blocked_left: set[int] = set()
    blocked_right: set[int] = set()
    for i, j in pins.items():
        blocked_left.add(i)
        if j is not None:
            base_card += 1
            base_weight += edges[(i, j)]
            blocked_right.add(j)

    # Node numbering: 0 = source, 1..n_left = lefts, then rights, last = sink.
    src = 0
    sink = 1 + n_left + n_right
    graph: dict[int, list[list]] = {i: [] for i in range(sink + 1)}

    def add(u, v, cap, cost):
        graph[u].append([v, cap, cost, len(graph[v])])
        graph[v].append([u, 0, -cost, len(graph[u]) - 1])

    for i in range(n_left):
        if i not in blocked_left:
            add(src, 1 + i, 1, Fraction(0))
    for j in range(n_right):
        if j not in blocked_right:
            add(1 + n_left + j, sink, 1, Fraction(0))
    for (i, j), w in sorted(edges.items()):
        if i not in blocked_left and j not in blocked_right:
            add(1 + i, 1 + n_left + j, 1, -w)

    card = 0
    total = Fraction(0)
    while True:
        dist, prev = _bellman_ford(graph, src, sink)
        if dist[sink] is None:
            break
        v = sink
        while v != src:
            u, ei = prev[v]
            graph[u][ei][1] -= 1
            rev = graph[u][ei][3]
            graph[v][rev][1] += 1
            v = u
        card += 1
        total += -dist[sink]
    return card + base_card, total + base_weight


def _bellman_ford(graph, src, sink):
    dist = {v: None for v in graph}
    prev = {v: None for v in graph}
    dist[src] = Fraction(0)
    changed = True
    while changed:
        changed = False
        for u in graph:
            if dist[u] is None:
                continue
            for ei, (v, cap, cost, _rev) in enumerate(graph[u]):
                if cap <= 0:
                    continue
                nd = dist[u] + cost
                if dist[v] is None or nd < dist[v]:
                    dist[v] = nd
                    prev[v] = (u, ei)
                    changed = True
    return dist, prev
