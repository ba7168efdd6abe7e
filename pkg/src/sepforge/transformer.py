"""Applying a pattern to a matched client location.

The pipeline is: map the pattern's new-version AST onto the client AST by
walking through the dependence graphs (new AST -> old AST -> old graph ->
client graph -> client AST), delete the client AST nodes matched by the
pattern's old graph, then transplant minimum transplantable subtrees (MTSs)
of the new-version AST into the client, grafting client subtrees back at
mapped leaves and concretizing variable and literal names.
"""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction

from sepforge.astdiff import AstMapping, map_asts
from sepforge.changegraph import transitive_closure
from sepforge.detector import Match
from sepforge.errors import InvalidResultError, MalformedTreeError, MinijSyntaxError, \
    UnattachableMtsError
from sepforge.fgpdg import DATA, Fgpdg, build_fgpdg
from sepforge.matching import max_cardinality_matching
from sepforge.miner import Sep
from sepforge.minij import ast as A
from sepforge.minij import parse_method, print_method
from sepforge.minij.typeenv import TypeEnv


@dataclass
class PatternInstance:
    """One concrete change example backing a pattern, fully analyzed."""
    method_id: str
    time: int
    old_ast: A.AstNode
    new_ast: A.AstNode
    old_env: TypeEnv
    new_env: TypeEnv
    old_graph: Fgpdg
    new_graph: Fgpdg
    ast_map_old_new: AstMapping      # pairs (old ast id, new ast id)
    old_embedding: dict[int, int]    # sep old index -> old graph node id
    new_embedding: dict[int, int]    # sep new index -> new graph node id


@dataclass
class NodeMappingSet:
    a_new_old: dict[int, int]        # new ast id -> old ast id
    g_old_cli: dict[int, int]        # old graph node id -> client node id
    a_new_cli: dict[int, int]        # new ast id -> client ast id


@dataclass
class Mts:
    root_node_id: int
    member_node_ids: frozenset[int]
    source_g_node_id: int
    leaf_node_ids: tuple[int, ...]


def build_pattern_instance(sep: Sep, method_id: str, time: int,
                           old_source: str, new_source: str,
                           signatures: dict[str, str],
                           old_embedding: dict[int, int],
                           new_embedding: dict[int, int]) -> PatternInstance:
    from sepforge.minij import build_type_env
    old_ast = parse_method(old_source)
    new_ast = parse_method(new_source)
    old_env = build_type_env(old_ast, signatures)
    new_env = build_type_env(new_ast, signatures)
    old_graph = build_fgpdg(old_ast, old_env, sep.mode, method_id=f"{method_id}@old")
    new_graph = build_fgpdg(new_ast, new_env, sep.mode, method_id=f"{method_id}@new")
    transitive_closure(old_graph, sep.closure_depth)
    transitive_closure(new_graph, sep.closure_depth)
    return PatternInstance(
        method_id=method_id, time=time, old_ast=old_ast, new_ast=new_ast,
        old_env=old_env, new_env=new_env, old_graph=old_graph, new_graph=new_graph,
        ast_map_old_new=map_asts(old_ast, new_ast),
        old_embedding=old_embedding, new_embedding=new_embedding)


# -- Node mapping (new pattern AST -> client AST) -----------------------------


def _path_set(graph: Fgpdg, node_id: int, inside: set[int]) -> frozenset:
    """Encodes a node by its single-edge paths into the matched region."""
    label = graph.node(node_id).label
    paths = set()
    for e in graph.out_edges(node_id):
        if e.target in inside:
            paths.add((label, f"{e.label}>", graph.node(e.target).label))
    for e in graph.in_edges(node_id):
        if e.source in inside:
            paths.add((label, f"{e.label}<", graph.node(e.source).label))
    return frozenset(paths)


def calc_path_based_gmap(old_graph: Fgpdg, client_graph: Fgpdg,
                         outside_old: list[int], outside_cli: list[int],
                         sep_old_image: set[int], sep_cli_image: set[int]
                         ) -> dict[tuple[int, int], Fraction]:
    """Candidate mappings: each outside old node paired with the client nodes
    reaching its maximum Dice similarity of path sets (> 0)."""
    old_paths = {g: _path_set(old_graph, g, sep_old_image) for g in outside_old}
    cli_paths = {c: _path_set(client_graph, c, sep_cli_image) for c in outside_cli}
    candidates: dict[tuple[int, int], Fraction] = {}
    for g in outside_old:
        pg = old_paths[g]
        if not pg:
            continue
        scores: dict[int, Fraction] = {}
        for c in outside_cli:
            pc = cli_paths[c]
            if not pc:
                continue
            common = len(pg & pc)
            if common == 0:
                continue
            scores[c] = Fraction(2 * common, len(pg) + len(pc))
        if not scores:
            continue
        best = max(scores.values())
        for c, s in scores.items():
            if s == best:
                candidates[(g, c)] = s
    return candidates


def detect_old_to_client_gmap(all_old_g: set[int], sep_internal: dict[int, int],
                              old_graph: Fgpdg, client_graph: Fgpdg) -> dict[int, int]:
    """Extends the detector-provided mapping to nodes outside the pattern via
    path-based similarity resolved by maximum-cardinality matching."""
    sep_old_image = set(sep_internal.keys())
    sep_cli_image = set(sep_internal.values())
    outside_old = sorted(g for g in all_old_g if g not in sep_old_image)
    outside_cli = sorted(n.id for n in client_graph.nodes if n.id not in sep_cli_image)
    candidates = calc_path_based_gmap(old_graph, client_graph, outside_old,
                                      outside_cli, sep_old_image, sep_cli_image)
    matching = max_cardinality_matching(outside_old, outside_cli, candidates)
    result = dict(sep_internal)
    result.update(matching)
    return result


def _anchor_role(ast_nodes: dict[int, A.AstNode], anchors: list[int]) -> tuple[int | None, list[int]]:
    """Splits a node's anchors into (declaration anchor, ordered uses)."""
    decl = None
    uses = []
    for a in anchors:
        kind = ast_nodes[a].kind
        if kind in (A.VAR_DECL_FRAGMENT, A.PARAM) and decl is None:
            decl = a
        elif kind == A.IDENTIFIER and ast_nodes[a].parent is not None \
                and ast_nodes[a].parent.kind == A.ASSIGN \
                and ast_nodes[a].parent.children[0] is ast_nodes[a] and decl is None:
            decl = a
        else:
            uses.append(a)
    return decl, uses


def map_new_to_client(instance: PatternInstance, match: Match,
                      client_graph: Fgpdg, client_ast: A.AstNode) -> NodeMappingSet:
    """Algorithm: collect old graph nodes reachable from the new AST, extend
    the old->client graph mapping beyond the pattern, then push every new AST
    node through to a client AST node, voting by mode when several anchors
    are reachable."""
    a_new_old = {n: o for o, n in instance.ast_map_old_new.pairs}
    sep_internal = {instance.old_embedding[q]: cli
                    for q, cli in match.g_map.items()}
    all_old_g: set[int] = set()
    for n in instance.new_ast.walk():
        o = a_new_old.get(n.id)
        if o is None:
            continue
        for g in instance.old_graph.g_nodes(o):
            all_old_g.add(g.id)
    g_old_cli = detect_old_to_client_gmap(all_old_g, sep_internal,
                                          instance.old_graph, client_graph)

    old_nodes = {n.id: n for n in instance.old_ast.walk()}
    cli_nodes = {n.id: n for n in client_ast.walk()}
    cli_order = {n.id: i for i, n in enumerate(client_ast.walk())}

    a_new_cli: dict[int, int] = {}
    for n in instance.new_ast.walk():
        o = a_new_old.get(n.id)
        if o is None:
            continue
        votes: list[int] = []
        for g in instance.old_graph.g_nodes(o):
            cli_g = g_old_cli.get(g.id)
            if cli_g is None:
                continue
            cli_node = client_graph.node(cli_g)
            anchor = _select_anchor(instance.old_graph.node(g.id).ast_anchors, o,
                                    cli_node.ast_anchors, old_nodes, cli_nodes)
            if anchor is not None and cli_nodes[anchor].kind == n.kind:
                votes.append(anchor)
        if votes:
            a_new_cli[n.id] = vote_mode(votes, cli_order)
    return NodeMappingSet(a_new_old=a_new_old, g_old_cli=g_old_cli, a_new_cli=a_new_cli)


def vote_mode(votes: list[int], order: dict[int, int]) -> int:
    """Most frequent candidate; ties go to the earliest in document order."""
    counts = Counter(votes)
    best = max(counts.values())
    return min((a for a in votes if counts[a] == best), key=lambda a: order[a])


def _select_anchor(old_anchors: list[int], o: int, cli_anchors: list[int],
                   old_nodes: dict[int, A.AstNode], cli_nodes: dict[int, A.AstNode]
                   ) -> int | None:
    """Picks the client anchor playing the same role (declaration / i-th use)
    as the old anchor does for its graph node."""
    if len(old_anchors) == 1 and len(cli_anchors) == 1:
        return cli_anchors[0]
    old_decl, old_uses = _anchor_role(old_nodes, old_anchors)
    cli_decl, cli_uses = _anchor_role(cli_nodes, cli_anchors)
    if o == old_decl:
        return cli_decl
    if o in old_uses and cli_uses:
        return cli_uses[min(old_uses.index(o), len(cli_uses) - 1)]
    return None


# -- MTS computation -----------------------------------------------------------


def compute_mts(g_node_id: int, instance: PatternInstance,
                a_new_cli: dict[int, int]) -> Mts:
    """Smallest induced subtree whose root is mapped-to-client or a statement
    and whose frontier stops at mapped-to-client or childless nodes."""
    new_nodes = {n.id: n for n in instance.new_ast.walk()}
    anchors = instance.new_graph.node(g_node_id).ast_anchors
    node = new_nodes[anchors[0]]
    while node.id not in a_new_cli and not node.is_statement() \
            and node.parent is not None and node.parent.kind != A.METHOD_DECL:
        node = node.parent
    members = {node.id}
    queue = list(node.children)
    while queue:
        child = queue.pop(0)
        members.add(child.id)
        if child.id not in a_new_cli:
            queue.extend(child.children)
    leaves = tuple(sorted(
        m for m in members
        if not any(c.id in members for c in new_nodes[m].children)))
    return Mts(root_node_id=node.id, member_node_ids=frozenset(members),
               source_g_node_id=g_node_id, leaf_node_ids=leaves)


def compute_mts_set(sep: Sep, instance: PatternInstance,
                    a_new_cli: dict[int, int]) -> list[Mts]:
    """MTSs for every new-pattern node, contained ones discarded, doc order."""
    new_order = {n.id: i for i, n in enumerate(instance.new_ast.walk())}
    all_mts = []
    for q in sorted(instance.new_embedding):
        g_id = instance.new_embedding[q]
        all_mts.append(compute_mts(g_id, instance, a_new_cli))
    all_mts.sort(key=lambda m: (new_order[m.root_node_id], m.source_g_node_id))
    kept: list[Mts] = []
    for i, mts in enumerate(all_mts):
        contained = False
        for j, other in enumerate(all_mts):
            if i == j:
                continue
            if mts.member_node_ids < other.member_node_ids:
                contained = True
                break
            if mts.member_node_ids == other.member_node_ids and j < i:
                contained = True
                break
        if not contained:
            kept.append(mts)
    return kept


# -- transplantation -----------------------------------------------------------


class _WorkingTree:
    """Mutable copy of the client tree, addressable by original node id."""

    def __init__(self, client_ast: A.AstNode):
        self.root = A.copy_tree(client_ast)
        self._reindex()
        self.original = {n.id: n for n in client_ast.walk()}
        max_id = max(self.original) if self.original else 0
        self.fresh_ids = itertools.count(max_id + 1)
        self.transplant_ids: set[int] = set()

    def _reindex(self) -> None:
        self.index = {}
        for node in self.root.walk():
            self.index[node.id] = node

    def alive(self, node_id: int) -> bool:
        return node_id in self.index

    def detach(self, node_id: int) -> None:
        node = self.index.get(node_id)
        if node is None or node.parent is None:
            return
        node.parent.children.remove(node)
        node.parent = None
        self._reindex()

    def nearest_alive_ancestor(self, node_id: int) -> tuple[A.AstNode, int]:
        """(alive working-tree ancestor, original node id of the detach point)."""
        original = self.original[node_id]
        child = original
        anc = original.parent
        while anc is not None and not self.alive(anc.id):
            child = anc
            anc = anc.parent
        if anc is None:
            raise UnattachableMtsError("no surviving ancestor to attach to")
        return self.index[anc.id], child.id

    def insertion_index(self, parent: A.AstNode, original_child_id: int) -> int:
        """Index in the current child list matching the original position."""
        orig_parent = self.original[parent.id]
        orig_order = {c.id: i for i, c in enumerate(orig_parent.children)}
        target_pos = orig_order[original_child_id]
        idx = 0
        for child in parent.children:
            pos = orig_order.get(child.id)
            if pos is not None and pos >= target_pos:
                break
            idx += 1
        return idx

    def insert(self, parent: A.AstNode, index: int, node: A.AstNode) -> None:
        node.parent = parent
        parent.children.insert(index, node)
        self._reindex()


def _build_transplant(mts: Mts, instance: PatternInstance,
                      a_new_cli: dict[int, int], work: _WorkingTree,
                      provenance: dict[int, tuple[str, int]]) -> A.AstNode:
    new_nodes = {n.id: n for n in instance.new_ast.walk()}

    def copy_member(orig: A.AstNode) -> A.AstNode:
        copy = A.AstNode(id=next(work.fresh_ids), kind=orig.kind, label=orig.label,
                         lit_category=orig.lit_category, has_receiver=orig.has_receiver)
        provenance[copy.id] = ("pattern", orig.id)
        work.transplant_ids.add(copy.id)
        member_children = [c for c in orig.children if c.id in mts.member_node_ids]
        if orig.id in a_new_cli and orig.id in mts.leaf_node_ids:
            # Mapped leaf: take over the client node's children.
            client_node = work.original[a_new_cli[orig.id]]
            for child in client_node.children:
                copy.add_child(graft_client(child))
            return copy
        for child in member_children:
            copy.add_child(copy_member(child))
        return copy

    def graft_client(orig_client: A.AstNode) -> A.AstNode:
        copy = A.AstNode(id=next(work.fresh_ids), kind=orig_client.kind,
                         label=orig_client.label, lit_category=orig_client.lit_category,
                         has_receiver=orig_client.has_receiver)
        provenance[copy.id] = ("client", orig_client.id)
        work.transplant_ids.add(copy.id)
        for child in orig_client.children:
            copy.add_child(graft_client(child))
        return copy

    return copy_member(new_nodes[mts.root_node_id])


def _subtree_ids(node: A.AstNode) -> set[int]:
    return {n.id for n in node.walk()}


def _contains_transplant(node: A.AstNode, work: _WorkingTree) -> bool:
    return any(n.id in work.transplant_ids for n in node.walk())


def _replace_node(work: _WorkingTree, target: A.AstNode, transplant: A.AstNode) -> None:
    parent = target.parent
    idx = parent.children.index(target)
    work.detach(target.id)
    _insert_wrapped(work, parent, idx, transplant)


def _attach(mts: Mts, transplant: A.AstNode, instance: PatternInstance,
            a_new_cli: dict[int, int], work: _WorkingTree,
            consumed: set[int], pattern_copies: dict[int, int],
            graft_copies: dict[int, int]) -> bool:
    new_order = {n.id: i for i, n in enumerate(instance.new_ast.walk())}
    root_client = a_new_cli.get(mts.root_node_id)
    if root_client is not None:
        # An earlier transplant may already carry a copy of this root (as a
        # mapped leaf) or a graft of its client image; the fuller subtree
        # built here supersedes that copy.
        copy_id = pattern_copies.get(mts.root_node_id)
        if copy_id is not None and work.alive(copy_id):
            _replace_node(work, work.index[copy_id], transplant)
            return True
        if work.alive(root_client):
            target = work.index[root_client]
            if root_client in consumed or _contains_transplant(target, work):
                return False
            if target.parent is None:
                return False
            _replace_node(work, target, transplant)
            consumed.update(_subtree_ids(work.original[root_client]))
            return True
        graft_id = graft_copies.get(root_client)
        if graft_id is not None and work.alive(graft_id):
            _replace_node(work, work.index[graft_id], transplant)
            return True
        if root_client in consumed:
            return False
        anc, detach_point = work.nearest_alive_ancestor(root_client)
        idx = work.insertion_index(anc, detach_point)
        _insert_wrapped(work, anc, idx, transplant)
        consumed.update(_subtree_ids(work.original[root_client]))
        return True

    # Root is an unmapped statement: anchor through a mapped member.
    mapped_members = sorted(
        (m for m in mts.member_node_ids if m in a_new_cli and m != mts.root_node_id),
        key=lambda m: new_order[m])
    for member in mapped_members:
        client_m = a_new_cli[member]
        if client_m in consumed:
            continue
        original = work.original[client_m]
        anchor_stmt = None
        node = original
        while node.parent is not None:
            if node.parent.kind == A.BLOCK:
                anchor_stmt = node
                break
            node = node.parent
        if anchor_stmt is None:
            continue
        if work.alive(anchor_stmt.id):
            target = work.index[anchor_stmt.id]
            parent = target.parent
            idx = parent.children.index(target)
            if _contains_transplant(target, work):
                # The statement was already rebuilt by an earlier transplant;
                # this subtree goes in alongside it rather than replacing it.
                _insert_wrapped(work, parent, idx + 1, transplant)
            else:
                work.detach(anchor_stmt.id)
                _insert_wrapped(work, parent, idx, transplant)
                consumed.update(_subtree_ids(anchor_stmt))
        else:
            anc, detach_point = work.nearest_alive_ancestor(anchor_stmt.id)
            idx = work.insertion_index(anc, detach_point)
            _insert_wrapped(work, anc, idx, transplant)
            consumed.update(_subtree_ids(anchor_stmt))
        return True
    raise UnattachableMtsError(
        "transplant subtree has no mapped member to anchor its insertion")


def _insert_wrapped(work: _WorkingTree, parent: A.AstNode, idx: int,
                    transplant: A.AstNode) -> None:
    node = transplant
    if parent.kind == A.BLOCK and not node.is_statement():
        wrapper = A.AstNode(id=next(work.fresh_ids), kind=A.EXPR_STMT)
        work.transplant_ids.add(wrapper.id)
        wrapper.add_child(node)
        node = wrapper
    work.insert(parent, idx, node)


# -- name concretization --------------------------------------------------------


def concretize_names(work: _WorkingTree, provenance: dict[int, tuple[str, int]],
                     instance: PatternInstance, mappings: NodeMappingSet,
                     client_graph: Fgpdg, client_env: TypeEnv,
                     transplanted_pattern_ids: set[int]) -> dict[str, str]:
    """Renames transplanted variables and literals, preferring client names.

    Priority per variable: a same-named old-graph node mapped into the client;
    a transplanted declaration keeps its name; a mapped occurrence takes the
    client name; otherwise the name is kept. Kept names colliding with client
    declarations get a fresh suffix.
    """
    new_nodes = {n.id: n for n in instance.new_ast.walk()}
    cli_nodes = work.original

    # Group transplanted pattern occurrences by their new-graph data node.
    occurrences: dict[int, list[tuple[A.AstNode, int]]] = {}
    for copy_id, (origin, orig_id) in sorted(provenance.items()):
        if origin != "pattern" or copy_id not in work.index:
            continue
        copy = work.index[copy_id]
        orig = new_nodes[orig_id]
        data_node = _data_node_for(instance.new_graph, orig)
        if data_node is not None:
            occurrences.setdefault(data_node, []).append((copy, orig_id))

    used_names = set(client_env.variables)
    renaming: dict[str, str] = {}
    for data_id in sorted(occurrences):
        node = instance.new_graph.node(data_id)
        is_literal = not _is_variable(instance.new_graph, instance.new_ast, data_id)
        final = None
        # Rule 1: same-named node in the old pattern graph mapped to the client.
        if not is_literal:
            final = _rule_same_name(node.name, instance, mappings, client_graph)
        if final is None and is_literal:
            final = _rule_literal(node, instance, mappings, cli_nodes, occurrences[data_id])
        needs_fresh = False
        if final is None:
            decl_transplanted = _decl_transplanted(instance.new_graph, data_id,
                                                   transplanted_pattern_ids)
            if decl_transplanted:
                final = node.name            # rule 2: keep, fresh-check below
                needs_fresh = True
            else:
                final = _rule_mapped_occurrence(occurrences[data_id], mappings, cli_nodes)
                if final is None:
                    final = node.name        # rule 4: keep, fresh-check below
                    needs_fresh = not is_literal
        if needs_fresh and final in used_names:
            final = _fresh_name(final, used_names)
        if not is_literal:
            used_names.add(final)
        renaming[node.name] = final
        for copy, _orig_id in occurrences[data_id]:
            _apply_name(copy, final)
    return renaming


def _data_node_for(graph: Fgpdg, orig: A.AstNode) -> int | None:
    """The graph data node behind a pattern AST occurrence, if any."""
    candidates: list[int] = []
    if orig.kind in (A.IDENTIFIER, A.LITERAL):
        probe = orig
        if orig.kind == A.IDENTIFIER and orig.parent is not None \
                and orig.parent.kind in (A.VAR_DECL_FRAGMENT, A.PARAM) \
                and orig.parent.children[0] is orig:
            probe = orig.parent  # declaration names anchor through the fragment
        try:
            candidates = [n.id for n in graph.g_nodes(probe.id) if n.category == DATA]
        except Exception:
            candidates = []
    elif orig.kind in (A.VAR_DECL_FRAGMENT, A.PARAM):
        candidates = [n.id for n in graph.g_nodes(orig.id) if n.category == DATA]
    return candidates[0] if candidates else None


def _is_variable(graph: Fgpdg, new_ast: A.AstNode, data_id: int) -> bool:
    new_nodes = {n.id: n for n in new_ast.walk()}
    anchors = graph.node(data_id).ast_anchors
    return not (len(anchors) == 1 and new_nodes[anchors[0]].kind == A.LITERAL)


def _rule_same_name(name: str, instance: PatternInstance,
                    mappings: NodeMappingSet, client_graph: Fgpdg) -> str | None:
    for old_node in instance.old_graph.nodes:
        if old_node.category == DATA and old_node.name == name:
            cli = mappings.g_old_cli.get(old_node.id)
            if cli is not None:
                cli_name = client_graph.node(cli).name
                if cli_name:
                    return cli_name
    return None


def _rule_literal(node, instance: PatternInstance, mappings: NodeMappingSet,
                  cli_nodes, occs) -> str | None:
    for copy, orig_id in occs:
        cli = mappings.a_new_cli.get(orig_id)
        if cli is not None and cli_nodes[cli].kind == A.LITERAL:
            copy.lit_category = cli_nodes[cli].lit_category
            return cli_nodes[cli].label
    return None


def _decl_transplanted(graph: Fgpdg, data_id: int, transplanted: set[int]) -> bool:
    for anchor in graph.node(data_id).ast_anchors:
        if anchor in transplanted:
            return True
    return False


def _rule_mapped_occurrence(occs, mappings: NodeMappingSet, cli_nodes) -> str | None:
    for _copy, orig_id in occs:
        cli = mappings.a_new_cli.get(orig_id)
        if cli is not None and cli_nodes[cli].kind == A.IDENTIFIER:
            return cli_nodes[cli].label
    return None


def _fresh_name(name: str, used: set[str]) -> str:
    for k in itertools.count(1):
        candidate = f"{name}_{k}"
        if candidate not in used:
            return candidate
    raise AssertionError


def _apply_name(copy: A.AstNode, final: str) -> None:
    if copy.kind in (A.IDENTIFIER, A.LITERAL):
        copy.label = final
    elif copy.kind in (A.VAR_DECL_FRAGMENT, A.PARAM):
        name_child = copy.children[0] if copy.kind == A.VAR_DECL_FRAGMENT else copy.children[1]
        if name_child.kind == A.IDENTIFIER:
            name_child.label = final


# -- the full application --------------------------------------------------------


def apply_sep(client_ast: A.AstNode, client_graph: Fgpdg, sep: Sep, match: Match,
              instance: PatternInstance, client_env: TypeEnv,
              mappings: NodeMappingSet | None = None) -> A.AstNode:
    """Applies one matched pattern to the client method; returns the re-parsed
    repaired tree. Raises InvalidResultError when the result does not re-parse
    and UnattachableMtsError when a transplant has no insertion point."""
    if mappings is None:
        mappings = map_new_to_client(instance, match, client_graph, client_ast)
    a_new_cli = mappings.a_new_cli

    work = _WorkingTree(client_ast)
    # Step 1: delete client AST nodes matched by the pattern's old graph.
    # Data nodes contribute their declaration anchors only: their uses vanish
    # with the enclosing deleted expressions, and uses in untouched statements
    # must survive.
    doomed: set[int] = set()
    for q in sorted(match.g_map):
        node = client_graph.node(match.g_map[q])
        for anchor in node.ast_anchors:
            anchor_node = work.original[anchor]
            if anchor_node.kind == A.PARAM:
                continue  # signatures stay; graphs describe the body
            if node.category == DATA and not _is_decl_anchor(anchor_node):
                continue
            doomed.add(anchor)
    for anchor in sorted(doomed):
        work.detach(anchor)

    # Step 2: compute the transplant set.
    mts_set = compute_mts_set(sep, instance, a_new_cli)

    # Step 3: transplant in document order. A subtree whose root already has
    # a copy in the tree (as a mapped leaf of an earlier, coarser transplant)
    # replaces that copy, refining it with the material only this subtree has.
    provenance: dict[int, tuple[str, int]] = {}
    consumed: set[int] = set()
    transplanted_pattern_ids: set[int] = set()
    pattern_copies: dict[int, int] = {}
    graft_copies: dict[int, int] = {}
    for mts in mts_set:
        transplant = _build_transplant(mts, instance, a_new_cli, work, provenance)
        if _attach(mts, transplant, instance, a_new_cli, work, consumed,
                   pattern_copies, graft_copies):
            transplanted_pattern_ids.update(mts.member_node_ids)
            for node in transplant.walk():
                origin, orig_id = provenance.get(node.id, (None, None))
                if origin == "pattern":
                    pattern_copies[orig_id] = node.id
                elif origin == "client":
                    graft_copies[orig_id] = node.id

    # Step 4: names.
    concretize_names(work, provenance, instance, mappings, client_graph,
                     client_env, transplanted_pattern_ids)

    # Step 5: prune unparsable residue left by deletions.
    _prune(work.root)

    # Step 6: the result must re-parse.
    try:
        text = print_method(work.root)
        return parse_method(text)
    except (MalformedTreeError, MinijSyntaxError) as exc:
        raise InvalidResultError(f"repaired method does not re-parse: {exc}") from exc


def _is_decl_anchor(node: A.AstNode) -> bool:
    if node.kind == A.VAR_DECL_FRAGMENT:
        return True
    return node.kind == A.IDENTIFIER and node.parent is not None \
        and node.parent.kind == A.ASSIGN and node.parent.children[0] is node


def _prune(node: A.AstNode) -> None:
    for child in list(node.children):
        _prune(child)
    for child in list(node.children):
        empty_expr = child.kind == A.EXPR_STMT and not child.children
        empty_decl = child.kind == A.VAR_DECL_STMT and (
            len(child.children) < 2 or not child.children[1].children)
        if empty_expr or empty_decl:
            node.children.remove(child)
            child.parent = None
