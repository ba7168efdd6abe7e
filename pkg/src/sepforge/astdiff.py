"""AST node mapping between two versions of a method, GumTree style.

Two phases: greedy top-down matching of isomorphic subtrees (height >= 2),
then bottom-up container matching by Dice similarity (threshold 0.5) over
already-mapped descendants. Matched containers trigger a recovery pass that
aligns their remaining children by kind and label, falling back to kind and
position, so leaves with changed labels (renamed invocations, renamed
variables) still map through their parent context.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from sepforge.minij import ast as A

DICE_THRESHOLD = 0.5
MIN_HEIGHT = 2


@dataclass
class AstMapping:
    source_root: int
    target_root: int
    pairs: list[tuple[int, int]] = field(default_factory=list)
    a2b: dict[int, int] = field(default_factory=dict)
    b2a: dict[int, int] = field(default_factory=dict)

    def add(self, a_id: int, b_id: int) -> None:
        if a_id in self.a2b or b_id in self.b2a:
            return
        self.pairs.append((a_id, b_id))
        self.a2b[a_id] = b_id
        self.b2a[b_id] = a_id

    def get(self, a_id: int) -> int | None:
        return self.a2b.get(a_id)

    def get_rev(self, b_id: int) -> int | None:
        return self.b2a.get(b_id)

    def __len__(self) -> int:
        return len(self.pairs)

    def inverted(self) -> "AstMapping":
        inv = AstMapping(self.target_root, self.source_root)
        for a, b in self.pairs:
            inv.add(b, a)
        return inv


def _structure_key(node: A.AstNode) -> tuple:
    return (node.kind, node.label, node.lit_category, node.has_receiver,
            tuple(_structure_key(c) for c in node.children))


def _kind_compatible(a: A.AstNode, b: A.AstNode) -> bool:
    """Equal kinds; literals additionally keep their category (a number never
    maps to a string, which would smuggle a type change past the mapping)."""
    if a.kind != b.kind:
        return False
    if a.kind == A.LITERAL:
        return a.lit_category == b.lit_category
    return True


def _content_dice(a: A.AstNode, b: A.AstNode) -> float:
    """Dice over the (kind, label) multisets of the two subtrees' descendants."""
    from collections import Counter
    ca = Counter((n.kind, n.label) for n in a.walk() if n is not a)
    cb = Counter((n.kind, n.label) for n in b.walk() if n is not b)
    total = sum(ca.values()) + sum(cb.values())
    if total == 0:
        return 0.0
    common = sum((ca & cb).values())
    return 2.0 * common / total


def _preorder_index(root: A.AstNode) -> dict[int, int]:
    return {n.id: i for i, n in enumerate(root.walk())}


def _with_depth(root: A.AstNode, depth: int):
    for child in root.children:
        yield depth, child
        yield from _with_depth(child, depth + 1)


class _Matcher:
    def __init__(self, old: A.AstNode, new: A.AstNode):
        self.old = old
        self.new = new
        self.mapping = AstMapping(old.id, new.id)
        self.old_index = _preorder_index(old)
        self.new_index = _preorder_index(new)
        self.old_nodes = list(old.walk())
        self.new_nodes = list(new.walk())

    def run(self) -> AstMapping:
        self.top_down()
        self.bottom_up()
        if self.mapping.get(self.old.id) is None:
            self.mapping.add(self.old.id, self.new.id)
            self.recover(self.old, self.new)
        return self.mapping

    # -- phase 1 ---------------------------------------------------------

    def top_down(self) -> None:
        new_by_key: dict[tuple, list[A.AstNode]] = {}
        for node in self.new_nodes:
            new_by_key.setdefault(_structure_key(node), []).append(node)
        candidates = [n for n in self.old_nodes if n.height() >= MIN_HEIGHT]
        candidates.sort(key=lambda n: (-n.height(), self.old_index[n.id]))
        for node in candidates:
            if self.mapping.get(node.id) is not None:
                continue
            options = [m for m in new_by_key.get(_structure_key(node), [])
                       if self._subtree_free(m)]
            if not options:
                continue
            best = min(options, key=lambda m: (
                abs(self.new_index[m.id] - self.old_index[node.id]),
                self.new_index[m.id]))
            for a, b in zip(node.walk(), best.walk()):
                self.mapping.add(a.id, b.id)

    def _subtree_free(self, node: A.AstNode) -> bool:
        return all(self.mapping.get_rev(n.id) is None for n in node.walk())

    # -- phase 2 ---------------------------------------------------------

    def bottom_up(self) -> None:
        for node in self._postorder(self.old):
            if not node.children or self.mapping.get(node.id) is not None:
                continue
            if node is self.old:
                continue
            best, best_dice = None, 0.0
            parent_kind = node.parent.kind if node.parent else None
            for cand in self.new_nodes:
                if not cand.children or cand.kind != node.kind:
                    continue
                if self.mapping.get_rev(cand.id) is not None:
                    continue
                cand_parent_kind = cand.parent.kind if cand.parent else None
                if cand_parent_kind != parent_kind:
                    continue
                d = self._dice(node, cand)
                if d >= DICE_THRESHOLD:
                    dist = abs(self.new_index[cand.id] - self.old_index[node.id])
                    if best is None or d > best_dice or (
                            d == best_dice and dist < best[1]):
                        best, best_dice = (cand, dist), d
            if best is not None:
                self.mapping.add(node.id, best[0].id)
                self.recover(node, best[0])

    def _postorder(self, node: A.AstNode):
        for child in node.children:
            yield from self._postorder(child)
        yield node

    def _dice(self, c1: A.AstNode, c2: A.AstNode) -> float:
        desc1 = [n.id for n in c1.walk() if n is not c1]
        desc2 = {n.id for n in c2.walk() if n is not c2}
        if not desc1 and not desc2:
            return 0.0
        common = sum(1 for d in desc1
                     if self.mapping.get(d) is not None and self.mapping.get(d) in desc2)
        return 2.0 * common / (len(desc1) + len(desc2))

    # -- recovery inside a matched container ------------------------------

    def recover(self, c1: A.AstNode, c2: A.AstNode) -> None:
        """Aligns the remaining children of a matched pair.

        Same-kind children are paired best-first: exact subtree equality, then
        equal label, then similarity of descendant content, then position.
        The kind-only fallback is what lets renamed leaves map through their
        parent context.
        """
        free_old = [c for c in c1.children if self.mapping.get(c.id) is None]
        free_new = [c for c in c2.children if self.mapping.get_rev(c.id) is None]
        scored = []
        for ai, a in enumerate(free_old):
            for bi, b in enumerate(free_new):
                if not _kind_compatible(a, b):
                    continue
                exact = _structure_key(a) == _structure_key(b)
                label_eq = a.label == b.label and a.lit_category == b.lit_category
                scored.append(((0 if exact else 1, 0 if label_eq else 1,
                                -_content_dice(a, b), abs(ai - bi), ai, bi), a, b))
        scored.sort(key=lambda t: t[0])
        used_old: set[int] = set()
        used_new: set[int] = set()
        paired: list[tuple[A.AstNode, A.AstNode]] = []
        for _key, a, b in scored:
            if a.id in used_old or b.id in used_new:
                continue
            used_old.add(a.id)
            used_new.add(b.id)
            paired.append((a, b))
        # Skip-through: a child without a same-kind sibling counterpart may
        # match through wrapper nodes inserted (or removed) around it, e.g. a
        # statement newly surrounded by an if. Search the unmatched subtrees
        # on the other side for the closest same-kind node.
        leftover_old = [c for c in free_old if c.id not in used_old]
        leftover_new = [c for c in free_new if c.id not in used_new]
        for a in leftover_old:
            b = self._skip_through(a, leftover_new, used_new, rev=False)
            if b is not None:
                used_old.add(a.id)
                used_new.add(b.id)
                paired.append((a, b))
        for b in [c for c in leftover_new if c.id not in used_new]:
            a = self._skip_through(b, [c for c in leftover_old if c.id not in used_old],
                                   used_old, rev=True)
            if a is not None:
                used_old.add(a.id)
                used_new.add(b.id)
                paired.append((a, b))
        for a, b in paired:
            self.mapping.add(a.id, b.id)
            self.recover(a, b)

    def _skip_through(self, node: A.AstNode, roots: list[A.AstNode],
                      used: set[int], rev: bool) -> A.AstNode | None:
        best = None
        for root in roots:
            for depth, cand in _with_depth(root, 1):
                if not _kind_compatible(node, cand) or cand.id in used:
                    continue
                if rev and self.mapping.get(cand.id) is not None:
                    continue
                if not rev and self.mapping.get_rev(cand.id) is not None:
                    continue
                exact = _structure_key(cand) == _structure_key(node)
                label_eq = cand.label == node.label
                dice = _content_dice(node, cand)
                if not (exact or label_eq or dice > 0):
                    continue
                key = (0 if exact else 1, 0 if label_eq else 1, -dice, depth)
                if best is None or key < best[0]:
                    best = (key, cand)
        return best[1] if best else None


def map_asts(old: A.AstNode, new: A.AstNode) -> AstMapping:
    """One-to-one, kind-preserving node mapping between two method trees.

    The pair set is orientation-canonical (computed on a fixed ordering of the
    two trees and inverted if needed) so cardinality is symmetric.
    """
    if _structure_key(new) < _structure_key(old):
        return _Matcher(new, old).run().inverted()
    return _Matcher(old, new).run()
