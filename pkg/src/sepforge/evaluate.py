"""Repair judging and the leave-one-change-id-out cross-validation harness.

A repair is correct when (1) the repaired method's graph embeds the pattern's
new graph, (2) it no longer embeds the old graph, and (3) every token that
survived unchanged from the old to the new version of the method, outside the
pattern-matched region, survives into the repaired method. Unparsable output
fails all three.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction

from sepforge.astdiff import map_asts
from sepforge.changegraph import DEFAULT_CLOSURE_DEPTH
from sepforge.corpus import ChangeExample
from sepforge.detector import embed_pattern
from sepforge.errors import SepforgeError
from sepforge.fgpdg import MODE_SIRIUS
from sepforge.miner import Sep, sep_fragment
from sepforge.minij import ast as A
from sepforge.minij import parse_method
from sepforge.pipeline import client_graph, mine_from_examples, repair_client

REPORT_FORMAT_VERSION = 1

_TOKEN_KINDS = (A.IDENTIFIER, A.LITERAL, A.TYPE_NAME, A.BINARY_OP,
                A.METHOD_INVOCATION, A.FIELD_ACCESS, A.METHOD_DECL)


@dataclass
class Verdict:
    cond1: bool
    cond2: bool
    cond3: bool
    failure_kind: str | None = None

    @property
    def correct(self) -> bool:
        return self.cond1 and self.cond2 and self.cond3


def _tokens(root: A.AstNode) -> Counter:
    return Counter(n.label for n in root.walk() if n.kind in _TOKEN_KINDS)


def _anchored_ids(old_ast: A.AstNode, old_graph, sep: Sep) -> set[int]:
    """AST nodes belonging to the pattern-old region of the method."""
    nodes = {n.id: n for n in old_ast.walk()}
    anchored: set[int] = set()
    for emb in embed_pattern(sep.old_graph, old_graph):
        for node_id in emb.values():
            for anchor in old_graph.node(node_id).ast_anchors:
                anchored.add(anchor)
                anchor_node = nodes[anchor]
                if anchor_node.kind in (A.VAR_DECL_FRAGMENT, A.PARAM):
                    anchored.update(c.id for c in anchor_node.children
                                    if c.kind == A.IDENTIFIER)
    return anchored


def judge_repair(m_old: str, m_new: str, m_repaired: str, sep: Sep,
                 signatures: dict[str, str]) -> Verdict:
    try:
        repaired_ast, _env, repaired_graph = client_graph(
            m_repaired, signatures, sep.mode, sep.closure_depth)
    except SepforgeError:
        return Verdict(False, False, False, "invalid-syntax")

    cond1 = bool(embed_pattern(sep.new_graph, repaired_graph))
    cond2 = not embed_pattern(sep.old_graph, repaired_graph)

    old_ast, _old_env, old_graph = client_graph(m_old, signatures, sep.mode,
                                                sep.closure_depth)
    new_ast = parse_method(m_new)
    anchored = _anchored_ids(old_ast, old_graph, sep)
    ast_map = map_asts(old_ast, new_ast)
    new_nodes = {n.id: n for n in new_ast.walk()}
    required: Counter = Counter()
    for node in old_ast.walk():
        if node.kind not in _TOKEN_KINDS or node.id in anchored:
            continue
        mapped = ast_map.get(node.id)
        if mapped is None:
            continue
        twin = new_nodes[mapped]
        if twin.kind == node.kind and twin.label == node.label:
            required[node.label] += 1
    cond3 = not (required - _tokens(repaired_ast))

    failure = None
    if not cond1:
        failure = "missing-new-graph"
    elif not cond2:
        failure = "residual-old-graph"
    elif not cond3:
        failure = "excessive-transplant"
    return Verdict(cond1, cond2, cond3, failure)


# -- cross-validation -----------------------------------------------------------


_SIZE_BUCKETS = (
    ("small (s<=4)", 0, 4),
    ("medium (5<=s<=10)", 5, 10),
    ("large (11<=s<=20)", 11, 20),
    ("very large (21<=s)", 21, 10 ** 9),
)


def _bucket(size: int) -> str:
    for name, lo, hi in _SIZE_BUCKETS:
        if lo <= size <= hi:
            return name
    raise AssertionError(size)


def _fragment_similarity(a: Sep, b: Sep) -> Fraction:
    na, ea = sep_fragment(a)
    nb, eb = sep_fragment(b)
    ca = Counter(na) + Counter((na[i], l, na[j]) for i, j, l in ea)
    cb = Counter(nb) + Counter((nb[i], l, nb[j]) for i, j, l in eb)
    total = sum(ca.values()) + sum(cb.values())
    if total == 0:
        return Fraction(0)
    return Fraction(2 * sum((ca & cb).values()), total)


def cross_validate(examples: list[ChangeExample], signatures: dict[str, str],
                   min_support: int = 3, mode: str = MODE_SIRIUS,
                   closure_depth: int = DEFAULT_CLOSURE_DEPTH) -> dict:
    """Leave-one-change-id-out cross-validation with chronological filtering.

    For each pattern instance, a fresh pattern is re-mined from the instances
    no newer than the test commit, applied to the old version of the test
    method, and judged against its new version using the original pattern.
    """
    seps = mine_from_examples(examples, signatures, min_support, mode, closure_depth)
    by_cid = {e.change_id: e for e in examples}
    trials = []
    for sep in seps:
        instance_cids = sorted({inst.change_id for inst in sep.instances})
        for test_cid in instance_cids:
            training = [cid for cid in instance_cids
                        if cid.time <= test_cid.time and cid != test_cid]
            chronology_ok = all(cid.time <= test_cid.time for cid in training)
            assert chronology_ok, "training data newer than test commit"
            trial = {
                "sepId": sep.sep_id,
                "sepSize": sep.size,
                "methodId": test_cid.method_id,
                "time": test_cid.time,
                "trainingSize": len(training),
                "chronologyOk": chronology_ok,
                "produced": False,
                "correct": False,
                "failureKind": None,
            }
            trials.append(trial)
            if len(training) < 2:
                trial["failureKind"] = "no-pattern"
                continue
            retrained = mine_from_examples(
                [by_cid[cid] for cid in training], signatures,
                max(2, min_support - 1), mode, closure_depth)
            if not retrained:
                trial["failureKind"] = "no-pattern"
                continue
            p_prime = max(retrained,
                          key=lambda s: (_fragment_similarity(sep, s), s.code))
            test_example = by_cid[test_cid]
            outcome = repair_client(test_example.old_source, p_prime, signatures,
                                    method_id=test_cid.method_id)
            if outcome.error_kind == "invalid-syntax":
                trial["produced"] = True
                trial["failureKind"] = "invalid-syntax"
                continue
            if outcome.repaired_source is None:
                trial["failureKind"] = outcome.error_kind or "no-match"
                continue
            trial["produced"] = True
            verdict = judge_repair(test_example.old_source, test_example.new_source,
                                   outcome.repaired_source, sep, signatures)
            trial["correct"] = verdict.correct
            trial["failureKind"] = verdict.failure_kind
    return _build_report(seps, trials, min_support, mode)


def _ratio(num: int, den: int) -> str:
    return f"{num / den:.4f}" if den else "0.0000"


def _f1(correct: int, produced: int, total: int) -> str:
    if not produced or not total:
        return "0.0000"
    p = correct / produced
    r = correct / total
    if p + r == 0:
        return "0.0000"
    return f"{2 * p * r / (p + r):.4f}"


def _summarize(trials: list[dict]) -> dict:
    total = len(trials)
    produced = sum(1 for t in trials if t["produced"])
    correct = sum(1 for t in trials if t["correct"])
    return {
        "trials": total,
        "produced": produced,
        "correct": correct,
        "precision": _ratio(correct, produced),
        "recall": _ratio(correct, total),
        "f1": _f1(correct, produced, total),
    }


def _build_report(seps, trials, min_support, mode) -> dict:
    trials = sorted(trials, key=lambda t: (t["sepId"], t["time"], t["methodId"]))
    by_size = {}
    for name, _lo, _hi in _SIZE_BUCKETS:
        bucket_trials = [t for t in trials if _bucket(t["sepSize"]) == name]
        by_size[name] = _summarize(bucket_trials)
    return {
        "formatVersion": REPORT_FORMAT_VERSION,
        "minSupport": min_support,
        "mode": mode,
        "patternCount": len(seps),
        "patterns": [{"id": s.sep_id, "size": s.size, "support": s.support,
                      "instances": len({i.change_id for i in s.instances})}
                     for s in seps],
        "summary": _summarize(trials),
        "bySize": by_size,
        "trials": trials,
    }


def render_report_table(report: dict) -> str:
    header = f"{'bucket':<22} {'trials':>7} {'produced':>9} {'correct':>8} " \
             f"{'precision':>10} {'recall':>7} {'f1':>7}"
    lines = [header, "-" * len(header)]

    def row(name, s):
        return (f"{name:<22} {s['trials']:>7} {s['produced']:>9} {s['correct']:>8} "
                f"{s['precision']:>10} {s['recall']:>7} {s['f1']:>7}")

    lines.append(row("overall", report["summary"]))
    for name, stats in report["bySize"].items():
        lines.append(row(name, stats))
    return "\n".join(lines)


def report_to_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"
