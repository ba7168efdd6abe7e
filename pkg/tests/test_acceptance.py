"""Acceptance criteria, one test per criterion, each printing a PASS line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines; every stated runtime bound is asserted.
"""

import json
import random
import time
from fractions import Fraction

from sepforge.corpus import corpus_signatures, ingest_corpus
from sepforge.detector import detect, embed_pattern, filter_already_applied
from sepforge.evaluate import cross_validate, judge_repair, report_to_json
from sepforge.matching import max_cardinality_matching
from sepforge.miner import PatternGraph, mine_seps, sep_fragment
from sepforge.pipeline import (client_graph, designated_instance,
                               mine_from_examples, repair_client)
from sepforge.transformer import compute_mts, compute_mts_set, map_new_to_client

from oracles import (brute_force_matching, brute_force_mine,
                     enumerate_embeddings, isomorphic)
from test_detector import make_client, random_graph
from test_miner import _host_view, _random_change_graph


def report(criterion, detail):
    print(f"ACCEPTANCE {criterion}: PASS - {detail}")


def test_criterion_1_motivating_end_to_end(corpora_dir):
    start = time.monotonic()
    examples, _ = ingest_corpus(corpora_dir / "motivating")
    sigs = corpus_signatures(corpora_dir / "motivating")
    seps = mine_from_examples(examples, sigs, 2)
    assert len(seps) == 1
    sep = seps[0]
    labels = {l for _, l in sep.old_graph.nodes} | {l for _, l in sep.new_graph.nodes}
    assert "App#refreshViews" not in labels and "Unknown#println" not in labels

    client_src = (corpora_dir / "motivating_client" / "showLicense.minij").read_text()
    _ast, _env, graph = client_graph(client_src, sigs, sep.mode, sep.closure_depth)
    matches = filter_already_applied(graph, sep, detect(graph, sep))
    assert len(matches) == 1

    outcome = repair_client(client_src, sep, sigs)
    assert outcome.repaired_source is not None
    repaired = outcome.repaired_source
    _rast, _renv, rgraph = client_graph(repaired, sigs, sep.mode, sep.closure_depth)
    assert embed_pattern(sep.new_graph, rgraph)
    assert not embed_pattern(sep.old_graph, rgraph)

    expected_new = client_src.replace(
        "License license = app.getLicense();",
        "License license = app.readLicense();").replace(
        "ctx.add(license.getName());",
        "if (license.getType() == 1) { ctx.add(license.getName()); }")
    verdict = judge_repair(client_src, expected_new, repaired, sep, sigs)
    assert verdict.correct
    elapsed = time.monotonic() - start
    assert elapsed < 5.0
    report(1, f"motivating example mine/detect/repair judged correct in {elapsed:.2f}s")


def test_criterion_2_repeat_application_avoidance(corpora_dir):
    start = time.monotonic()
    examples, _ = ingest_corpus(corpora_dir / "repeat_guard")
    sigs = corpus_signatures(corpora_dir / "repeat_guard")
    seps = mine_from_examples(examples, sigs, 2)
    assert len(seps) == 1
    sep = seps[0]
    client_src = (corpora_dir / "repeat_guard_client" / "use.minij").read_text()
    outcome = repair_client(client_src, sep, sigs)
    assert outcome.applied == 1
    assert "if (val != null)" in outcome.repaired_source
    _ast, _env, graph = client_graph(outcome.repaired_source, sigs,
                                     sep.mode, sep.closure_depth)
    second = filter_already_applied(graph, sep, detect(graph, sep))
    assert second == []
    elapsed = time.monotonic() - start
    assert elapsed < 1.0
    report(2, f"guard applied once, second pass empty, in {elapsed:.2f}s")


def test_criterion_3_abstraction_mode_discrimination(corpora_dir):
    examples, _ = ingest_corpus(corpora_dir / "stop_fig5")
    sigs = corpus_signatures(corpora_dir / "stop_fig5")
    cpat = mine_from_examples(examples, sigs, 2, mode="cpatminer")
    sirius = mine_from_examples(examples, sigs, 2, mode="sirius")
    assert len(cpat) >= 1
    assert sirius == []
    report(3, f"stop corpus: {len(cpat)} cpatminer pattern(s), 0 sirius patterns")


def test_criterion_4_detector_oracle_equivalence():
    start = time.monotonic()
    rng = random.Random(4242)
    cases = 0
    for _ in range(220):
        c_labels, c_edges = random_graph(rng, 8)
        p_labels, p_edges = random_graph(rng, 4)
        client = make_client(c_labels, c_edges)
        pattern = PatternGraph(tuple(p_labels), tuple(p_edges))
        got = {frozenset(m.values()) for m in embed_pattern(pattern, client)}
        expected = {frozenset(t) for t in enumerate_embeddings(
            p_labels, p_edges, c_labels, c_edges)}
        assert got == expected
        cases += 1
    elapsed = time.monotonic() - start
    assert cases >= 200 and elapsed < 30.0
    report(4, f"{cases} randomized detector cases matched enumeration in {elapsed:.1f}s")


def test_criterion_5_miner_oracle_equivalence():
    start = time.monotonic()
    rng = random.Random(99)
    corpora = 0
    for _ in range(50):
        graphs = [_random_change_graph(rng, f"m{k}", k) for k in range(3)]
        got = mine_seps(graphs, 2)
        expected = brute_force_mine([_host_view(cg) for cg in graphs], 2)
        assert len(got) == len(expected)
        unmatched = list(expected)
        for sep in got:
            nodes, edges = sep_fragment(sep)
            for cand in unmatched:
                if isomorphic(list(nodes), list(edges), *cand):
                    unmatched.remove(cand)
                    break
            else:
                raise AssertionError("pattern not in oracle output")
        assert not unmatched
        corpora += 1
    elapsed = time.monotonic() - start
    assert corpora >= 50 and elapsed < 60.0
    report(5, f"{corpora} random corpora matched brute-force mining in {elapsed:.1f}s")


def test_criterion_6_bipartite_matching_optimality():
    rng = random.Random(1234)
    cases = 0
    for _ in range(120):
        n_left = rng.randint(1, 8)
        n_right = rng.randint(1, 8)
        weights = {}
        for i in range(n_left):
            for j in range(n_right):
                if rng.random() < 0.45:
                    weights[(i, j)] = Fraction(rng.randint(1, 6), rng.randint(1, 4))
        lefts, rights = list(range(n_left)), list(range(n_right))
        got = max_cardinality_matching(lefts, rights, weights)
        card, weight = brute_force_matching(n_left, n_right, weights)
        assert len(got) == card
        assert sum(weights[(l, r)] for l, r in got.items()) == weight
        assert got == max_cardinality_matching(lefts, rights, weights)
        cases += 1
    assert cases >= 100
    report(6, f"{cases} random matrices: cardinality and weight optimal, deterministic")


def _mts_fixture_contexts(corpora_dir):
    """(sep, instance, mappings) for every fixture pattern with a match."""
    contexts = []
    specs = [("motivating", 2, "motivating_client/showLicense.minij"),
             ("repeat_guard", 2, "repeat_guard_client/use.minij"),
             ("excessive_arg", 2, "excessive_arg_client/useLicense.minij")]
    for corpus, ms, client_rel in specs:
        examples, _ = ingest_corpus(corpora_dir / corpus)
        sigs = corpus_signatures(corpora_dir / corpus)
        for sep in mine_from_examples(examples, sigs, ms):
            instance = designated_instance(sep, sigs)
            client_src = (corpora_dir / client_rel).read_text()
            ast, _env, graph = client_graph(client_src, sigs, sep.mode,
                                            sep.closure_depth)
            matches = filter_already_applied(graph, sep, detect(graph, sep))
            if matches:
                mappings = map_new_to_client(instance, matches[0], graph, ast)
                contexts.append((sep, instance, mappings))
    # regression families applied to their own newest instance
    examples, _ = ingest_corpus(corpora_dir / "regression12")
    sigs = corpus_signatures(corpora_dir / "regression12")
    for sep in mine_from_examples(examples, sigs, 3):
        instance = designated_instance(sep, sigs)
        newest = sorted({i.change_id for i in sep.instances})[-1]
        client_src = sep.sources[newest][0]
        ast, _env, graph = client_graph(client_src, sigs, sep.mode,
                                        sep.closure_depth)
        matches = filter_already_applied(graph, sep, detect(graph, sep))
        if matches:
            mappings = map_new_to_client(instance, matches[0], graph, ast)
            contexts.append((sep, instance, mappings))
    return contexts


def test_criterion_7_mts_properties(corpora_dir):
    contexts = _mts_fixture_contexts(corpora_dir)
    assert len(contexts) >= 10
    total = 0
    for sep, instance, mappings in contexts:
        a_new_cli = mappings.a_new_cli
        new_nodes = {n.id: n for n in instance.new_ast.walk()}
        all_mts = [compute_mts(instance.new_embedding[q], instance, a_new_cli)
                   for q in sorted(instance.new_embedding)]
        kept = compute_mts_set(sep, instance, a_new_cli)
        kept_sets = [m.member_node_ids for m in kept]
        # contained subtrees were discarded; kept ones are pairwise
        # containment-free
        for i, a in enumerate(kept_sets):
            for j, b in enumerate(kept_sets):
                if i != j:
                    assert not a < b
        for mts in all_mts:
            if not any(mts.member_node_ids <= k for k in kept_sets):
                raise AssertionError("an uncontained subtree was dropped")
        for mts in kept:
            total += 1
            root = new_nodes[mts.root_node_id]
            # root rule
            assert mts.root_node_id in a_new_cli or root.is_statement()
            # leaf rule
            for leaf in mts.leaf_node_ids:
                node = new_nodes[leaf]
                assert leaf in a_new_cli or not node.children
            # root minimality: truncating the upward walk one step would
            # leave a root that is neither mapped nor a statement
            anchor = instance.new_graph.node(mts.source_g_node_id).ast_anchors[0]
            if mts.root_node_id != anchor:
                below = new_nodes[anchor]
                while below.parent is not None and below.parent.id != mts.root_node_id:
                    below = below.parent
                assert below.id not in a_new_cli and not below.is_statement()
            # frontier minimality: beyond the root's own children (always
            # traversed), every grown member was forced by an unmapped parent,
            # so dropping it would break the leaf rule
            for m in mts.member_node_ids:
                node = new_nodes[m]
                if node is root or node.parent is root:
                    continue
                assert node.parent.id not in a_new_cli
    report(7, f"{total} transplant subtrees satisfy root/leaf/minimality rules")


def test_criterion_8_documented_failure_reproduction(corpora_dir):
    examples, _ = ingest_corpus(corpora_dir / "excessive_arg")
    sigs = corpus_signatures(corpora_dir / "excessive_arg")
    seps = mine_from_examples(examples, sigs, 2)
    assert len(seps) == 1
    sep = seps[0]
    client_src = (corpora_dir / "excessive_arg_client" / "useLicense.minij").read_text()
    outcome = repair_client(client_src, sep, sigs)
    assert outcome.repaired_source is not None
    assert "readLicense(Env.getDefault())" in outcome.repaired_source
    expected_new = ("void useLicense(App app, Env e, Registry reg) {\n"
                    "    License lic = app.readLicense(e);\n"
                    "    if (lic != null) {\n"
                    "        reg.store(lic);\n"
                    "    }\n"
                    "}\n")
    verdict = judge_repair(client_src, expected_new, outcome.repaired_source,
                           sep, sigs)
    assert not verdict.correct
    assert verdict.failure_kind == "excessive-transplant"
    report(8, "excessive transplant reproduced and judged incorrect")


def test_criterion_9_cross_validation_golden(corpora_dir):
    start = time.monotonic()
    examples, _ = ingest_corpus(corpora_dir / "regression12")
    sigs = corpus_signatures(corpora_dir / "regression12")
    first = report_to_json(cross_validate(examples, sigs, 3))
    second = report_to_json(cross_validate(examples, sigs, 3))
    assert first == second
    golden = (corpora_dir / "golden" / "regression12_report.json").read_text()
    assert first == golden
    parsed = json.loads(first)
    assert all(t["chronologyOk"] for t in parsed["trials"])
    elapsed = time.monotonic() - start
    assert elapsed < 120.0
    report(9, f"two byte-identical runs matching the golden file in {elapsed:.1f}s")


def test_criterion_10_smoke_timing(corpora_dir):
    examples, _ = ingest_corpus(corpora_dir / "regression12")
    sigs = corpus_signatures(corpora_dir / "regression12")
    seps = mine_from_examples(examples, sigs, 3)
    largest = max(seps, key=lambda s: s.size)
    newest = sorted({i.change_id for i in largest.instances})[-1]
    client_src = largest.sources[newest][0]
    start = time.monotonic()
    _ast, _env, graph = client_graph(client_src, sigs, largest.mode,
                                     largest.closure_depth)
    matches = filter_already_applied(graph, largest, detect(graph, largest))
    outcome = repair_client(client_src, largest, sigs)
    elapsed = time.monotonic() - start
    assert matches
    assert outcome.repaired_source is not None
    assert elapsed < 15.0
    report(10, f"detect+repair on the largest fixture (size {largest.size}) "
               f"in {elapsed:.2f}s")
