#!/usr/bin/env python3
"""End-to-end walk through the bundled license-migration example:
mine the pattern from the two change examples, detect the stale client
location, repair it, and judge the result.

Usage: python scripts/run_motivating_example.py
"""

from __future__ import annotations

import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from sepforge.corpus import corpus_signatures, ingest_corpus
from sepforge.detector import detect, filter_already_applied
from sepforge.evaluate import judge_repair
from sepforge.pipeline import client_graph, mine_from_examples, repair_client


def main() -> int:
    corpus = ROOT / "corpora" / "motivating"
    client_dir = ROOT / "corpora" / "motivating_client"
    examples, warnings = ingest_corpus(corpus)
    for w in warnings:
        print("warning:", w)
    sigs = corpus_signatures(corpus)

    seps = mine_from_examples(examples, sigs, min_support=2)
    print(f"mined {len(seps)} pattern(s) from {len(examples)} change examples")
    sep = seps[0]
    print(f"  {sep.sep_id}: {len(sep.old_graph.nodes)} old nodes, "
          f"{len(sep.new_graph.nodes)} new nodes, support {sep.support}")

    client_src = (client_dir / "showLicense.minij").read_text()
    _ast, _env, graph = client_graph(client_src, sigs, sep.mode, sep.closure_depth)
    matches = filter_already_applied(graph, sep, detect(graph, sep))
    print(f"detected {len(matches)} applicable location(s) in showLicense")

    outcome = repair_client(client_src, sep, sigs)
    print("\n--- repaired client ---")
    print(outcome.repaired_source, end="")

    expected = client_src.replace(
        "License license = app.getLicense();",
        "License license = app.readLicense();").replace(
        "ctx.add(license.getName());",
        "if (license.getType() == 1) { ctx.add(license.getName()); }")
    verdict = judge_repair(client_src, expected, outcome.repaired_source, sep, sigs)
    print("\njudge:", "correct" if verdict.correct else f"incorrect ({verdict.failure_kind})")
    return 0 if verdict.correct else 1


if __name__ == "__main__":
    sys.exit(main())
