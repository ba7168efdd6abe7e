#!/usr/bin/env python3
"""Runs the cross-validation harness over a change-example corpus and prints
the metrics table; optionally writes the JSON report.

Usage: python scripts/run_cross_validation.py [CORPUS] [--min-support N]
       [--mode sirius|cpatminer] [--out report.json]

Defaults to the bundled 12-family regression corpus at minimum support 3.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from sepforge.corpus import corpus_signatures, ingest_corpus
from sepforge.evaluate import cross_validate, render_report_table, report_to_json


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("corpus", nargs="?",
                        default=str(ROOT / "corpora" / "regression12"))
    parser.add_argument("--min-support", type=int, default=3)
    parser.add_argument("--mode", choices=["sirius", "cpatminer"], default="sirius")
    parser.add_argument("--closure-depth", type=int, default=4)
    parser.add_argument("--out", default=None)
    args = parser.parse_args()

    examples, warnings = ingest_corpus(args.corpus)
    for w in warnings:
        print("warning:", w, file=sys.stderr)
    sigs = corpus_signatures(args.corpus)
    start = time.monotonic()
    report = cross_validate(examples, sigs, args.min_support, args.mode,
                            args.closure_depth)
    elapsed = time.monotonic() - start
    print(f"{report['patternCount']} patterns, {report['summary']['trials']} trials "
          f"in {elapsed:.1f}s\n")
    print(render_report_table(report))
    if args.out:
        Path(args.out).write_text(report_to_json(report), encoding="utf-8")
        print(f"\nreport written to {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
