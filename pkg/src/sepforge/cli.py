"""Command line interface: mine, detect, repair, eval, diff-ast."""

from __future__ import annotations

import difflib
import json
import random
import sys
from pathlib import Path

import click

from sepforge import __version__
from sepforge.corpus import corpus_signatures, ingest_corpus
from sepforge.detector import detect, filter_already_applied
from sepforge.errors import CorpusFormatError, InternalInvariantError, SepforgeError
from sepforge.evaluate import cross_validate, render_report_table, report_to_json
from sepforge.minij import load_signatures, parse_method
from sepforge.minij import ast as A
from sepforge.pipeline import client_graph, mine_from_examples, read_patterns, \
    repair_client, write_patterns

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_FORMAT = 2
EXIT_INTERNAL = 3

JSON_VERSION = 1


def _signature_table(explicit: str | None, *dirs: str) -> dict[str, str]:
    if explicit:
        return load_signatures(explicit)
    for d in dirs:
        merged = corpus_signatures(d)
        if merged:
            return merged
    return {}


def _client_files(client_dir: str) -> list[Path]:
    return sorted(Path(client_dir).glob("*.minij"))


@click.group()
@click.version_option(__version__)
@click.option("--seed", type=int, default=None,
              help="Seed for any randomized behavior (none in the core pipeline).")
def cli(seed):
    if seed is not None:
        random.seed(seed)


@cli.command("mine")
@click.option("--corpus", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--min-support", default=3, show_default=True)
@click.option("--mode", type=click.Choice(["sirius", "cpatminer"]), default="sirius",
              show_default=True)
@click.option("--closure-depth", default=4, show_default=True)
@click.option("--max-nodes", default=20, show_default=True)
@click.option("--all-frequent", is_flag=True,
              help="Report all frequent patterns, not only maximal ones.")
@click.option("--signatures", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", required=True, type=click.Path(dir_okay=False))
def mine_cmd(corpus, min_support, mode, closure_depth, max_nodes, all_frequent,
             signatures, out):
    """Mine systematic edit patterns from a change-example corpus."""
    examples, warnings = ingest_corpus(corpus)
    for w in warnings:
        click.echo(f"warning: {w}", err=True)
    sigs = _signature_table(signatures, corpus)
    seps = mine_from_examples(examples, sigs, min_support, mode, closure_depth,
                              max_nodes=max_nodes, all_frequent=all_frequent)
    write_patterns(seps, out)
    click.echo(f"mined {len(seps)} pattern(s) from {len(examples)} change example(s)")


def _span(node: A.AstNode) -> str:
    if node.span is None:
        return "?"
    line, col, end_line, end_col = node.span
    return f"{line}:{col}-{end_line}:{end_col}"


@cli.command("diff-ast")
@click.argument("old_file", type=click.Path(exists=True, dir_okay=False))
@click.argument("new_file", type=click.Path(exists=True, dir_okay=False))
def diff_ast_cmd(old_file, new_file):
    """Print the AST node mapping between two method versions."""
    from sepforge.astdiff import map_asts
    old = parse_method(Path(old_file).read_text(encoding="utf-8"))
    new = parse_method(Path(new_file).read_text(encoding="utf-8"))
    mapping = map_asts(old, new)
    old_nodes = {n.id: n for n in old.walk()}
    new_nodes = {n.id: n for n in new.walk()}
    for a, b in sorted(mapping.pairs):
        na, nb = old_nodes[a], new_nodes[b]
        click.echo(f"{na.kind}@{_span(na)} ↔ {nb.kind}@{_span(nb)}")


@cli.command("detect")
@click.option("--patterns", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--client", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--signatures", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", type=click.Path(dir_okay=False))
def detect_cmd(patterns, client, signatures, out):
    """Report client locations where mined patterns apply."""
    seps = read_patterns(patterns)
    sigs = _signature_table(signatures, client)
    findings = []
    for path in _client_files(client):
        source = path.read_text(encoding="utf-8")
        graphs = {}  # one client graph per (mode, closure depth)
        for sep in seps:
            key = (sep.mode, sep.closure_depth)
            if key not in graphs:
                graphs[key] = client_graph(source, sigs, sep.mode,
                                           sep.closure_depth, method_id=path.name)
            ast, _env, graph = graphs[key]
            nodes = {n.id: n for n in ast.walk()}
            for match in filter_already_applied(
                    graph, sep, detect(graph, sep)):
                anchors = []
                for idx in sorted(match.g_map):
                    node = graph.node(match.g_map[idx])
                    anchors.append({
                        "patternIndex": idx,
                        "label": node.label,
                        "spans": [_span(nodes[a]) for a in node.ast_anchors],
                    })
                findings.append({
                    "sepId": sep.sep_id,
                    "file": path.name,
                    "method": ast.label,
                    "anchors": anchors,
                })
    payload = json.dumps({"formatVersion": JSON_VERSION, "matches": findings},
                         indent=2, sort_keys=True)
    if out:
        Path(out).write_text(payload + "\n", encoding="utf-8")
    click.echo(payload)


@cli.command("repair")
@click.option("--patterns", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--client", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--signatures", type=click.Path(exists=True, dir_okay=False))
@click.option("--dry-run", is_flag=True, help="Do not write repaired files.")
@click.option("--out", type=click.Path(dir_okay=False), help="JSON report path.")
def repair_cmd(patterns, client, signatures, dry_run, out):
    """Apply mined patterns to client methods and emit diffs."""
    seps = read_patterns(patterns)
    sigs = _signature_table(signatures, client)
    report = []
    for path in _client_files(client):
        source = path.read_text(encoding="utf-8")
        current = source
        entries = []
        for sep in seps:
            outcome = repair_client(current, sep, sigs, method_id=path.name)
            if outcome.repaired_source is not None:
                current = outcome.repaired_source
                entries.append({"sepId": sep.sep_id, "status": "applied",
                                "applications": outcome.applied})
            elif outcome.error_kind is not None:
                entries.append({"sepId": sep.sep_id, "status": "failed",
                                "errorKind": outcome.error_kind})
            else:
                entries.append({"sepId": sep.sep_id, "status": "no-match"})
        if current != source:
            diff = "".join(difflib.unified_diff(
                source.splitlines(keepends=True), current.splitlines(keepends=True),
                fromfile=f"a/{path.name}", tofile=f"b/{path.name}"))
            click.echo(diff)
            if not dry_run:
                path.with_suffix(".repaired.minij").write_text(current, encoding="utf-8")
        report.append({"file": path.name, "results": entries})
    payload = json.dumps({"formatVersion": JSON_VERSION, "files": report},
                         indent=2, sort_keys=True)
    if out:
        Path(out).write_text(payload + "\n", encoding="utf-8")
    else:
        click.echo(payload)


@cli.command("eval")
@click.option("--corpus", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--min-support", default=3, show_default=True)
@click.option("--mode", type=click.Choice(["sirius", "cpatminer"]), default="sirius",
              show_default=True)
@click.option("--closure-depth", default=4, show_default=True)
@click.option("--signatures", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", type=click.Path(dir_okay=False))
def eval_cmd(corpus, min_support, mode, closure_depth, signatures, out):
    """Cross-validate repair performance over a corpus."""
    examples, warnings = ingest_corpus(corpus)
    for w in warnings:
        click.echo(f"warning: {w}", err=True)
    sigs = _signature_table(signatures, corpus)
    report = cross_validate(examples, sigs, min_support, mode, closure_depth)
    if out:
        Path(out).write_text(report_to_json(report), encoding="utf-8")
    click.echo(render_report_table(report))


def main(argv: list[str] | None = None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
        return EXIT_OK
    except click.exceptions.Abort:
        return EXIT_USAGE
    except click.ClickException as exc:
        exc.show()
        return EXIT_USAGE
    except CorpusFormatError as exc:
        click.echo(f"corpus error: {exc}", err=True)
        return EXIT_FORMAT
    except InternalInvariantError as exc:
        click.echo(f"internal invariant violation: {exc}", err=True)
        return EXIT_INTERNAL
    except SepforgeError as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_FORMAT


if __name__ == "__main__":
    sys.exit(main())
