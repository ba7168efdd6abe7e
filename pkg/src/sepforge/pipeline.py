"""Orchestration: corpus -> change graphs -> patterns -> detection -> repair.

Pattern files are self-contained JSON: each pattern carries its instances'
sources so repair does not need the mining corpus.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from sepforge.astdiff import map_asts
from sepforge.changegraph import DEFAULT_CLOSURE_DEPTH, ChangeGraph, ChangeId, \
    build_change_graph, transitive_closure
from sepforge.corpus import ChangeExample
from sepforge.detector import Match, detect, filter_already_applied
from sepforge.errors import InvalidResultError, UnattachableMtsError
from sepforge.fgpdg import MODE_SIRIUS, Fgpdg, build_fgpdg
from sepforge.miner import PatternGraph, Sep, SepInstance, mine_seps
from sepforge.minij import ast as A
from sepforge.minij import build_type_env, parse_method, print_method
from sepforge.transformer import PatternInstance, apply_sep, build_pattern_instance

PATTERN_FORMAT_VERSION = 1


def example_change_graph(example: ChangeExample, signatures: dict[str, str],
                         mode: str = MODE_SIRIUS,
                         closure_depth: int = DEFAULT_CLOSURE_DEPTH) -> ChangeGraph:
    old_ast = parse_method(example.old_source)
    new_ast = parse_method(example.new_source)
    env_old = build_type_env(old_ast, signatures)
    env_new = build_type_env(new_ast, signatures)
    cg = build_change_graph(old_ast, new_ast, env_old, env_new,
                            map_asts(old_ast, new_ast), example.change_id,
                            mode=mode, closure_depth=closure_depth)
    cg.closure_depth = closure_depth
    return cg


def mine_from_examples(examples: list[ChangeExample], signatures: dict[str, str],
                       min_support: int, mode: str = MODE_SIRIUS,
                       closure_depth: int = DEFAULT_CLOSURE_DEPTH,
                       max_nodes: int = 20, all_frequent: bool = False) -> list[Sep]:
    graphs = [example_change_graph(e, signatures, mode, closure_depth) for e in examples]
    seps = mine_seps(graphs, min_support, max_nodes=max_nodes, all_frequent=all_frequent)
    sources = {e.change_id: (e.old_source, e.new_source) for e in examples}
    for sep in seps:
        sep.sources = {
            inst.change_id: sources[inst.change_id]
            for inst in sep.instances if inst.change_id in sources
        }
    return seps


def client_graph(source: str, signatures: dict[str, str], mode: str = MODE_SIRIUS,
                 closure_depth: int = DEFAULT_CLOSURE_DEPTH,
                 method_id: str | None = None):
    """(ast, env, closed fgPDG) for one client method."""
    ast = parse_method(source)
    env = build_type_env(ast, signatures)
    graph = build_fgpdg(ast, env, mode, method_id=method_id or ast.label)
    transitive_closure(graph, closure_depth)
    return ast, env, graph


def designated_instance(sep: Sep, signatures: dict[str, str]) -> PatternInstance:
    """The chronologically first instance backs all transplants."""
    inst = sep.instances[0]
    old_src, new_src = sep.sources[inst.change_id]
    return build_pattern_instance(
        sep, inst.change_id.method_id, inst.change_id.time, old_src, new_src,
        signatures, inst.old_embedding, inst.new_embedding)


@dataclass
class RepairOutcome:
    applied: int
    repaired_source: str | None
    error_kind: str | None = None
    error: str | None = None


def _match_order_key(match: Match, graph: Fgpdg, ast: A.AstNode):
    order = {n.id: i for i, n in enumerate(ast.walk())}
    positions = [min(order[a] for a in graph.node(c).ast_anchors)
                 for c in match.g_map.values() if graph.node(c).ast_anchors]
    return (min(positions) if positions else 0, sorted(match.g_map.items()))


def repair_client(source: str, sep: Sep, signatures: dict[str, str],
                  method_id: str | None = None, max_rounds: int = 32) -> RepairOutcome:
    """Applies every applicable match in source order, recomputing the client
    graph after each application."""
    instance = designated_instance(sep, signatures)
    current = source
    applied = 0
    for _ in range(max_rounds):
        ast, env, graph = client_graph(current, signatures, sep.mode,
                                       sep.closure_depth, method_id)
        matches = filter_already_applied(graph, sep, detect(graph, sep))
        if not matches:
            break
        matches.sort(key=lambda m: _match_order_key(m, graph, ast))
        try:
            repaired = apply_sep(ast, graph, sep, matches[0], instance, env)
        except UnattachableMtsError as exc:
            return RepairOutcome(applied, None, "unattachable-mts", str(exc))
        except InvalidResultError as exc:
            return RepairOutcome(applied, None, "invalid-syntax", str(exc))
        current = print_method(repaired)
        applied += 1
    return RepairOutcome(applied, current if applied else None)


# -- pattern file format -------------------------------------------------------


def _pattern_graph_dict(g: PatternGraph) -> dict:
    return {
        "nodes": [{"category": c, "label": l} for c, l in g.nodes],
        "edges": [{"source": i, "target": j, "label": l} for i, j, l in g.edges],
    }


def _pattern_graph_from(d: dict) -> PatternGraph:
    return PatternGraph(
        nodes=tuple((n["category"], n["label"]) for n in d["nodes"]),
        edges=tuple(sorted((e["source"], e["target"], e["label"]) for e in d["edges"])))


def serialize_seps(seps: list[Sep]) -> dict:
    patterns = []
    for sep in seps:
        patterns.append({
            "id": sep.sep_id,
            "mode": sep.mode,
            "closureDepth": sep.closure_depth,
            "support": sep.support,
            "code": sep.code,
            "oldGraph": _pattern_graph_dict(sep.old_graph),
            "newGraph": _pattern_graph_dict(sep.new_graph),
            "mapEdges": [[o, n] for o, n in sep.internal_map_edges],
            "instances": [{
                "methodId": inst.change_id.method_id,
                "time": inst.change_id.time,
                "oldEmbedding": {str(k): v for k, v in sorted(inst.old_embedding.items())},
                "newEmbedding": {str(k): v for k, v in sorted(inst.new_embedding.items())},
            } for inst in sep.instances],
            "sources": {
                f"{cid.method_id}@{cid.time}": {"old": old, "new": new}
                for cid, (old, new) in sorted(sep.sources.items())
            },
        })
    return {"formatVersion": PATTERN_FORMAT_VERSION, "patterns": patterns}


def deserialize_seps(data: dict) -> list[Sep]:
    if data.get("formatVersion") != PATTERN_FORMAT_VERSION:
        raise ValueError("unsupported pattern file version")
    seps = []
    for p in data["patterns"]:
        instances = [SepInstance(
            ChangeId(i["methodId"], i["time"]),
            {int(k): v for k, v in i["oldEmbedding"].items()},
            {int(k): v for k, v in i["newEmbedding"].items()},
        ) for i in p["instances"]]
        sources = {}
        for key, src in p["sources"].items():
            method_id, _, time = key.rpartition("@")
            sources[ChangeId(method_id, int(time))] = (src["old"], src["new"])
        seps.append(Sep(
            sep_id=p["id"], mode=p["mode"],
            old_graph=_pattern_graph_from(p["oldGraph"]),
            new_graph=_pattern_graph_from(p["newGraph"]),
            internal_map_edges=tuple(tuple(e) for e in p["mapEdges"]),
            instances=instances, support=p["support"], code=p["code"],
            closure_depth=p.get("closureDepth", DEFAULT_CLOSURE_DEPTH),
            sources=sources))
    return seps


def write_patterns(seps: list[Sep], path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(serialize_seps(seps), indent=2, sort_keys=True) + "\n",
        encoding="utf-8")


def read_patterns(path: str | Path) -> list[Sep]:
    return deserialize_seps(json.loads(Path(path).read_text(encoding="utf-8")))
