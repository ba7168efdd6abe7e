"""Change-example corpora on disk.

Layout: `<corpus>/<change-name>/{old.minij,new.minij,meta.json}` where meta
carries the stable method id and the commit timestamp. A corpus-level
`signatures.json` provides the builtin signature table for its fixtures.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from sepforge.changegraph import ChangeId
from sepforge.errors import CorpusFormatError, SepforgeError
from sepforge.minij import parse_method


@dataclass
class ChangeExample:
    change_id: ChangeId
    old_source: str
    new_source: str


def ingest_corpus(path: str | Path) -> tuple[list[ChangeExample], list[str]]:
    """Loads every change directory, sorted by (time, methodId).

    Returns (examples, warnings); entries with unparsable sources or with
    differing method names are reported in the warnings and skipped. A change
    directory without its meta.json manifest is a format error.
    """
    root = Path(path)
    if not root.is_dir():
        raise CorpusFormatError(f"corpus directory {root} does not exist")
    examples: list[ChangeExample] = []
    warnings: list[str] = []
    for entry in sorted(p for p in root.iterdir() if p.is_dir()):
        meta_path = entry / "meta.json"
        if not meta_path.exists():
            raise CorpusFormatError(f"{entry.name}: missing meta.json manifest")
        try:
            meta = json.loads(meta_path.read_text(encoding="utf-8"))
            change_id = ChangeId(str(meta["methodId"]), int(meta["time"]))
            old_source = (entry / "old.minij").read_text(encoding="utf-8")
            new_source = (entry / "new.minij").read_text(encoding="utf-8")
        except CorpusFormatError:
            raise
        except (OSError, KeyError, ValueError) as exc:
            warnings.append(f"{entry.name}: skipped ({exc})")
            continue
        try:
            old_ast = parse_method(old_source)
            new_ast = parse_method(new_source)
        except SepforgeError as exc:
            warnings.append(f"{entry.name}: skipped (unparsable: {exc})")
            continue
        if old_ast.label != new_ast.label:
            warnings.append(f"{entry.name}: skipped (method name changed between versions)")
            continue
        examples.append(ChangeExample(change_id, old_source, new_source))
    examples.sort(key=lambda e: (e.change_id.time, e.change_id.method_id))
    return examples, warnings


def corpus_signatures(path: str | Path) -> dict[str, str]:
    sig_path = Path(path) / "signatures.json"
    if sig_path.exists():
        data = json.loads(sig_path.read_text(encoding="utf-8"))
        return {str(k): str(v) for k, v in data.items()}
    return {}
