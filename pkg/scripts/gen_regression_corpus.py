#!/usr/bin/env python3
"""Generates the synthetic regression corpus: 12 edit-pattern families with
3-5 instances each, deterministic content.

Each family keeps its own type/method vocabulary so patterns never bleed into
one another. Instances vary variable names and carry per-instance irrelevant
edits (an unchanged unique call, an old-only removed call, or a new-only added
call) to exercise context preservation in the judge.

Intentional variety: F02 inserts a standalone statement (never attachable, so
repairs are never produced) and F08 reproduces the excessive-argument
transplant failure; both keep the cross-validation metrics away from a
trivial all-correct plateau.
"""

from __future__ import annotations

import json
import shutil
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
OUT = ROOT / "corpora" / "regression12"

SIGNATURES = {
    "M1#drop": "void",
    "R2#load": "void", "R2#validate": "void",
    "A3#send": "void", "A3#sendSafe": "void",
    "D4#open": "void", "D4#openSecure": "void",
    "S5#route": "void", "S5#routeTo": "void", "V5#port": "int", "V5#host": "int",
    "Q6#sum": "int", "Q6#total": "int",
    "P7#parse": "R7", "P7#parseStrict": "R7", "R7#valid": "boolean",
    "O7#push": "void",
    "A8#acquire": "L8", "A8#acquireV2": "L8",
    "D9#load": "X9", "D9#loadAll": "X9",
    "N10#apply": "void", "N10#applyFull": "void",
    "U10#name": "String", "U10#fullName": "String", "U10#ready": "boolean",
    "F11#makeKey": "K11", "F11#makeKeySecure": "K11",
    "C11#putOld": "void", "C11#put": "void", "C11#flush11": "void",
    "S12#busy": "boolean", "S12#busyNow": "boolean",
    "W12#halt": "void", "W12#haltSafe": "void",
}


def fam01(j, v):
    old = [f"{v}.drop();"]
    new = []
    return f"void f01_i{j}(M1 {v})", old, new


def fam02(j, v):
    old = [f"{v}.load();"]
    new = [f"{v}.load();", f"{v}.validate();"]
    return f"void f02_i{j}(R2 {v})", old, new


def fam03(j, v):
    a, p = f"{v}a", f"{v}p"
    old = [f"{a}.send({p});"]
    new = [f"if ({p} != null) {{", f"    {a}.sendSafe({p});", "}"]
    return f"void f03_i{j}(A3 {a}, P3 {p})", old, new


def fam04(j, v):
    old = [f"{v}.open(\"cfg4\");"]
    new = [f"{v}.openSecure(\"cfg4\", true);"]
    return f"void f04_i{j}(D4 {v})", old, new


def fam05(j, v):
    s, u = f"{v}s", f"{v}u"
    old = [f"{s}.route({u}.port);"]
    new = [f"{s}.routeTo({u}.host, 8080);"]
    return f"void f05_i{j}(S5 {s}, V5 {u})", old, new


def fam06(j, v):
    q, t = f"{v}q", f"{v}t"
    old = [f"{t} = {q}.sum();"]
    new = [f"{t} = {q}.total(0);"]
    return f"void f06_i{j}(Q6 {q}, int {t})", old, new


def fam07(j, v):
    p, o, r = f"{v}p", f"{v}o", f"{v}r"
    old = [f"R7 {r} = {p}.parse();", f"{o}.push({r});"]
    new = [f"R7 {r} = {p}.parseStrict();",
           f"if ({r}.valid()) {{", f"    {o}.push({r});", "}"]
    return f"void f07_i{j}(P7 {p}, O7 {o})", old, new


def fam08(j, v):
    a, l = f"{v}a", f"{v}l"
    # Every instance passes a differently-labeled argument, so the argument
    # never makes it into the mined pattern; transplanting then rewrites the
    # test method's own argument with the training instance's one.
    arg = {1: "Cfg8.std()", 2: f"{v}e", 3: "7", 4: f"{v}e"}[j]
    params = {1: f"A8 {a}", 2: f"A8 {a}, E8 {v}e",
              3: f"A8 {a}", 4: f"A8 {a}, F8 {v}e"}[j]
    old = [f"L8 {l} = {a}.acquire({arg});"]
    new = [f"L8 {l} = {a}.acquireV2({arg}, 5);"]
    return f"void f08_i{j}({params})", old, new


def fam09(j, v):
    old = [f"return {v}.load();"]
    new = [f"return {v}.loadAll(0);"]
    return f"X9 f09_i{j}(D9 {v})", old, new


def fam10(j, v):
    n, u = f"{v}n", f"{v}u"
    old = [f"{n}.apply({u}.name);"]
    new = [f"if ({u}.ready()) {{", f"    {n}.applyFull({u}.fullName);", "}"]
    return f"void f10_i{j}(N10 {n}, U10 {u})", old, new


def fam11(j, v):
    f, c, w, k = f"{v}f", f"{v}c", f"{v}w", f"{v}k"
    old = [f"K11 {k} = {f}.makeKey();", f"{c}.putOld({k}, {w});", f"{c}.flush11();"]
    new = [f"K11 {k} = {f}.makeKeySecure();", f"{c}.put({k}, {w});"]
    return f"void f11_i{j}(F11 {f}, C11 {c}, V11 {w})", old, new


def fam12(j, v):
    s, w = f"{v}s", f"{v}w"
    old = [f"if ({s}.busy()) {{", f"    {w}.halt();", "}"]
    new = [f"if ({s}.busyNow()) {{", f"    {w}.haltSafe(9);", "}"]
    return f"void f12_i{j}(S12 {s}, W12 {w})", old, new


FAMILIES = [
    (1, fam01, 3), (2, fam02, 3), (3, fam03, 4), (4, fam04, 4),
    (5, fam05, 3), (6, fam06, 4), (7, fam07, 4), (8, fam08, 4),
    (9, fam09, 3), (10, fam10, 4), (11, fam11, 4), (12, fam12, 3),
]

_VARS = ["a", "b", "c", "d", "e"]


def _method(signature: str, statements: list[str]) -> str:
    body = "\n".join(f"    {s}" for s in statements)
    if body:
        return f"{signature} {{\n{body}\n}}\n"
    return f"{signature} {{\n}}\n"


def _with_irrelevant(fam: int, j: int, old: list[str], new: list[str]):
    # j==2: unchanged unique context call; j==3: old-only (removed);
    # j==4: new-only (added); j==1/5: none.
    old, new = list(old), list(new)
    if j == 2:
        old.append(f"ctx{fam}_{j}();")
        new.append(f"ctx{fam}_{j}();")
    elif j == 3:
        old.append(f"gone{fam}_{j}();")
    elif j == 4:
        new.append(f"extra{fam}_{j}();")
    return old, new


def main() -> int:
    if OUT.exists():
        shutil.rmtree(OUT)
    OUT.mkdir(parents=True)
    (OUT / "signatures.json").write_text(
        json.dumps(SIGNATURES, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    for fam, builder, count in FAMILIES:
        for j in range(1, count + 1):
            var = f"{_VARS[j - 1]}{fam}_{j}"
            signature, old, new = builder(j, var)
            old, new = _with_irrelevant(fam, j, old, new)
            name = signature.split("(")[0].split()[-1]
            change_dir = OUT / f"f{fam:02d}_i{j}"
            change_dir.mkdir()
            (change_dir / "old.minij").write_text(_method(signature, old),
                                                  encoding="utf-8")
            (change_dir / "new.minij").write_text(_method(signature, new),
                                                  encoding="utf-8")
            (change_dir / "meta.json").write_text(json.dumps({
                "methodId": f"f{fam:02d}/{name}",
                "time": fam * 1000 + j * 10,
            }) + "\n", encoding="utf-8")
    total = sum(c for _, _, c in FAMILIES)
    print(f"wrote {total} change examples to {OUT}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
