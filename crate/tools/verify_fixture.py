#!/usr/bin/env python3
"""Brute-force degree check for fixtures/civil-registry.istar.

Reads `actor` and `dep` lines with regular expressions, counts edges per actor
and compares the staff rows against the published vulnerability/criticality
tables, then replays fixtures/proposal-plan.json and checks the explained rows of
the proposed table. Independent of the Rust parser.
"""
import json
import re
import sys
from fractions import Fraction
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
ACTOR = re.compile(r'^actor "([^"]+)" id "([^"]+)"')
DEP = re.compile(r'^dep \w+ "[^"]+" from "([^"]+)" to "([^"]+)" id "([^"]+)"')

# id: (out, dependees, vm, in, dependers, cm)
BASELINE = {
    "ro1": (4, 1, "4.0", 5, 2, 10),
    "ro2": (4, 2, "2.0", 3, 2, 6),
    "ro3": (3, 2, "1.5", 2, 1, 2),
    "aro": (2, 2, "1.0", 2, 1, 2),
    "rv": (4, 1, "4.0", 1, 1, 1),
    "rc23": (6, 3, "2.0", 2, 1, 2),
    "rc24": (3, 2, "1.5", 2, 1, 2),
    "rc25": (2, 1, "2.0", 1, 1, 1),
    "rc26": (1, 1, "1.0", 1, 1, 1),
}
PROPOSED = {
    "ro1": (3, 1, "3.0", 4, 1, 4),
    "aro": (4, 2, "2.0", 2, 1, 2),
    "rv": (2, 1, "2.0", 1, 1, 1),
    "rc26": (2, 1, "2.0", 2, 2, 4),
}


def load():
    names, edges = {}, {}
    for line in (ROOT / "fixtures/civil-registry.istar").read_text().splitlines():
        m = ACTOR.match(line)
        if m:
            names[m.group(1)] = m.group(2)
            continue
        m = DEP.match(line)
        if m:
            edges[m.group(3)] = [names[m.group(1)], names[m.group(2)]]
    return names, edges


def row(edges, actor):
    outs = [e for e in edges.values() if e[0] == actor]
    ins = [e for e in edges.values() if e[1] == actor]
    dependees = len({e[1] for e in outs})
    dependers = len({e[0] for e in ins})
    vm = Fraction(len(outs), dependees) if outs else Fraction(0)
    return (len(outs), dependees, f"{float(vm):.1f}", len(ins), dependers, len(ins) * dependers)


def check(edges, expected, label):
    ok = True
    for actor, want in expected.items():
        got = row(edges, actor)
        status = "ok" if got == want else "MISMATCH"
        ok &= got == want
        print(f"{label:9} {actor:6} {got} {status}")
    return ok


def main():
    names, edges = load()
    ok = len(names) == 16
    print(f"actors: {len(names)}, dependencies: {len(edges)}")
    ok &= check(edges, BASELINE, "baseline")
    plan = json.loads((ROOT / "fixtures/proposal-plan.json").read_text())
    for mv in plan["moves"]:
        slot = 0 if mv["endpoint"] == "depender" else 1
        edges[mv["dependency"]][slot] = mv["new_actor"]
    ok &= check(edges, PROPOSED, "proposed")
    print("PASS" if ok else "FAIL")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
