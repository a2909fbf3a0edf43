#!/usr/bin/env python3
"""Metric-structure hygiene: checking, collapsing, and extending.

Loads the four-place structure from data/places.json, verifies its distance
symbol really is a pseudometric with the declared moduli, collapses the
zero-distance pair into one representative, and adds a "closest late-night
option" function as a graph relation.  Then it loads the deliberately broken
copy and shows the checker catching the planted symmetry violation.

Run it from the repository root:  python3 demos/metric_quotient.py
"""

import json
from pathlib import Path

from contlog import (
    check_pseudometric,
    encode_function,
    evaluate,
    parse,
    quotient,
    zero_distance_classes,
)
from contlog.serialize import structure_from_json

DATA = Path(__file__).parent / "data"


def load(name: str):
    return structure_from_json(json.loads((DATA / name).read_text()))


def main() -> None:
    M = load("places.json")
    print("universe:", ", ".join(M.universe))

    report = check_pseudometric(M)
    print("pseudometric + moduli check:", "ok" if report.ok else report.failures)
    assert report.ok

    # cafe and annex sit at distance zero — the moduli force every relation
    # to agree on them, so they are indistinguishable inside the logic.
    classes = zero_distance_classes(M)
    print("zero-distance classes:", [list(c) for c in classes])
    assert ("cafe", "annex") in classes

    Q = quotient(M)
    print("quotient universe:", ", ".join(Q.universe))
    assert len(Q.universe) == len(M.universe) - 1

    # Collapsing indistinguishables must not change any closed value.
    for text in ("sup x. open_late(x)", "inf x. open_late(x)"):
        phi = parse(text, M.signature)
        before = evaluate(M, phi).value.scalar
        after = evaluate(Q, parse(text, Q.signature)).value.scalar
        print(f"{text}: {before} before, {after} after the quotient")
        assert before == after

    # A function enters the language as its graph: best(x, y) measures how
    # far y is from the designated late-night fallback of x.
    fallback = {"cafe": "cafe", "annex": "cafe", "library": "cafe", "gym": "library"}
    extended = encode_function(M, "best", fallback)
    rel = extended.signature.by_name["best"]
    print("encoded function 'best': arity", rel.arity,
          "modulus", dict(extended.signature.moduli)["best"])
    # graph value 0 exactly where y = best(x)
    assert extended.interp["best"][("gym", "library")].scalar == 0
    assert extended.interp["best"][("gym", "cafe")].scalar > 0

    # --- and now the broken copy ------------------------------------------
    B = load("places_broken.json")
    report = check_pseudometric(B)
    print()
    print("broken copy accepted?", report.ok)
    for line in report.failures:
        print("  caught:", line)
    assert not report.ok
    assert any("symmetry" in line for line in report.failures)

    print()
    print("all checks passed")


if __name__ == "__main__":
    main()
