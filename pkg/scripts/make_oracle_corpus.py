"""Write the frozen oracle regression corpus used by the test suite.

Each line holds a random taxonomy, a content, a consent and the oracle's
verdict.  Regenerate only when the corpus format changes:

    python3 scripts/make_oracle_corpus.py tests/fixtures/oracle_corpus.jsonl
"""

import argparse
import json
import random
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))

from randgen import random_case  # noqa: E402

from consentbench.oracle import oracle_complies  # noqa: E402
from consentbench.splog import to_obj  # noqa: E402


def case_record(i: int) -> dict:
    c, consent, t = random_case(random.Random(f"corpus:{i}"), max_classes=30)
    return {
        "case": i,
        "categories": {cls: t.category_of[cls].value for cls in sorted(t.classes)},
        "edges": sorted([child, parent] for child, parent in t.edges),
        "content": to_obj(c, t.prefixes),
        "consent": [to_obj(b, t.prefixes) for b in consent.basics],
        "oracle": oracle_complies(c, consent, t),
    }


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("out", type=Path)
    ap.add_argument("--cases", type=int, default=1000)
    a = ap.parse_args()
    with open(a.out, "w") as f:
        for i in range(a.cases):
            f.write(json.dumps(case_record(i), separators=(",", ":")) + "\n")


if __name__ == "__main__":
    main()
