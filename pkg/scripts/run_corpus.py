#!/usr/bin/env python3
"""Analyze every .eq file in the equations/ corpus and print a summary table.

Usage:
    python scripts/run_corpus.py [--dir EQDIR] [--json]

With --json, emits the full analysis report for each equation (one JSON
document per line).  Exit status is 1 if any equation fails to analyze.
"""

import argparse
import json
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from parasym import cli  # noqa: E402
from parasym.classify import classify  # noqa: E402
from parasym.invariants import ParabolicEquation, compute_invariants  # noqa: E402
from parasym.parser import parse_file  # noqa: E402


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--dir", default=None, help="corpus directory")
    ap.add_argument("--json", action="store_true",
                    help="emit one full JSON report per line")
    args = ap.parse_args(argv)
    eqdir = Path(args.dir) if args.dir else \
        Path(__file__).resolve().parent.parent / "equations"
    paths = sorted(eqdir.glob("*.eq"))
    if not paths:
        print("no .eq files in %s" % eqdir, file=sys.stderr)
        return 1
    failures = 0
    for path in paths:
        if args.json:
            rc = cli.main(["--json", "analyze", str(path)])
            failures += rc != 0
            continue
        try:
            eq = ParabolicEquation.from_program(parse_file(path))
            cls = classify(compute_invariants(eq))
            consts = ", ".join("%s=%.6g" % (k, v)
                               for k, v in sorted(cls.constants.items()))
            print("%-24s dim %d   %s" % (path.stem, cls.dim, consts))
        except Exception as exc:
            failures += 1
            print("%-24s ERROR: %s" % (path.stem, exc))
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
