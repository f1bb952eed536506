#!/usr/bin/env python3
"""Verify every entry of the heat-kernel catalog and the cross-checks.

Usage:
    python scripts/verify_kernels.py [--skip-cross]

Prints one line per kernel (PDE residual, worst normalization defect, final
delta-sequence value) followed by the catalog-level consistency checks.
Exit status 1 if anything fails.
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from parasym import kernels as K  # noqa: E402


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--skip-cross", action="store_true",
                    help="skip the catalog-level cross-checks")
    args = ap.parse_args(argv)
    ok = True
    for name in K.list_kernels():
        rep = K.verify_entry(name)
        ok &= rep["pass"]
        print("%-22s %s  resid %.1e  norm %.1e  delta %.1e"
              % (name, "PASS" if rep["pass"] else "FAIL", rep["residual"],
                 max(rep["normalization"]), rep["delta_limit"][-1]))
    if not args.skip_cross:
        spread, _ = K.mehler_transform_consistency()
        checks = [
            ("mehler vs transform", spread, 1e-7),
            ("radial vs canonical", K.radial_from_canonical_consistency(),
             1e-9),
            ("semigroup heat_1d", K.semigroup_check("heat_1d"), 1e-6),
            ("semigroup ou_fp", K.semigroup_check("ou_fp"), 1e-6),
        ]
        for name, val, tol in checks:
            good = val <= tol
            ok &= good
            print("%-22s %s  %.1e (tol %.0e)"
                  % (name, "PASS" if good else "FAIL", val, tol))
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
