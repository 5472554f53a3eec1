#!/usr/bin/env python3
"""Reproduce the Case-II self-convergence ladders for both schemes.

Writes accuracy_bdf1.csv / accuracy_bdf2.csv (tau, L2 errors at t=1, fitted
slopes) under --out.  Expect slope ~1 for bdf1 and ~2 for bdf2.
"""

import argparse
import sys
from pathlib import Path

from dendrosim.cli import main as cli_main

ROOT = Path(__file__).resolve().parents[1]


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="out/accuracy", type=Path)
    parser.add_argument("--ref-tau", default="5e-5")
    parser.add_argument("--ladder", default="4e-3,2e-3,1e-3,5e-4")
    args = parser.parse_args()
    return cli_main([
        "accuracy",
        "--config", str(ROOT / "configs" / "case2.cfg"),
        "--out", str(args.out),
        "--ref-tau", args.ref_tau,
        "--ladder", args.ladder,
    ])


if __name__ == "__main__":
    sys.exit(main())
