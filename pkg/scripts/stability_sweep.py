#!/usr/bin/env python3
"""Sweep step sizes and stabilizer sets on the Case-II setup.

Every run must keep the modified energy monotone (the sweep aborts
otherwise); the printed table shows how far the auxiliary ratio strays
from 1 with and without the extra stabilizers.
"""

import argparse
import sys
from pathlib import Path

from dendrosim.cli import main as cli_main

ROOT = Path(__file__).resolve().parents[1]


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="out/stability", type=Path)
    parser.add_argument("--taus", default="1e-3,1e-2,1e-1,1,10,100")
    parser.add_argument("--steps", default="200")
    args = parser.parse_args()
    return cli_main([
        "stability",
        "--config", str(ROOT / "configs" / "case2.cfg"),
        "--out", str(args.out),
        "--taus", args.taus,
        "--steps", args.steps,
    ])


if __name__ == "__main__":
    sys.exit(main())
