#!/usr/bin/env python3
"""Grow fourfold dendrites for a sweep of latent-heat values.

Each K runs to its benchmark final time with phi/T snapshots at the preset
instants and a full energy ledger; any contour viewer on the snapshot
files shows the four-branch morphology.  Budget tens of minutes for the
full sweep at 256x256.
"""

import argparse
import sys
from pathlib import Path

from dendrosim.cli import main as cli_main

ROOT = Path(__file__).resolve().parents[1]


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="out/dendrite", type=Path)
    parser.add_argument("--k-values", default="0.6,0.8,1.0,1.2")
    args = parser.parse_args()
    return cli_main([
        "dendrite",
        "--config", str(ROOT / "configs" / "dendrite.cfg"),
        "--out", str(args.out),
        "--k-values", args.k_values,
    ])


if __name__ == "__main__":
    sys.exit(main())
