"""Command-line driver for single runs and the experiment reproductions.

Exit codes: 0 success, 2 configuration error, 3 solver failure,
4 energy-law violation under --strict-energy.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .config import ConfigError, load_config
from .diagnostics import EnergyLawViolation
from .experiments import (
    run_accuracy,
    run_dendrite,
    run_single,
    run_stability,
    reference_solution,
)
from .solvers import SolverError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_ENERGY = 4


def _float_list(raw: str) -> tuple[float, ...]:
    try:
        return tuple(float(part) for part in raw.split(",") if part.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated floats, got {raw!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dendrosim",
        description="Energy-stable phase-field crystal growth runs and experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", required=True, type=Path, help="configuration file")
        p.add_argument("--out", required=True, type=Path, help="output directory")
        p.add_argument("--scheme", choices=("bdf1", "bdf2"), help="override time scheme")
        p.add_argument("--tau", type=float, help="override time step size")
        p.add_argument("--t-end", type=float, dest="t_end", help="override final time")
        p.add_argument("--deterministic", action="store_true", default=None,
                       help="force single-threaded, bit-reproducible execution")
        p.add_argument("--strict-energy", action="store_true", default=None,
                       dest="strict_energy",
                       help="abort (exit 4) if the modified energy ever increases")
        p.add_argument("--snapshot-every", type=int, dest="snapshot_every",
                       help="dump phi and T snapshots every N steps")

    p_run = sub.add_parser("run", help="one simulation with ledger and snapshots")
    common(p_run)

    p_acc = sub.add_parser("accuracy", help="self-convergence ladder for both schemes")
    common(p_acc)
    p_acc.add_argument("--ladder", type=_float_list, default=(4e-3, 2e-3, 1e-3, 5e-4))
    p_acc.add_argument("--ref-tau", type=float, default=5e-5, dest="ref_tau")

    p_sta = sub.add_parser("stability", help="step-size and stabilizer sweep")
    common(p_sta)
    p_sta.add_argument("--taus", type=_float_list,
                       default=(1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0))
    p_sta.add_argument("--steps", type=int, default=200, help="steps per sweep member")

    p_den = sub.add_parser("dendrite", help="fourfold dendritic growth sweep")
    common(p_den)
    p_den.add_argument("--k-values", type=_float_list, default=(0.6, 0.8, 1.0, 1.2),
                       dest="k_values", help="latent heat sweep")

    return parser


def _apply_overrides(cfg, args):
    updates = {}
    if args.scheme is not None:
        updates["scheme"] = args.scheme
    if args.tau is not None:
        updates["tau"] = args.tau
    if args.t_end is not None:
        updates["t_end"] = args.t_end
    if args.deterministic is not None:
        updates["deterministic"] = True
    if args.strict_energy is not None:
        updates["strict_energy"] = True
    if args.snapshot_every is not None:
        updates["snapshot_every"] = args.snapshot_every
    return replace(cfg, **updates) if updates else cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _apply_overrides(load_config(args.config), args)
    except (ConfigError, OSError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        if args.command == "run":
            res = run_single(cfg, args.out)
            last = res.records[-1]
            print(f"finished {cfg.scheme} run: {last.step} steps to t={last.time:g}")
            print(f"  e_modified {res.records[0].e_modified:.8g} -> {last.e_modified:.8g}")
            print(f"  max|xi-1| {res.max_xi_dev:.3e}  min a1 {res.min_a1:.6g}")
            print(f"  max identity residual {res.max_identity_residual:.3e}")
            print(f"  ledger: {res.ledger_path}")
        elif args.command == "accuracy":
            reference = reference_solution(cfg, args.ref_tau)
            for scheme in ("bdf1", "bdf2"):
                rep = run_accuracy(replace(cfg, scheme=scheme), args.ladder,
                                   args.ref_tau, reference, args.out)
                print(f"{scheme}: slope(phi)={rep.slope_phi:.3f} "
                      f"slope(T)={rep.slope_temp:.3f}")
                for tau, ep, et in zip(rep.taus, rep.errors_phi, rep.errors_temp):
                    print(f"  tau={tau:<8g} err_phi={ep:.6e} err_T={et:.6e}")
        elif args.command == "stability":
            results = run_stability(cfg, args.taus, args.out, n_steps=args.steps)
            print("stabilizers (s1,s2,s3,s4)   tau      monotone  max|xi-1|   min a1")
            for r in results:
                print(f"  {str(r.stabilizers):<24} {r.tau:<8g} {str(r.monotone):<9} "
                      f"{r.max_xi_dev:<11.3e} {r.min_a1:.6g}")
        elif args.command == "dendrite":
            results = run_dendrite(cfg, args.k_values, args.out)
            print("K      arms  axis-arms  final area")
            for r in results:
                final_area = r.result.records[-1].area
                print(f"{r.latent:<6g} {r.arms:<5d} {r.axis_arms:<10d} {final_area:.6f}")
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except EnergyLawViolation as exc:
        print(f"energy law violation: {exc}", file=sys.stderr)
        return EXIT_ENERGY
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
