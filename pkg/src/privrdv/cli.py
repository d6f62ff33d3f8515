"""Command-line interface.

Exit codes: 0 success / audit pass, 1 audit failure, 2 usage or
configuration error.  The output directory is, in order of precedence:
--out flag, PRIVRDV_OUT environment variable, ./artifacts.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .artifacts import run_manifest, write_json, write_trajectory_csv, fmt
from .calibration import calibration_report
from .config import ConfigError, load_config
from .convergence import contraction_check, gaussian_max_check, rendezvous_check
from .dynamics import run
from .graph import derive_quantities
from .leakage import monte_carlo_audit

OUT_ENV = "PRIVRDV_OUT"


def _out_dir(args) -> Path:
    if args.out is not None:
        return Path(args.out)
    return Path(os.environ.get(OUT_ENV, "artifacts"))


def _add_common(sub):
    sub.add_argument("--config", required=True, help="scenario JSON path")
    sub.add_argument("--out", default=None, help="output directory")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="privrdv",
        description="Randomized-scheduling rendezvous: simulation, "
                    "privacy calibration and audits",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("validate", help="validate a scenario file")
    _add_common(sp)

    sp = sub.add_parser("simulate", help="run one trajectory and emit CSV")
    _add_common(sp)
    sp.add_argument("--horizon", type=int, default=None)
    sp.add_argument("--seed", type=int, default=None)

    sp = sub.add_parser("calibrate", help="closed-form privacy calibration")
    _add_common(sp)
    sp.add_argument("--epsilon", type=float, required=True)
    sp.add_argument("--delta", type=float, default=None,
                    help="target delta for the design-rule check "
                         "(default: the per-robot series bound)")

    sp = sub.add_parser("audit-privacy", help="Monte Carlo leakage audit")
    _add_common(sp)
    sp.add_argument("--robot", type=int, required=True, help="1-based robot index")
    sp.add_argument("--epsilon", type=float, required=True)
    sp.add_argument("--trials", type=int, default=100_000)
    sp.add_argument("--horizon", type=int, default=400)
    sp.add_argument("--seed", type=int, default=0)

    sp = sub.add_parser("audit-convergence", help="contraction and rendezvous checks")
    _add_common(sp)
    sp.add_argument("--ks", default="0,10,50",
                    help="comma-separated restart rounds for the contraction check")
    sp.add_argument("--trials", type=int, default=10_000)
    sp.add_argument("--seeds", type=int, default=100,
                    help="number of rendezvous seeds (0, 1, ...)")
    sp.add_argument("--horizon", type=int, default=None)
    sp.add_argument("--seed", type=int, default=0,
                    help="seed of the Monte Carlo restarts")
    return parser


def _cmd_validate(cfg, args) -> int:
    print(f"scenario ok: {cfg.n} robots, horizon {cfg.horizon}, seed {cfg.seed}")
    return 0


def _cmd_simulate(cfg, args) -> int:
    out = _out_dir(args)
    record = run(cfg, horizon=args.horizon, seed=args.seed)
    csv_path = write_trajectory_csv(out / "trajectory.csv", record)
    manifest = run_manifest(
        "simulate", cfg, record.seed, [csv_path],
        horizon=record.horizon, init_mode=record.init_mode,
    )
    write_json(out / "manifest.json", manifest)
    print(f"wrote {csv_path} ({record.horizon + 1} rounds, "
          f"V_final={record.V[-1]:.3e})")
    return 0


def _cmd_calibrate(cfg, args) -> int:
    derived = derive_quantities(cfg.graph)
    rows = calibration_report(derived.alpha, cfg.agents, args.epsilon,
                              target_delta=args.delta)
    reported = cfg.reported_delta_lower_bounds

    print(f"calibration at epsilon={args.epsilon:g} (deltas are lower bounds)")
    header = f"{'robot':>5} {'alpha':>7} {'delta_series':>13} {'delta_design':>13} {'reported':>10}"
    print(header)
    for row in rows:
        ref = "-"
        if reported is not None and row["robot"] <= len(reported):
            ref = f"{reported[row['robot'] - 1]:.4f}"
        print(f"{row['robot']:>5} {row['alpha']:>7.3f} "
              f"{row['delta_theorem1']:>13.6f} {row['delta_corollary']:>13.6f} "
              f"{ref:>10}")
    if reported is not None:
        print("note: 'reported' values ship with the scenario file for "
              "side-by-side comparison; they come from a different "
              "calibration convention and are not expected to match the "
              "recomputed bounds (see README).")

    out = _out_dir(args)
    payload = {
        "epsilon": args.epsilon,
        "robots": rows,
        "reported_delta_lower_bounds": list(reported) if reported else None,
    }
    path = write_json(out / "calibration.json", payload)
    write_json(out / "manifest.json",
               run_manifest("calibrate", cfg, cfg.seed, [path],
                            epsilon=args.epsilon))
    print(f"wrote {path}")
    return 0


def _cmd_audit_privacy(cfg, args) -> int:
    if not 1 <= args.robot <= cfg.n:
        print(f"error: --robot must be in 1..{cfg.n}", file=sys.stderr)
        return 2
    report = monte_carlo_audit(cfg, args.robot - 1, args.epsilon, args.trials,
                               horizon=args.horizon, seed=args.seed)
    out = _out_dir(args)
    path = write_json(out / "privacy_audit.json", report.to_dict())
    write_json(out / "manifest.json",
               run_manifest("audit-privacy", cfg, args.seed, [path],
                            robot=args.robot, epsilon=args.epsilon,
                            trials=args.trials, horizon=args.horizon))
    print(f"robot {args.robot}: coverage={report.coverage:.5f} "
          f"(wilson99 [{report.wilson_ci[0]:.5f}, {report.wilson_ci[1]:.5f}]), "
          f"required >= {1 - report.delta_series:.5f} - slack")
    print(f"wrote {path}")
    return 0 if report.passed else 1


def _cmd_audit_convergence(cfg, args) -> int:
    out = _out_dir(args)
    derived = derive_quantities(cfg.graph)
    ks = [int(s) for s in args.ks.split(",") if s.strip() != ""]
    horizon = cfg.horizon if args.horizon is None else args.horizon

    contraction = [contraction_check(cfg, k, args.trials, args.seed) for k in ks]
    empirical, bound = gaussian_max_check(max(args.trials, 10_000), 0,
                                          cfg.agents, cfg.n, seed=args.seed)
    rdv = rendezvous_check(cfg, horizon, range(args.seeds))

    csv_path = out / "rendezvous_seeds.csv"
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    with csv_path.open("w") as fh:
        fh.write("seed,v_final,v_window_max\n")
        for s, vf, vw in zip(rdv.seeds, rdv.v_final, rdv.v_window_max):
            fh.write(f"{s},{fmt(vf)},{fmt(vw)}\n")

    payload = {
        "L": derived.L,
        "epsilon_floor": derived.epsilon_floor,
        "contraction": [c.to_dict() for c in contraction],
        "gaussian_max": {"empirical": empirical, "bound": bound, "round": 0},
        "rendezvous": rdv.to_dict(),
    }
    path = write_json(out / "convergence_audit.json", payload)
    write_json(out / "manifest.json",
               run_manifest("audit-convergence", cfg, args.seed,
                            [path, csv_path], ks=ks, trials=args.trials,
                            horizon=horizon, n_seeds=args.seeds))

    ok = all(c.passed for c in contraction) and rdv.passed and empirical <= bound
    for c in contraction:
        print(f"contraction k={c.k}: lhs={c.lhs:.4f} rhs={c.rhs:.4f} "
              f"({'pass' if c.passed else 'FAIL'})")
    print(f"gaussian max: empirical={empirical:.4f} bound={bound:.4f}")
    print(f"rendezvous: {rdv.n_pass}/{len(rdv.seeds)} seeds below "
          f"{rdv.threshold:g} ({'pass' if rdv.passed else 'FAIL'})")
    print(f"wrote {path}")
    return 0 if ok else 1


_COMMANDS = {
    "validate": _cmd_validate,
    "simulate": _cmd_simulate,
    "calibrate": _cmd_calibrate,
    "audit-privacy": _cmd_audit_privacy,
    "audit-convergence": _cmd_audit_convergence,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors, 0 on --help/--version
        return int(exc.code or 0)
    try:
        cfg = load_config(args.config)
    except ConfigError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except OSError as err:
        print(f"error: cannot read config: {err}", file=sys.stderr)
        return 2
    try:
        return _COMMANDS[args.command](cfg, args)
    except (ValueError, ConfigError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
