"""Command-line front end: ``fourieropt {simulate,optimize,campaign,validate}``.

Exit codes: 0 success, 1 configuration error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
import time
from pathlib import Path

from . import io
from .campaign import (
    CampaignConfig,
    CostFunction,
    run_campaign,
    simulate_trajectory,
    vector_to_control,
)
from .config import ConfigError, build_config, control_from_spec, load_document, validate
from .evolution import optimize

log = logging.getLogger("fourieropt")

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="JSON config (defaults if omitted)")
    common.add_argument("--out", metavar="DIR", default="out", help="output directory")
    common.add_argument("--seed", type=int, help="base RNG seed")
    common.add_argument("--trials", type=int)
    common.add_argument("--k-min", type=int, dest="k_min")
    common.add_argument("--k-max", type=int, dest="k_max")
    common.add_argument("--mode", choices=("iterative", "noniterative"))
    common.add_argument("--jobs", type=int, help="concurrent cost evaluations")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="fourieropt", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    s = sub.add_parser("simulate", parents=[common],
                       help="simulate one control; write trajectory, events and control CSVs")
    s.add_argument("--control", metavar="PATH",
                   help="JSON control spec (overrides the config's control section); "
                        "an optimize result file works as-is")
    o = sub.add_parser("optimize", parents=[common], help="one DE run at a fixed K")
    o.add_argument("--harmonics", "-K", type=int, help="number of harmonics (default k-min)")
    sub.add_parser("campaign", parents=[common], help="multi-trial campaign over a K range")
    sub.add_parser("validate", parents=[common], help="check a config without running anything")
    return p


def _load(args) -> tuple[dict, CampaignConfig]:
    doc = load_document(args.config) if args.config else {}
    bad = validate(doc)
    if bad:
        raise ConfigError("\n".join(bad))
    if args.jobs is not None and args.jobs < 1:
        raise ConfigError("--jobs must be >= 1")
    try:
        cfg = build_config(doc, seed=args.seed, trials=args.trials, k_min=args.k_min,
                           k_max=args.k_max, mode=args.mode, jobs=args.jobs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    return doc, cfg


def cmd_validate(args) -> int:
    doc = load_document(args.config) if args.config else {}
    bad = validate(doc)
    for msg in bad:
        print(f"violation: {msg}")
    if not bad:
        print("ok")
    return EXIT_CONFIG if bad else EXIT_OK


def cmd_simulate(args) -> int:
    doc, cfg = _load(args)
    spec = load_document(args.control) if args.control else doc.get("control")
    if not spec:
        raise ConfigError("simulate needs a control section or --control file")
    control = control_from_spec(spec, cfg)
    traj = simulate_trajectory(control, cfg)
    out = Path(args.out)
    io.write_trajectory_csv(out / "trajectory.csv", traj, control)
    io.write_events_csv(out / "events.csv", traj.events)
    io.write_control_csv(out / "control.csv", control, cfg.t0, cfg.tf)
    z = traj.final_state[2] - traj.y[0, 2]
    print(f"z(tf) = {io.fmt(z)}")
    print(f"events = {len(traj.events)}, steps = {traj.n_steps}")
    return EXIT_OK


def cmd_optimize(args) -> int:
    _, cfg = _load(args)
    k = args.harmonics or cfg.k_min
    if k < 1:
        raise ConfigError("--harmonics must be >= 1")
    de = dataclasses.replace(cfg.de, seed=cfg.base_seed if cfg.de.seed is None else cfg.de.seed)
    start = time.perf_counter()
    res = optimize(CostFunction(k, cfg), cfg.decision_bounds(k), de)
    elapsed = time.perf_counter() - start
    control = vector_to_control(res.best_vector, k, cfg)
    payload = {**res.to_dict(), "harmonics": k, "distance": -res.best_cost,
               "wall_time": elapsed, "coefficients": control.to_dict()}
    io.write_json(Path(args.out) / "optimize.json", payload)
    print(f"K={k} distance={-res.best_cost:.6f} ({res.evaluation_count} evaluations, "
          f"{elapsed:.1f}s, {res.stop_reason})")
    return EXIT_OK


def format_summary(summary: dict, approach: str) -> str:
    lines = [f"{approach}", f"{'K':>3}  {'mean':>9}  {'SD':>7}  {'delta %':>8}"]
    for r in summary["rows"]:
        d = "" if r["delta"] != r["delta"] else f"{r['delta']:+8.2f}"
        sd = f"{r['sd']:7.3f}" + ("*" if r["single_trial"] else "")
        lines.append(f"{r['K']:>3}  {r['mean']:9.3f}  {sd}  {d:>8}")
    b = summary["best"]
    lines.append(f"best: K={b['K']} trial={b['trial']} distance={b['distance']:.6f}")
    if any(r["single_trial"] for r in summary["rows"]):
        lines.append("* single trial, SD reported as 0")
    return "\n".join(lines)


def cmd_campaign(args) -> int:
    _, cfg = _load(args)
    record = run_campaign(cfg)
    out = Path(args.out)
    io.write_json(out / "records.json", record.to_dict())
    if record.records:
        summary = record.summary()
        io.write_summary_csv(out / "summary.csv", {record.mode: summary})
        io.write_delta_matrix_csv(out / "delta_matrix.csv", summary)
        best = record.best()
        control = vector_to_control(best.vector, best.harmonics, cfg)
        traj = simulate_trajectory(control, cfg)
        io.write_trajectory_csv(out / "best_trajectory.csv", traj, control)
        io.write_control_csv(out / "best_control.csv", control, cfg.t0, cfg.tf)
        print(format_summary(summary, record.mode))
    if record.failures:
        io.write_json(out / "failures.json", {"failures": record.failures,
                                              "chain_stops": record.chain_stops})
        print(f"{len(record.failures)} failure(s); see {out / 'failures.json'}",
              file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


COMMANDS = {"simulate": cmd_simulate, "optimize": cmd_optimize, "campaign": cmd_campaign,
            "validate": cmd_validate}


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # anything past validation is a runtime failure
        log.debug("runtime failure", exc_info=True)
        print(f"runtime failure: {exc!r}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
