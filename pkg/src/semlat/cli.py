"""Command-line entry point.

    semlat [--config PATH] [--out DIR] [--seed N] COMMAND [options]

Commands: optimize, sweep, regions, crossover, simulate, validate-curves.
Exit codes: 0 success, 1 config/IO error, 2 infeasible problem.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .channel import gain_for_average_snr
from .config import LoadedConfig, load_config
from .errors import ConfigError, DomainError, InfeasibleQualityError
from .experiments import (
    DEFAULT_TARGETS,
    SweepSpec,
    crossover,
    modulation_regions,
    parse_grid,
    sweep,
    write_metadata,
    write_rows,
)
from .optimizer import DISCRETE_RULES, solve
from .quality import PRESET_TARGETS, load_curves, load_targets, validate
from .simulator import FADING_MODES, SimSpec, simulate_end_to_end
from .units import db_to_linear

EXIT_OK, EXIT_CONFIG, EXIT_INFEASIBLE = 0, 1, 2


def _global_options(p: argparse.ArgumentParser, suppress: bool) -> None:
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--config", default=d(None), help="JSON config (defaults: reference parameters)")
    p.add_argument("--out", default=d("results"), help="output directory")
    p.add_argument("--seed", type=int, default=d(0), help="random seed")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="semlat", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    _global_options(parser, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _global_options(common, suppress=True)
    sub = parser.add_subparsers(dest="command", required=True)

    def targets_opt(p, default):
        p.add_argument("--targets", default=default,
                       help=f"comma-separated labels {sorted(PRESET_TARGETS)} or a JSON target file")

    def mode_opts(p):
        p.add_argument("--mode", choices=("continuous", "discrete"), default="continuous")
        p.add_argument("--rule", choices=DISCRETE_RULES, default="balanced",
                       help="discrete-mode admissibility rule")

    p = sub.add_parser("optimize", parents=[common], help="solve one operating point")
    p.add_argument("--snr-db", type=float, required=True, help="average SNR in dB")
    targets_opt(p, "t0978")
    mode_opts(p)

    p = sub.add_parser("sweep", parents=[common], help="sweep average SNR, write sweep.csv")
    p.add_argument("--grid", default="5:30:0.2", help="lo:hi:step in dB")
    targets_opt(p, ",".join(DEFAULT_TARGETS))
    mode_opts(p)
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("regions", parents=[common], help="modulation regions, write regions.csv")
    p.add_argument("--grid", default="5:30:0.2")
    targets_opt(p, ",".join(DEFAULT_TARGETS))
    p.add_argument("--rule", choices=DISCRETE_RULES, default="balanced")

    p = sub.add_parser("crossover", parents=[common], help="multi-stream vs single-stream baseline")
    p.add_argument("--grid", default="5:30:0.2")
    targets_opt(p, "t0978")

    p = sub.add_parser("simulate", parents=[common], help="Monte Carlo run, write simstats.json")
    p.add_argument("--snr-db", type=float, required=True)
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--fading", choices=FADING_MODES, default="deterministic")
    targets_opt(p, "t0978")
    mode_opts(p)
    p.add_argument("--integer-packets", action="store_true", help="round packets up to whole packets")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--per-trial-csv", action="store_true", help="also write trials.csv")

    p = sub.add_parser("validate-curves", parents=[common], help="check quality curves are monotone")
    p.add_argument("--curves", default=None, help="curve file (default: curves from the config)")
    return parser


def resolve_targets(text: str, curves) -> list:
    """Targets from labels or a JSON file, validated against the curves."""
    if text.endswith(".json"):
        targets = [load_targets(text)]
    else:
        labels = [t.strip() for t in text.split(",") if t.strip()]
        unknown = [t for t in labels if t not in PRESET_TARGETS]
        if unknown or not labels:
            raise ConfigError(f"unknown target label(s) {unknown}; available: {sorted(PRESET_TARGETS)}")
        targets = [PRESET_TARGETS[t] for t in labels]
    for t in targets:
        t.requirements(curves)
    return targets


def _manifest(args, cfg: LoadedConfig, **extra) -> dict:
    m = {
        "command": args.command,
        "config": args.config,
        "config_sha256": cfg.digest,
        "seed": args.seed,
        "version": __version__,
    }
    m.update(extra)
    return m


def _outdir(args) -> Path:
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create output directory {out}: {exc}") from exc
    return out


def cmd_optimize(args, cfg: LoadedConfig) -> int:
    targets = resolve_targets(args.targets, cfg.curves)
    if len(targets) != 1:
        raise ConfigError("optimize takes exactly one target")
    target = targets[0]
    system = cfg.system
    gain = gain_for_average_snr(system, db_to_linear(args.snr_db))
    try:
        res = solve(system, gain, target.requirements(cfg.curves), mode=args.mode, rule=args.rule)
    except InfeasibleQualityError as exc:
        print(f"infeasible: {exc}")
        return EXIT_INFEASIBLE
    out = _outdir(args)
    record = {"manifest": _manifest(args, cfg, snr_db=args.snr_db, target=target.label,
                                    mode=args.mode, rule=args.rule),
              "result": res.to_dict()}
    (out / "optimize.json").write_text(json.dumps(record, indent=2, sort_keys=True) + "\n")
    if not res.optimal:
        print(f"infeasible: {res.reason}")
        return EXIT_INFEASIBLE
    a = res.allocation
    m1 = res.mod_order if res.mod_order is not None else f"continuous ({res.bits_per_symbol:.4f} b/sym)"
    print(f"p0       = {a.p_prompt * 1e3:.6g} mW ({100 * a.p_prompt / system.total_power:.4g} %)")
    print(f"p1       = {a.p_cond * 1e3:.6g} mW")
    print(f"BER1*    = {res.ber_target:.6g}")
    print(f"T0       = {res.t_prompt * 1e3:.6g} ms")
    print(f"T1       = {res.t_cond * 1e3:.6g} ms")
    print(f"T        = {res.latency * 1e3:.6g} ms")
    print(f"M1       = {m1}")
    print(f"eta_R    = {res.exp_retx:.6g}")
    if system.compute_latency:
        print(f"T+comp   = {res.end_to_end * 1e3:.6g} ms")
    return EXIT_OK


def cmd_sweep(args, cfg: LoadedConfig) -> int:
    grid = parse_grid(args.grid)
    targets = resolve_targets(args.targets, cfg.curves)
    spec = SweepSpec(tuple(grid), tuple(targets), args.mode, args.rule)
    out = _outdir(args)
    rows = sweep(cfg.system, cfg.curves, spec, workers=args.workers)
    write_rows(out / "sweep.csv", rows)
    meta = _manifest(args, cfg, grid=args.grid, targets=[t.label for t in targets],
                     mode=args.mode, rule=args.rule, rows=len(rows))
    if args.mode == "discrete":
        write_rows(out / "regions.csv", modulation_regions(cfg.system, cfg.curves, targets, grid, args.rule))
    write_metadata(out / "sweep.meta.json", meta)
    print(f"wrote {len(rows)} rows to {out / 'sweep.csv'}")
    return EXIT_OK


def cmd_regions(args, cfg: LoadedConfig) -> int:
    grid = parse_grid(args.grid)
    targets = resolve_targets(args.targets, cfg.curves)
    out = _outdir(args)
    rows = modulation_regions(cfg.system, cfg.curves, targets, grid, args.rule)
    write_rows(out / "regions.csv", rows)
    write_metadata(out / "regions.meta.json",
                   _manifest(args, cfg, grid=args.grid, targets=[t.label for t in targets], rule=args.rule))
    for r in rows:
        span = "-" if r.from_db != r.from_db else f"{r.from_db:g} .. {r.to_db:g} dB"
        print(f"{r.target_label}  M={r.mod_order:<3d} {span}")
    return EXIT_OK


def cmd_crossover(args, cfg: LoadedConfig) -> int:
    grid = parse_grid(args.grid)
    targets = resolve_targets(args.targets, cfg.curves)
    out = _outdir(args)
    rows, points = crossover(cfg.system, cfg.curves, targets, grid)
    write_rows(out / "crossover.csv", rows)
    write_metadata(out / "crossover.meta.json",
                   _manifest(args, cfg, grid=args.grid, targets=[t.label for t in targets],
                             crossover_db=points))
    for label, db in points.items():
        print(f"{label}: crossover at {db:.4f} dB" if db is not None else f"{label}: no crossover on grid")
    return EXIT_OK


def cmd_simulate(args, cfg: LoadedConfig) -> int:
    if args.trials < 1:
        raise ConfigError("--trials must be >= 1")
    if args.workers < 1:
        raise ConfigError("--workers must be >= 1")
    targets = resolve_targets(args.targets, cfg.curves)
    if len(targets) != 1:
        raise ConfigError("simulate takes exactly one target")
    spec = SimSpec(trials=args.trials, seed=args.seed, fading_mode=args.fading,
                   integer_packets=args.integer_packets, workers=args.workers)
    system = cfg.system
    gain = gain_for_average_snr(system, db_to_linear(args.snr_db))
    reqs = targets[0].requirements(cfg.curves)
    try:
        stats = simulate_end_to_end(system, reqs, spec, gain, mode=args.mode, rule=args.rule,
                                    keep_trials=args.per_trial_csv)
    except InfeasibleQualityError as exc:
        print(f"infeasible: {exc}")
        return EXIT_INFEASIBLE
    out = _outdir(args)
    record = {
        "manifest": _manifest(args, cfg, snr_db=args.snr_db, trials=args.trials, fading=args.fading,
                              target=targets[0].label, mode=args.mode, rule=args.rule,
                              integer_packets=args.integer_packets),
        "stats": stats.to_dict(),
    }
    text = json.dumps(record, indent=2, sort_keys=True) + "\n"
    (out / "simstats.json").write_text(text)
    if args.per_trial_csv:
        stats.write_trials_csv(out / "trials.csv")
    sys.stdout.write(text)
    if stats.infeasible_trials == stats.trials:
        return EXIT_INFEASIBLE
    return EXIT_OK


def cmd_validate_curves(args, cfg: LoadedConfig | None) -> int:
    curves = load_curves(args.curves) if args.curves else cfg.curves
    ok = True
    for c in curves.values():
        check = validate(c)
        ok &= check.ok
        status = "ok" if check.ok else f"violation at anchors {check.pair}: {check.message}"
        print(f"{c.name}: {status}")
    return EXIT_OK if ok else EXIT_CONFIG


COMMANDS = {
    "optimize": cmd_optimize,
    "sweep": cmd_sweep,
    "regions": cmd_regions,
    "crossover": cmd_crossover,
    "simulate": cmd_simulate,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "validate-curves":
            # curve problems are the subject of this command, not a load error
            cfg = None if args.curves else load_config(args.config)
            return cmd_validate_curves(args, cfg)
        cfg = load_config(args.config)
        return COMMANDS[args.command](args, cfg)
    except (ConfigError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
