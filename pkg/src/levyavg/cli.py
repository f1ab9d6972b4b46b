"""Command-line front end.

Subcommands: strong-rate, weak-w1, slow-fast, schauder, mollifier, ex1,
regions, rate-calc.  Sweep commands read a TOML config document (schema in
the README); small calculations take flags directly.  Exit codes: 0 success,
2 config error, 3 numerical-resolution error, 64 unknown subcommand.
"""

from __future__ import annotations

import argparse
import os
import sys

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

from . import averaging, experiments, storage
from .errors import (
    ConfigError,
    ParameterError,
    RegionError,
    ResolutionError,
    ShapeError,
)

COMMANDS = (
    "strong-rate",
    "weak-w1",
    "slow-fast",
    "schauder",
    "mollifier",
    "ex1",
    "regions",
    "rate-calc",
)

USAGE = (
    "usage: levyavg <command> [options]\n"
    "commands: " + ", ".join(COMMANDS) + "\n"
    "run `levyavg <command> --help` for command options\n"
)


def _threads_default() -> int:
    env = os.environ.get("LEVY_AVG_THREADS")
    try:
        return max(1, int(env)) if env else 1
    except ValueError:
        return 1


def _add_common(sub):
    sub.add_argument("--config", required=True, help="TOML experiment document")
    sub.add_argument("--out", default=None, help="output directory for CSV + manifest")
    sub.add_argument("--seed", type=int, default=None, help="master seed override")
    sub.add_argument("--threads", type=int, default=None, help="worker threads")
    sub.add_argument("--strict", action="store_true", help="escalate resolution warnings")


def _build_parser():
    parser = argparse.ArgumentParser(prog="levyavg", usage=USAGE)
    subs = parser.add_subparsers(dest="command")
    for name in ("strong-rate", "weak-w1", "slow-fast", "schauder", "mollifier"):
        _add_common(subs.add_parser(name))
    ex1 = subs.add_parser("ex1")
    ex1.add_argument("--alpha", type=float, required=True)
    ex1.add_argument("--eps-ladder", type=int, default=6, help="number of rungs 2^-4 .. 2^-(3+N)")
    ex1.add_argument("--T", type=float, default=1.0)
    ex1.add_argument("--dt-factor", type=int, default=20)
    ex1.add_argument("--paths", type=int, default=4)
    ex1.add_argument("--seed", type=int, default=0)
    ex1.add_argument("--out", default=None)
    regions = subs.add_parser("regions")
    regions.add_argument("--alpha", type=float, required=True)
    regions.add_argument("--beta", type=float, required=True)
    rate = subs.add_parser("rate-calc")
    rate.add_argument("--alpha", type=float, required=True)
    rate.add_argument("--beta", type=float, required=True)
    rate.add_argument("--gamma", type=float, required=True)
    rate.add_argument("--iota", type=float, default=0.01)
    rate.add_argument("--p", type=float, default=1.0)
    return parser


def _load_config(path, args) -> experiments.ExperimentConfig:
    try:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config file is not valid TOML: {exc}") from exc
    exp = doc.get("experiment", {})
    kind = exp.get("kind")
    system = None
    if "system" in doc:
        sysdoc = dict(doc["system"])
        if kind == "slow_fast":
            system = experiments.SlowFastDecl(**sysdoc)
        else:
            for key in ("drift", "drift_bar", "x0"):
                if key in sysdoc and isinstance(sysdoc[key], list):
                    sysdoc[key] = tuple(sysdoc[key])
            system = experiments.SdeSystemDecl(**sysdoc)
    options = dict(doc.get("options", {}))
    try:
        return experiments.ExperimentConfig(
            kind=kind,
            system=system,
            epsilon_list=tuple(exp.get("epsilon_list", ())),
            n_paths=int(exp.get("n_paths", 0)),
            T=float(exp.get("T", 1.0)),
            dt_factor=int(exp.get("dt_factor", 20)),
            p=float(exp.get("p", 1.0)),
            master_seed=int(args.seed if args.seed is not None else exp.get("seed", 0)),
            strict_mode=bool(getattr(args, "strict", False) or exp.get("strict", False)),
            n_threads=int(args.threads if getattr(args, "threads", None) else exp.get("threads", _threads_default())),
            checkpoint_times=tuple(exp.get("checkpoint_times", ())),
            options=options,
        )
    except TypeError as exc:
        raise ConfigError(f"bad config document: {exc}") from exc


def _emit(table, out_dir, config, extra_lines=()):
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        csv_path = os.path.join(out_dir, "results.csv")
        digest = table.write(csv_path)
        storage.write_manifest(
            os.path.join(out_dir, "manifest.json"),
            config_echo=config.echo() if config else {},
            csv_hashes={"results.csv": digest},
        )
        print(f"wrote {csv_path}")
    else:
        sys.stdout.write(table.body())
    for line in extra_lines:
        print(line)


def cli_main(argv) -> int:
    argv = list(argv)
    if not argv or argv[0] in ("-h", "--help"):
        sys.stdout.write(USAGE)
        return 0
    if argv[0] not in COMMANDS:
        sys.stderr.write(USAGE)
        return 64
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    try:
        return _dispatch(args)
    except (ConfigError, ParameterError, RegionError, ShapeError) as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return 2
    except ResolutionError as exc:
        sys.stderr.write(f"resolution error: {exc}\n")
        return 3


def _dispatch(args) -> int:
    cmd = args.command
    if cmd == "regions":
        print(averaging.region_classify(args.alpha, args.beta).value)
        return 0
    if cmd == "rate-calc":
        spec = averaging.RateSpec(
            alpha=args.alpha, beta=args.beta, gamma=args.gamma, iota=args.iota, p=args.p
        )
        rate = averaging.theoretical_rate(spec)
        print(f"exponent={rate.exponent:.6f} delta1={rate.delta1:.6f}")
        return 0
    if cmd == "ex1":
        ladder = tuple(2.0 ** (-(4 + k)) for k in range(args.eps_ladder))
        config = experiments.ExperimentConfig(
            kind="ex1_exact",
            epsilon_list=ladder,
            n_paths=args.paths,
            T=args.T,
            dt_factor=args.dt_factor,
            master_seed=args.seed,
            options={"alpha": args.alpha},
        )
        table, rate = experiments.run_ex1(config)
        _emit(table, args.out, config, [f"fitted slope {rate.empirical_slope:.4f}"])
        return 0
    config = _load_config(args.config, args)
    if cmd == "strong-rate":
        table, rate = experiments.run_strong_rate(config)
        _emit(
            table,
            args.out,
            config,
            [
                f"fitted slope {rate.empirical_slope:.4f} +- {rate.stderr:.4f} "
                f"(theoretical {rate.theoretical_exponent:.4f})"
            ],
        )
    elif cmd == "weak-w1":
        table, _ = experiments.run_weak_w1(config)
        _emit(table, args.out, config)
    elif cmd == "slow-fast":
        table, rate = experiments.run_slow_fast(config)
        _emit(
            table,
            args.out,
            config,
            [
                f"fitted slope {rate.empirical_slope:.4f} +- {rate.stderr:.4f} "
                f"(theoretical {rate.theoretical_exponent:.4f})"
            ],
        )
    elif cmd == "schauder":
        table = experiments.run_schauder_sweep(config)
        _emit(table, args.out, config)
    elif cmd == "mollifier":
        table = experiments.run_mollifier_check(config)
        _emit(table, args.out, config)
    else:
        return 64
    return 0


def main():
    sys.exit(cli_main(sys.argv[1:]))
