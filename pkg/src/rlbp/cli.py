"""Command-line entry point: ``rlbp {gen-trace,run,sweep,env-demo,budget}``.

Settings resolve as command-line flags, then the ``RLBP_SEED`` environment
variable (master seed only), then the config file, then built-in defaults.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import logging
import os
import sys

from . import __version__
from .config import ConfigError, ConfigFile, load_config
from .env import BranchEnv, ConstantAgent, OracleAgent, PredictorAgent, run_episode
from .harness import CSV_COLUMNS, DEFAULT_WARMUP, budget_to_entries, emit_report, emit_csv, run_single, sweep
from .predictors import PREDICTORS, PredictorConfig
from .trace import T, TraceFormatError, generate_synthetic, load_trace, write_trace

log = logging.getLogger("rlbp")

SEED_ENV = "RLBP_SEED"


class CliError(Exception):
    pass


def _hex_or_int(v: str) -> int:
    return int(v, 0)


def _env_seed() -> int | None:
    raw = os.environ.get(SEED_ENV)
    if raw is None or raw == "":
        return None
    try:
        return int(raw, 0)
    except ValueError:
        raise CliError(f"{SEED_ENV} must be an integer, got {raw!r}")


def _maybe_config(path) -> ConfigFile:
    return load_config(path) if path else ConfigFile()


def _predictor_config(name: str, cfg: ConfigFile) -> tuple[str, PredictorConfig]:
    if name in cfg.predictors:
        return name, cfg.predictors[name]
    if name in PREDICTORS:
        return name, PredictorConfig(name)
    raise CliError(f"unknown predictor {name!r}: not a [predictor.{name}] section "
                   f"nor one of {', '.join(PREDICTORS)}")


def _apply_overrides(pc: PredictorConfig, args) -> PredictorConfig:
    changes = {}
    if getattr(args, "history", None) is not None:
        if "history_length" not in pc.params_for_kind():
            raise CliError(f"{pc.kind} does not use a history length")
        changes["history_length"] = args.history
    if getattr(args, "entries", None) is not None:
        changes["table_entries"] = args.entries
        changes["unbounded"] = False
    if getattr(args, "unbounded", False):
        changes["unbounded"] = True
    return dataclasses.replace(pc, **changes) if changes else pc


# --- commands --------------------------------------------------------------


def cmd_gen_trace(args) -> int:
    cfg = load_config(args.spec)
    spec = cfg.trace_spec(args.section)
    changes = {}
    if args.length is not None:
        changes["length"] = args.length
    if args.seed is not None:
        changes["seed"] = args.seed
    elif _env_seed() is not None:
        changes["seed"] = _env_seed()
    if changes:
        spec = dataclasses.replace(spec, **changes)
    trace = generate_synthetic(spec)
    write_trace(trace, args.out)
    print(f"wrote {len(trace)} records to {args.out}", file=sys.stderr)
    return 0


def cmd_run(args) -> int:
    cfg = _maybe_config(args.config)
    name, pc = _predictor_config(args.predictor, cfg)
    pc = _apply_overrides(pc, args)
    seed = args.seed if args.seed is not None else _env_seed()
    if seed is None:
        seed = cfg.sweep.seed if cfg.sweep is not None else 0
    if args.budget is not None and not pc.unbounded and "table_entries" in pc.params_for_kind():
        pc = dataclasses.replace(pc, table_entries=budget_to_entries(pc.kind, pc.entry_bits(), args.budget))
    pc = dataclasses.replace(pc, seed=seed)
    trace = load_trace(args.trace)
    warmup = args.warmup
    if warmup is None:
        warmup = cfg.sweep.warmup if cfg.sweep is not None else DEFAULT_WARMUP
    predictor = pc.build()
    stats = run_single(predictor, trace, warmup)
    hl = pc.full_params().get("history_length", 0)
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    w.writerow([name, pc.kind, hl, trace.name, stats.branches, stats.mispredictions,
                stats.instructions, f"{stats.mpki:.6f}", f"{stats.mpkb:.6f}", seed])
    return 0


def cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    seed = args.seed if args.seed is not None else _env_seed()
    exp = cfg.experiment(master_seed=seed, n_jobs=args.jobs, output=args.out)
    result = sweep(exp)
    if exp.output:
        emit_report(result, exp.output)
        print(f"wrote {len(result.cells)} cells to {exp.output}", file=sys.stderr)
    else:
        sys.stdout.write(emit_csv(result))
    return 0


def cmd_env_demo(args) -> int:
    cfg = _maybe_config(args.config)
    trace = load_trace(args.trace)
    env = BranchEnv(trace, args.ghr_len, args.pc)
    seed = args.seed if args.seed is not None else _env_seed()
    if args.agent == "oracle":
        agent = OracleAgent(env)
    elif args.agent == "always-taken":
        agent = ConstantAgent(T)
    elif args.agent == "never-taken":
        agent = ConstantAgent(T.flip())
    else:
        _, pc = _predictor_config(args.agent, cfg)
        if "history_length" in pc.params_for_kind():
            pc = dataclasses.replace(pc, history_length=args.ghr_len)
        agent = PredictorAgent(dataclasses.replace(pc, seed=seed).build(), args.pc)
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["step", "action", "reward", "cumulative"])
    for step, action, reward, total in run_episode(env, agent):
        w.writerow([step, int(action), reward, total])
    return 0


def cmd_budget(args) -> int:
    if args.entry_bits is not None:
        bits = args.entry_bits
    else:
        kw = {}
        if args.history is not None:
            kw["history_length"] = args.history
        bits = PredictorConfig(args.kind, **kw).entry_bits()
    print(budget_to_entries(args.kind, bits, args.bits))
    return 0


# --- parser ----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rlbp", description="Trace-driven branch prediction lab.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    p = sub.add_parser("gen-trace", help="write a synthetic trace from a [trace] section")
    p.add_argument("--spec", required=True, help="config file holding the trace recipe")
    p.add_argument("--section", default="trace", help="trace section to use (default: trace)")
    p.add_argument("--out", required=True, help="output trace-text CSV")
    p.add_argument("--length", type=int, help="override the record count")
    p.add_argument("--seed", type=_hex_or_int, help="override the generator seed")
    p.set_defaults(func=cmd_gen_trace)

    p = sub.add_parser("run", help="run one predictor over one trace")
    p.add_argument("--predictor", required=True, help="predictor section name or kind")
    p.add_argument("--trace", required=True, help="trace-text CSV")
    p.add_argument("--config", help="config file with [predictor.NAME] sections")
    p.add_argument("--history", type=int, help="global history length")
    p.add_argument("--entries", type=_hex_or_int, help="table entries (power of two)")
    p.add_argument("--unbounded", action="store_true", help="one weight row per pc")
    p.add_argument("--budget", type=_hex_or_int, help="storage budget in bits; sizes the table")
    p.add_argument("--warmup", type=int, help=f"branches excluded from metrics (default {DEFAULT_WARMUP})")
    p.add_argument("--seed", type=_hex_or_int, help="predictor seed")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="run a [sweep] section and write the result CSV")
    p.add_argument("--config", required=True, help="config file")
    p.add_argument("--out", help="output CSV (default: [sweep] output, else stdout)")
    p.add_argument("--jobs", type=int, help="parallel workers")
    p.add_argument("--seed", type=_hex_or_int, help="master seed")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("env-demo", help="play one environment episode and print the rewards")
    p.add_argument("--trace", required=True, help="trace-text CSV")
    p.add_argument("--pc", required=True, type=_hex_or_int, help="target branch address")
    p.add_argument("--ghr-len", type=int, default=8, help="observation width (default 8)")
    p.add_argument("--agent", default="gqlag",
                   help="oracle, always-taken, never-taken, a predictor kind or section name")
    p.add_argument("--config", help="config file with [predictor.NAME] sections")
    p.add_argument("--seed", type=_hex_or_int, help="agent seed")
    p.set_defaults(func=cmd_env_demo)

    p = sub.add_parser("budget", help="table entries that fit a storage budget")
    p.add_argument("--kind", required=True, choices=sorted(PREDICTORS), help="predictor kind")
    p.add_argument("--bits", required=True, type=_hex_or_int, help="budget in bits")
    p.add_argument("--entry-bits", type=int, help="override bits per entry")
    p.add_argument("--history", type=int, help="history length (sizes perceptron-style rows)")
    p.set_defaults(func=cmd_budget)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (CliError, ConfigError, TraceFormatError) as exc:
        print(f"rlbp {args.command}: error: {exc}", file=sys.stderr)
    except FileNotFoundError as exc:
        print(f"rlbp {args.command}: error: file not found: {exc.filename}", file=sys.stderr)
    except OSError as exc:
        print(f"rlbp {args.command}: error: I/O failure: {exc}", file=sys.stderr)
    except (ValueError, TypeError, RuntimeError) as exc:
        print(f"rlbp {args.command}: error: {exc}", file=sys.stderr)
    return 1


if __name__ == "__main__":
    sys.exit(main())
