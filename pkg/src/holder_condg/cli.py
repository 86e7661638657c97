"""Command-line entry point: ``holder-condg run|report|check``."""

from __future__ import annotations

import argparse
import dataclasses
import logging
import os
import sys

from .bench import (SEED_ENV, ConfigError, ExperimentConfig, OutputError, check_record,
                    emit_outputs, emit_reports, load_config, read_runs, run_experiment,
                    summary_rows)
from .solvers import RunStatus

EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_RUN_ERROR = 0, 2, 3, 4


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="holder-condg",
                                 description="Conditional gradient benchmarks for multiobjective composite problems.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment from a key = value config file")
    run.add_argument("config", nargs="?", help="config file (defaults are used when omitted)")
    run.add_argument("--seed", type=int, help=f"master seed (overrides the config and ${SEED_ENV})")
    run.add_argument("--out", help="output directory")
    run.add_argument("--jobs", type=int, help="parallel worker processes")
    run.add_argument("--fixed-model", action="store_true",
                     help="case_ii: one support model per problem instead of one per start")

    rep = sub.add_parser("report", help="recompute summary, metrics and profiles from runs.jsonl")
    rep.add_argument("runs", help="runs.jsonl or the directory holding it")
    rep.add_argument("--out", help="output directory (defaults to the runs directory)")

    chk = sub.add_parser("check", help="replay the theory checks on stored runs")
    chk.add_argument("runs", help="runs.jsonl or the directory holding it")
    return ap


def _resolve_config(args) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    changes = {}
    env = os.environ.get(SEED_ENV)
    if env is not None:
        try:
            changes["seed"] = int(env)
        except ValueError as exc:
            raise ConfigError(f"{SEED_ENV} must be an integer, got {env!r}") from exc
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.out:
        changes["output_dir"] = args.out
    if args.jobs is not None:
        changes["jobs"] = args.jobs
    if args.fixed_model:
        changes["fixed_model"] = True
    return dataclasses.replace(cfg, **changes)


def _print_summary(records):
    for row in summary_rows(records):
        print(f"{row['problem']:<11} {row['case']:<8} {row['solver']:<4} "
              f"iter={row['median_iter']:g} feval={row['median_feval']:g} failed={row['n_failed']}")


def _cmd_run(args) -> int:
    cfg = _resolve_config(args)
    records = run_experiment(cfg)
    emit_outputs(records, cfg.output_dir)
    _print_summary(records)
    errors = [r for r in records if r["status"] == RunStatus.ERROR.value]
    for r in errors:
        print(f"error: {r['problem']} {r['case']} {r['solver']} start {r['start']}: {r['message']}",
              file=sys.stderr)
    return EXIT_RUN_ERROR if errors else EXIT_OK


def _cmd_report(args) -> int:
    records = read_runs(args.runs)
    out = args.out or (args.runs if os.path.isdir(args.runs) else os.path.dirname(args.runs) or ".")
    emit_reports(records, out)
    _print_summary(records)
    return EXIT_OK


def _cmd_check(args) -> int:
    records = read_runs(args.runs)
    bad = 0
    for rec in records:
        report = check_record(rec)
        issues = [f"{k}: {v[0]}" for k, v in report.items() if v]
        if issues or rec["status"] == RunStatus.ERROR.value:
            bad += 1
            print(f"{rec['problem']} {rec['case']} {rec['solver']} start {rec['start']}: "
                  + ("; ".join(issues) or rec["message"]))
    print(f"checked {len(records)} runs, {bad} with violations")
    return EXIT_RUN_ERROR if bad else EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    handlers = {"run": _cmd_run, "report": _cmd_report, "check": _cmd_check}
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OutputError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
