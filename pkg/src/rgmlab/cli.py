"""Command line runner: ``rgmlab run CONFIG [--out DIR] [--seed N] [--jobs K]``.

Exit status is 0 when every verdict-bearing experiment passes (inconclusive
results only warn), 2 when any fails, and 1 on configuration, unknown-family
or class-hypothesis errors.
"""

from __future__ import annotations

import argparse
import os
import sys

from .config import load_config
from .errors import ClassHypothesisError, ConfigError, ModelError, UnknownFamilyError
from .experiments import models_of, run_experiment
from .families import describe_families
from .reports import emit_csv, emit_report

EXIT_OK, EXIT_CONFIG, EXIT_FAIL = 0, 1, 2


def _diagnostic(exc, cfg_path, exp=None, key=None):
    line = exp.line_of(key) if exp is not None and key else (exp.line if exp is not None else None)
    if isinstance(exc, UnknownFamilyError):
        msg = f"unknown family: {exc}"
    elif isinstance(exc, ClassHypothesisError):
        msg = f"class-hypothesis error: {exc}"
    else:
        msg = str(exc)
    if exp is not None:
        msg = f"experiment {exp.name!r}: {msg}"
    return str(ConfigError(msg, line, cfg_path))


def run(config_path, output_dir="out", master_seed=None, jobs=1, stream=None):
    """Execute every experiment in ``config_path``; returns the exit code."""
    err = stream or sys.stderr
    try:
        cfg = load_config(config_path)
    except ConfigError as exc:
        print(f"error: {exc}", file=err)
        return EXIT_CONFIG
    seed = cfg.master_seed if master_seed is None else master_seed

    built = []
    for exp in cfg.experiments:
        try:
            built.append(models_of(exp))
        except ModelError as exc:
            key = next((k for k in ("model", "model_a", "model_b", "config") if k in exp.key_lines), None)
            print(f"error: {_diagnostic(exc, cfg.path, exp, key)}", file=err)
            return EXIT_CONFIG

    if cfg.experiments:
        os.makedirs(output_dir, exist_ok=True)
    status = EXIT_OK
    for exp, models in zip(cfg.experiments, built):
        try:
            out = run_experiment(exp, models, seed, jobs)
        except ModelError as exc:
            print(f"error: {_diagnostic(exc, cfg.path, exp)}", file=err)
            return EXIT_CONFIG
        stem = os.path.join(output_dir, f"{exp.index + 1:02d}_{exp.name}")
        report = {
            "experiment": exp.name,
            "kind": exp.kind,
            "config_sha256": cfg.digest,
            "master_seed": seed,
            "parameters": exp.params,
            "verdict": out.verdict,
            "result": out.result,
        }
        emit_report(report, stem + ".json")
        emit_csv(out.table, stem + ".csv")
        for suffix, table in sorted(out.extra_tables.items()):
            emit_csv(table, f"{stem}_{suffix}.csv")
        shown = out.verdict or "done"
        print(f"{exp.name}: {shown}", file=err)
        if out.verdict == "fail":
            status = EXIT_FAIL
        elif out.verdict == "inconclusive":
            print(f"warning: {exp.name} was inconclusive; more trials may settle it", file=err)
    return status


def build_parser():
    p = argparse.ArgumentParser(prog="rgmlab", description="Random graph model experiments.")
    p.add_argument("--list-families", action="store_true", help="print the registered model families and exit")
    sub = p.add_subparsers(dest="command")
    r = sub.add_parser("run", help="run the experiments in a YAML config")
    r.add_argument("config", nargs="?")
    r.add_argument("--out", default="out", help="output directory (default: out)")
    r.add_argument("--seed", type=int, default=None, help="override the config's master_seed")
    r.add_argument("--jobs", type=int, default=1, help="worker processes per experiment")
    r.add_argument("--list-families", action="store_true", help="print the registered model families and exit")
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.list_families:
        for name, desc in describe_families():
            print(f"{name:18s} {desc}")
        return EXIT_OK
    if args.command != "run":
        parser.print_help(sys.stderr)
        return EXIT_CONFIG
    if args.config is None:
        parser.error("run needs a config file")
    if args.jobs < 1:
        parser.error("--jobs must be >= 1")
    if args.seed is not None and not 0 <= args.seed < 2**64:
        parser.error("--seed must be a 64-bit unsigned integer")
    return run(args.config, args.out, args.seed, args.jobs)


if __name__ == "__main__":
    sys.exit(main())
