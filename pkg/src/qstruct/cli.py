"""Command line entry point: ``qstruct list`` and ``qstruct run``.

Exit codes: 0 all pass flags true, 1 some pass flag false, 2 configuration
error (nothing written), 3 numerical failure (the violated invariant is named
on stderr).
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .config import load_config
from .errors import (
    ConfigError,
    ConstraintViolated,
    NotPositiveDefinite,
    NumericalFailure,
    StepSizeTooLarge,
)
from .experiments import defaults_for, execute, list_experiments
from .report import ExperimentReport, emit_report, render_series, write_atomic

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2, 3


def run_experiment(cfg, fmt: str = "json") -> ExperimentReport:
    """Run ``cfg`` and write its report (and series, if any) atomically.

    Raises:
        NumericalFailure: if a numerical invariant breaks during the run.
    """
    try:
        out = execute(cfg.experiment_id, cfg.parameters, cfg.seed)
    except StepSizeTooLarge as exc:
        raise NumericalFailure("density-matrix-validity", str(exc)) from exc
    except NotPositiveDefinite as exc:
        raise NumericalFailure("positive-definite-potential", str(exc)) from exc
    except ConstraintViolated as exc:
        raise NumericalFailure(f"restructure-constraint:{','.join(exc.which)}", str(exc)) from exc

    stem = f"{cfg.experiment_id}-seed{cfg.seed}"
    names = [f"{stem}.{fmt}"]
    if out.series:
        names.append(f"{stem}-series.csv")
    report = ExperimentReport(cfg.experiment_id, cfg.seed, dict(cfg.parameters), dict(out.metrics),
                              dict(out.flags), names)
    outdir = Path(cfg.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    if out.series:
        write_atomic(outdir / names[1], render_series(out.series).encode())
    write_atomic(outdir / names[0], emit_report(report, fmt))
    return report


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qstruct", description="Quantum-structure experiments")
    sub = ap.add_subparsers(dest="command", required=True)
    sub.add_parser("list", help="list registered experiments")
    run = sub.add_parser("run", help="run one experiment from a config file")
    run.add_argument("--config", required=True, help="flat key = value config file")
    run.add_argument("--format", choices=("json", "csv"), default="json")
    run.add_argument("--seed", type=int, default=None, help="override the config seed")
    return ap


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    if args.command == "list":
        sys.stdout.write(list_experiments())
        return EXIT_PASS
    try:
        cfg = load_config(args.config, defaults_for, args.seed, os.environ.get("QSTRUCT_OUTPUT_DIR"))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        report = run_experiment(cfg, args.format)
    except NumericalFailure as exc:
        print(f"numerical failure [{exc.invariant}]: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    for name, ok in report.pass_flags.items():
        print(f"{'PASS' if ok else 'FAIL'} {name}")
    return EXIT_PASS if report.passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
