"""Command-line entry points.

crsched run --config table1.cfg [--schedulers a,b] [--lambda-min ... ]
crsched figures --rows results/rows.csv --out results

Output directory precedence: --out flag, then the CRSCHED_OUT environment
variable, then the config's output_dir, then ./results.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace
from pathlib import Path

from .config import ConfigError, ExperimentSpec, lambda_grid, load_spec, parse_scheduler
from .sweep import (
    ROWS_FILENAME,
    emit_figures,
    file_sha256,
    read_rows,
    rows_from_results,
    sweep_results,
    write_rows,
)

OUT_ENV_VAR = "CRSCHED_OUT"


class CliError(ValueError):
    pass


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="crsched",
        description="Delay- and interference-constrained uplink scheduling experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute a lambda sweep and emit CSV outputs")
    run.add_argument("--config", required=True, help="experiment config file")
    run.add_argument("--schedulers", help="comma-separated subset, e.g. proposed,maxweight")
    run.add_argument("--lambda-min", help="override sweep grid (use with max and step)")
    run.add_argument("--lambda-max")
    run.add_argument("--lambda-step")
    run.add_argument("--seed", help="comma-separated seed list override")
    run.add_argument("--max-slots", type=int)
    run.add_argument("--epsilon", type=float)
    run.add_argument("--phi-mode", choices=["actual", "literal"])
    run.add_argument("--out", help="output directory")
    run.add_argument("--jobs", type=int, help="parallel runs (default: CPU count)")

    figures = sub.add_parser("figures", help="re-emit figure CSVs from a rows.csv")
    figures.add_argument("--rows", required=True, help="rows.csv from a previous run")
    figures.add_argument("--out", help="output directory")
    return parser


def _apply_overrides(spec: ExperimentSpec, args) -> ExperimentSpec:
    base = spec.base
    grid_flags = (args.lambda_min, args.lambda_max, args.lambda_step)
    if any(v is not None for v in grid_flags):
        if any(v is None for v in grid_flags):
            raise CliError("--lambda-min, --lambda-max and --lambda-step go together")
        grid = lambda_grid(*grid_flags)
        a_max = min(su.arrivals.a_max for su in base.sus)
        if not grid or grid[-1] > a_max:
            raise CliError(f"lambda grid must be nonempty and within [0, {a_max}]")
        spec = replace(spec, lambda_grid=grid)

    phi_mode = args.phi_mode or spec.schedulers[0].phi_mode
    if args.schedulers is not None:
        kinds = [parse_scheduler(t) for t in args.schedulers.split(",") if t.strip()]
        if not kinds:
            raise CliError("empty --schedulers list")
        spec = replace(spec, schedulers=tuple(kinds))
    if args.phi_mode or args.schedulers is not None:
        spec = replace(
            spec,
            schedulers=tuple(replace(k, phi_mode=phi_mode) for k in spec.schedulers),
        )

    if args.seed is not None:
        seeds = tuple(int(t) for t in args.seed.split(",") if t.strip())
        if not seeds:
            raise CliError("empty --seed list")
        if len(set(seeds)) != len(seeds):
            raise CliError("seeds must be distinct")
        spec = replace(spec, seeds=seeds, base=replace(spec.base, seed=seeds[0]))

    base = spec.base
    if args.epsilon is not None:
        if args.epsilon <= 0:
            raise CliError("--epsilon must be positive")
        base = replace(base, epsilon=args.epsilon)
    if args.max_slots is not None:
        if args.max_slots < base.check_interval:
            raise CliError(
                f"--max-slots must be at least the check interval ({base.check_interval})"
            )
        base = replace(base, max_slots=args.max_slots)
    if base is not spec.base:
        spec = replace(spec, base=base)
    return spec


def _resolve_out(flag: str | None, spec_dir: str | None) -> Path:
    return Path(flag or os.environ.get(OUT_ENV_VAR) or spec_dir or "results")


def _cmd_run(args) -> int:
    spec = _apply_overrides(load_spec(args.config), args)
    out = _resolve_out(args.out, spec.output_dir)

    def progress(point, result, total):
        progress.done += 1
        kind, lam, seed = point
        state = "aborted" if result.note else ("converged" if result.converged else "capped")
        print(
            f"[{progress.done:>{len(str(total))}}/{total}] {kind} lambda={lam:g} "
            f"seed={seed}: {state} slots={result.slots} metric={result.stability_metric:.3g}",
            flush=True,
        )

    progress.done = 0
    results = sweep_results(spec, jobs=args.jobs, progress=progress)
    rows = rows_from_results(results)
    out.mkdir(parents=True, exist_ok=True)
    rows_path = out / ROWS_FILENAME
    write_rows(rows, rows_path)
    emit_figures(
        rows,
        out,
        config_sha256=spec.source_sha256,
        rows_sha256=file_sha256(rows_path),
    )
    aborted = [r for r in rows if r.note]
    print(f"wrote {rows_path} ({len(rows)} rows) and figures to {out}")
    if aborted:
        for r in aborted:
            print(
                f"aborted: {r.scheduler} lambda={r.lam:g} seed={r.seed}: {r.note}",
                file=sys.stderr,
            )
        return 1
    return 0


def _cmd_figures(args) -> int:
    rows = read_rows(args.rows)
    out = _resolve_out(args.out, None)
    emit_figures(rows, out, rows_sha256=file_sha256(args.rows))
    print(f"wrote figures to {out}")
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        return _cmd_figures(args)
    except (CliError, ConfigError, ValueError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
