"""Command-line entry point: ``bosetele {sweep,preset,validate,report}``."""
from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from dataclasses import replace
from pathlib import Path

from . import metrics, sweep, validation
from .resources import build_resource, parse_descriptor


def _ints(text):
    return sweep.parse_values(text, integer=True)


def _add_overrides(p):
    p.add_argument("--samples", type=int, help="Monte Carlo samples per row (0 disables Monte Carlo)")
    p.add_argument("--seed", type=int, help=f"base seed (default: ${sweep.SEED_ENV} or {sweep.DEFAULT_SEED})")
    p.add_argument("--jobs", type=int, help="worker processes")
    p.add_argument("--out", help="CSV path (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bosetele",
        description="Teleportation of bosonic modes with number-conserving resources.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="run a parameter sweep from a config file")
    p.add_argument("--config", required=True, help="key = value config file")
    _add_overrides(p)

    p = sub.add_parser("preset", help="write the dataset behind one figure")
    p.add_argument("name", choices=sorted(sweep.PRESETS))
    p.add_argument("--N", dest="n_values", type=_ints, help="override N values, e.g. 1,5,10 or 1..6")
    p.add_argument("--nu", dest="nu_values", type=_ints, help="override nu values")
    p.add_argument("--m", dest="m_values", type=_ints, help="override mode counts")
    p.add_argument("--resource", dest="resources", action="append", help="override resources (repeatable)")
    _add_overrides(p)

    p = sub.add_parser("validate", help="run acceptance criteria and invariants")
    p.add_argument("--criteria-only", action="store_true", help="skip the extra invariants")

    p = sub.add_parser("report", help="Haar-averaged figures of merit for one resource")
    p.add_argument("--resource", required=True, help="descriptor, e.g. maxent or su2:xi=0.5,theta=0")
    p.add_argument("--N", dest="n_in", type=int, required=True)
    p.add_argument("--nu", type=int, required=True)
    p.add_argument("--format", choices=("text", "csv"), default="text")
    p.add_argument("--out", help="output path (default: stdout)")
    return parser


def _emit(text: str, out) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _run_sweep(config, args) -> int:
    changes = {
        "samples": args.samples,
        "seed": args.seed,
        "jobs": args.jobs,
        "output_path": args.out,
    }
    config = replace(config, **{k: v for k, v in changes.items() if v is not None})
    rows = sweep.run_sweep(config)
    _emit(sweep.rows_to_csv(rows), config.output_path)
    if config.output_path:
        print(f"wrote {len(rows)} rows to {config.output_path}", file=sys.stderr)
    return 0


def _report(args) -> int:
    spec = parse_descriptor(args.resource, args.nu)
    rep = metrics.teleport_report(build_resource(spec), args.n_in)
    if args.format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["l", "lambda", "probability", "conditional_fidelity", "conditional_negativity"])
        for rec in rep.per_outcome:
            writer.writerow([rec.label.l, rec.label.lam] + [sweep.format_cell(x) for x in rec[1:]])
        _emit(buf.getvalue(), args.out)
        return 0
    lines = [
        f"resource      {spec.descriptor()}",
        f"N, nu         {args.n_in}, {args.nu}",
        f"fidelity      {rep.fidelity:.15g}",
        f"separable     {2 / (args.n_in + 2):.15g}",
        f"entanglement  {rep.avg_entanglement:.15g}",
        f"outcomes      {len(rep.per_outcome)} (mean probabilities sum to {rep.total_probability:.15g})",
        "",
        f"{'l':>5} {'lambda':>6} {'<p>':>12} {'F':>12} {'negativity':>12}",
    ]
    for rec in rep.per_outcome:
        f = "-" if math.isnan(rec.fidelity) else f"{rec.fidelity:.6f}"
        n = "-" if math.isnan(rec.negativity) else f"{rec.negativity:.6f}"
        lines.append(f"{rec.label.l:>5} {rec.label.lam:>6} {rec.probability:>12.6g} {f:>12} {n:>12}")
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "sweep":
            config = sweep.parse_config(Path(args.config).read_text(encoding="utf-8"))
            return _run_sweep(config, args)
        if args.command == "preset":
            config = sweep.preset(
                args.name,
                seed=args.seed,
                n_values=args.n_values,
                nu_values=args.nu_values,
                m_values=args.m_values,
                resources=[d for r in args.resources for d in sweep.expand_descriptor(r)]
                if args.resources else None,
            )
            return _run_sweep(config, args)
        if args.command == "validate":
            ok = validation.run_all(include_invariants=not args.criteria_only)
            print("all checks passed" if ok else "SOME CHECKS FAILED")
            return 0 if ok else 1
        return _report(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
