"""Command line entry point: ``semrl {mine,sweep,compare,check,validate}``."""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from dataclasses import asdict, replace
from pathlib import Path

from . import pipeline
from .inp import InpParseError, NetworkValidationError, parse_inp, validate_network
from .quality import format_se

log = logging.getLogger("semrl")


def _ratio(text: str) -> float:
    value = float(text)
    if not 0 < value <= 1:
        raise argparse.ArgumentTypeError(f"{text} is not in (0, 1]")
    return value


def _ratios(text: str) -> list[float]:
    return [_ratio(t) for t in text.split(",") if t.strip()]


def _add_run_args(p: argparse.ArgumentParser, out_required: bool = False):
    p.add_argument("--inp", type=Path, required=True, help="EPANET .inp network file")
    p.add_argument("--sensors", type=Path, required=True, help="sensor map CSV")
    p.add_argument("--measurements", type=Path, required=True, help="measurement CSV")
    p.add_argument("--schema", type=Path, help="schema override file")
    p.add_argument("--support", type=_ratio, default=0.2)
    p.add_argument("--confidence", type=_ratio, default=0.9)
    p.add_argument("--k-neighbors", type=int, default=1)
    p.add_argument("--mode", choices=pipeline.MINING_MODES, default="generalized")
    p.add_argument("--attributes", action="store_true", help="add binned component attributes")
    p.add_argument("--window-hours", type=float, default=24.0)
    p.add_argument("--precision", type=int, default=0)
    p.add_argument("--attribute-bins", type=int, default=5)
    p.add_argument("--quantities", help="comma separated subset of pressure,demand,flow")
    p.add_argument("--out", type=Path, required=out_required)
    p.add_argument("--format", dest="fmt", choices=("jsonl", "csv"), default="jsonl")


def _config(args) -> pipeline.RunConfig:
    quantities = tuple(q.strip() for q in args.quantities.split(",")) if args.quantities else None
    return pipeline.RunConfig(
        inp=args.inp, sensors=args.sensors, measurements=args.measurements, schema=args.schema,
        min_support=args.support, min_confidence=args.confidence, k_neighbors=args.k_neighbors,
        mode=args.mode, include_attributes=args.attributes, window_hours=args.window_hours,
        precision=args.precision, attribute_bins=args.attribute_bins, quantities=quantities,
        out=args.out, fmt=args.fmt,
    )


def _emit(text: str, out: Path | None):
    if out is None:
        sys.stdout.write(text)
    else:
        pipeline.write_atomic({out: text})


def _fmt_se(x):
    return format_se(x)


def cmd_mine(args) -> int:
    result = pipeline.run_pipeline(_config(args))
    st = result.stats
    print(f"{st['count']} rules from {st['n_transactions']} transactions "
          f"(maxSE {_fmt_se(st['max_se'])}, minSE {_fmt_se(st['min_se'])}) -> {args.out}")
    return 0


def cmd_sweep(args) -> int:
    config = replace(_config(args), out=None)
    rows = pipeline.sweep(config, args.supports)
    buf = [f"{'support':>8} {'rules':>8} {'maxSE':>6} {'minSE':>6} {'baseline':>9}"]
    for r in rows:
        buf.append(f"{r.support:>8} {r.rules:>8} {_fmt_se(r.max_se):>6} {_fmt_se(r.min_se):>6} "
                   f"{r.baseline_rules:>9}")
    print("\n".join(buf))
    if args.out:
        if args.fmt == "csv":
            lines = ["support,rules,max_se,min_se,baseline_rules"]
            lines += [f"{r.support},{r.rules},{r.max_se},{r.min_se},{r.baseline_rules}" for r in rows]
            pipeline.write_atomic({args.out: "\n".join(lines) + "\n"})
        else:
            pipeline.write_atomic({args.out: "".join(json.dumps(asdict(r)) + "\n" for r in rows)})
    return 0


def cmd_compare(args) -> int:
    config = replace(_config(args), out=None)
    if config.mode == "baseline":
        raise ValueError("compare needs --mode literal or generalized")
    prepared = pipeline.prepare(config)
    semantic = pipeline.mine(prepared, config.min_support, config.min_confidence)
    baseline = pipeline.mine(replace(prepared, mined=prepared.db), config.min_support, config.min_confidence)
    report = pipeline.compare(baseline, semantic)
    _emit(json.dumps(report.as_dict(), indent=2) + "\n", args.out)
    return 0


def cmd_check(args) -> int:
    config = replace(_config(args), out=None)
    rules = pipeline.read_rules(args.rules)
    prepared = pipeline.prepare(config)
    db = [{str(i) for i in t.items} for t in prepared.mined]
    summary = pipeline.check_rules(rules, db)
    rows = [["antecedent", "consequent", "violations", "antecedent_count", "rate"]]
    for v in summary:
        rows.append([" & ".join(sorted(v.rule.antecedent)), " & ".join(sorted(v.rule.consequent)),
                     v.violations, v.antecedent_count, f"{v.rate:.6f}"])
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    _emit(buf.getvalue(), args.out)
    broken = sum(1 for v in summary if v.violations)
    print(f"{broken} of {len(summary)} rules violated at least once", file=sys.stderr)
    return 0


def cmd_validate(args) -> int:
    text = Path(args.inp).read_text()
    try:
        model = parse_inp(text, validate=False)
    except InpParseError as exc:
        print(f"error: {exc}")
        return 1
    report = validate_network(model)
    for w in model.parse_warnings:
        print(f"warning: {w}")
    for w in report.warnings:
        print(f"warning: {w}")
    for e in report.errors:
        print(f"error: {e}")
    j, r, t, p, pu, v = model.counts()
    print(f"{j} junctions, {r} reservoirs, {t} tanks, {p} pipes, {pu} pumps, {v} valves: "
          f"{'ok' if report.ok else 'INVALID'}")
    return 0 if report.ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="semrl", description="Semantic association rule mining")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("mine", help="mine rules and write a rule file plus stats")
    _add_run_args(p, out_required=True)
    p.set_defaults(func=cmd_mine)

    p = sub.add_parser("sweep", help="rule counts over several support thresholds")
    _add_run_args(p)
    p.add_argument("--supports", type=_ratios, default=[0.2, 0.3, 0.4, 0.5])
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("compare", help="semantic vs baseline rule counts")
    _add_run_args(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("check", help="count rule violations on a transaction database")
    _add_run_args(p)
    p.add_argument("--rules", type=Path, required=True)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("validate", help="parse and validate a network file")
    p.add_argument("--inp", type=Path, required=True)
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except pipeline.PipelineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (FileNotFoundError, ValueError, NetworkValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
