"""``phasebench`` command line.

Exit codes: 0 success, 2 input/parse error, 3 decode error, 4 no complete
cycles, 5 mismatch between compared inputs.
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from .capture import CaptureFormatError, read_capture, save_capture
from .decode import DecodeError
from .metrics import ComparisonError, compare
from .pipeline import NoCyclesError, analyze_capture
from .report import (
    ReportDocument,
    ReportError,
    file_digest,
    load_report,
    plot_cycle,
    render_comparisons,
    render_stats,
)
from .synth import SpecError, expected_metrics, load_trace_spec, synthesize

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_DECODE = 3
EXIT_EMPTY = 4
EXIT_MISMATCH = 5


class CommandError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _write_out(path, text: str) -> None:
    Path(path).write_text(text, encoding="utf-8")


def cmd_analyze(args) -> int:
    try:
        capture = read_capture(args.capture, ch_pair=args.ch_pair)
    except (CaptureFormatError, OSError) as exc:
        raise CommandError(f"{args.capture}: {exc}", EXIT_INPUT)
    try:
        analysis = analyze_capture(capture, threshold=args.threshold, hysteresis=args.hysteresis,
                                   max_cycles=args.max_cycles)
    except DecodeError as exc:
        raise CommandError(f"{args.capture}: decode failed: {exc}", EXIT_DECODE)
    except NoCyclesError as exc:
        raise CommandError(f"{args.capture}: {exc}", EXIT_EMPTY)
    except ValueError as exc:
        raise CommandError(f"{args.capture}: {exc}", EXIT_INPUT)

    doc = ReportDocument.for_stats(analysis.stats, {Path(args.capture).name: file_digest(args.capture)})
    if args.out:
        _write_out(args.out, doc.to_json())
    if args.plot:
        plot_cycle(analysis.power, analysis.extraction.cycles[0], args.plot,
                   title=analysis.stats.config_name)
    if args.format == "json":
        sys.stdout.write(doc.to_json())
    else:
        sys.stdout.write(render_stats(analysis.stats, args.format))
    return EXIT_OK


def cmd_compare(args) -> int:
    paths = args.reports
    if len(paths) % 2:
        raise CommandError("compare expects reference/candidate report pairs", EXIT_INPUT)
    docs = {}
    for p in paths:
        try:
            docs[p] = load_report(p)
            docs[p].stats()
        except (ReportError, OSError) as exc:
            raise CommandError(f"{p}: {exc}", EXIT_INPUT)

    results = []
    for ref_path, cand_path in zip(paths[0::2], paths[1::2]):
        try:
            results.append(compare(docs[ref_path].stats(), docs[cand_path].stats()))
        except ComparisonError as exc:
            raise CommandError(f"{ref_path} vs {cand_path}: {exc}", EXIT_MISMATCH)

    doc = ReportDocument.for_comparisons(results, {Path(p).name: file_digest(p) for p in paths})
    if args.out:
        _write_out(args.out, doc.to_json())
    if args.format == "json":
        sys.stdout.write(doc.to_json())
    else:
        sys.stdout.write(render_comparisons(results, args.format))
    return EXIT_OK


def cmd_synth(args) -> int:
    try:
        spec = load_trace_spec(args.spec)
        if args.seed is not None:
            spec = replace(spec, rng_seed=args.seed)
        capture = synthesize(spec)
    except (SpecError, OSError) as exc:
        raise CommandError(f"{args.spec}: {exc}", EXIT_INPUT)
    save_capture(capture, args.out)
    exp = expected_metrics(spec)
    print(f"wrote {len(capture)} samples, {spec.n_cycles} cycles to {args.out}")
    print("expected per-cycle metrics:")
    for key in ("pre", "inf", "post", "total"):
        print(f"  {key:<6} {exp.energy[key] * 1e6:12.4f} uJ  {exp.latency[key] * 1e6:12.4f} us")
    return EXIT_OK


def _read_labels(path) -> dict[str, str]:
    try:
        with open(path, newline="", encoding="utf-8") as f:
            rows = list(csv.reader(f))
    except OSError as exc:
        raise CommandError(f"{path}: {exc}", EXIT_INPUT)
    rows = [r for r in rows if r and any(c.strip() for c in r)]
    if not rows or [c.strip() for c in rows[0]] != ["index", "label"]:
        raise CommandError(f"{path}: expected header 'index,label'", EXIT_INPUT)
    out: dict[str, str] = {}
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != 2:
            raise CommandError(f"{path}: line {lineno}: expected 2 columns", EXIT_INPUT)
        idx, label = row[0].strip(), row[1].strip()
        if idx in out:
            raise CommandError(f"{path}: duplicate index {idx}", EXIT_INPUT)
        out[idx] = label
    return out


def accuracy(predictions: dict[str, str], labels: dict[str, str]) -> tuple[int, int]:
    """Return ``(matches, total)`` over every predicted index."""
    if not predictions:
        raise CommandError("no predictions", EXIT_INPUT)
    missing = [i for i in predictions if i not in labels]
    if missing:
        raise CommandError(f"prediction index {missing[0]} has no label", EXIT_MISMATCH)
    matches = sum(predictions[i] == labels[i] for i in predictions)
    return matches, len(predictions)


def cmd_accuracy(args) -> int:
    matches, total = accuracy(_read_labels(args.predictions), _read_labels(args.labels))
    print(f"accuracy: {matches / total:.6g} ({matches}/{total} correct, {total - matches} wrong)")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="phasebench", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"phasebench {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="per-phase energy/latency statistics of one capture")
    p.add_argument("capture")
    p.add_argument("--threshold", type=float, help="trigger threshold in volts")
    p.add_argument("--hysteresis", type=float, help="trigger hysteresis band in volts")
    p.add_argument("--max-cycles", type=int, help="analyze only the first N complete cycles")
    p.add_argument("--out", help="write the JSON report here")
    p.add_argument("--format", choices=("json", "md", "csv"), default="md")
    p.add_argument("--plot", help="write an SVG of the first cycle's power trace")
    p.add_argument("--ch-pair", action="store_true", help="input has ch1,ch2 columns instead of v_shunt")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("compare", help="EDP and rEDP of candidate reports against references")
    p.add_argument("reports", nargs="+", metavar="REPORT", help="ref.json cand.json [ref.json cand.json ...]")
    p.add_argument("--format", choices=("json", "md", "csv"), default="md")
    p.add_argument("--out", help="write the JSON comparison report here")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("synth", help="synthesize a capture from a trace spec")
    p.add_argument("spec")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, help="override the spec's rng_seed")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("accuracy", help="classifier accuracy from prediction and label files")
    p.add_argument("predictions")
    p.add_argument("labels")
    p.set_defaults(func=cmd_accuracy)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CommandError as exc:
        print(f"phasebench: error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
