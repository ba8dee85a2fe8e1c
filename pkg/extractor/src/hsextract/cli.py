"""Command-line entry point mirroring the ExtractionJob fields."""

from __future__ import annotations

import argparse
import logging
import sys

from .errors import ExtractionError
from .extract import extract
from .job import AGGREGATIONS, ExtractionJob


def _int_tuple(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="hsextract",
        description=(
            "Run a transformer checkpoint over a whitespace-tokenized corpus and "
            "write one LCE1 embedding file per layer plus a shared tokens JSONL."
        ),
    )
    p.add_argument("--model", required=True, help="checkpoint path or identifier")
    p.add_argument("--layers", required=True, type=_int_tuple,
                   help="comma-separated hidden-state indices; 0 is the embedding output")
    p.add_argument("--corpus", required=True, help="one whitespace-tokenized sentence per line")
    p.add_argument("--labels", default=None, help="parallel tag file, one tag per word")
    p.add_argument("--aggregation", choices=AGGREGATIONS, default="mean_subwords",
                   help="subword-to-word pooling policy")
    p.add_argument("--span-ngrams", type=_int_tuple, default=(),
                   help="comma-separated n-gram sizes from 2..5 to emit as extra rows")
    p.add_argument("--span-labels", default=None,
                   help="tab-separated span labels: sent, start, span, label")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--batch-size", type=int, default=16)
    p.add_argument("--log-level", choices=("debug", "info", "warning"), default="info")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=args.log_level.upper(),
                        format="%(levelname)s %(name)s: %(message)s")
    job = ExtractionJob(
        model=args.model,
        layers=args.layers,
        corpus=args.corpus,
        out_dir=args.out,
        labels=args.labels,
        aggregation=args.aggregation,
        span_ngrams=args.span_ngrams,
        span_labels=args.span_labels,
        batch_size=args.batch_size,
    )
    try:
        res = extract(job)
    except ExtractionError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    print(f"rows={res.rows} dim={res.dim}")
    for layer in sorted(res.files):
        print(f"layer {layer}: {res.files[layer]}")
    print(f"tokens: {res.tokens_path}")
    if res.skipped_lines:
        print(f"skipped {len(res.skipped_lines)} sentence(s): lines {res.skipped_lines}")
    return 0
