"""Extraction job description and annotated-corpus parsing.

A corpus is one whitespace-tokenized sentence per line. Word labels,
when given, live in a parallel file with one space-separated tag per
word; the two files must agree line by line. Span labels are optional
tab-separated lines: sentence line number, start word index, span
length, label.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ExtractionError

AGGREGATIONS = ("mean_subwords", "first_subword")
SPAN_CHOICES = (2, 3, 4, 5)


@dataclass(frozen=True)
class ExtractionJob:
    """Everything needed to turn a corpus into per-layer embedding files.

    layers index the hidden-state stack: 0 is the embedding output,
    1..L the transformer blocks. span_ngrams asks for extra rows per
    n-gram window, mean-pooled over the window's word vectors.
    """

    model: str
    layers: tuple[int, ...]
    corpus: str
    out_dir: str
    labels: str | None = None
    aggregation: str = "mean_subwords"
    span_ngrams: tuple[int, ...] = ()
    span_labels: str | None = None
    batch_size: int = 16


def validate_job(job: ExtractionJob) -> None:
    if not job.layers:
        raise ExtractionError("at least one layer is required")
    if any(not isinstance(l, int) or l < 0 for l in job.layers):
        raise ExtractionError(f"layers must be non-negative integers, got {job.layers}")
    if len(set(job.layers)) != len(job.layers):
        raise ExtractionError(f"duplicate layers in {job.layers}")
    if job.aggregation not in AGGREGATIONS:
        raise ExtractionError(
            f"unknown aggregation {job.aggregation!r}, expected one of {AGGREGATIONS}"
        )
    bad = [n for n in job.span_ngrams if n not in SPAN_CHOICES]
    if bad:
        raise ExtractionError(f"span_ngrams must be within {SPAN_CHOICES}, got {bad}")
    if len(set(job.span_ngrams)) != len(job.span_ngrams):
        raise ExtractionError(f"duplicate span_ngrams in {job.span_ngrams}")
    if job.batch_size < 1:
        raise ExtractionError(f"batch_size must be >= 1, got {job.batch_size}")


@dataclass
class Sentence:
    """One corpus line: original line number, words, optional parallel tags."""

    line: int
    words: list[str]
    tags: list[str] | None = None


def _read_lines(path: str) -> list[str]:
    try:
        with open(path, "r", encoding="utf-8") as f:
            return [line.rstrip("\n") for line in f]
    except OSError as e:
        raise ExtractionError(f"cannot read {path}: {e}") from e


def read_corpus(corpus_path: str, labels_path: str | None = None) -> list[Sentence]:
    """Parse the corpus and, when present, line-align the label file."""
    lines = _read_lines(corpus_path)
    if not lines:
        raise ExtractionError(f"{corpus_path}: corpus is empty")
    tag_lines: list[str] | None = None
    if labels_path is not None:
        tag_lines = _read_lines(labels_path)
        if len(tag_lines) != len(lines):
            raise ExtractionError(
                f"label/line mismatch: {labels_path} has {len(tag_lines)} lines, "
                f"{corpus_path} has {len(lines)}"
            )
    sentences = []
    for i, line in enumerate(lines):
        words = line.split()
        if not words:
            raise ExtractionError(f"{corpus_path}: line {i} is empty")
        tags = None
        if tag_lines is not None:
            tags = tag_lines[i].split()
            if len(tags) != len(words):
                raise ExtractionError(
                    f"label/line mismatch at line {i}: {len(tags)} tags for {len(words)} words"
                )
        sentences.append(Sentence(line=i, words=words, tags=tags))
    return sentences


def read_span_labels(path: str) -> dict[tuple[int, int, int], str]:
    """Map (sentence line, start word index, span length) -> label."""
    table: dict[tuple[int, int, int], str] = {}
    for i, line in enumerate(_read_lines(path)):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 4:
            raise ExtractionError(
                f"{path}: line {i}: expected 4 tab-separated fields (sent, start, span, label)"
            )
        try:
            key = (int(parts[0]), int(parts[1]), int(parts[2]))
        except ValueError as e:
            raise ExtractionError(f"{path}: line {i}: non-integer coordinate: {e}") from e
        if key in table:
            raise ExtractionError(f"{path}: line {i}: duplicate span {key}")
        table[key] = parts[3]
    return table
