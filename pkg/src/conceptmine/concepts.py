"""Projection of cluster assignments into concepts, the unique-type filter,
size histograms, and phrasal-unit counts.

A concept is a cluster viewed as its set of token occurrences plus word-type
statistics. The type filter keeps concepts with strictly more than min_types
distinct surface forms (min_types=5 keeps >= 6).
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError


@dataclass
class Concept:
    concept_id: int
    member_ids: np.ndarray
    type_counts: dict[str, int]

    @property
    def size(self) -> int:
        return int(len(self.member_ids))

    @property
    def unique_types(self) -> int:
        return len(self.type_counts)


@dataclass
class ConceptSet:
    concepts: list[Concept]
    filtered: bool = False
    min_types: int | None = None


@dataclass
class HistogramResult:
    bin_edges: np.ndarray   # bins are [edge[i], edge[i+1]) except the last, closed
    counts: np.ndarray
    median: int             # lower median for even counts


def build_concepts(assignment, ds) -> ConceptSet:
    """One concept per non-empty cluster, unfiltered."""
    labels = np.asarray(assignment.labels, dtype=np.int64)
    if labels.size == 0:
        raise ValidationError("empty assignment")
    if labels.size != ds.n_points:
        raise ValidationError(
            f"length mismatch: {labels.size} labels for {ds.n_points} points")
    order = np.argsort(labels, kind="stable")
    sorted_labels = labels[order]
    boundaries = np.flatnonzero(np.diff(sorted_labels)) + 1
    groups = np.split(order, boundaries)
    concepts = []
    words = [t.word for t in ds.tokens]
    for grp in groups:
        cid = int(labels[grp[0]])
        members = np.sort(grp)
        type_counts = dict(Counter(words[i] for i in members))
        concepts.append(Concept(concept_id=cid, member_ids=members,
                                type_counts=type_counts))
    return ConceptSet(concepts=concepts, filtered=False, min_types=None)


def filter_concepts(cs: ConceptSet, min_types: int = 5) -> ConceptSet:
    """Keep concepts with unique_types strictly greater than min_types.

    Idempotent; re-filtering applies the larger threshold.
    """
    if cs.min_types is not None:
        min_types = max(min_types, cs.min_types)
    kept = [c for c in cs.concepts if c.unique_types > min_types]
    return ConceptSet(concepts=kept, filtered=True, min_types=min_types)


def histogram_from_sizes(sizes, bin_width: int) -> HistogramResult:
    sizes = np.asarray(sorted(int(s) for s in sizes), dtype=np.int64)
    if sizes.size == 0:
        raise ValidationError("empty concept set: nothing to histogram")
    if bin_width < 1:
        raise ValidationError("bin_width must be >= 1")
    top = int(sizes.max())
    n_bins = max(1, -(-top // bin_width))   # ceil; bins cover [1, top]
    edges = 1 + bin_width * np.arange(n_bins + 1, dtype=np.int64)
    counts = np.bincount((sizes - 1) // bin_width, minlength=n_bins)
    median = int(sizes[(sizes.size - 1) // 2])
    return HistogramResult(bin_edges=edges, counts=counts, median=median)


def size_histogram(cs: ConceptSet, bin_width: int = 1) -> HistogramResult:
    return histogram_from_sizes([c.size for c in cs.concepts], bin_width)


def phrasal_counts(cs: ConceptSet, ds) -> dict[int, int]:
    """Members with span n, for n in 2..5, summed across concepts."""
    spans = np.asarray([t.span for t in ds.tokens], dtype=np.int64)
    out = {n: 0 for n in (2, 3, 4, 5)}
    for c in cs.concepts:
        s = spans[c.member_ids]
        for n in (2, 3, 4, 5):
            out[n] += int((s == n).sum())
    return out


def phrasal_type_counts(cs: ConceptSet, ds) -> dict[int, int]:
    """Distinct surfaces with span n across all concept members (the type
    reading of the same statistic)."""
    spans = [t.span for t in ds.tokens]
    words = [t.word for t in ds.tokens]
    seen: dict[int, set] = {n: set() for n in (2, 3, 4, 5)}
    for c in cs.concepts:
        for i in c.member_ids:
            n = spans[i]
            if 2 <= n <= 5:
                seen[n].add(words[i])
    return {n: len(s) for n, s in seen.items()}


def save_concepts(path, cs: ConceptSet) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for c in cs.concepts:
            f.write(json.dumps({"concept_id": c.concept_id,
                                "members": [int(i) for i in c.member_ids]}) + "\n")


def load_concept_members(path) -> list[tuple[int, list[int]]]:
    out = []
    with open(path, "r", encoding="utf-8") as f:
        for i, line in enumerate(f):
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            if "concept_id" not in obj or "members" not in obj:
                raise ValidationError(f"{path}: line {i} lacks concept_id/members")
            out.append((int(obj["concept_id"]), [int(x) for x in obj["members"]]))
    return out


def concept_listing(cs: ConceptSet, top: int = 8) -> str:
    """Human-readable sketch: top surfaces per concept by occurrence count."""
    lines = []
    for c in cs.concepts:
        ranked = sorted(c.type_counts.items(), key=lambda kv: (-kv[1], kv[0]))[:top]
        shown = ", ".join(f"{w}:{n}" for w, n in ranked)
        lines.append(f"concept {c.concept_id} size={c.size} types={c.unique_types}  {shown}")
    return "\n".join(lines) + "\n"
