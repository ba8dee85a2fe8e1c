"""Synthetic datasets with planted concept structure, plus brute-force
reference implementations used only by tests and acceptance runs.

The generator plants isotropic Gaussian components (std 1) whose centers
are scaled so the minimum pairwise center distance equals `separation`.
Component sizes follow a Zipf law with exponent `label_skew` apportioned by
largest remainder, so label_skew=0 gives uniform sizes within one point.
Every component carries one label; surfaces are drawn from a per-component
vocabulary with a Zipf type-frequency profile, and the first min(size, 7)
members get distinct types so any component big enough to matter survives
a more-than-5-unique-types filter when recovered cleanly.

The brute-force references recompute everything from first principles with
their own representations; they share no algorithmic code with the
production modules.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .assignment import ClusterAssignment
from .dataset import EmbeddingDataset, from_arrays
from .errors import ValidationError


@dataclass
class SynthConfig:
    n_points: int
    dim: int
    n_components: int
    separation: float = 8.0
    label_skew: float = 1.0
    phrasal_fraction: float = 0.0
    seed: int = 0

    def validate(self) -> None:
        if self.n_components < 1 or self.n_points < 1:
            raise ValidationError("need at least one component and one point")
        if self.n_components > self.n_points:
            raise ValidationError("n_components exceeds n_points")
        if self.separation <= 0:
            raise ValidationError("separation must be > 0")
        if not (0 <= self.phrasal_fraction <= 1):
            raise ValidationError("phrasal_fraction must be in [0, 1]")
        if self.label_skew < 0:
            raise ValidationError("label_skew must be >= 0")


def zipf_sizes(total: int, parts: int, skew: float) -> np.ndarray:
    """Largest-remainder apportionment of `total` over Zipf(skew) weights.

    skew=0 degenerates to uniform sizes within +-1, deterministically:
    the first (total mod parts) parts get the extra point.
    """
    ranks = np.arange(1, parts + 1, dtype=np.float64)
    w = ranks ** (-skew)
    exact = w / w.sum() * total
    base = np.floor(exact).astype(np.int64)
    rem = total - int(base.sum())
    frac = exact - base
    order = np.lexsort((np.arange(parts), -frac))   # biggest remainder, ties -> low index
    base[order[:rem]] += 1
    # keep every component non-empty by borrowing from the largest
    while (base == 0).any():
        base[int(np.argmin(base))] += 1
        base[int(np.argmax(base))] -= 1
    return base


def generate(cfg: SynthConfig) -> EmbeddingDataset:
    cfg.validate()
    rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, 0x5E8D]))
    C, D, N = cfg.n_components, cfg.dim, cfg.n_points
    sizes = zipf_sizes(N, C, cfg.label_skew)
    centers = rng.standard_normal((C, D))
    if C > 1:
        d2 = (np.einsum("ij,ij->i", centers, centers)[:, None]
              - 2.0 * centers @ centers.T
              + np.einsum("ij,ij->i", centers, centers)[None, :])
        np.fill_diagonal(d2, np.inf)
        min_dist = float(np.sqrt(max(d2.min(), 1e-300)))
        centers *= cfg.separation / min_dist
    comp = np.repeat(np.arange(C), sizes)
    X = centers[comp] + rng.standard_normal((N, D))
    labels = [f"L{c:03d}" for c in comp]
    vocab_weights = {}
    words = []
    for c, size in enumerate(sizes):
        V = int(min(size, 20))
        distinct = int(min(size, 7))
        t_idx = np.empty(size, dtype=np.int64)
        t_idx[:distinct] = np.arange(distinct)
        rest = size - distinct
        if rest > 0:
            if V not in vocab_weights:
                w = (np.arange(1, V + 1, dtype=np.float64)) ** (-1.5)
                vocab_weights[V] = w / w.sum()
            t_idx[distinct:] = rng.choice(V, size=rest, p=vocab_weights[V])
        words.extend(f"w{c}_{t}" for t in t_idx)
    spans = np.ones(N, dtype=np.int64)
    if cfg.phrasal_fraction > 0:
        mask = rng.random(N) < cfg.phrasal_fraction
        spans[mask] = rng.integers(2, 6, size=int(mask.sum()))
    perm = rng.permutation(N)
    X = X[perm].astype(np.float32)
    words = [words[i] for i in perm]
    labels = [labels[i] for i in perm]
    spans = spans[perm]
    return from_arrays(X, words=words, labels=labels, spans=spans)


def brute_force_lambda(cs, ont, theta) -> tuple[Fraction, Fraction, Fraction]:
    """Exhaustive nested-loop scoring over raw id sets with Fraction compares."""
    theta = Fraction(str(theta)) if not isinstance(theta, Fraction) else theta
    encoded = [set(int(i) for i in c.member_ids) for c in cs.concepts]
    human = [set(ids) for ids in ont.concepts.values()]
    aligned = 0
    for e in encoded:
        if any(Fraction(len(e & h), len(e)) >= theta for h in human):
            aligned += 1
    covered = 0
    for h in human:
        if any(Fraction(len(e & h), len(e)) >= theta for e in encoded):
            covered += 1
    alignment = Fraction(aligned, len(encoded))
    coverage = Fraction(covered, len(human))
    return alignment, coverage, (alignment + coverage) / 2


def brute_force_ward(ds_or_X, k: int) -> ClusterAssignment:
    """Naive Ward: recompute every pair's variance increase from scratch each
    step. Tie rule matches the production one: smallest (min leaf, min leaf)
    pair, compared lexicographically."""
    from .dataset import as_matrix

    X = as_matrix(ds_or_X).astype(np.float64)
    n = X.shape[0]
    if n > 64:
        raise ValidationError(f"brute-force reference capped at N=64, got {n}")
    if not (1 <= k <= n):
        raise ValidationError(f"k={k} out of range")
    members: list[list[int]] = [[i] for i in range(n)]
    while len(members) > k:
        m = len(members)
        sums = np.array([X[ms].sum(axis=0) for ms in members])
        counts = np.array([len(ms) for ms in members], dtype=np.float64)
        reps = np.array([min(ms) for ms in members], dtype=np.int64)
        means = sums / counts[:, None]
        iu, ju = np.triu_indices(m, 1)
        diff = means[iu] - means[ju]
        cost = (counts[iu] * counts[ju] / (counts[iu] + counts[ju])
                * np.einsum("ij,ij->i", diff, diff))
        lo = np.minimum(reps[iu], reps[ju])
        hi = np.maximum(reps[iu], reps[ju])
        pick = np.lexsort((hi, lo, cost))[0]
        a, b = int(iu[pick]), int(ju[pick])
        members[a] = members[a] + members[b]
        del members[b]
    raw = np.empty(n, dtype=np.int64)
    for ci, ms in enumerate(members):
        raw[ms] = ci
    # first-seen relabeling, done locally to stay independent of production code
    seen: dict[int, int] = {}
    labels = np.empty(n, dtype=np.int64)
    for i in range(n):
        if int(raw[i]) not in seen:
            seen[int(raw[i])] = len(seen)
        labels[i] = seen[int(raw[i])]
    sse = 0.0
    for ms in members:
        mu = X[ms].mean(axis=0)
        sse += float(((X[ms] - mu) ** 2).sum())
    return ClusterAssignment(labels=labels, k=k, inertia=sse, method="agglomerative",
                             seed=0, iterations_run=n - k)
