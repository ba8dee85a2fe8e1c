"""K-Means with sampled-row initialization, restarts, and deterministic ties.

All distance work is done in float64 via chunked matrix products; argmin
ties resolve to the lowest cluster index everywhere. Centroid accumulation
uses per-dimension bincount, a fixed reduction order, so results do not
depend on BLAS worker count.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .assignment import ClusterAssignment
from .dataset import as_matrix
from .errors import ValidationError


@dataclass
class KMeansConfig:
    k: int
    restarts: int = 10
    max_iter: int = 300
    rel_tol: float = 1e-4
    seed: int = 0
    init: str = "sample"  # "sample" = k distinct data rows; "plusplus" = greedy seeding
    chunk: int = 2048  # rows per distance block; keeps transient buffers ~chunk*k*8 bytes

    def validate(self, n_points: int) -> None:
        if self.k < 1:
            raise ValidationError(f"k must be >= 1, got {self.k}")
        if self.k > n_points:
            raise ValidationError(f"k={self.k} exceeds n_points={n_points}")
        if self.restarts < 1:
            raise ValidationError("restarts must be >= 1")
        if self.max_iter < 1:
            raise ValidationError("max_iter must be >= 1")
        if self.rel_tol < 0:
            raise ValidationError("rel_tol must be >= 0")
        if self.init not in ("sample", "plusplus"):
            raise ValidationError(f"unknown init {self.init!r}")


def _chunked_assign(Xd, x_sqn, centroids, chunk):
    """Nearest centroid per point (ties -> lowest index) and that distance^2."""
    n = Xd.shape[0]
    c_sqn = np.einsum("ij,ij->i", centroids, centroids)
    labels = np.empty(n, dtype=np.int64)
    d2min = np.empty(n, dtype=np.float64)
    for a in range(0, n, chunk):
        b = min(a + chunk, n)
        G = Xd[a:b] @ centroids.T
        d2 = x_sqn[a:b, None] - 2.0 * G
        d2 += c_sqn[None, :]
        lab = np.argmin(d2, axis=1)
        labels[a:b] = lab
        d2min[a:b] = d2[np.arange(b - a), lab]
    np.maximum(d2min, 0.0, out=d2min)
    return labels, d2min


def _exact_inertia(Xd, centroids, labels, chunk):
    """Sum of squared distances via direct differences; exact zeros survive
    (the expanded-product form in _chunked_assign does not guarantee that)."""
    total = 0.0
    for a in range(0, Xd.shape[0], chunk):
        b = min(a + chunk, Xd.shape[0])
        diff = Xd[a:b] - centroids[labels[a:b]]
        total += float(np.einsum("ij,ij->", diff, diff))
    return total


def _centroid_means(Xd, labels, k):
    counts = np.bincount(labels, minlength=k)
    sums = np.empty((k, Xd.shape[1]), dtype=np.float64)
    for d in range(Xd.shape[1]):
        sums[:, d] = np.bincount(labels, weights=Xd[:, d], minlength=k)
    return sums, counts


def _init_sample(rng, n, k, Xd):
    idx = rng.choice(n, size=k, replace=False)
    return Xd[idx].copy()


def _init_plusplus(rng, n, k, Xd, x_sqn, n_candidates=8):
    """Greedy seeding: sample candidates by current distance^2 mass, keep the
    one that lowers total potential most."""
    centers = np.empty((k, Xd.shape[1]), dtype=np.float64)
    first = int(rng.integers(n))
    centers[0] = Xd[first]
    closest = x_sqn - 2.0 * (Xd @ centers[0]) + float(centers[0] @ centers[0])
    np.maximum(closest, 0.0, out=closest)
    for c in range(1, k):
        total = float(closest.sum())
        if total <= 0.0:
            # all remaining mass is zero: duplicate data; any row works
            cand = rng.choice(n, size=n_candidates, replace=True)
        else:
            cand = rng.choice(n, size=n_candidates, replace=True, p=closest / total)
        cvec = Xd[cand]
        G = cvec @ Xd.T
        d2 = np.einsum("ij,ij->i", cvec, cvec)[:, None] - 2.0 * G + x_sqn[None, :]
        np.maximum(d2, 0.0, out=d2)
        pot = np.minimum(closest[None, :], d2).sum(axis=1)
        best = int(np.argmin(pot))
        centers[c] = Xd[cand[best]]
        np.minimum(closest, d2[best], out=closest)
    return centers


def lloyd(Xd, x_sqn, centroids, max_iter, tol_abs, chunk):
    """One run. Returns (labels, centroids, inertia, iterations, history).

    history[i] is the inertia measured at the i-th assignment pass; it is
    asserted non-increasing up to float noise.
    """
    n, dim = Xd.shape
    k = centroids.shape[0]
    history = []
    it = 0
    for it in range(1, max_iter + 1):
        labels, d2 = _chunked_assign(Xd, x_sqn, centroids, chunk)
        inertia = float(d2.sum())
        if history:
            assert inertia <= history[-1] * (1 + 1e-12) + 1e-9, (
                f"inertia increased: {history[-1]} -> {inertia}")
        history.append(inertia)
        sums, counts = _centroid_means(Xd, labels, k)
        empties = np.flatnonzero(counts == 0)
        if empties.size:
            d2rep = d2.copy()
            for e in empties:
                far = int(np.argmax(d2rep))
                sums[e] = Xd[far]
                counts[e] = 1
                labels[far] = e
                d2rep[far] = -1.0  # do not reuse the same point for another empty slot
            # donor clusters keep stale sums for this update; next pass corrects
        new_centroids = sums / counts[:, None]
        shift = float(np.sqrt(((new_centroids - centroids) ** 2).sum(axis=1)).max())
        centroids = new_centroids
        if shift <= tol_abs:
            break
    labels, _ = _chunked_assign(Xd, x_sqn, centroids, chunk)
    inertia = _exact_inertia(Xd, centroids, labels, chunk)
    history.append(inertia)
    return labels, centroids, inertia, it, history


def data_scale(X) -> float:
    """Max feature range; the relative-tolerance yardstick. Scales linearly
    with the data so convergence behaves the same under uniform scaling."""
    X = as_matrix(X)
    return float((X.max(axis=0) - X.min(axis=0)).max())


def kmeans_fit(ds, cfg: KMeansConfig) -> ClusterAssignment:
    """Best of cfg.restarts independent runs, per final inertia (ties -> first run)."""
    X = as_matrix(ds)
    n = X.shape[0]
    cfg.validate(n)
    Xd = X.astype(np.float64)
    x_sqn = np.einsum("ij,ij->i", Xd, Xd)
    tol_abs = cfg.rel_tol * data_scale(X)
    seeds = np.random.SeedSequence(cfg.seed).spawn(cfg.restarts)
    best = None
    for r in range(cfg.restarts):
        rng = np.random.default_rng(seeds[r])
        if cfg.init == "sample":
            centroids = _init_sample(rng, n, cfg.k, Xd)
        else:
            centroids = _init_plusplus(rng, n, cfg.k, Xd, x_sqn)
        labels, _, inertia, iters, _ = lloyd(Xd, x_sqn, centroids, cfg.max_iter,
                                             tol_abs, cfg.chunk)
        if best is None or inertia < best[0]:
            best = (inertia, labels, iters)
    inertia, labels, iters = best
    return ClusterAssignment(labels=labels, k=cfg.k, inertia=inertia,
                             method="kmeans", seed=cfg.seed, iterations_run=iters)


def assign_to_centroids(ds, centroids, chunk=2048) -> np.ndarray:
    """Map each point to its nearest centroid (Euclidean, ties -> lowest index)."""
    X = as_matrix(ds)
    C = np.asarray(centroids, dtype=np.float64)
    if C.ndim != 2 or C.shape[1] != X.shape[1]:
        raise ValidationError(
            f"dimension mismatch: centroids {C.shape} vs data dim {X.shape[1]}")
    Xd = X.astype(np.float64)
    x_sqn = np.einsum("ij,ij->i", Xd, Xd)
    labels, _ = _chunked_assign(Xd, x_sqn, C, chunk)
    return labels
