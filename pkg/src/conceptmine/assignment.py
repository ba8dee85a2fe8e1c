"""Cluster assignment container, canonical label form, and JSON round-trip.

The on-disk assignment is UTF-8 JSON:
{"method": str, "k": int, "seed": int, "inertia": float, "labels": [int, ...]}
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

METHODS = ("kmeans", "agglomerative", "leaders")


@dataclass
class ClusterAssignment:
    labels: np.ndarray
    k: int
    inertia: float | None
    method: str
    seed: int
    iterations_run: int = 0

    def __post_init__(self):
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.method not in METHODS:
            raise ValidationError(f"unknown method {self.method!r}")
        if self.labels.size and (self.labels.min() < 0 or self.labels.max() >= self.k):
            raise ValidationError("labels outside 0..k-1")
        if self.inertia is not None and self.inertia < 0:
            raise ValidationError(f"negative inertia {self.inertia}")


def densify_labels(raw: np.ndarray) -> np.ndarray:
    """Relabel to 0..m-1 in first-seen order over point order."""
    raw = np.asarray(raw)
    _, first_pos, inv = np.unique(raw, return_index=True, return_inverse=True)
    # np.unique sorts by value; remap so ids follow first appearance instead
    order = np.argsort(first_pos, kind="stable")
    rank = np.empty_like(order)
    rank[order] = np.arange(order.size)
    return rank[inv].astype(np.int64)


def inertia_of(X, labels: np.ndarray) -> float:
    """Sum of squared distances to each point's own cluster mean, in float64."""
    from .dataset import as_matrix

    Xd = as_matrix(X).astype(np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    k = int(labels.max()) + 1 if labels.size else 0
    counts = np.bincount(labels, minlength=k).astype(np.float64)
    total = 0.0
    for d in range(Xd.shape[1]):
        col = Xd[:, d]
        sums = np.bincount(labels, weights=col, minlength=k)
        means = np.where(counts > 0, sums / np.maximum(counts, 1), 0.0)
        total += float(np.sum((col - means[labels]) ** 2))
    return total


def save_assignment(path, a: ClusterAssignment) -> None:
    if a.inertia is None:
        raise ValidationError("assignment has no inertia; compute it with inertia_of first")
    obj = {"method": a.method, "k": int(a.k), "seed": int(a.seed),
           "inertia": float(a.inertia), "labels": [int(x) for x in a.labels]}
    with open(path, "w", encoding="utf-8") as f:
        json.dump(obj, f, separators=(",", ":"))
        f.write("\n")


def load_assignment(path) -> ClusterAssignment:
    with open(path, "r", encoding="utf-8") as f:
        obj = json.load(f)
    for field in ("method", "k", "seed", "inertia", "labels"):
        if field not in obj:
            raise ValidationError(f"{path}: assignment missing field {field!r}")
    return ClusterAssignment(
        labels=np.asarray(obj["labels"], dtype=np.int64), k=int(obj["k"]),
        inertia=float(obj["inertia"]), method=str(obj["method"]), seed=int(obj["seed"]),
    )
