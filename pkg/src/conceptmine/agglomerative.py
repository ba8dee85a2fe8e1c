"""Ward-linkage hierarchical agglomerative clustering over a condensed matrix.

The condensed array holds, in float64, the Ward distance^2 between every
active pair of cluster slots, where dist2 = 2 * (variance increase of the
merge). For singletons that equals the squared Euclidean distance, and the
Lance-Williams recurrence

    d2(A+B, C) = ((nA+nC) d2(A,C) + (nB+nC) d2(B,C) - nC d2(A,B)) / (nA+nB+nC)

keeps the identity as clusters grow. The reported merge cost is dist2 / 2,
the actual variance increase, so two singletons merge at |x0 - x1|^2 / 2.

Slots: a merged cluster reuses the smaller of its two slot indices, so a
slot index is always the minimum original row index of the cluster it
holds. Tie rule among equal-cost merges: lexicographically smallest
(min leaf index of one side, min leaf index of the other), realized by
first-occurrence argmin over slots.

Memory is O(N^2): 8 * N(N-1)/2 bytes for the condensed array. A budget
check precedes allocation and refuses with the required byte count.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .assignment import ClusterAssignment, densify_labels, inertia_of
from .dataset import as_matrix
from .errors import ResourceBudgetError, ValidationError

DEFAULT_BUDGET_BYTES = 16 * 1024**3
BUDGET_ENV = "CONCEPTMINE_MEM_BUDGET_GB"


@dataclass
class Dendrogram:
    """merges[t] = (node_a, node_b, cost, new_size); leaves are 0..N-1 and the
    merge at step t creates node N+t."""

    node_a: np.ndarray
    node_b: np.ndarray
    cost: np.ndarray
    new_size: np.ndarray
    leaf_count: int

    def __len__(self):
        return len(self.node_a)

    def merges(self):
        for a, b, c, s in zip(self.node_a, self.node_b, self.cost, self.new_size):
            yield int(a), int(b), float(c), int(s)


def resolve_budget(mem_budget_bytes: int | None) -> int:
    if mem_budget_bytes is not None:
        return int(mem_budget_bytes)
    env = os.environ.get(BUDGET_ENV)
    if env:
        return int(float(env) * 1024**3)
    return DEFAULT_BUDGET_BYTES


def required_bytes(n: int, dim: int) -> int:
    # condensed float64 matrix plus the float64 copy of the data
    return 8 * (n * (n - 1) // 2) + 8 * n * dim


def check_budget(n: int, dim: int, mem_budget_bytes: int | None) -> None:
    budget = resolve_budget(mem_budget_bytes)
    need = required_bytes(n, dim)
    if need > budget:
        raise ResourceBudgetError(
            f"agglomerative clustering of N={n} needs about {need:,} bytes "
            f"(condensed distance matrix), budget is {budget:,} bytes"
        )


def _condensed_start(n: int, i: np.ndarray | int):
    # first index of the (i, i+1) entry in the condensed layout
    return i * (2 * n - i - 1) // 2


def _fill_condensed(Xd, cond, block=256):
    n = Xd.shape[0]
    sqn = np.einsum("ij,ij->i", Xd, Xd)
    for a in range(0, n, block):
        b = min(a + block, n)
        G = Xd[a:b] @ Xd[a:].T
        d2 = sqn[a:b, None] - 2.0 * G
        d2 += sqn[None, a:]
        np.maximum(d2, 0.0, out=d2)
        for i in range(a, b):
            s = _condensed_start(n, i)
            cond[s:s + n - 1 - i] = d2[i - a, i - a + 1:]


class _CondensedWard:
    def __init__(self, Xd):
        n = Xd.shape[0]
        self.n = n
        self.cond = np.empty(n * (n - 1) // 2, dtype=np.float64)
        _fill_condensed(Xd, self.cond)
        self.active = np.ones(n, dtype=bool)
        self.size = np.ones(n, dtype=np.int64)
        self.nnd = np.full(n, np.inf)
        self.nnj = np.full(n, -1, dtype=np.int64)
        for i in range(n - 1):
            self._rescan(i)

    def _upper(self, i):
        s = _condensed_start(self.n, i)
        return self.cond[s:s + self.n - 1 - i]

    def _row_indices(self, i):
        # condensed positions of pairs (j, i) for j < i
        j = np.arange(i, dtype=np.int64)
        return j * (2 * self.n - j - 1) // 2 + (i - j - 1)

    def _get_row(self, i):
        row = np.empty(self.n, dtype=np.float64)
        if i > 0:
            row[:i] = self.cond[self._row_indices(i)]
        row[i] = np.inf
        row[i + 1:] = self._upper(i)
        return row

    def _set_row(self, i, values, mask):
        if i > 0:
            idx = self._row_indices(i)
            low = mask[:i]
            self.cond[idx[low]] = values[:i][low]
        upper = self._upper(i)
        high = mask[i + 1:]
        upper[high] = values[i + 1:][high]

    def _rescan(self, i):
        # nearest active slot j > i; first occurrence keeps ties lexicographic
        vals = self._upper(i)
        act = self.active[i + 1:]
        if not act.any():
            self.nnd[i] = np.inf
            self.nnj[i] = -1
            return
        masked = np.where(act, vals, np.inf)
        t = int(np.argmin(masked))
        self.nnd[i] = masked[t]
        self.nnj[i] = i + 1 + t

    def pop_min(self):
        a = int(np.argmin(self.nnd))
        return a, int(self.nnj[a]), float(self.nnd[a])

    def merge(self, a, b):
        na = float(self.size[a])
        nb = float(self.size[b])
        rowa = self._get_row(a)
        rowb = self._get_row(b)
        d2ab = rowa[b]
        sz = self.size.astype(np.float64)
        new = ((na + sz) * rowa + (nb + sz) * rowb - sz * d2ab) / (na + nb + sz)
        mask = self.active.copy()
        mask[a] = False
        mask[b] = False
        self._set_row(a, new, mask)
        self.active[b] = False
        self.size[a] += self.size[b]
        self.nnd[b] = np.inf
        self.nnj[b] = -1
        stale = np.flatnonzero(self.active & ((self.nnj == a) | (self.nnj == b)))
        self._rescan(a)
        for i in stale:
            if i != a:
                self._rescan(int(i))


def ward_fit(ds, mem_budget_bytes: int | None = None) -> Dendrogram:
    """Full Ward merge tree; each step merges the globally cheapest pair."""
    X = as_matrix(ds)
    n, dim = X.shape
    if n < 2:
        raise ValidationError(f"need at least 2 points, got {n}")
    check_budget(n, dim, mem_budget_bytes)
    Xd = X.astype(np.float64)
    state = _CondensedWard(Xd)
    nodeid = np.arange(n, dtype=np.int64)
    node_a = np.empty(n - 1, dtype=np.int64)
    node_b = np.empty(n - 1, dtype=np.int64)
    cost = np.empty(n - 1, dtype=np.float64)
    new_size = np.empty(n - 1, dtype=np.int64)
    prev = -np.inf
    for t in range(n - 1):
        a, b, d2 = state.pop_min()
        c = d2 / 2.0
        # Ward is reducible, so merge costs never decrease (up to float noise)
        assert c >= prev * (1 - 1e-9) - 1e-12, f"cost decreased at step {t}: {prev} -> {c}"
        prev = max(prev, c)
        ids = sorted((int(nodeid[a]), int(nodeid[b])))
        node_a[t], node_b[t] = ids
        cost[t] = c
        state.merge(a, b)
        new_size[t] = state.size[a]
        nodeid[a] = n + t
    return Dendrogram(node_a=node_a, node_b=node_b, cost=cost,
                      new_size=new_size, leaf_count=n)


def cut_tree(dg: Dendrogram, k: int, vectors=None) -> ClusterAssignment:
    """Stop after N-k merges; labels in first-seen order over point order.

    Inertia is filled in when the data matrix is supplied, else left None.
    """
    n = dg.leaf_count
    if not (1 <= k <= n):
        raise ValidationError(f"k={k} out of range 1..{n}")
    parent = np.arange(2 * n - 1, dtype=np.int64)
    for t in range(n - k):
        parent[dg.node_a[t]] = n + t
        parent[dg.node_b[t]] = n + t
    # pointer jumping to the roots
    p = parent
    while True:
        pp = p[p]
        if np.array_equal(pp, p):
            break
        p = pp
    labels = densify_labels(p[:n])
    inertia = inertia_of(vectors, labels) if vectors is not None else None
    return ClusterAssignment(labels=labels, k=k, inertia=inertia,
                             method="agglomerative", seed=0, iterations_run=n - k)


def save_dendrogram(path, dg: Dendrogram) -> None:
    import json

    with open(path, "w", encoding="utf-8") as f:
        for a, b, c, s in dg.merges():
            f.write(json.dumps({"a": a, "b": b, "cost": c, "size": s}) + "\n")
