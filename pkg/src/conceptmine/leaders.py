"""Single-pass leader compression, tau search, and the two-stage pipeline.

One pass over the points (optionally in a seeded permutation): a point
within Euclidean distance tau of an existing leader becomes a follower of
the nearest one (ties -> earliest-created leader); otherwise it becomes a
new leader. Follower groups are stars around their leader, and each group
is condensed to its arithmetic-mean centroid before the Ward stage.

Exact mode guarantees the nearest leader is found by a full scan; distances
come from chunked float64 matrix products, and any candidate near the tau
boundary is re-checked with a direct difference so the follower-radius
invariant |x_f - x_leader| <= tau holds exactly as written. Approximate
mode uses a random-projection-tree forest rebuilt in batches; it may miss
a nearby leader (creating an extra leader), never the reverse.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .agglomerative import cut_tree, ward_fit
from .assignment import ClusterAssignment, densify_labels, inertia_of
from .dataset import as_matrix
from .errors import ValidationError


@dataclass
class LeadersCompression:
    tau: float
    leader_ids: np.ndarray      # point ids in creation order
    follower_of: np.ndarray     # point id -> leader point id (leaders map to self)
    group_of: np.ndarray        # point id -> leader creation index
    centroids: np.ndarray       # (M, D) float64 group means
    group_sizes: np.ndarray
    order_seed: int | None = None
    probes: int = 0             # tau-search probes spent producing this, 0 = direct

    @property
    def m(self) -> int:
        return int(len(self.leader_ids))


@dataclass
class TauSearchConfig:
    target_m: int
    rel_band: float = 0.05
    max_probes: int = 30
    seed: int = 0

    def validate(self, n_points: int) -> None:
        if self.target_m < 1:
            raise ValidationError("target_m must be >= 1")
        if self.target_m > n_points:
            raise ValidationError(
                f"target unreachable: target_m={self.target_m} exceeds N={n_points}")
        if not (0 < self.rel_band < 1):
            raise ValidationError("rel_band must be in (0, 1)")
        if self.max_probes < 1:
            raise ValidationError("max_probes must be >= 1")


class _RPForest:
    """Random-projection-tree index over leader vectors, rebuilt in batches."""

    def __init__(self, n_trees=8, leaf_size=32, seed=0, rebuild_every=256):
        self.n_trees = n_trees
        self.leaf_size = leaf_size
        self.rebuild_every = rebuild_every
        self.rng = np.random.default_rng(np.random.SeedSequence([seed, 0x9F0]))
        self.trees = []
        self.indexed = 0

    def _build_tree(self, vecs, ids):
        if len(ids) <= self.leaf_size:
            return ("leaf", ids)
        normal = self.rng.standard_normal(vecs.shape[1])
        proj = vecs[ids] @ normal
        thresh = float(np.median(proj))
        left = ids[proj <= thresh]
        right = ids[proj > thresh]
        if len(left) == 0 or len(right) == 0:
            return ("leaf", ids)
        return (normal, thresh, self._build_tree(vecs, left), self._build_tree(vecs, right))

    def maybe_rebuild(self, vecs, count):
        if count - self.indexed >= self.rebuild_every:
            ids = np.arange(count, dtype=np.int64)
            self.trees = [self._build_tree(vecs[:count], ids) for _ in range(self.n_trees)]
            self.indexed = count

    def candidates(self, x):
        out = []
        for tree in self.trees:
            node = tree
            while node[0] != "leaf":
                normal, thresh, left, right = node
                node = left if float(x @ normal) <= thresh else right
            out.append(node[1])
        if not out:
            return np.empty(0, dtype=np.int64)
        return np.unique(np.concatenate(out))


def _sq_dists_chunk(Q, L):
    # |q - l|^2 via the product identity; may round near zero, callers re-check
    G = Q @ L.T
    d2 = np.einsum("ij,ij->i", Q, Q)[:, None] - 2.0 * G
    d2 += np.einsum("ij,ij->i", L, L)[None, :]
    np.maximum(d2, 0.0, out=d2)
    return d2


def _nearest_in_blocks(Q, LM, L0, block=8192):
    """Nearest of the first L0 leader rows for each query (ties -> earliest)."""
    m = Q.shape[0]
    best_d = np.full(m, np.inf)
    best_j = np.zeros(m, dtype=np.int64)
    rows = np.arange(m)
    for s in range(0, L0, block):
        e = min(s + block, L0)
        d2 = _sq_dists_chunk(Q, LM[s:e])
        j = np.argmin(d2, axis=1)
        d = d2[rows, j]
        upd = d < best_d    # strict keeps the earlier block on ties
        best_j[upd] = j[upd] + s
        best_d[upd] = d[upd]
    return best_j, best_d


def leaders_pass(ds, tau: float, order_seed: int | None = None, exact: bool = True,
                 chunk: int = 1024, early_stop_m: int | None = None,
                 ) -> LeadersCompression | None:
    """One compression pass. order_seed=None keeps natural point order.

    With early_stop_m set, returns None as soon as the leader count exceeds
    it (used by the tau search to abandon hopeless probes cheaply).
    """
    if tau < 0:
        raise ValidationError(f"tau must be >= 0, got {tau}")
    X = as_matrix(ds)
    n, dim = X.shape
    if order_seed is None:
        order = np.arange(n, dtype=np.int64)
    else:
        order = np.random.default_rng(order_seed).permutation(n).astype(np.int64)
    Xd = X.astype(np.float64)
    tau2 = float(tau) * float(tau)
    max_sqn = float(np.einsum("ij,ij->i", Xd, Xd).max()) if n else 0.0
    band = tau2 * 1e-6 + 1e-12 * max_sqn + 1e-30
    cap = 1024
    LM = np.empty((cap, dim), dtype=np.float64)
    leader_pts: list[int] = []
    group_of = np.empty(n, dtype=np.int64)
    forest = None if exact else _RPForest(seed=0 if order_seed is None else order_seed)
    L = 0
    for a in range(0, n, chunk):
        b = min(a + chunk, n)
        pts = order[a:b]
        Q = Xd[pts]
        L0 = L
        if L0 > 0 and exact:
            base_j, base_d = _nearest_in_blocks(Q, LM, L0)
        for t in range(b - a):
            p = int(pts[t])
            x = Q[t]
            best_j, best_d = -1, math.inf
            if exact:
                if L0 > 0:
                    best_j, best_d = int(base_j[t]), float(base_d[t])
                if L > L0:
                    diff = LM[L0:L] - x
                    dd = np.einsum("ij,ij->i", diff, diff)
                    jj = int(np.argmin(dd))
                    if dd[jj] < best_d:   # strict: ties stay with the earlier leader
                        best_j, best_d = L0 + jj, float(dd[jj])
            else:
                forest.maybe_rebuild(LM, L)
                cand = forest.candidates(x)
                recent = np.arange(forest.indexed, L, dtype=np.int64)
                if recent.size:
                    cand = np.concatenate([cand, recent]) if cand.size else recent
                if cand.size:
                    diff = LM[cand] - x
                    dd = np.einsum("ij,ij->i", diff, diff)
                    jj = int(np.argmin(dd))
                    best_j, best_d = int(cand[jj]), float(dd[jj])
            is_follower = False
            if best_j >= 0 and best_d <= tau2 + band:
                delta = x - LM[best_j]
                exact_d2 = float(np.sum(delta * delta))
                is_follower = exact_d2 <= tau2
            if is_follower:
                group_of[p] = best_j
            else:
                if L == cap:
                    cap *= 2
                    grown = np.empty((cap, dim), dtype=np.float64)
                    grown[:L] = LM[:L]
                    LM = grown
                LM[L] = x
                group_of[p] = L
                leader_pts.append(p)
                L += 1
                if early_stop_m is not None and L > early_stop_m:
                    return None
    leader_ids = np.asarray(leader_pts, dtype=np.int64)
    counts = np.bincount(group_of, minlength=L).astype(np.int64)
    centroids = np.empty((L, dim), dtype=np.float64)
    for d in range(dim):
        centroids[:, d] = np.bincount(group_of, weights=Xd[:, d], minlength=L)
    centroids /= counts[:, None]
    follower_of = leader_ids[group_of]
    return LeadersCompression(tau=float(tau), leader_ids=leader_ids,
                              follower_of=follower_of, group_of=group_of.copy(),
                              centroids=centroids, group_sizes=counts,
                              order_seed=order_seed)


def _sampled_max_distance(Xd, seed, sample=1024):
    n = Xd.shape[0]
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0x7A11]))
    idx = rng.choice(n, size=min(n, sample), replace=False)
    S = Xd[idx]
    d2 = _sq_dists_chunk(S, S)
    return float(np.sqrt(d2.max()))


def tau_binary_search(ds, cfg: TauSearchConfig, exact: bool = True,
                      ) -> tuple[float, LeadersCompression]:
    """Bisect tau until the pass lands within target_m * (1 +- rel_band).

    M(tau) is non-increasing in tau for a fixed pass order, which is what
    makes bisection sound; if the band is never hit within max_probes, the
    closest probe wins.
    """
    X = as_matrix(ds)
    n = X.shape[0]
    cfg.validate(n)
    lo_m = cfg.target_m * (1 - cfg.rel_band)
    hi_m = cfg.target_m * (1 + cfg.rel_band)
    stop_m = int(math.floor(hi_m))
    probes = 0

    def run(tau):
        nonlocal probes
        probes += 1
        return leaders_pass(ds, tau, order_seed=cfg.seed, exact=exact,
                            early_stop_m=stop_m)

    def done(tau, comp):
        comp.probes = probes
        return tau, comp

    best = None
    if n <= hi_m:    # tau = 0 cannot overshoot the band, try it first
        comp = run(0.0)
        if comp is not None:
            if lo_m <= comp.m <= hi_m:
                return done(0.0, comp)
            best = (abs(comp.m - cfg.target_m), 0.0, comp)
    Xd = X.astype(np.float64)
    hi_t = max(_sampled_max_distance(Xd, cfg.seed), 1e-300)
    comp = None
    while probes < cfg.max_probes:
        comp = run(hi_t)
        if comp is not None:
            break
        hi_t *= 2.0          # sampled upper bound too small, M still above band
    if comp is None:
        if best is not None:
            return done(best[1], best[2])
        raise ValidationError("tau search: no feasible upper bound within max_probes")
    if lo_m <= comp.m <= hi_m:
        return done(hi_t, comp)
    if best is None or abs(comp.m - cfg.target_m) < best[0]:
        best = (abs(comp.m - cfg.target_m), hi_t, comp)
    lo_t = 0.0
    while probes < cfg.max_probes:
        mid = 0.5 * (lo_t + hi_t)
        comp = run(mid)
        if comp is None:     # leader count blew past the band: tau too small
            lo_t = mid
            continue
        if lo_m <= comp.m <= hi_m:
            return done(mid, comp)
        diff = abs(comp.m - cfg.target_m)
        if diff < best[0]:
            best = (diff, mid, comp)
        if comp.m > cfg.target_m:
            lo_t = mid
        else:
            hi_t = mid
    return done(best[1], best[2])


def cluster_compression(ds, comp: LeadersCompression, k: int,
                        mem_budget_bytes: int | None = None) -> ClusterAssignment:
    """Ward over the M centroids, then propagate labels to the original points."""
    if k > comp.m:
        raise ValidationError(f"k={k} exceeds leader count M={comp.m}")
    X = as_matrix(ds)
    if comp.m == 1:
        labels = np.zeros(X.shape[0], dtype=np.int64)
    else:
        cents = comp.centroids.astype(np.float32)
        dg = ward_fit(cents, mem_budget_bytes=mem_budget_bytes)
        cent_labels = cut_tree(dg, k).labels
        labels = densify_labels(cent_labels[comp.group_of])
    return ClusterAssignment(labels=labels, k=k, inertia=inertia_of(X, labels),
                             method="leaders",
                             seed=comp.order_seed if comp.order_seed is not None else 0,
                             iterations_run=comp.probes)


def leaders_cluster(ds, k: int, tau: float | None = None,
                    search_cfg: TauSearchConfig | None = None,
                    order_seed: int | None = None, exact: bool = True,
                    mem_budget_bytes: int | None = None) -> ClusterAssignment:
    """Compress (fixed tau or tau search) and Ward-cluster the centroids."""
    if (tau is None) == (search_cfg is None):
        raise ValidationError("pass exactly one of tau or search_cfg")
    if tau is not None:
        comp = leaders_pass(ds, tau, order_seed=order_seed, exact=exact)
    else:
        _, comp = tau_binary_search(ds, search_cfg, exact=exact)
    return cluster_compression(ds, comp, k, mem_budget_bytes=mem_budget_bytes)


def save_compression(path, comp: LeadersCompression) -> None:
    obj = {"tau": float(comp.tau), "m": comp.m,
           "order_seed": comp.order_seed,
           "follower_of": [int(x) for x in comp.follower_of]}
    with open(path, "w", encoding="utf-8") as f:
        json.dump(obj, f, separators=(",", ":"))
        f.write("\n")
