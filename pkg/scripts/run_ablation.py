#!/usr/bin/env python3
"""Ablations on one dataset: theta sensitivity and frequency-filter damage.

Part 1 clusters once per method and scores the same concepts across a theta
grid, showing how alignment/coverage trade off as the purity bar rises.
Part 2 re-runs the pipeline after dropping rows whose surface form occurs
fewer than --min-occ times, scoring against the full ontology, which shows
the coverage cost of shrinking the data.

    python scripts/run_ablation.py --synth 30000x32 --components 300 \
        --k 300 --thetas 0.5 0.75 0.9 0.95 1.0 --min-occ 20
"""

import argparse
import os
import sys

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from conceptmine.agglomerative import cut_tree, ward_fit
from conceptmine.alignment import theta_alignment
from conceptmine.concepts import Concept, ConceptSet, build_concepts, filter_concepts
from conceptmine.dataset import build_ontology, frequency_filter, load_dataset
from conceptmine.kmeans import KMeansConfig, kmeans_fit
from conceptmine.leaders import TauSearchConfig, leaders_cluster
from conceptmine.oracle import SynthConfig, generate


def parse_args(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--emb")
    p.add_argument("--tok")
    p.add_argument("--synth", metavar="NxD")
    p.add_argument("--components", type=int, default=300)
    p.add_argument("--separation", type=float, default=100.0)
    p.add_argument("--skew", type=float, default=1.2)
    p.add_argument("--methods", nargs="+", default=["kmeans"],
                   choices=("kmeans", "agglo", "leaders"))
    p.add_argument("--k", type=int, default=300)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--thetas", nargs="+", default=["0.5", "0.9", "0.95", "1.0"])
    p.add_argument("--min-types", type=int, default=5)
    p.add_argument("--min-occ", type=int, default=0,
                   help="> 0 runs the frequency-filter ablation too")
    return p.parse_args(argv)


def fit(ds, method, k, seed):
    if method == "kmeans":
        return kmeans_fit(ds, KMeansConfig(k=k, restarts=1, seed=seed,
                                           init="plusplus"))
    if method == "agglo":
        return cut_tree(ward_fit(ds), k, vectors=ds.vectors)
    return leaders_cluster(ds, k, search_cfg=TauSearchConfig(
        target_m=max(2 * k, ds.n_points // 4), seed=seed), order_seed=seed)


def main(argv=None):
    args = parse_args(argv)
    if args.synth:
        n, d = (int(v) for v in args.synth.lower().split("x"))
        ds = generate(SynthConfig(n_points=n, dim=d, n_components=args.components,
                                  separation=args.separation,
                                  label_skew=args.skew, seed=args.seed))
    elif args.emb and args.tok:
        ds = load_dataset(args.emb, args.tok)
    else:
        print("need --synth or both --emb and --tok", file=sys.stderr)
        return 2
    ont = build_ontology(ds)

    print(f"{'method':10s} {'theta':>6s} {'align%':>8s} {'cov%':>8s} {'lambda':>8s}")
    for method in args.methods:
        a = fit(ds, method, args.k, args.seed)
        cs = filter_concepts(build_concepts(a, ds), min_types=args.min_types)
        for theta in args.thetas:
            rep = theta_alignment(cs, ont, theta)
            print(f"{method:10s} {theta:>6s} "
                  f"{100 * rep.alignment_fraction:8.1f} "
                  f"{100 * rep.coverage_fraction:8.1f} "
                  f"{rep.lambda_score:8.3f}")

    if args.min_occ > 0:
        from collections import Counter
        counts = Counter(t.word for t in ds.tokens)
        kept = np.asarray([t.id for t in ds.tokens
                           if counts[t.word] >= args.min_occ], dtype=np.int64)
        ds_f = frequency_filter(ds, args.min_occ)
        removed = 1.0 - len(kept) / ds.n_points
        print(f"\nmin_occ={args.min_occ}: removed {100 * removed:.1f}% of rows, "
              f"{len({t.label for t in ds_f.tokens if t.label is not None})}"
              f"/{len(ont.concepts)} labels still present")
        for method in args.methods:
            a_f = fit(ds_f, method, min(args.k, ds_f.n_points), args.seed)
            cs_f = filter_concepts(build_concepts(a_f, ds_f),
                                   min_types=args.min_types)
            remapped = ConceptSet(concepts=[
                Concept(concept_id=c.concept_id, member_ids=kept[c.member_ids],
                        type_counts=c.type_counts)
                for c in cs_f.concepts], filtered=True, min_types=cs_f.min_types)
            for theta in args.thetas:
                rep = theta_alignment(remapped, ont, theta)
                print(f"{method:10s} {theta:>6s} "
                      f"{100 * rep.alignment_fraction:8.1f} "
                      f"{100 * rep.coverage_fraction:8.1f} "
                      f"{rep.lambda_score:8.3f}  (filtered)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
