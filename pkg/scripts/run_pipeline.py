#!/usr/bin/env python3
"""One-shot pipeline: dataset -> clusters -> concepts -> alignment report.

Works either from an existing embedding/token pair or from a synthetic set
generated on the fly (--synth). Writes the cluster assignment, the concept
members file, and the evaluation JSON next to --workdir, then prints the
alignment table.

Typical use:
    python scripts/run_pipeline.py --synth 50000x64 --components 200 \
        --method kmeans --k 200 --theta 0.95 --workdir runs/demo
    python scripts/run_pipeline.py --emb data/layer7.lce --tok data/tokens.jsonl \
        --method leaders --budget 5000 --k 600 --workdir runs/bert_l7
"""

import argparse
import json
import os
import sys
import time

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from conceptmine.agglomerative import cut_tree, ward_fit
from conceptmine.alignment import per_label_breakdown, theta_alignment
from conceptmine.assignment import save_assignment
from conceptmine.concepts import build_concepts, filter_concepts, save_concepts
from conceptmine.dataset import build_ontology, load_dataset, save_dataset
from conceptmine.kmeans import KMeansConfig, kmeans_fit
from conceptmine.leaders import TauSearchConfig, leaders_cluster
from conceptmine.oracle import SynthConfig, generate


def parse_args(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    src = p.add_argument_group("input")
    src.add_argument("--emb", help="LCE1 embedding file")
    src.add_argument("--tok", help="token JSONL file")
    src.add_argument("--synth", metavar="NxD",
                     help="generate a synthetic set instead, e.g. 50000x64")
    src.add_argument("--components", type=int, default=100)
    src.add_argument("--separation", type=float, default=8.0)
    src.add_argument("--skew", type=float, default=1.0)
    run = p.add_argument_group("clustering")
    run.add_argument("--method", choices=("kmeans", "agglo", "leaders"),
                     default="kmeans")
    run.add_argument("--k", type=int, default=600)
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--restarts", type=int, default=10)
    run.add_argument("--init", choices=("sample", "plusplus"), default="sample")
    run.add_argument("--tau", type=float, help="leaders: fixed radius")
    run.add_argument("--budget", type=int, help="leaders: target centroid count")
    ev = p.add_argument_group("evaluation")
    ev.add_argument("--theta", default="0.95")
    ev.add_argument("--min-types", type=int, default=5)
    ev.add_argument("--breakdown", action="store_true",
                    help="also print one line per ontology label")
    p.add_argument("--workdir", default="runs/pipeline")
    return p.parse_args(argv)


def main(argv=None):
    args = parse_args(argv)
    os.makedirs(args.workdir, exist_ok=True)

    if args.synth:
        n, d = (int(v) for v in args.synth.lower().split("x"))
        ds = generate(SynthConfig(n_points=n, dim=d, n_components=args.components,
                                  separation=args.separation,
                                  label_skew=args.skew, seed=args.seed))
        save_dataset(ds, os.path.join(args.workdir, "synth.lce"),
                     os.path.join(args.workdir, "synth.jsonl"))
    elif args.emb and args.tok:
        ds = load_dataset(args.emb, args.tok)
    else:
        print("need --synth or both --emb and --tok", file=sys.stderr)
        return 2

    t0 = time.time()
    if args.method == "kmeans":
        a = kmeans_fit(ds, KMeansConfig(k=args.k, restarts=args.restarts,
                                        seed=args.seed, init=args.init))
    elif args.method == "agglo":
        a = cut_tree(ward_fit(ds), args.k, vectors=ds.vectors)
    else:
        cfg = None if args.budget is None else TauSearchConfig(
            target_m=args.budget, seed=args.seed)
        a = leaders_cluster(ds, args.k, tau=args.tau, search_cfg=cfg,
                            order_seed=args.seed)
    fit_s = time.time() - t0
    save_assignment(os.path.join(args.workdir, "assignment.json"), a)

    cs = filter_concepts(build_concepts(a, ds), min_types=args.min_types)
    save_concepts(os.path.join(args.workdir, "concepts.json"), cs)
    ont = build_ontology(ds)
    rep = theta_alignment(cs, ont, args.theta)
    with open(os.path.join(args.workdir, "report.json"), "w",
              encoding="utf-8") as f:
        json.dump(rep.to_json(), f, indent=2, sort_keys=True)

    print(f"{args.method}: k={args.k} fit={fit_s:.1f}s "
          f"concepts_kept={len(cs.concepts)}")
    print(rep.to_table())
    if args.breakdown:
        for line in per_label_breakdown(rep, ont):
            print(line)
    return 0


if __name__ == "__main__":
    sys.exit(main())
