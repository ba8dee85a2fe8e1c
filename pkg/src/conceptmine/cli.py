"""Command-line front end: synth / cluster / concepts / evaluate / histogram /
phrasal / filter / bench.

Every output file gets a sibling manifest (<out>.manifest.json) recording
the command line, resolved parameters, and sha256 digests of inputs and
outputs; manifests carry no timestamps, so identical commands over
identical inputs reproduce byte-identical files.

Exit codes: 0 success, 2 validation error, 3 resource-budget refusal,
4 internal error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys

from . import __version__
from .agglomerative import cut_tree, save_dendrogram, ward_fit
from .alignment import per_label_breakdown, theta_alignment
from .assignment import load_assignment, save_assignment
from .concepts import (build_concepts, concept_listing, filter_concepts,
                       histogram_from_sizes, load_concept_members, save_concepts)
from .dataset import (build_ontology, frequency_filter, load_dataset, load_tokens,
                      save_dataset)
from .errors import ResourceBudgetError, ValidationError
from .kmeans import KMeansConfig, kmeans_fit
from .leaders import (TauSearchConfig, cluster_compression, leaders_pass,
                      save_compression, tau_binary_search)


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for block in iter(lambda: f.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def write_manifest(primary_out, argv, params: dict, inputs: list, outputs: list) -> None:
    obj = {
        "tool": "conceptmine",
        "version": __version__,
        "command": list(argv),
        "params": params,
        "inputs": {str(p): _sha256(p) for p in inputs},
        "outputs": {str(p): _sha256(p) for p in outputs},
    }
    with open(str(primary_out) + ".manifest.json", "w", encoding="utf-8") as f:
        json.dump(obj, f, indent=2, sort_keys=True)
        f.write("\n")


def _budget_bytes(args) -> int | None:
    gb = getattr(args, "mem_budget_gb", None)
    if gb is None:
        return None   # module default / env var applies
    return int(float(gb) * 1024**3)


def cmd_synth(args, argv) -> int:
    from .oracle import SynthConfig, generate

    cfg = SynthConfig(n_points=args.n, dim=args.dim, n_components=args.components,
                      separation=args.separation, label_skew=args.skew,
                      phrasal_fraction=args.phrasal, seed=args.seed)
    ds = generate(cfg)
    save_dataset(ds, args.out_emb, args.out_tok)
    write_manifest(args.out_emb, argv, params=vars(cfg).copy(), inputs=[],
                   outputs=[args.out_emb, args.out_tok])
    print(f"wrote {args.out_emb} ({ds.n_points}x{ds.dim}) and {args.out_tok}")
    return 0


def cmd_cluster(args, argv) -> int:
    ds = load_dataset(args.emb, args.tok)
    outputs = [args.out]
    params: dict = {"method": args.method, "k": args.k, "seed": args.seed,
                    "threads": args.threads}
    if args.method == "kmeans":
        cfg = KMeansConfig(k=args.k, restarts=args.restarts, max_iter=args.max_iter,
                           rel_tol=args.rel_tol, seed=args.seed, init=args.init)
        assignment = kmeans_fit(ds, cfg)
        params.update(restarts=args.restarts, max_iter=args.max_iter,
                      rel_tol=args.rel_tol, init=args.init)
    elif args.method == "agglo":
        dg = ward_fit(ds, mem_budget_bytes=_budget_bytes(args))
        assignment = cut_tree(dg, args.k, vectors=ds.vectors)
        if args.dendrogram_out:
            save_dendrogram(args.dendrogram_out, dg)
            outputs.append(args.dendrogram_out)
        params.update(mem_budget_gb=args.mem_budget_gb)
    else:  # leaders
        exact = not args.approx
        if args.tau is not None:
            comp = leaders_pass(ds, args.tau, order_seed=args.order_seed, exact=exact)
            params.update(tau=args.tau, order_seed=args.order_seed, exact=exact)
        else:
            if args.budget is None:
                raise ValidationError("leaders needs --tau or --budget")
            scfg = TauSearchConfig(target_m=args.budget, rel_band=args.band,
                                   max_probes=args.max_probes, seed=args.order_seed or 0)
            tau, comp = tau_binary_search(ds, scfg, exact=exact)
            params.update(budget=args.budget, band=args.band,
                          max_probes=args.max_probes, tau_found=tau,
                          order_seed=scfg.seed, exact=exact)
        assignment = cluster_compression(ds, comp, args.k,
                                         mem_budget_bytes=_budget_bytes(args))
        if args.compression_out:
            save_compression(args.compression_out, comp)
            outputs.append(args.compression_out)
    save_assignment(args.out, assignment)
    write_manifest(args.out, argv, params=params, inputs=[args.emb, args.tok],
                   outputs=outputs)
    print(f"{args.method}: k={assignment.k} inertia={assignment.inertia:.6g} "
          f"-> {args.out}")
    return 0


def cmd_concepts(args, argv) -> int:
    ds = load_dataset(args.emb, args.tok)
    assignment = load_assignment(args.assign)
    cs = build_concepts(assignment, ds)
    if args.min_types is not None:
        cs = filter_concepts(cs, args.min_types)
    save_concepts(args.out, cs)
    outputs = [args.out]
    if args.listing:
        with open(args.listing, "w", encoding="utf-8") as f:
            f.write(concept_listing(cs))
        outputs.append(args.listing)
    write_manifest(args.out, argv,
                   params={"min_types": args.min_types},
                   inputs=[args.emb, args.tok, args.assign], outputs=outputs)
    print(f"{len(cs.concepts)} concepts -> {args.out}")
    return 0


def cmd_evaluate(args, argv) -> int:
    ds = load_dataset(args.emb, args.tok)
    assignment = load_assignment(args.assign)
    cs = build_concepts(assignment, ds)
    if not args.no_filter:
        cs = filter_concepts(cs, args.min_types)
    ont = build_ontology(ds)
    report = theta_alignment(cs, ont, args.theta,
                             coverage_denominator=args.coverage_denominator)
    with open(args.out, "w", encoding="utf-8") as f:
        f.write(report.to_json())
    write_manifest(args.out, argv,
                   params={"theta": args.theta, "min_types": args.min_types,
                           "no_filter": args.no_filter,
                           "coverage_denominator": args.coverage_denominator},
                   inputs=[args.emb, args.tok, args.assign], outputs=[args.out])
    sys.stdout.write(report.to_table())
    if args.breakdown:
        sys.stdout.write(per_label_breakdown(report, ont))
    return 0


def cmd_histogram(args, argv) -> int:
    members = load_concept_members(args.concepts)
    hist = histogram_from_sizes([len(m) for _, m in members], args.bin_width)
    obj = {"bin_edges": [int(e) for e in hist.bin_edges],
           "counts": [int(c) for c in hist.counts],
           "median": hist.median}
    with open(args.out, "w", encoding="utf-8") as f:
        json.dump(obj, f, indent=2, sort_keys=True)
        f.write("\n")
    write_manifest(args.out, argv, params={"bin_width": args.bin_width},
                   inputs=[args.concepts], outputs=[args.out])
    print(f"median size {hist.median} -> {args.out}")
    return 0


def cmd_phrasal(args, argv) -> int:
    members = load_concept_members(args.concepts)
    tokens = load_tokens(args.tok)
    spans = [t.span for t in tokens]
    words = [t.word for t in tokens]
    occ = {n: 0 for n in (2, 3, 4, 5)}
    types: dict[int, set] = {n: set() for n in (2, 3, 4, 5)}
    for _, ms in members:
        for i in ms:
            n = spans[i]
            if 2 <= n <= 5:
                occ[n] += 1
                types[n].add(words[i])
    obj = {"occurrences": {str(n): occ[n] for n in occ},
           "types": {str(n): len(types[n]) for n in types}}
    with open(args.out, "w", encoding="utf-8") as f:
        json.dump(obj, f, indent=2, sort_keys=True)
        f.write("\n")
    write_manifest(args.out, argv, params={}, inputs=[args.concepts, args.tok],
                   outputs=[args.out])
    print(f"phrasal occurrences {obj['occurrences']} -> {args.out}")
    return 0


def cmd_filter(args, argv) -> int:
    ds = load_dataset(args.emb, args.tok)
    out = frequency_filter(ds, args.min_occ, args.max_occ)
    save_dataset(out, args.out_emb, args.out_tok)
    write_manifest(args.out_emb, argv,
                   params={"min_occ": args.min_occ, "max_occ": args.max_occ},
                   inputs=[args.emb, args.tok], outputs=[args.out_emb, args.out_tok])
    print(f"kept {out.n_points}/{ds.n_points} rows -> {args.out_emb}")
    return 0


def cmd_bench(args, argv) -> int:
    from .bench import fit_exponent, run_cell, scaling_sweep, write_csv

    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    sizes = [int(s) for s in args.sizes.split(",") if s.strip()]
    flags = {}
    if args.kmeans_flags:
        flags["kmeans"] = args.kmeans_flags.split()
    if args.agglo_flags:
        flags["agglomerative"] = args.agglo_flags.split()
    if args.leaders_flags:
        flags["leaders"] = args.leaders_flags.split()
    records, exponents = scaling_sweep(methods, sizes, args.workdir, dim=args.dim,
                                       k=args.k, seed=args.seed, method_flags=flags)
    write_csv(args.out, records)
    write_manifest(args.out, argv,
                   params={"methods": methods, "sizes": sizes, "dim": args.dim,
                           "k": args.k, "seed": args.seed, "flags": flags},
                   inputs=[], outputs=[args.out])
    print(json.dumps({"exponents": exponents}, sort_keys=True))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="conceptmine",
                                description="Latent concept discovery over "
                                            "embedding datasets")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("synth", help="generate a planted synthetic dataset")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--dim", type=int, required=True)
    sp.add_argument("--components", type=int, required=True)
    sp.add_argument("--separation", type=float, default=8.0)
    sp.add_argument("--skew", type=float, default=1.0)
    sp.add_argument("--phrasal", type=float, default=0.0)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out-emb", required=True)
    sp.add_argument("--out-tok", required=True)
    sp.set_defaults(func=cmd_synth)

    cp = sub.add_parser("cluster", help="cluster an embedding dataset")
    cp.add_argument("--method", choices=("kmeans", "agglo", "leaders"), required=True)
    cp.add_argument("--emb", required=True)
    cp.add_argument("--tok", required=True)
    cp.add_argument("--out", required=True)
    cp.add_argument("--k", type=int, default=600)
    cp.add_argument("--seed", type=int, default=0)
    cp.add_argument("--threads", type=int, default=None)
    cp.add_argument("--restarts", type=int, default=10)
    cp.add_argument("--max-iter", type=int, default=300)
    cp.add_argument("--rel-tol", type=float, default=1e-4)
    cp.add_argument("--init", choices=("sample", "plusplus"), default="sample")
    cp.add_argument("--mem-budget-gb", type=float, default=None)
    cp.add_argument("--dendrogram-out", default=None)
    cp.add_argument("--tau", type=float, default=None)
    cp.add_argument("--budget", type=int, default=None,
                    help="leaders: target centroid count for the tau search")
    cp.add_argument("--band", type=float, default=0.05)
    cp.add_argument("--max-probes", type=int, default=30)
    cp.add_argument("--order-seed", type=int, default=None)
    cp.add_argument("--approx", action="store_true",
                    help="leaders: approximate neighbor index instead of exact scan")
    cp.add_argument("--compression-out", default=None)
    cp.set_defaults(func=cmd_cluster)

    ccp = sub.add_parser("concepts", help="project an assignment to concepts")
    ccp.add_argument("--emb", required=True)
    ccp.add_argument("--tok", required=True)
    ccp.add_argument("--assign", required=True)
    ccp.add_argument("--out", required=True)
    ccp.add_argument("--min-types", type=int, default=None,
                     help="apply the unique-type filter at this threshold")
    ccp.add_argument("--listing", default=None)
    ccp.set_defaults(func=cmd_concepts)

    ep = sub.add_parser("evaluate", help="theta-alignment against the ontology")
    ep.add_argument("--emb", required=True)
    ep.add_argument("--tok", required=True)
    ep.add_argument("--assign", required=True)
    ep.add_argument("--out", required=True)
    ep.add_argument("--theta", default="0.95")
    ep.add_argument("--min-types", type=int, default=5)
    ep.add_argument("--no-filter", action="store_true")
    ep.add_argument("--coverage-denominator", choices=("encoded", "human"),
                    default="encoded")
    ep.add_argument("--breakdown", action="store_true")
    ep.set_defaults(func=cmd_evaluate)

    hp = sub.add_parser("histogram", help="concept size histogram")
    hp.add_argument("--concepts", required=True)
    hp.add_argument("--bin-width", type=int, default=50)
    hp.add_argument("--out", required=True)
    hp.set_defaults(func=cmd_histogram)

    php = sub.add_parser("phrasal", help="phrasal-unit counts over concepts")
    php.add_argument("--concepts", required=True)
    php.add_argument("--tok", required=True)
    php.add_argument("--out", required=True)
    php.set_defaults(func=cmd_phrasal)

    fp = sub.add_parser("filter", help="frequency-filter a dataset")
    fp.add_argument("--emb", required=True)
    fp.add_argument("--tok", required=True)
    fp.add_argument("--min-occ", type=int, required=True)
    fp.add_argument("--max-occ", type=int, default=None)
    fp.add_argument("--out-emb", required=True)
    fp.add_argument("--out-tok", required=True)
    fp.set_defaults(func=cmd_filter)

    bp = sub.add_parser("bench", help="scaling sweep over methods and sizes")
    bp.add_argument("--methods", required=True, help="comma list: kmeans,agglo,leaders")
    bp.add_argument("--sizes", required=True, help="comma list of N values")
    bp.add_argument("--dim", type=int, default=64)
    bp.add_argument("--k", type=int, default=600)
    bp.add_argument("--seed", type=int, default=0)
    bp.add_argument("--workdir", required=True)
    bp.add_argument("--out", required=True)
    bp.add_argument("--kmeans-flags", default="", help="extra child flags, space separated")
    bp.add_argument("--agglo-flags", default="")
    bp.add_argument("--leaders-flags", default="")
    bp.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    threads = getattr(args, "threads", None)
    try:
        if threads:
            from threadpoolctl import threadpool_limits

            with threadpool_limits(limits=threads):
                return args.func(args, argv)
        return args.func(args, argv)
    except ValidationError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except FileNotFoundError as e:
        print(f"error: missing input file: {e.filename}", file=sys.stderr)
        return 2
    except ResourceBudgetError as e:
        print(f"refused: {e}", file=sys.stderr)
        return 3
    except Exception as e:  # noqa: BLE001 - the CLI boundary reports and exits
        print(f"internal error: {type(e).__name__}: {e}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
