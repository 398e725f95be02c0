"""Command-line entry point: ``lhcn {transform,train,eval,bench,export-embeddings}``.

Exit codes: 0 success, 3 parse error, 4 validation error, 5 numeric
failure, 6 missing input file.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import fields

from lhcn import backmap, bench
from lhcn.errors import DataFileError, LhcnError
from lhcn.gcn import load_checkpoint
from lhcn.manifest import PATH_KEYS, RunManifest, coerce, load_manifest
from lhcn.pipeline import (
    aggregate,
    load_dataset,
    predict,
    prepare,
    run_pipeline,
    write_run,
    write_transform,
)

log = logging.getLogger("lhcn")


def _add_manifest_flags(parser):
    group = parser.add_argument_group("manifest overrides")
    for f in fields(RunManifest):
        flag = "--" + f.name.replace("_", "-")
        if f.type in ("bool", bool):
            group.add_argument(flag, dest=f.name, action=argparse.BooleanOptionalAction, default=None)
        else:
            group.add_argument(flag, dest=f.name, default=None, metavar=f.name.upper())


def _overrides(args) -> dict:
    out = {}
    for f in fields(RunManifest):
        value = getattr(args, f.name, None)
        if value is None:
            continue
        if isinstance(value, bool):
            out[f.name] = value
        else:
            out[f.name] = coerce(f.name, str(value))
            if f.name in PATH_KEYS:
                out[f.name] = os.path.abspath(out[f.name])
    return out


def _manifest(args) -> RunManifest:
    overrides = _overrides(args)
    if args.manifest:
        return load_manifest(args.manifest, overrides)
    return RunManifest(**overrides)


def cmd_transform(args) -> int:
    manifest = _manifest(args).validate()
    prep = prepare(manifest)
    out = args.out or os.path.join(manifest.output_dir, manifest.name, "transform")
    path = write_transform(prep, manifest, out)
    sys.stdout.write(prep.ingest.to_text())
    sys.stdout.write(f"line_nodes = {prep.line_graph.m}\n")
    sys.stdout.write(f"line_edges = {prep.line_graph.adjacency.nnz // 2}\n")
    sys.stdout.write(f"labelled_line_nodes = {prep.line_graph.n_labelled()}\n")
    sys.stdout.write(f"output = {path}\n")
    return 0


def _seed_manifests(manifest: RunManifest, seeds: int):
    if seeds <= 1:
        return [(manifest, os.path.join(manifest.output_dir, manifest.name))]
    root = os.path.join(manifest.output_dir, manifest.name)
    return [
        (
            manifest.replace(
                split_seed=manifest.split_seed + i,
                init_seed=manifest.init_seed + i,
                name=f"{manifest.name}/seed_{i:02d}",
            ),
            os.path.join(root, f"seed_{i:02d}"),
        )
        for i in range(seeds)
    ]


def _train_one(manifest: RunManifest, run_dir: str, dataset=None):
    result = run_pipeline(manifest, dataset)
    write_run(result, manifest, run_dir)
    return run_dir, result.metrics.test_accuracy, result.metrics.train_accuracy


def cmd_train(args) -> int:
    manifest = _manifest(args).validate()
    plan = _seed_manifests(manifest, args.seeds)
    if args.jobs > 1 and len(plan) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            outcomes = list(pool.map(_train_one, *zip(*plan)))
    else:
        dataset = load_dataset(manifest)
        outcomes = [_train_one(m, d, dataset) for m, d in plan]

    for run_dir, test_acc, train_acc in outcomes:
        sys.stdout.write(f"{run_dir}\ttest_accuracy={test_acc:.4f}\ttrain_accuracy={train_acc:.4f}\n")
    if len(outcomes) > 1:
        mean, std = aggregate([o[1] for o in outcomes])
        line = f"test_accuracy over {len(outcomes)} seeds = {mean:.2f} +/- {std:.2f}\n"
        sys.stdout.write(line)
        root = os.path.join(manifest.output_dir, manifest.name)
        with open(os.path.join(root, "aggregate.txt"), "w", encoding="utf-8") as fh:
            fh.write(f"runs = {len(outcomes)}\n")
            fh.write(f"test_accuracy_mean_percent = {mean!r}\n")
            fh.write(f"test_accuracy_std_percent = {std!r}\n")
            for run_dir, test_acc, _ in outcomes:
                fh.write(f"run.{os.path.basename(run_dir)} = {test_acc!r}\n")
    return 0


def _load_run(run_dir):
    manifest_path = os.path.join(run_dir, "manifest.txt")
    checkpoint = os.path.join(run_dir, "checkpoint.json")
    for p in (manifest_path, checkpoint):
        if not os.path.isfile(p):
            raise DataFileError(p)
    manifest = load_manifest(manifest_path).validate()
    model, _ = load_checkpoint(checkpoint)
    prep = prepare(manifest)
    return manifest, model, prep


def cmd_eval(args) -> int:
    _, model, prep = _load_run(args.run)
    _, node_preds, _ = predict(prep, model)
    metrics = backmap.evaluate(node_preds, prep.hypergraph.labels, prep.train_nodes, prep.test_nodes)
    text = metrics.to_text()
    sys.stdout.write(text)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    return 0


def cmd_export_embeddings(args) -> int:
    _, model, prep = _load_run(args.run)
    _, _, emb = predict(prep, model)
    out = args.out or os.path.join(args.run, "embeddings.tsv")
    backmap.write_embeddings(prep.hypergraph, emb, out)
    sys.stdout.write(f"wrote {emb.shape[0]} x {emb.shape[1]} embeddings to {out}\n")
    return 0


def cmd_bench(args) -> int:
    sizes = [int(s) for s in args.sizes.split(",") if s.strip()] if args.sizes is not None else (
        bench.doubling_sizes(args.base_m, args.doublings)
    )
    rows, ratios = bench.scaling_benchmark(sizes, args.edge_size, args.node_degree, args.repeats, args.seed)
    sys.stdout.write(bench.format_table(rows, ratios))
    if ratios:
        ok = bench.ratios_within_bounds(ratios)
        lo, hi = bench.RATIO_BOUNDS
        sys.stdout.write(f"scaling_ratio_test = {'PASS' if ok else 'FAIL'} (bounds [{lo}, {hi}])\n")

    if args.manifest:
        manifest = _manifest(args).validate()
        result = run_pipeline(manifest)
        sys.stdout.write("stage\tseconds\n")
        total = 0.0
        for stage, seconds in result.report.timings.items():
            total += seconds
            sys.stdout.write(f"{stage}\t{seconds:.3f}\n")
        sys.stdout.write(f"total\t{total:.3f}\n")
        sys.stdout.write(f"test_accuracy\t{result.metrics.test_accuracy:.4f}\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lhcn", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("transform", help="build and export the weighted line graph")
    p.add_argument("manifest", nargs="?")
    p.add_argument("--out", help="output directory (default OUTPUT_DIR/NAME/transform)")
    _add_manifest_flags(p)
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("train", help="run the full pipeline and write run directories")
    p.add_argument("manifest", nargs="?")
    p.add_argument("--seeds", type=int, default=1, help="number of seeded runs (seed offsets 0..N-1)")
    p.add_argument("--jobs", type=int, default=1, help="parallel processes for --seeds")
    _add_manifest_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="recompute metrics from a run directory")
    p.add_argument("run")
    p.add_argument("--out")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("export-embeddings", help="write hypernode embeddings from a run directory")
    p.add_argument("run")
    p.add_argument("--out")
    p.set_defaults(func=cmd_export_embeddings)

    p = sub.add_parser("bench", help="time the transform on doubling synthetic sizes")
    p.add_argument("manifest", nargs="?", help="optional dataset manifest for per-stage timings")
    p.add_argument("--base-m", type=int, default=20000)
    p.add_argument("--doublings", type=int, default=1)
    p.add_argument("--sizes", help="comma-separated hyperedge counts (overrides --base-m)")
    p.add_argument("--edge-size", type=int, default=3)
    p.add_argument("--node-degree", type=int, default=3)
    p.add_argument("--repeats", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    _add_manifest_flags(p)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except LhcnError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return DataFileError.exit_code


if __name__ == "__main__":
    sys.exit(main())
