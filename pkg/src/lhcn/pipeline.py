"""End-to-end runs: ingest, split, transform, train, back-map, evaluate, write."""

from __future__ import annotations

import logging
import os
import shutil
import tempfile
import time
from dataclasses import dataclass

import numpy as np

from lhcn import backmap
from lhcn.citation import IngestReport, load_citation_dataset, load_incidence_dataset, train_test_split
from lhcn.gcn import GcnModel, RunReport, infer, save_checkpoint, train
from lhcn.hypergraph import Hypergraph
from lhcn.linegraph import LineGraph, line_graph, normalize_adjacency, write_edge_list
from lhcn.manifest import RunManifest, write_manifest

log = logging.getLogger(__name__)


@dataclass
class Prepared:
    hypergraph: Hypergraph
    ingest: IngestReport
    train_nodes: np.ndarray
    test_nodes: np.ndarray
    line_graph: LineGraph
    anorm: object
    timings: dict


@dataclass
class RunResult:
    prepared: Prepared
    model: GcnModel
    report: RunReport
    line_preds: np.ndarray
    node_preds: np.ndarray
    embeddings: np.ndarray
    metrics: backmap.Metrics


def load_dataset(manifest: RunManifest):
    if manifest.incidence:
        return load_incidence_dataset(
            manifest.content, manifest.incidence, manifest.dedup, manifest.singleton_completion
        )
    return load_citation_dataset(
        manifest.content,
        manifest.cites,
        manifest.cites_order,
        manifest.dedup,
        manifest.singleton_completion,
    )


def prepare(manifest: RunManifest, dataset=None) -> Prepared:
    """Everything up to (not including) training.

    ``dataset`` may pass an already loaded ``(hypergraph, report)`` pair so
    multi-seed runs parse the files once.
    """
    timings = {}
    t = time.perf_counter()
    h, ingest = dataset if dataset is not None else load_dataset(manifest)
    timings["ingest"] = time.perf_counter() - t

    train_nodes, test_nodes = train_test_split(h.labels, manifest.split_spec())
    # only training labels ever reach the line graph
    train_labels = h.labels.restrict(train_nodes)

    t = time.perf_counter()
    lg = line_graph(h, train_labels)
    anorm = normalize_adjacency(lg.adjacency)
    timings["transform"] = time.perf_counter() - t
    return Prepared(h, ingest, train_nodes, test_nodes, lg, anorm, timings)


def predict(prep: Prepared, model: GcnModel):
    cache = infer(model, prep.anorm, prep.line_graph.features)
    line_preds = backmap.predict_line_labels(cache.probs)
    h = prep.hypergraph
    node_preds = backmap.backmap_labels(h, line_preds, h.labels.n_classes)
    emb = backmap.backmap_embeddings(h, cache.h.astype(np.float64))
    return line_preds, node_preds, emb


def run_pipeline(manifest: RunManifest, dataset=None) -> RunResult:
    manifest.validate(check_files=dataset is None)
    prep = prepare(manifest, dataset)
    cfg = manifest.train_config()
    h = prep.hypergraph
    model, report = train(prep.line_graph, cfg, h.labels.n_classes, prep.anorm)

    t = time.perf_counter()
    line_preds, node_preds, emb = predict(prep, model)
    metrics = backmap.evaluate(node_preds, h.labels, prep.train_nodes, prep.test_nodes)
    prep.timings["train"] = report.timings["train"]
    prep.timings["backmap"] = time.perf_counter() - t
    report.timings = dict(prep.timings)
    report.train_accuracy = metrics.train_accuracy
    report.test_accuracy = metrics.test_accuracy
    return RunResult(prep, model, report, line_preds, node_preds, emb, metrics)


class atomic_dir:
    """Build a directory under a temporary name and rename it into place on success."""

    def __init__(self, target):
        self.target = os.path.abspath(target)

    def __enter__(self):
        parent = os.path.dirname(self.target)
        os.makedirs(parent, exist_ok=True)
        self.tmp = tempfile.mkdtemp(prefix=".tmp-", dir=parent)
        return self.tmp

    def __exit__(self, exc_type, exc, tb):
        if exc_type is not None:
            shutil.rmtree(self.tmp, ignore_errors=True)
            return False
        if os.path.exists(self.target):
            shutil.rmtree(self.target)
        os.replace(self.tmp, self.target)
        return False


def _write(path, text):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def write_run(result: RunResult, manifest: RunManifest, run_dir) -> str:
    prep = result.prepared
    h = prep.hypergraph
    with atomic_dir(run_dir) as tmp:
        write_manifest(manifest, os.path.join(tmp, "manifest.txt"))
        _write(os.path.join(tmp, "ingest_report.txt"), prep.ingest.to_text())
        save_checkpoint(result.model, manifest.train_config(), os.path.join(tmp, "checkpoint.json"))
        _write(os.path.join(tmp, "history.csv"), result.report.history_csv())
        _write(os.path.join(tmp, "metrics.txt"), result.metrics.to_text())
        backmap.write_predictions(
            h, result.node_preds, os.path.join(tmp, "predictions.tsv"), prep.train_nodes, prep.test_nodes
        )
        backmap.write_embeddings(h, result.embeddings, os.path.join(tmp, "embeddings.tsv"))
        _write(
            os.path.join(tmp, "timing.txt"),
            "".join(f"{k} = {v:.6f}\n" for k, v in result.report.timings.items()),
        )
    return os.path.abspath(run_dir)


def write_transform(prep: Prepared, manifest: RunManifest, out_dir) -> str:
    lg = prep.line_graph
    with atomic_dir(out_dir) as tmp:
        write_manifest(manifest, os.path.join(tmp, "manifest.txt"))
        _write(os.path.join(tmp, "ingest_report.txt"), prep.ingest.to_text())
        write_edge_list(lg, os.path.join(tmp, "line_graph.edges"))
        with open(os.path.join(tmp, "line_features.tsv"), "w", encoding="utf-8") as fh:
            for row in lg.features.tolist():
                fh.write("\t".join(f"{x:.17g}" for x in row) + "\n")
        classes = prep.hypergraph.labels.classes
        with open(os.path.join(tmp, "line_labels.tsv"), "w", encoding="utf-8") as fh:
            fh.write("line_node\tclass\n")
            for p, c in enumerate(lg.labels.tolist()):
                fh.write(f"{p}\t{classes[c] if c >= 0 else 'NA'}\n")
    return os.path.abspath(out_dir)


def aggregate(accuracies) -> tuple[float, float]:
    """Mean and sample standard deviation, in percent."""
    a = 100.0 * np.asarray(accuracies, dtype=np.float64)
    return float(a.mean()), float(a.std(ddof=1)) if len(a) > 1 else 0.0
