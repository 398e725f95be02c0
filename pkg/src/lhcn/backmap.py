"""Move line-graph predictions and embeddings back onto hypernodes, and score them."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from lhcn.hypergraph import Hypergraph, LabelAssignment, incidence

log = logging.getLogger(__name__)

UNPREDICTED = -1


def predict_line_labels(probs_or_logits) -> np.ndarray:
    """Row-wise argmax; ties resolve to the smallest class index."""
    return np.argmax(probs_or_logits, axis=1).astype(np.int64)


def backmap_labels(h: Hypergraph, line_preds, n_classes: int) -> np.ndarray:
    """Majority vote of the predicted labels of each node's hyperedges.

    Ties go to the smallest class index. Nodes in no hyperedge get
    ``UNPREDICTED``.
    """
    line_preds = np.asarray(line_preds, dtype=np.int64)
    votes = np.zeros((h.n, n_classes), dtype=np.int64)
    for p, e in enumerate(h.hyperedges):
        votes[e, line_preds[p]] += 1
    out = np.argmax(votes, axis=1).astype(np.int64)
    out[votes.sum(axis=1) == 0] = UNPREDICTED
    return out


def backmap_embeddings(h: Hypergraph, H) -> np.ndarray:
    """Mean of the line-node embeddings over each node's hyperedges.

    Accumulates per node in increasing hyperedge order. Uncovered nodes get
    NaN rows.
    """
    H = np.asarray(H)
    inc = incidence(h).tocsr()
    inc.sort_indices()
    nodes = np.repeat(np.arange(h.n), np.diff(inc.indptr))
    out = np.zeros((h.n, H.shape[1]), dtype=H.dtype)
    np.add.at(out, nodes, H[inc.indices])
    deg = np.diff(inc.indptr)
    with np.errstate(invalid="ignore", divide="ignore"):
        out /= deg[:, None]
    return out


@dataclass
class Metrics:
    test_accuracy: float
    train_accuracy: float
    test_size: int
    train_size: int
    test_correct: int
    train_correct: int
    unpredicted: int = 0
    test_unpredicted: int = 0
    per_class: dict = field(default_factory=dict)

    def to_text(self) -> str:
        lines = [
            f"test_accuracy = {self.test_accuracy!r}",
            f"train_accuracy = {self.train_accuracy!r}",
            f"test_size = {self.test_size}",
            f"train_size = {self.train_size}",
            f"test_correct = {self.test_correct}",
            f"train_correct = {self.train_correct}",
            f"unpredicted = {self.unpredicted}",
            f"test_unpredicted = {self.test_unpredicted}",
        ]
        for name, (correct, total) in self.per_class.items():
            lines.append(f"class.{name} = {correct}/{total}")
        return "\n".join(lines) + "\n"


def _score(preds, truth, nodes):
    if len(nodes) == 0:
        return 0, 0.0
    correct = int(np.sum(preds[nodes] == truth[nodes]))
    return correct, correct / len(nodes)


def evaluate(preds, truth: LabelAssignment, train_nodes, test_nodes) -> Metrics:
    """Accuracy over the split; unpredicted nodes count as wrong."""
    preds = np.asarray(preds)
    truth_arr = truth.as_array(len(preds))
    train_nodes = np.asarray(train_nodes, dtype=np.int64)
    test_nodes = np.asarray(test_nodes, dtype=np.int64)
    missing = int(np.sum(preds[test_nodes] == UNPREDICTED))
    if missing:
        log.warning("%d test nodes have no prediction; scored as errors", missing)
    test_correct, test_acc = _score(preds, truth_arr, test_nodes)
    train_correct, train_acc = _score(preds, truth_arr, train_nodes)
    per_class = {}
    for c, name in enumerate(truth.classes):
        members = test_nodes[truth_arr[test_nodes] == c]
        per_class[name] = (int(np.sum(preds[members] == c)), len(members))
    return Metrics(
        test_accuracy=test_acc,
        train_accuracy=train_acc,
        test_size=len(test_nodes),
        train_size=len(train_nodes),
        test_correct=test_correct,
        train_correct=train_correct,
        unpredicted=int(np.sum(preds == UNPREDICTED)),
        test_unpredicted=missing,
        per_class=per_class,
    )


def write_embeddings(h: Hypergraph, emb, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\t".join(["node_id"] + [f"dim_{j}" for j in range(emb.shape[1])]) + "\n")
        for v, row in zip(h.node_ids, np.asarray(emb, dtype=np.float64).tolist()):
            fh.write(v + "\t" + "\t".join(f"{x:.17g}" for x in row) + "\n")


def write_predictions(h: Hypergraph, preds, path, train_nodes=(), test_nodes=()) -> None:
    """TSV ``node_id predicted_class true_class split`` with class names."""
    classes = h.labels.classes if h.labels is not None else ()
    truth = h.labels.as_array(h.n) if h.labels is not None else np.full(h.n, -1)
    split = np.full(h.n, "unlabelled", dtype=object)
    split[np.asarray(train_nodes, dtype=np.int64)] = "train"
    split[np.asarray(test_nodes, dtype=np.int64)] = "test"
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("node_id\tpredicted_class\ttrue_class\tsplit\n")
        for v in range(h.n):
            pred = classes[preds[v]] if preds[v] >= 0 else "NA"
            true = classes[truth[v]] if truth[v] >= 0 else "NA"
            fh.write(f"{h.node_ids[v]}\t{pred}\t{true}\t{split[v]}\n")
