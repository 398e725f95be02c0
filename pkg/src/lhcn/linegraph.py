"""Weighted, attributed line graph of a hypergraph.

Line node ``p`` stands for hyperedge ``p``. Two line nodes are joined when
their hyperedges overlap, with Jaccard weight ``|e_p & e_q| / |e_p | e_q|``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from lhcn.hypergraph import Hypergraph, LabelAssignment, incidence


@dataclass(frozen=True)
class LineGraph:
    adjacency: sp.csr_matrix
    features: np.ndarray | None = None
    labels: np.ndarray | None = None

    @property
    def m(self) -> int:
        return self.adjacency.shape[0]

    def n_labelled(self) -> int:
        return 0 if self.labels is None else int(np.sum(self.labels >= 0))

    def edge_list(self):
        """``(p, q, w)`` triples with ``p < q``, sorted by ``(p, q)``."""
        upper = sp.triu(self.adjacency, k=1).tocoo()
        order = np.lexsort((upper.col, upper.row))
        return upper.row[order], upper.col[order], upper.data[order]


def majority(votes, n_classes: int) -> int:
    """Most frequent class in ``votes``; ties go to the smallest class index."""
    return int(np.argmax(np.bincount(votes, minlength=n_classes)))


def overlap_counts(h: Hypergraph):
    """Intersection sizes for every overlapping hyperedge pair.

    Walks the node -> incident-hyperedges index, so the cost is
    ``O(m + n s^2)`` for ``s`` the largest node degree. Returns arrays
    ``(p, q, count)`` with ``p < q``, sorted by ``(p, q)``.
    """
    H = incidence(h).tocsr()
    H.sort_indices()
    indices = H.indices.astype(np.int64)
    chunks = []
    pair_index = {}
    for v in range(h.n):
        inc = indices[H.indptr[v]:H.indptr[v + 1]]
        s = len(inc)
        if s < 2:
            continue
        if s not in pair_index:
            pair_index[s] = np.triu_indices(s, 1)
        i, j = pair_index[s]
        chunks.append(inc[i] * h.m + inc[j])
    if not chunks:
        empty = np.zeros(0, dtype=np.int64)
        return empty, empty, empty
    keys, counts = np.unique(np.concatenate(chunks), return_counts=True)
    return keys // h.m, keys % h.m, counts


def build_line_graph(h: Hypergraph) -> LineGraph:
    p, q, inter = overlap_counts(h)
    sizes = h.edge_sizes()
    union = sizes[p] + sizes[q] - inter
    w = inter / union
    rows = np.concatenate([p, q])
    cols = np.concatenate([q, p])
    A = sp.csr_matrix((np.concatenate([w, w]), (rows, cols)), shape=(h.m, h.m))
    A.sort_indices()
    return LineGraph(A)


def derive_line_attributes(h: Hypergraph, X=None) -> np.ndarray:
    """Row ``p`` is the mean feature vector of the members of hyperedge ``p``."""
    X = h.features if X is None else np.asarray(X, dtype=np.float64)
    out = np.empty((h.m, X.shape[1]), dtype=np.float64)
    for p, e in enumerate(h.hyperedges):
        out[p] = X[e].sum(axis=0) / len(e)
    return out


def transfer_labels(h: Hypergraph, train_labels: LabelAssignment) -> np.ndarray:
    """Majority training label per hyperedge, -1 where no member is labelled.

    ``train_labels`` must already be restricted to training nodes.
    """
    node_label = train_labels.as_array(h.n)
    out = np.full(h.m, -1, dtype=np.int64)
    for p, e in enumerate(h.hyperedges):
        votes = node_label[e]
        votes = votes[votes >= 0]
        if len(votes):
            out[p] = majority(votes, train_labels.n_classes)
    return out


def normalize_adjacency(A) -> sp.csr_matrix:
    """``D^-1/2 (A + I) D^-1/2`` with ``D`` the row sums of ``A + I``."""
    A = sp.csr_matrix(A, dtype=np.float64)
    A_hat = A + sp.identity(A.shape[0], dtype=np.float64, format="csr")
    deg = np.asarray(A_hat.sum(axis=1)).ravel()
    scale = 1.0 / np.sqrt(deg)
    coo = A_hat.tocoo()
    # a_pq * (s_p * s_q) keeps the result exactly symmetric
    data = coo.data * (scale[coo.row] * scale[coo.col])
    out = sp.csr_matrix((data, (coo.row, coo.col)), shape=A_hat.shape)
    out.sort_indices()
    return out


def self_loop_degrees(A) -> np.ndarray:
    return np.asarray(A.sum(axis=1)).ravel() + 1.0


def line_graph(h: Hypergraph, train_labels: LabelAssignment | None = None) -> LineGraph:
    """Adjacency, derived attributes and (optionally) transferred labels in one go."""
    lg = build_line_graph(h)
    feats = derive_line_attributes(h) if h.features is not None else None
    labels = transfer_labels(h, train_labels) if train_labels is not None else None
    return LineGraph(lg.adjacency, feats, labels)


def write_edge_list(lg: LineGraph, path) -> None:
    p, q, w = lg.edge_list()
    with open(path, "w", encoding="utf-8") as fh:
        for a, b, x in zip(p.tolist(), q.tolist(), w.tolist()):
            fh.write(f"{a} {b} {x:.17g}\n")


def read_edge_list(path, m: int) -> sp.csr_matrix:
    data = np.loadtxt(path, ndmin=2) if m else np.zeros((0, 3))
    if data.size == 0:
        return sp.csr_matrix((m, m))
    p = data[:, 0].astype(np.int64)
    q = data[:, 1].astype(np.int64)
    w = data[:, 2]
    A = sp.csr_matrix(
        (np.concatenate([w, w]), (np.concatenate([p, q]), np.concatenate([q, p]))), shape=(m, m)
    )
    A.sort_indices()
    return A
