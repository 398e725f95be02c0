"""Synthetic inputs: bounded-degree hypergraphs for timing, and planted-class
citation networks for end-to-end checks when the real datasets are absent."""

from __future__ import annotations

import os

import numpy as np

from lhcn.citation import CitationPair, CitationRecord
from lhcn.hypergraph import Hypergraph, build_hypergraph


def bounded_degree_hypergraph(m: int, edge_size: int = 3, node_degree: int = 3, seed: int = 0) -> Hypergraph:
    """Hypergraph with ``m`` hyperedges where every node lies in at most
    ``node_degree`` of them.

    Node slots (each node repeated ``node_degree`` times) are shuffled and cut
    into hyperedges of ``edge_size``; ``n = m * edge_size / node_degree``.
    Repeated slots inside a hyperedge collapse, so some edges come out smaller.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    n = max(1, (m * edge_size) // node_degree)
    rng = np.random.Generator(np.random.PCG64(seed))
    slots = np.repeat(np.arange(n), node_degree)
    rng.shuffle(slots)
    slots = slots[: m * edge_size].reshape(m, edge_size)
    ids = [str(i) for i in range(n)]
    edges = [[ids[v] for v in row] for row in slots.tolist()]
    return build_hypergraph(ids, edges, dedup=False)


def citation_network(
    n_classes: int = 4,
    per_class: int = 60,
    n_words: int = 40,
    out_degree: float = 2.0,
    homophily: float = 0.85,
    word_signal: float = 0.25,
    cite_fraction: float = 0.6,
    seed: int = 0,
):
    """Planted-partition citation network with bag-of-words features.

    Each class has a block of ``n_words / n_classes`` preferred words that
    its papers use with probability ``word_signal`` (other words at 0.05).
    A ``cite_fraction`` of papers cite ``1 + Poisson(out_degree - 1)`` others,
    chosen from the same class with probability ``homophily``. Returns
    ``(records, pairs)``.
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    n = n_classes * per_class
    y = np.repeat(np.arange(n_classes), per_class)
    rng.shuffle(y)
    block = max(1, n_words // n_classes)
    probs = np.full((n_classes, n_words), 0.05)
    for c in range(n_classes):
        probs[c, c * block:(c + 1) * block] = word_signal
    X = (rng.random((n, n_words)) < probs[y]).astype(np.float64)

    ids = [f"p{i}" for i in range(n)]
    by_class = [np.flatnonzero(y == c) for c in range(n_classes)]
    pairs = []
    for i in range(n):
        if rng.random() >= cite_fraction:
            continue
        k = 1 + rng.poisson(max(out_degree - 1.0, 0.0))
        targets = set()
        for _ in range(k):
            pool = by_class[y[i]] if rng.random() < homophily else np.arange(n)
            j = int(rng.choice(pool))
            if j != i:
                targets.add(j)
        pairs.extend(CitationPair(ids[j], ids[i]) for j in sorted(targets))
    records = [CitationRecord(ids[i], X[i], f"class{y[i]}") for i in range(n)]
    return records, pairs


def write_citation_files(records, pairs, directory, stem: str = "synthetic"):
    """Write ``<stem>.content`` and ``<stem>.cites`` (cited-first); returns both paths."""
    os.makedirs(directory, exist_ok=True)
    content = os.path.join(directory, f"{stem}.content")
    cites = os.path.join(directory, f"{stem}.cites")
    with open(content, "w", encoding="utf-8") as fh:
        for r in records:
            feats = "\t".join(f"{x:g}" for x in r.features)
            fh.write(f"{r.paper_id}\t{feats}\t{r.label}\n")
    with open(cites, "w", encoding="utf-8") as fh:
        for p in pairs:
            fh.write(f"{p.cited_id}\t{p.citing_id}\n")
    return content, cites
