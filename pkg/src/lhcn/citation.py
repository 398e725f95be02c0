"""Citation-network ingestion and deterministic train/test splitting.

File formats
------------
``.content``: ``<paper_id>\\t<f_1>\\t...\\t<f_d>\\t<class_label>`` per line.
``.cites``: ``<cited_id>\\t<citing_id>`` per line (column order switchable).
Incidence lists: ``<edge_id>: <node_id> <node_id> ...`` per line.

Splits shuffle with numpy's PCG64 bit generator seeded by the split seed;
PCG64 output is platform independent, so a (labels, seed, fraction) triple
yields the same split everywhere.
"""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass, field

import numpy as np

from lhcn.errors import DataFileError, ParseError, ValidationError
from lhcn.hypergraph import Hypergraph, LabelAssignment, build_hypergraph

log = logging.getLogger(__name__)

CITED_FIRST = "cited-first"
CITING_FIRST = "citing-first"


@dataclass(frozen=True)
class CitationRecord:
    paper_id: str
    features: np.ndarray
    label: str


@dataclass(frozen=True)
class CitationPair:
    cited_id: str
    citing_id: str


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.8
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise ValidationError(f"train_fraction must lie in (0, 1), got {self.train_fraction}")
        if not 0 <= int(self.seed) < 2**64:
            raise ValidationError(f"split seed must be a 64-bit unsigned integer, got {self.seed}")


@dataclass
class IngestReport:
    nodes: int = 0
    features: int = 0
    classes: int = 0
    citation_pairs: int = 0
    dropped_pairs: int = 0
    citing_papers: int = 0
    hyperedges: int = 0
    duplicates_removed: int = 0
    singleton_completions: int = 0
    uncovered_nodes: int = 0
    extra: dict = field(default_factory=dict)

    def to_text(self) -> str:
        rows = {k: v for k, v in vars(self).items() if k != "extra"}
        rows.update(self.extra)
        return "".join(f"{k} = {v}\n" for k, v in rows.items())


def _open(path):
    if not os.path.isfile(path):
        raise DataFileError(path)
    return open(path, encoding="utf-8")


def parse_content(path) -> list[CitationRecord]:
    records = []
    seen = set()
    width = None
    with _open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\r\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) < 2:
                raise ParseError("expected id, features and label", path, lineno)
            if width is None:
                width = len(parts)
            elif len(parts) != width:
                raise ParseError(
                    f"ragged line: {len(parts)} fields, expected {width}", path, lineno
                )
            pid = parts[0]
            if pid in seen:
                raise ParseError(f"duplicate paper id {pid!r}", path, lineno)
            seen.add(pid)
            try:
                x = np.array(parts[1:-1], dtype=np.float64)
            except ValueError:
                raise ParseError("non-numeric feature token", path, lineno) from None
            records.append(CitationRecord(pid, x, parts[-1]))
    return records


def parse_cites(path, known_ids=None, order: str = CITED_FIRST):
    """Read citation pairs; returns ``(pairs, dropped_count)``.

    Pairs naming an id outside ``known_ids`` (when given) are dropped.
    """
    if order not in (CITED_FIRST, CITING_FIRST):
        raise ValidationError(f"unknown cites order {order!r}")
    pairs = []
    dropped = 0
    with _open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ParseError(f"ragged line: {len(parts)} fields, expected 2", path, lineno)
            a, b = parts
            pair = CitationPair(a, b) if order == CITED_FIRST else CitationPair(b, a)
            if known_ids is not None and (
                pair.cited_id not in known_ids or pair.citing_id not in known_ids
            ):
                dropped += 1
                continue
            pairs.append(pair)
    return pairs, dropped


def parse_incidence_list(path) -> list[tuple[str, list[str]]]:
    edges = []
    with _open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            name, sep, rest = line.partition(":")
            if not sep:
                raise ParseError("expected '<edge_id>: <node_id> ...'", path, lineno)
            members = rest.split()
            if not members:
                raise ParseError(f"hyperedge {name.strip()!r} has no members", path, lineno)
            edges.append((name.strip(), members))
    return edges


def _records_to_arrays(records):
    if not records:
        raise ValidationError("no records: content file is empty")
    d = len(records[0].features)
    ids = [r.paper_id for r in records]
    X = np.empty((len(records), d), dtype=np.float64)
    for i, r in enumerate(records):
        if len(r.features) != d:
            raise ValidationError(f"paper {r.paper_id!r}: {len(r.features)} features, expected {d}")
        X[i] = r.features
    labels = {r.paper_id: r.label for r in records}
    return ids, X, labels


def complete_singletons(ids, edges):
    """Append ``[v]`` for every id not covered by ``edges``; returns the count."""
    covered = set()
    for e in edges:
        covered.update(e)
    added = 0
    for v in ids:
        if v not in covered:
            edges.append([v])
            added += 1
    return added


def build_citation_hypergraph(
    records,
    pairs,
    dedup: bool = True,
    singleton_completion: bool = True,
    report: IngestReport | None = None,
) -> Hypergraph:
    """One hyperedge per citing paper: the paper together with everything it cites.

    Hyperedges follow the record order of their citing paper; singleton
    hyperedges for uncovered papers come after, also in record order.
    """
    ids, X, labels = _records_to_arrays(records)
    cites = {}
    for p in pairs:
        cites.setdefault(p.citing_id, []).append(p.cited_id)
    edges = [[pid, *cites[pid]] for pid in ids if pid in cites]
    n_citing = len(edges)
    added = complete_singletons(ids, edges) if singleton_completion else 0

    h = build_hypergraph(ids, edges, X, labels, dedup=dedup)
    if report is not None:
        report.nodes = h.n
        report.features = h.d
        report.classes = h.labels.n_classes
        report.citing_papers = n_citing
        report.singleton_completions = added
        report.hyperedges = h.m
        report.duplicates_removed = h.duplicates_removed
        report.uncovered_nodes = int(np.sum(h.node_degrees() == 0))
    return h


def load_citation_dataset(
    content_path,
    cites_path,
    order: str = CITED_FIRST,
    dedup: bool = True,
    singleton_completion: bool = True,
):
    """Parse both files and build the hypergraph; returns ``(hypergraph, report)``."""
    records = parse_content(content_path)
    known = {r.paper_id for r in records}
    pairs, dropped = parse_cites(cites_path, known, order)
    report = IngestReport(citation_pairs=len(pairs), dropped_pairs=dropped)
    h = build_citation_hypergraph(records, pairs, dedup, singleton_completion, report)
    if dropped:
        log.info("dropped %d citation pairs referencing unknown papers", dropped)
    return h, report


def load_incidence_dataset(content_path, incidence_path, dedup=True, singleton_completion=True):
    """Node attributes from a ``.content`` file, hyperedges from an incidence list."""
    records = parse_content(content_path)
    ids, X, labels = _records_to_arrays(records)
    edges = [members for _, members in parse_incidence_list(incidence_path)]
    n_listed = len(edges)
    added = complete_singletons(ids, edges) if singleton_completion else 0
    h = build_hypergraph(ids, edges, X, labels, dedup=dedup)
    report = IngestReport(
        nodes=h.n,
        features=h.d,
        classes=h.labels.n_classes,
        hyperedges=h.m,
        duplicates_removed=h.duplicates_removed,
        singleton_completions=added,
        uncovered_nodes=int(np.sum(h.node_degrees() == 0)),
        extra={"listed_hyperedges": n_listed},
    )
    return h, report


def train_size(count: int, fraction: float) -> int:
    """``round(fraction * count)`` with halves rounded up."""
    return int(np.floor(fraction * count + 0.5))


def train_test_split(labels: LabelAssignment, spec: SplitSpec):
    """Split the labelled nodes into disjoint train/test index arrays (both sorted)."""
    nodes = labels.nodes()
    if len(nodes) < 2:
        raise ValidationError(f"need at least 2 labelled nodes to split, got {len(nodes)}")
    rng = np.random.Generator(np.random.PCG64(int(spec.seed)))
    order = rng.permutation(len(nodes))
    k = min(max(train_size(len(nodes), spec.train_fraction), 1), len(nodes) - 1)
    train = np.sort(nodes[order[:k]])
    test = np.sort(nodes[order[k:]])
    return train, test
