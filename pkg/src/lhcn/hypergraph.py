"""Attributed, partially labelled hypergraphs and their incidence structure."""

from __future__ import annotations

from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from lhcn.errors import ValidationError


@dataclass(frozen=True)
class LabelAssignment:
    """Partial map from node index to class index.

    ``classes`` is the label alphabet; ``assigned`` maps node index to a
    position in ``classes``.
    """

    classes: tuple[str, ...]
    assigned: Mapping[int, int] = field(default_factory=dict)

    def __post_init__(self):
        k = len(self.classes)
        for node, c in self.assigned.items():
            if not 0 <= c < k:
                raise ValidationError(f"node {node}: class index {c} outside [0, {k})")

    @property
    def n_classes(self) -> int:
        return len(self.classes)

    def __len__(self):
        return len(self.assigned)

    def nodes(self) -> np.ndarray:
        return np.array(sorted(self.assigned), dtype=np.int64)

    def restrict(self, nodes: Iterable[int]) -> LabelAssignment:
        """Labels for ``nodes`` only (e.g. the training split)."""
        keep = {int(v): self.assigned[int(v)] for v in nodes if int(v) in self.assigned}
        return LabelAssignment(self.classes, keep)

    def as_array(self, n: int) -> np.ndarray:
        """Dense length-``n`` array with -1 for unlabelled nodes."""
        out = np.full(n, -1, dtype=np.int64)
        for v, c in self.assigned.items():
            out[v] = c
        return out


@dataclass(frozen=True)
class Hypergraph:
    n: int
    hyperedges: tuple[np.ndarray, ...]
    node_ids: tuple[str, ...]
    features: np.ndarray | None = None
    labels: LabelAssignment | None = None
    duplicates_removed: int = 0

    @property
    def m(self) -> int:
        return len(self.hyperedges)

    @property
    def d(self) -> int:
        return 0 if self.features is None else self.features.shape[1]

    def edge_sizes(self) -> np.ndarray:
        return np.fromiter((len(e) for e in self.hyperedges), dtype=np.int64, count=self.m)

    def node_degrees(self) -> np.ndarray:
        """Number of hyperedges containing each node."""
        deg = np.zeros(self.n, dtype=np.int64)
        for e in self.hyperedges:
            deg[e] += 1
        return deg

    def index_of(self, node_id: str) -> int:
        return self.node_ids.index(node_id)


def build_hypergraph(
    node_ids: Sequence[str],
    hyperedges: Iterable[Iterable[str]],
    features=None,
    labels: Mapping[str, str] | None = None,
    classes: Sequence[str] | None = None,
    dedup: bool = True,
) -> Hypergraph:
    """Validate raw inputs and index them.

    Node indices follow the order of ``node_ids``; hyperedges keep their input
    order, minus later exact duplicates when ``dedup`` is on. ``labels`` maps
    node id to class name; ``classes`` fixes the alphabet order (defaults to
    the sorted distinct class names).
    """
    node_ids = tuple(str(v) for v in node_ids)
    index = {}
    for i, v in enumerate(node_ids):
        if v in index:
            raise ValidationError(f"duplicate node id {v!r}")
        index[v] = i
    n = len(node_ids)

    edges = []
    seen = set()
    removed = 0
    for j, members in enumerate(hyperedges):
        idx = set()
        for v in members:
            try:
                idx.add(index[str(v)])
            except KeyError:
                raise ValidationError(f"hyperedge {j}: unknown node id {v!r}") from None
        if not idx:
            raise ValidationError(f"hyperedge {j} is empty")
        arr = np.array(sorted(idx), dtype=np.int64)
        if dedup:
            key = arr.tobytes()
            if key in seen:
                removed += 1
                continue
            seen.add(key)
        arr.setflags(write=False)
        edges.append(arr)

    if features is not None:
        features = np.asarray(features, dtype=np.float64)
        if features.ndim != 2 or features.shape[0] != n:
            raise ValidationError(
                f"feature matrix has {features.shape[0] if features.ndim else 0} rows, expected {n}"
            )
        if not np.all(np.isfinite(features)):
            bad = int(np.argwhere(~np.isfinite(features))[0, 0])
            raise ValidationError(f"non-finite feature value for node {node_ids[bad]!r}")
        features.setflags(write=False)

    assignment = None
    if labels is not None:
        if classes is None:
            classes = sorted(set(labels.values()))
        class_index = {c: k for k, c in enumerate(classes)}
        assigned = {}
        for v, c in labels.items():
            if v not in index:
                raise ValidationError(f"label for unknown node id {v!r}")
            if c not in class_index:
                raise ValidationError(f"node {v!r}: class {c!r} not in label alphabet")
            assigned[index[v]] = class_index[c]
        assignment = LabelAssignment(tuple(classes), assigned)

    return Hypergraph(
        n=n,
        hyperedges=tuple(edges),
        node_ids=node_ids,
        features=features,
        labels=assignment,
        duplicates_removed=removed,
    )


def incidence(h: Hypergraph) -> sp.csc_matrix:
    """Binary n x m incidence matrix; column j lists the members of hyperedge j."""
    sizes = h.edge_sizes()
    indptr = np.zeros(h.m + 1, dtype=np.int64)
    np.cumsum(sizes, out=indptr[1:])
    indices = np.concatenate(h.hyperedges) if h.m else np.zeros(0, dtype=np.int64)
    data = np.ones(len(indices), dtype=np.int32)
    return sp.csc_matrix((data, indices, indptr), shape=(h.n, h.m))


def edges_from_incidence(mat) -> list[np.ndarray]:
    mat = sp.csc_matrix(mat)
    mat.sort_indices()
    return [mat.indices[mat.indptr[j]:mat.indptr[j + 1]].copy() for j in range(mat.shape[1])]
