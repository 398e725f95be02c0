"""Wall-clock benchmarks, including the transform scaling check."""

from __future__ import annotations

import time
from dataclasses import dataclass

from lhcn.errors import ValidationError
from lhcn.linegraph import build_line_graph, normalize_adjacency
from lhcn.synthetic import bounded_degree_hypergraph

RATIO_BOUNDS = (1.5, 3.0)


@dataclass
class ScalingRow:
    m: int
    n: int
    line_edges: int
    seconds: float


def time_transform(h, repeats: int = 3) -> tuple[float, int]:
    """Best-of-``repeats`` time for line-graph construction plus normalization."""
    best = float("inf")
    nnz = 0
    for _ in range(repeats):
        t = time.perf_counter()
        lg = build_line_graph(h)
        normalize_adjacency(lg.adjacency)
        best = min(best, time.perf_counter() - t)
        nnz = lg.adjacency.nnz // 2
    return best, nnz


def scaling_benchmark(sizes, edge_size=3, node_degree=3, repeats=3, seed=0):
    """Time the transform on bounded-degree hypergraphs of the given sizes.

    Returns the rows and the successive time ratios ``t[i+1] / t[i]``.
    """
    sizes = list(sizes)
    if not sizes:
        raise ValidationError("scaling benchmark needs at least one size")
    rows = []
    for m in sizes:
        h = bounded_degree_hypergraph(m, edge_size, node_degree, seed)
        seconds, nnz = time_transform(h, repeats)
        rows.append(ScalingRow(h.m, h.n, nnz, seconds))
    ratios = [b.seconds / a.seconds for a, b in zip(rows, rows[1:])]
    return rows, ratios


def doubling_sizes(base_m: int, doublings: int):
    return [base_m * 2**i for i in range(doublings + 1)]


def ratios_within_bounds(ratios, bounds=RATIO_BOUNDS) -> bool:
    lo, hi = bounds
    return bool(ratios) and all(lo <= r <= hi for r in ratios)


def format_table(rows, ratios) -> str:
    out = ["m\tn\tline_edges\tseconds\tratio"]
    for i, r in enumerate(rows):
        ratio = f"{ratios[i - 1]:.3f}" if i else "-"
        out.append(f"{r.m}\t{r.n}\t{r.line_edges}\t{r.seconds:.6f}\t{ratio}")
    return "\n".join(out) + "\n"
