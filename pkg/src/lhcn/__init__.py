"""Hypernode classification through graph convolution on the weighted line graph."""

from lhcn.backmap import backmap_embeddings, backmap_labels, evaluate, predict_line_labels
from lhcn.citation import (
    SplitSpec,
    build_citation_hypergraph,
    load_citation_dataset,
    parse_cites,
    parse_content,
    train_test_split,
)
from lhcn.gcn import (
    GcnModel,
    TrainConfig,
    adam_step,
    backward,
    forward,
    init_params,
    lr_at,
    masked_cross_entropy,
    train,
)
from lhcn.hypergraph import Hypergraph, LabelAssignment, build_hypergraph, incidence
from lhcn.linegraph import (
    LineGraph,
    build_line_graph,
    derive_line_attributes,
    line_graph,
    normalize_adjacency,
    transfer_labels,
)
from lhcn.manifest import RunManifest, load_manifest
from lhcn.pipeline import prepare, run_pipeline, write_run

__version__ = "0.1.0"
