import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from lhcn.hypergraph import build_hypergraph  # noqa: E402
from lhcn.synthetic import citation_network, write_citation_files  # noqa: E402

REPO = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
DATA_DIR = os.environ.get("LHCN_DATA_DIR", os.path.join(REPO, "data"))

ACCEPTANCE_LINES = []

# Nodes A..G, e1={A,B,C}, e2={C,D}, e3={C,E,F,G}, e4={F,G}
FIXTURE_NODES = list("ABCDEFG")
FIXTURE_EDGES = [["A", "B", "C"], ["C", "D"], ["C", "E", "F", "G"], ["F", "G"]]


@pytest.fixture
def worked_hypergraph():
    X = np.arange(7 * 3, dtype=float).reshape(7, 3)
    return build_hypergraph(
        FIXTURE_NODES, FIXTURE_EDGES, X, {"E": "1", "F": "1", "G": "2"}, classes=["1", "2"]
    )


@pytest.fixture(scope="session")
def synthetic_files(tmp_path_factory):
    """A small planted-class citation dataset on disk."""
    d = tmp_path_factory.mktemp("synthetic")
    records, pairs = citation_network(n_classes=4, per_class=50, n_words=40, seed=3)
    content, cites = write_citation_files(records, pairs, d, "syn")
    return content, cites


def record_acceptance(name, ok, detail):
    ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
