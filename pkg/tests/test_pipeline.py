import dataclasses
import os

import numpy as np
import pytest

from lhcn.backmap import UNPREDICTED
from lhcn.errors import DataFileError, ParseError, ValidationError
from lhcn.hypergraph import LabelAssignment
from lhcn.manifest import RunManifest, load_manifest, parse_manifest_text, write_manifest
from lhcn.pipeline import aggregate, atomic_dir, load_dataset, prepare, run_pipeline, write_run


@pytest.fixture
def manifest(synthetic_files, tmp_path):
    content, cites = synthetic_files
    return RunManifest(content=content, cites=cites, epochs=60, output_dir=str(tmp_path), name="t")


def permuted_test_labels(h, test_nodes, seed):
    """Same hypergraph with the test-node labels shuffled among themselves."""
    rng = np.random.default_rng(seed)
    assigned = dict(h.labels.assigned)
    test = [int(v) for v in test_nodes]
    shuffled = rng.permutation([assigned[v] for v in test])
    shuffled = (shuffled + 1) % h.labels.n_classes
    for v, c in zip(test, shuffled):
        assigned[v] = int(c)
    return dataclasses.replace(h, labels=LabelAssignment(h.labels.classes, assigned))


class TestManifest:
    def test_defaults(self):
        m = RunManifest()
        assert (m.hidden1, m.hidden2, m.epochs, m.lr) == (32, 16, 200, 0.01)
        assert (m.train_fraction, m.lr_halving_period, m.leaky_slope) == (0.8, 100, 0.01)

    def test_parse_text(self):
        values = parse_manifest_text("# c\nepochs = 5  # trailing\ndedup = no\nlr=0.5\n")
        assert values == {"epochs": 5, "dedup": False, "lr": 0.5}

    def test_unknown_key(self):
        with pytest.raises(ParseError, match=":1"):
            parse_manifest_text("bogus = 1\n")

    def test_bad_value(self):
        with pytest.raises(ParseError, match="epochs"):
            parse_manifest_text("epochs = many\n")

    def test_missing_equals(self):
        with pytest.raises(ParseError):
            parse_manifest_text("epochs 5\n")

    def test_relative_paths_and_overrides(self, tmp_path):
        path = tmp_path / "run.manifest"
        path.write_text("content = data/x.content\ncites = data/x.cites\nepochs = 5\n")
        m = load_manifest(path, {"epochs": 7})
        assert m.content == str(tmp_path / "data" / "x.content")
        assert m.epochs == 7

    def test_round_trip(self, manifest, tmp_path):
        path = tmp_path / "m.txt"
        write_manifest(manifest.replace(lr=1 / 3), path)
        assert load_manifest(path) == manifest.replace(lr=1 / 3)

    def test_missing_manifest(self, tmp_path):
        with pytest.raises(DataFileError):
            load_manifest(tmp_path / "none.txt")

    @pytest.mark.parametrize(
        "change",
        [{"epochs": 0}, {"hidden1": 0}, {"lr": -1.0}, {"train_fraction": 1.0}, {"cites_order": "x"}, {"loss": "l2"}],
    )
    def test_validation(self, manifest, change):
        with pytest.raises(ValidationError):
            manifest.replace(**change).validate()

    def test_needs_one_edge_source(self, manifest):
        with pytest.raises(ValidationError, match="exactly one"):
            manifest.replace(incidence=manifest.cites).validate()
        with pytest.raises(ValidationError, match="exactly one"):
            manifest.replace(cites="").validate()

    def test_missing_cites_named(self, manifest, tmp_path):
        missing = str(tmp_path / "gone.cites")
        with pytest.raises(DataFileError, match="gone.cites"):
            manifest.replace(cites=missing).validate()


class TestPrepare:
    def test_only_train_labels_transferred(self, manifest):
        prep = prepare(manifest)
        h = prep.hypergraph
        train = set(prep.train_nodes.tolist())
        for p, e in enumerate(h.hyperedges):
            has_train = any(int(v) in train for v in e)
            assert (prep.line_graph.labels[p] >= 0) == has_train

    def test_split_sizes(self, manifest):
        prep = prepare(manifest)
        assert len(prep.train_nodes) == 160 and len(prep.test_nodes) == 40


class TestRunPipeline:
    def test_well_above_chance(self, manifest):
        result = run_pipeline(manifest.replace(epochs=200))
        # four planted classes: chance is 0.25
        assert result.metrics.test_accuracy >= 0.6
        assert result.metrics.train_accuracy >= result.metrics.test_accuracy - 0.1

    def test_loss_decreases(self, manifest):
        losses = run_pipeline(manifest).report.losses
        assert losses[-1] < 0.5 * losses[0]

    def test_determinism(self, manifest, tmp_path):
        outs = []
        for i in range(2):
            d = tmp_path / f"r{i}"
            write_run(run_pipeline(manifest), manifest, d)
            outs.append(d)
        for name in ("metrics.txt", "predictions.tsv", "history.csv", "embeddings.tsv", "checkpoint.json"):
            assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes(), name

    def test_rerun_from_stored_manifest(self, manifest, tmp_path):
        first = tmp_path / "first"
        write_run(run_pipeline(manifest), manifest, first)
        stored = load_manifest(first / "manifest.txt")
        second = tmp_path / "second"
        write_run(run_pipeline(stored), stored, second)
        assert (first / "predictions.tsv").read_bytes() == (second / "predictions.tsv").read_bytes()

    def test_test_labels_do_not_leak(self, manifest):
        h, report = load_dataset(manifest)
        base = run_pipeline(manifest, (h, report))
        swapped = permuted_test_labels(h, base.prepared.test_nodes, seed=1)
        other = run_pipeline(manifest, (swapped, report))
        assert np.array_equal(base.prepared.test_nodes, other.prepared.test_nodes)
        assert base.report.losses == other.report.losses
        assert np.array_equal(base.node_preds, other.node_preds)

    def test_no_singleton_completion_scores_unpredicted_as_wrong(self, manifest):
        result = run_pipeline(manifest.replace(singleton_completion=False, dedup=True))
        m = result.metrics
        uncovered = np.flatnonzero(result.prepared.hypergraph.node_degrees() == 0)
        assert len(uncovered) > 0
        assert np.all(result.node_preds[uncovered] == UNPREDICTED)
        test_uncovered = np.intersect1d(uncovered, result.prepared.test_nodes)
        assert m.unpredicted == len(uncovered)
        assert m.test_unpredicted == len(test_uncovered)
        assert m.test_correct <= m.test_size - m.test_unpredicted

    def test_incidence_input(self, tmp_path):
        content = tmp_path / "n.content"
        content.write_text("".join(f"v{i}\t{i % 2}\t{1 - i % 2}\t{'AB'[i % 2]}\n" for i in range(20)))
        edges = tmp_path / "e.txt"
        edges.write_text("".join(f"e{k}: " + " ".join(f"v{i}" for i in range(k % 2, 20, 2)[k // 2::3]) + "\n" for k in range(6)))
        m = RunManifest(content=str(content), incidence=str(edges), epochs=50)
        result = run_pipeline(m)
        assert result.metrics.test_accuracy == 1.0

    def test_dedup_off_keeps_duplicates(self, manifest):
        on = prepare(manifest)
        off = prepare(manifest.replace(dedup=False))
        assert off.hypergraph.m == on.hypergraph.m + on.hypergraph.duplicates_removed


class TestWriteRun:
    def test_files(self, manifest, tmp_path):
        d = tmp_path / "run"
        write_run(run_pipeline(manifest), manifest, d)
        expected = {
            "manifest.txt", "ingest_report.txt", "checkpoint.json", "history.csv",
            "metrics.txt", "predictions.tsv", "embeddings.tsv", "timing.txt",
        }
        assert set(os.listdir(d)) == expected
        history = (d / "history.csv").read_text().splitlines()
        assert history[0] == "epoch,loss,lr" and len(history) == manifest.epochs + 1
        assert (d / "embeddings.tsv").read_text().splitlines()[0].count("\t") == manifest.hidden2

    def test_atomic_dir_cleans_up_on_error(self, tmp_path):
        target = tmp_path / "out"
        with pytest.raises(RuntimeError):
            with atomic_dir(target) as tmp:
                open(os.path.join(tmp, "x"), "w").close()
                raise RuntimeError
        assert os.listdir(tmp_path) == []


def test_aggregate():
    mean, std = aggregate([0.7, 0.8, 0.9])
    assert mean == pytest.approx(80.0)
    assert std == pytest.approx(10.0)
    assert aggregate([0.5]) == (50.0, 0.0)
