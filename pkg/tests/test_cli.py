import os
import subprocess
import sys

import pytest

from lhcn.cli import main


@pytest.fixture
def manifest_file(synthetic_files, tmp_path):
    content, cites = synthetic_files
    path = tmp_path / "syn.manifest"
    path.write_text(
        f"# synthetic run\ncontent = {content}\ncites = {cites}\nepochs = 40\n"
        f"output_dir = {tmp_path / 'runs'}\nname = syn\n"
    )
    return path


def test_train_eval_export(manifest_file, tmp_path, capsys):
    assert main(["train", str(manifest_file)]) == 0
    run = tmp_path / "runs" / "syn"
    assert (run / "metrics.txt").exists()
    stored = (run / "metrics.txt").read_text()
    capsys.readouterr()

    assert main(["eval", str(run), "--out", str(tmp_path / "m.txt")]) == 0
    assert capsys.readouterr().out == stored
    assert (tmp_path / "m.txt").read_text() == stored

    before = (run / "embeddings.tsv").read_bytes()
    assert main(["export-embeddings", str(run), "--out", str(tmp_path / "e.tsv")]) == 0
    assert (tmp_path / "e.tsv").read_bytes() == before


def test_overrides(manifest_file, tmp_path):
    assert main(["train", str(manifest_file), "--epochs", "3", "--no-dedup", "--name", "o"]) == 0
    text = (tmp_path / "runs" / "o" / "manifest.txt").read_text()
    assert "epochs = 3\n" in text and "dedup = false\n" in text
    assert len((tmp_path / "runs" / "o" / "history.csv").read_text().splitlines()) == 4


def test_seeds_aggregate(manifest_file, tmp_path, capsys):
    assert main(["train", str(manifest_file), "--seeds", "3", "--epochs", "10"]) == 0
    root = tmp_path / "runs" / "syn"
    assert sorted(p for p in os.listdir(root) if p.startswith("seed_")) == ["seed_00", "seed_01", "seed_02"]
    agg = (root / "aggregate.txt").read_text()
    assert agg.startswith("runs = 3\n")
    assert "over 3 seeds" in capsys.readouterr().out
    seed1 = (root / "seed_01" / "manifest.txt").read_text()
    assert "split_seed = 1\n" in seed1 and "init_seed = 1\n" in seed1


def test_transform(manifest_file, tmp_path, capsys):
    out = tmp_path / "tr"
    assert main(["transform", str(manifest_file), "--out", str(out)]) == 0
    assert {"line_graph.edges", "line_features.tsv", "line_labels.tsv", "manifest.txt"} <= set(os.listdir(out))
    assert "line_nodes = " in capsys.readouterr().out


def test_missing_cites_exit_6(manifest_file, tmp_path, capsys):
    missing = tmp_path / "absent.cites"
    assert main(["train", str(manifest_file), "--cites", str(missing)]) == 6
    assert str(missing) in capsys.readouterr().err


def test_zero_epochs_exit_4(manifest_file, capsys):
    assert main(["train", str(manifest_file), "--epochs", "0"]) == 4
    assert "epochs" in capsys.readouterr().err


def test_bad_manifest_exit_3(tmp_path, capsys):
    path = tmp_path / "bad.manifest"
    path.write_text("content = x\nthis line is wrong\n")
    assert main(["train", str(path)]) == 3
    assert "bad.manifest:2" in capsys.readouterr().err


def test_malformed_content_exit_3(tmp_path, capsys):
    content = tmp_path / "x.content"
    content.write_text("a\t1\tA\nb\tB\n")
    cites = tmp_path / "x.cites"
    cites.write_text("a\tb\n")
    assert main(["train", "--content", str(content), "--cites", str(cites)]) == 3
    assert "x.content:2" in capsys.readouterr().err


def test_eval_missing_run_exit_6(tmp_path):
    assert main(["eval", str(tmp_path / "nowhere")]) == 6


def test_bench_small(capsys):
    assert main(["bench", "--sizes", "200,400", "--repeats", "1"]) == 0
    out = capsys.readouterr().out
    assert "scaling_ratio_test = " in out


def test_bench_empty_sizes_exit_4():
    assert main(["bench", "--sizes", ""]) == 4


def test_console_script_help():
    proc = subprocess.run(
        [sys.executable, "-m", "lhcn.cli", "--help"], capture_output=True, text=True, check=False
    )
    assert proc.returncode == 0
    for verb in ("transform", "train", "eval", "bench", "export-embeddings"):
        assert verb in proc.stdout
