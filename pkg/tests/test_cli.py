import csv

import pytest

from scripts.nrlgt import main

TINY_INI = """
[pipeline]
seed = 2

[generation]
topologies = ER, NW
n = 10
k_min = 1.5
k_max = 2.5
samples_per_topology = 2

[training]
epochs = 1
batch_size = 2
d = 4
layers = 1
inner_heads = 2
outer_heads = 2
max_degree = 6
step2_epochs = 1
val_fraction = 0.5

[evaluation]
timing_runs = 1
timing_graphs = 1

[paths]
dataset_dir = {root}/dataset
checkpoint = {root}/model.ckpt
report_dir = {root}/reports
"""


@pytest.fixture
def star_file(tmp_path):
    path = tmp_path / "star.txt"
    path.write_text("# hub and four leaves\n5\n0 1\n0 2\n0 3\n0 4\n")
    return path


def test_curve_to_stdout(star_file, capsys):
    assert main(["curve", str(star_file), "--attack", "TDA"]) == 0
    captured = capsys.readouterr()
    assert captured.out.splitlines() == ["i,value", "1,1.0", "2,1.0", "3,1.0", "4,1.0"]
    assert "R_c = 1.000000" in captured.err


def test_curve_to_file(star_file, tmp_path):
    out = tmp_path / "out"
    assert main(["curve", str(star_file), "--attack", "TDA", "--kind", "connectivity", "--out", str(out)]) == 0
    with open(out / "curve.csv", newline="") as handle:
        rows = list(csv.reader(handle))
    assert rows[0] == ["i", "value"]
    assert [float(row[1]) for row in rows[1:]] == pytest.approx([0.25, 1 / 3, 0.5, 1.0])


def test_attack_to_file(star_file, tmp_path):
    assert main(["attack", str(star_file), "--attack", "TDA", "--out", str(tmp_path)]) == 0
    with open(tmp_path / "trace.csv", newline="") as handle:
        assert list(csv.reader(handle))[1] == ["1", "0"]


def test_undirected_batch_curve(tmp_path, capsys):
    path = tmp_path / "path.txt"
    path.write_text("5\n0 1\n1 2\n2 3\n3 4\n")
    args = ["curve", str(path), "--undirected", "--attack", "TBA", "--kind", "connectivity", "--batch-fraction", "0.2"]
    assert main(args) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "i,value"
    assert [float(line.split(",")[1]) for line in lines[1:]] == pytest.approx([0.5, 2 / 3, 1.0, 1.0])


def test_errors_exit_with_status_one(tmp_path, star_file, capsys):
    bad = tmp_path / "bad.txt"
    bad.write_text("3\n0 1\n1 1\n")
    assert main(["curve", str(bad)]) == 1
    assert "Error: line 3:" in capsys.readouterr().out
    assert main(["curve", str(star_file), "--batch-fraction", "1.5"]) == 1
    assert main(["gen", "--config", str(tmp_path / "missing.ini")]) == 1


def test_pipeline_commands(tmp_path, capsys):
    config = tmp_path / "tiny.ini"
    config.write_text(TINY_INI.format(root=tmp_path))
    common = ["--config", str(config)]

    assert main(["gen", *common]) == 0
    assert "Generated 4 graphs" in capsys.readouterr().out
    assert main(["train-step1", *common]) == 0
    assert (tmp_path / "model.ckpt").is_file()
    assert (tmp_path / "reports" / "train_step1.csv").is_file()
    assert main(["train-step2", *common]) == 0
    assert (tmp_path / "reports" / "train_step2.csv").is_file()
    assert main(["eval", *common]) == 0
    assert (tmp_path / "reports" / "summary.json").is_file()
    assert main(["spectral", *common]) == 0
    assert (tmp_path / "reports" / "spectral_rank_errors.csv").is_file()
    capsys.readouterr()

    graph = tmp_path / "dataset" / "graphs" / "000000.txt"
    assert main(["classify", str(graph), *common]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("file,label,p_ER")
    assert lines[1].startswith(str(graph))
    assert main(["rc", str(graph), *common]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "file,rc"
    assert 0.0 < float(lines[1].split(",")[1]) < 1.0
