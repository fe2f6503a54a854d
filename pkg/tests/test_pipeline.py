import json

import numpy as np
import pytest

from app.core.exceptions import DatasetError, ModelError
from app.core.spectral import spectral_measures
from app.models.nrlgt import NRLGT
from app.pipeline import cmd_eval, cmd_gen, cmd_spectral_compare, cmd_train_step1, cmd_train_step2, cmd_transfer, load_dataset
from app.pipeline.dataset import build_tasks, records_file, require_single_size, split_records, subsample
from app.pipeline.training import STEP1_LOG_FIELDS, STEP2_LOG_FIELDS, _check_step2_compatible, manifest_for
from app.pipeline.workers import run_parallel
from app.schemas.attack import CurveKind
from app.schemas.generation import Topology
from app.schemas.pipeline import PipelineConfig


def tiny_config(root, n=12, **generation):
    gen = dict(
        topologies="ER, BA, SF, NW, QSN",
        n=n,
        k_min=1.5,
        k_max=3.0,
        samples_per_topology=3,
        weighted_copies=True,
    )
    gen.update(generation)
    return PipelineConfig.from_dict({
        "pipeline": {"seed": 5, "threads": 1},
        "generation": gen,
        "training": {
            "epochs": 2,
            "batch_size": 4,
            "lr": 0.01,
            "d": 4,
            "layers": 1,
            "inner_heads": 2,
            "outer_heads": 2,
            "max_degree": 8,
            "val_fraction": 0.34,
            "step2_epochs": 2,
            "transfer_epochs": 1,
        },
        "evaluation": {"timing_runs": 1, "timing_graphs": 1},
        "paths": {
            "dataset_dir": str(root / "dataset"),
            "checkpoint": str(root / "model.ckpt"),
            "report_dir": str(root / "reports"),
        },
    })


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    root = tmp_path_factory.mktemp("pipeline")
    config = tiny_config(root)
    manifest = cmd_gen(config)
    return root, config, manifest


@pytest.fixture(scope="module")
def step1_model(workspace):
    _, config, _ = workspace
    dataset = load_dataset(config.paths.dataset_dir, CurveKind.CONTROLLABILITY)
    return cmd_train_step1(config, dataset)


def test_generated_dataset_layout(workspace):
    root, config, manifest = workspace
    out = root / "dataset"
    assert manifest.topology_counts == {t.value: 3 for t in Topology}
    assert manifest.skipped == 0
    assert manifest.config_hash == config.generation_hash()
    assert len(list((out / "graphs").glob("*.txt"))) == 15
    on_disk = json.loads((out / "manifest.json").read_text())
    assert on_disk["records_sha256"] == manifest.records_sha256


@pytest.mark.parametrize("kind", list(CurveKind))
def test_records_carry_full_curves(workspace, kind):
    _, config, _ = workspace
    dataset = load_dataset(config.paths.dataset_dir, kind)
    assert len(dataset) == 15
    for record in dataset.records:
        assert record.kind == kind
        assert len(record.curve) == 11
        assert record.rc == pytest.approx(float(np.mean(record.curve)))
        assert record.weighted == (record.record_id % 3 == 1)
        assert dataset.graph(record).n == 12
        assert dataset.graph(record).edge_count == int(round(record.k_avg * 12))


def test_generation_is_deterministic_across_worker_counts(workspace, tmp_path):
    root, _, _ = workspace
    again = tiny_config(tmp_path).with_overrides(threads=2)
    cmd_gen(again)
    for name in [records_file(kind) for kind in CurveKind] + ["manifest.json"]:
        assert (tmp_path / "dataset" / name).read_bytes() == (root / "dataset" / name).read_bytes()
    for path in sorted((root / "dataset" / "graphs").glob("*.txt")):
        assert (tmp_path / "dataset" / "graphs" / path.name).read_bytes() == path.read_bytes()


def test_tasks_depend_on_the_seed(tmp_path):
    config = tiny_config(tmp_path)
    seeds = [task.spec.seed for task in build_tasks(config)]
    assert seeds == [task.spec.seed for task in build_tasks(config)]
    assert seeds != [task.spec.seed for task in build_tasks(config.with_overrides(seed=6))]
    assert [task.record_id for task in build_tasks(config)] == list(range(15))


def test_infeasible_specs_are_skipped(tmp_path):
    config = tiny_config(tmp_path, topologies="NW", k_min=0.5, k_max=0.6, samples_per_topology=2,
                         kinds="connectivity")
    manifest = cmd_gen(config)
    assert manifest.skipped == 2
    assert manifest.topology_counts == {"NW": 0}


def test_tampered_records_are_rejected(tmp_path):
    config = tiny_config(tmp_path, topologies="ER", samples_per_topology=2, kinds="connectivity")
    cmd_gen(config)
    path = tmp_path / "dataset" / records_file(CurveKind.CONNECTIVITY)
    path.write_text(path.read_text() + "\n")
    with pytest.raises(DatasetError):
        load_dataset(tmp_path / "dataset", CurveKind.CONNECTIVITY)
    assert len(load_dataset(tmp_path / "dataset", CurveKind.CONNECTIVITY, verify=False)) == 2
    with pytest.raises(DatasetError):
        load_dataset(tmp_path / "dataset", CurveKind.CONTROLLABILITY)
    with pytest.raises(DatasetError):
        load_dataset(tmp_path / "nowhere", CurveKind.CONNECTIVITY)


def test_record_lines_hold_one_column_per_curve_value(workspace):
    root, _, _ = workspace
    lines = (root / "dataset" / records_file(CurveKind.CONTROLLABILITY)).read_text().splitlines()
    header = lines[0].split(",")
    assert header[:10] == ["record_id", "kind", "k_avg", "weighted", "seed", "topology", "n", "directed", "attack", "rc"]
    assert header[10:] == [f"s{i}" for i in range(1, 12)]
    assert len(lines) == 16
    fields = lines[1].split(",")
    assert len(fields) == 10 + 11
    assert fields[0] == "0" and fields[1] == "controllability"
    assert fields[5:9] == ["ER", "12", "1", "RA"]
    curve = [float(v) for v in fields[10:]]
    assert float(fields[9]) == pytest.approx(float(np.mean(curve)))
    assert curve[-1] == 1.0


def test_malformed_record_lines_are_rejected(tmp_path):
    config = tiny_config(tmp_path, topologies="ER", samples_per_topology=2, kinds="connectivity")
    cmd_gen(config)
    path = tmp_path / "dataset" / records_file(CurveKind.CONNECTIVITY)
    lines = path.read_text().splitlines()
    path.write_text("\n".join(lines[:2] + [lines[2].rsplit(",", 1)[0]]) + "\n")
    with pytest.raises(DatasetError, match="curve values"):
        load_dataset(tmp_path / "dataset", CurveKind.CONNECTIVITY, verify=False)


def test_tampered_graph_files_are_rejected(tmp_path):
    config = tiny_config(tmp_path, topologies="ER", samples_per_topology=2, kinds="connectivity")
    manifest = cmd_gen(config)
    assert len(manifest.graphs_sha256) == 64
    graph_file = tmp_path / "dataset" / "graphs" / "000001.txt"
    graph_file.write_text(graph_file.read_text() + "# edited\n")
    with pytest.raises(DatasetError, match="graph files"):
        load_dataset(tmp_path / "dataset", CurveKind.CONNECTIVITY)
    assert len(load_dataset(tmp_path / "dataset", CurveKind.CONNECTIVITY, verify=False)) == 2


def test_split_and_subsample(workspace):
    _, config, _ = workspace
    records = load_dataset(config.paths.dataset_dir, CurveKind.CONNECTIVITY).records
    train, val = split_records(records, 0.34, seed=5)
    assert len(train) == 10 and len(val) == 5
    assert {r.topology for r in val} == set(Topology)
    assert not {r.record_id for r in train} & {r.record_id for r in val}
    assert split_records(records, 0.34, seed=5) == (train, val)
    assert split_records(records, 0.0, seed=5) == (list(records), [])
    kept = subsample(train, 0.5, seed=1)
    assert len(kept) == 5
    assert [r.record_id for r in kept] == sorted(r.record_id for r in kept)


def test_mixed_sizes_are_rejected(workspace):
    _, config, _ = workspace
    records = load_dataset(config.paths.dataset_dir, CurveKind.CONNECTIVITY).records
    assert require_single_size(records) == 12
    with pytest.raises(DatasetError):
        require_single_size(records[:2] + [records[2].model_copy(update={"n": 20})])


def test_run_parallel_keeps_order():
    assert run_parallel(abs, [-3, 1, -2], threads=1) == [3, 1, 2]
    assert run_parallel(abs, [-3, 1, -2, -7], threads=2) == [3, 1, 2, 7]


def test_step1_training(step1_model):
    run = step1_model
    assert len(run.log) == 2
    assert all(len(row) == len(STEP1_LOG_FIELDS) for row in run.log)
    assert all(np.isfinite(row[1]) and np.isfinite(row[2]) for row in run.log)
    assert run.model.manifest.curve_size == 12
    assert run.model.manifest.shared_degree_table is False


def test_step2_training_keeps_features_frozen(workspace, step1_model, tmp_path):
    _, config, _ = workspace
    path = tmp_path / "step1.ckpt"
    step1_model.model.save(path)
    model = NRLGT.load(path)
    features = model.feature_hash()
    dataset = load_dataset(config.paths.dataset_dir, config.training.rc_kind)

    run = cmd_train_step2(config, dataset, model)
    assert len(run.log) == 2
    assert all(len(row) == len(STEP2_LOG_FIELDS) for row in run.log)
    for row in run.log:
        assert row[3] > 0 and row[4] > 0
        assert row[3] + row[4] == pytest.approx(2.0)
        assert 0.0 <= row[5] <= 1.0
    assert model.feature_hash() == features
    assert not any(p.requires_grad for p in model.last_backbone_layer().parameters())


def test_step2_rejects_mismatched_directedness(workspace):
    _, config, _ = workspace
    dataset = load_dataset(config.paths.dataset_dir, CurveKind.CONNECTIVITY)
    undirected_model = NRLGT(manifest_for(config, 12, directed=False))
    with pytest.raises(ModelError):
        _check_step2_compatible(undirected_model, dataset)


def test_evaluation_reports(workspace, step1_model, tmp_path):
    _, config, _ = workspace
    config = config.with_overrides(out=str(tmp_path / "eval"))
    dataset = load_dataset(config.paths.dataset_dir, CurveKind.CONTROLLABILITY)
    rc_truth = {r.record_id: r.rc for r in load_dataset(config.paths.dataset_dir, CurveKind.CONNECTIVITY).records}
    report = cmd_eval(config, step1_model.model, dataset, rc_truth)

    assert len(report.outcomes) == 5
    assert [row[0] for row in report.per_topology] == [t.value for t in Topology]
    for outcome in report.outcomes:
        assert outcome.rc_true == rc_truth[outcome.record.record_id]
        assert len(outcome.curve_er) == 11
    assert len(report.timing) == 1
    for name in ("per_topology.csv", "error_curves.csv", "rc_errors.csv", "classification.csv", "timing.csv"):
        assert (tmp_path / "eval" / name).is_file()
    summary = json.loads((tmp_path / "eval" / "summary.json").read_text())
    assert summary["records"] == 5
    assert summary["threshold"] == 0.03
    assert summary["kind"] == "controllability"


def test_transfer_to_a_new_size(workspace, step1_model, tmp_path):
    root, config, _ = workspace
    other = tiny_config(tmp_path, n=10)
    cmd_gen(other)
    path = tmp_path / "step1.ckpt"
    step1_model.model.save(path)
    model = NRLGT.load(path)
    features = model.feature_hash()

    dataset = load_dataset(other.paths.dataset_dir, CurveKind.CONTROLLABILITY)
    report = cmd_transfer(other, model, dataset)
    assert model.manifest.curve_size == 10
    assert model.feature_hash() == features
    assert report.outcomes
    assert all(len(o.curve_er) == 9 for o in report.outcomes)
    assert (tmp_path / "reports" / "per_topology.csv").is_file()


def test_spectral_comparison(workspace, step1_model, tmp_path):
    _, config, _ = workspace
    dataset = load_dataset(config.paths.dataset_dir, CurveKind.CONNECTIVITY)
    rows = cmd_spectral_compare(config, dataset, step1_model.model, report_dir=tmp_path)
    assert [row[0] for row in rows] == ["SR", "SG", "NC", "AC", "NRL-GT"]
    assert all(row[1] >= 0 for row in rows)
    assert (tmp_path / "spectral_rank_errors.csv").read_text().startswith("method,rank_error")

    lines = (tmp_path / "spectral_measures.csv").read_text().splitlines()
    assert lines[0] == "record_id,SR,SG,NC,AC,rc_true,rc_pred"
    assert len(lines) == 1 + len(dataset)
    first = lines[1].split(",")
    record = dataset.records[0]
    assert int(first[0]) == record.record_id
    expected = spectral_measures(dataset.graph(record))
    assert [float(v) for v in first[1:5]] == pytest.approx([expected[m] for m in ("SR", "SG", "NC", "AC")])
    assert float(first[5]) == record.rc
    assert 0.0 < float(first[6]) < 1.0

    assert len(cmd_spectral_compare(config, dataset, report_dir=tmp_path)) == 4
    assert (tmp_path / "spectral_measures.csv").read_text().splitlines()[0] == "record_id,SR,SG,NC,AC,rc_true"
