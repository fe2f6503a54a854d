"""Desk-scale learning experiments.

Everything marked ``slow`` is skipped by default; run with ``pytest -m slow``.
"""
import numpy as np
import pytest

from app.core.generators import generate
from app.models.nrlgt import NRLGT
from app.pipeline import cmd_eval, cmd_gen, cmd_train_step1, cmd_train_step2, load_dataset
from app.pipeline.evaluation import time_inference
from app.schemas.attack import AttackKind, CurveKind
from app.schemas.dataset import DatasetRecord
from app.schemas.generation import GenSpec, Topology
from app.schemas.model import ModelManifest
from app.schemas.pipeline import PipelineConfig


def desk_config(root, **sections) -> PipelineConfig:
    raw = {
        "pipeline": {"seed": 7, "threads": 4},
        "generation": {"n": 100, "samples_per_topology": 100, "weighted_copies": True},
        "training": {"epochs": 200, "lr": 1e-3, "step2_epochs": 100},
        "paths": {
            "dataset_dir": str(root / "dataset"),
            "checkpoint": str(root / "model.ckpt"),
            "report_dir": str(root / "reports"),
        },
    }
    for name, values in sections.items():
        raw.setdefault(name, {}).update(values)
    return PipelineConfig.from_dict(raw)


def test_outputs_ignore_weights_on_random_topologies():
    model = NRLGT(ModelManifest(d=6, layers=2, inner_heads=2, outer_heads=2, curve_size=30))
    rng = np.random.default_rng(99)
    for sample in range(50):
        topology = list(Topology)[sample % 5]
        spec = GenSpec(topology=topology, n=30, k_avg=float(rng.uniform(2, 5)), seed=sample)
        plain = generate(spec)
        weighted = generate(spec.model_copy(update={"weighted": True}))
        assert model.predict(plain) == model.predict(weighted)


@pytest.mark.slow
def test_overfit_small_curve_set(tmp_path):
    config = desk_config(
        tmp_path,
        generation={"topologies": ["ER", "BA"], "n": 50, "samples_per_topology": 5, "weighted_copies": False},
        training={"epochs": 500, "batch_size": 10, "lr": 5e-3, "val_fraction": 0.0},
    )
    cmd_gen(config)
    run = cmd_train_step1(config, load_dataset(config.paths.dataset_dir, CurveKind.CONTROLLABILITY))
    assert run.log[-1][1] <= run.log[0][1]
    assert run.log[-1][2] <= 0.05


@pytest.mark.slow
def test_desk_scale_generalization(tmp_path):
    config = desk_config(tmp_path)
    cmd_gen(config)
    thresholds = {CurveKind.CONTROLLABILITY: 0.10, CurveKind.CONNECTIVITY: 0.12}
    for kind, limit in thresholds.items():
        curve_config = config.model_copy(
            update={"training": config.training.model_copy(update={"curve_kind": kind})}
        )
        curves = load_dataset(config.paths.dataset_dir, kind)
        rc_records = load_dataset(config.paths.dataset_dir, config.training.rc_kind)
        model = cmd_train_step1(curve_config, curves).model
        cmd_train_step2(curve_config, rc_records, model)
        rc_truth = {r.record_id: r.rc for r in rc_records.records}
        report = cmd_eval(curve_config, model, curves, rc_truth)
        for _, _, mean_er, _, _ in report.per_topology:
            assert mean_er <= limit
        assert report.summary["classification_accuracy"] >= 0.95
        assert report.summary["rc_mean_abs_error"] <= 0.05


@pytest.mark.slow
def test_inference_beats_simulation(tmp_path):
    model = NRLGT(ModelManifest(curve_size=200))
    g = generate(GenSpec(topology=Topology.BA, n=200, k_avg=4.0, seed=1))
    record = DatasetRecord(
        record_id=0, topology=Topology.BA, kind=CurveKind.CONTROLLABILITY, attack=AttackKind.TBA,
        n=200, directed=True, k_avg=4.0, weighted=False, seed=1, rc=0.0, curve=[0.0] * 199,
    )
    inference, simulation = time_inference(model, g, record, runs=20)
    assert simulation >= 10 * inference
