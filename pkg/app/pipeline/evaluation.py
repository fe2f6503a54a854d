"""Evaluation reports, backbone transfer and inference timing."""
import statistics
import time
from dataclasses import dataclass, field
from functools import partial
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from app.core.attacks import plan_attack
from app.core.graph import Graph
from app.core.robustness import RobustnessCurve, error_report, robustness_curve
from app.core.exceptions import ModelError
from app.logging_config import get_logger
from app.models.graphview import GraphView
from app.models.nrlgt import NRLGT
from app.pipeline.dataset import Dataset, require_single_size, split_records, subsample
from app.pipeline.reports import write_csv, write_json
from app.pipeline.training import ViewCache, fit_curve
from app.pipeline.workers import run_parallel
from app.schemas.attack import AttackStrategy
from app.schemas.dataset import DatasetRecord
from app.schemas.generation import Topology
from app.schemas.pipeline import PipelineConfig

logger = get_logger(__name__)


@dataclass
class RecordOutcome:
    """Model outputs for one record next to its ground truth."""
    record: DatasetRecord
    curve_er: Optional[np.ndarray]
    rc_true: float
    rc_pred: float
    probabilities: List[float]
    predicted: Topology


@dataclass
class EvalReport:
    per_topology: List[list] = field(default_factory=list)
    outcomes: List[RecordOutcome] = field(default_factory=list)
    timing: List[list] = field(default_factory=list)
    summary: Dict = field(default_factory=dict)


def _evaluate_one(model: NRLGT, item: Tuple[DatasetRecord, Graph, float]) -> RecordOutcome:
    record, graph, rc_true = item
    prediction = model.predict(graph)
    er = None
    if prediction.curve is not None:
        pred = RobustnessCurve(kind=record.kind, values=np.asarray(prediction.curve))
        truth = RobustnessCurve(kind=record.kind, values=np.asarray(record.curve))
        er = error_report(pred, truth).er
    return RecordOutcome(
        record=record,
        curve_er=er,
        rc_true=rc_true,
        rc_pred=prediction.rc,
        probabilities=prediction.probabilities,
        predicted=prediction.label,
    )


def per_topology_errors(
    outcomes: Sequence[RecordOutcome],
    threshold: float,
) -> List[list]:
    """Rows ``topology, records, mean_er, threshold, passed`` in topology order."""
    rows = []
    for topology in Topology:
        errors = [float(np.mean(o.curve_er)) for o in outcomes if o.record.topology == topology and o.curve_er is not None]
        if not errors:
            continue
        mean_er = float(np.mean(errors))
        rows.append([topology.value, len(errors), mean_er, threshold, mean_er <= threshold])
    return rows


def _median_seconds(fn, runs: int) -> float:
    fn()
    samples = []
    for _ in range(runs):
        start = time.perf_counter()
        fn()
        samples.append(time.perf_counter() - start)
    return statistics.median(samples)


def time_inference(model: NRLGT, graph: Graph, record: DatasetRecord, runs: int) -> Tuple[float, float]:
    """Median wall-clock of one curve prediction and of one full oracle simulation."""
    strategy = AttackStrategy(kind=record.attack, seed=0)

    def infer():
        view = GraphView.from_graph(graph)
        _, h_l = model.features(view)
        model.curve_head(h_l, view)

    def simulate():
        robustness_curve(graph, plan_attack(graph, strategy), record.kind)

    return _median_seconds(infer, runs), _median_seconds(simulate, runs)


def evaluate(
    config: PipelineConfig,
    model: NRLGT,
    dataset: Dataset,
    records: Optional[Sequence[DatasetRecord]] = None,
    rc_truth: Optional[Dict[int, float]] = None,
    report_dir: Optional[Path] = None,
) -> EvalReport:
    """Score ``model`` against ``records`` (default: all of ``dataset``) and write the report files.

    ``rc_truth`` maps record ids to the overall robustness the R_c head was
    trained on when that differs from the curve kind of ``dataset``.
    """
    records = list(dataset.records if records is None else records)
    rc_truth = rc_truth or {}
    items = [(r, dataset.graph(r), rc_truth.get(r.record_id, r.rc)) for r in records]
    outcomes = run_parallel(partial(_evaluate_one, model), items, config.pipeline.threads)
    threshold = config.evaluation.threshold(dataset.kind)

    report = EvalReport(outcomes=outcomes)
    report.per_topology = per_topology_errors(outcomes, threshold)

    timed = [item for item in items if item[0].n == model.manifest.curve_size][:config.evaluation.timing_graphs]
    for record, graph, _ in timed:
        inference, simulation = time_inference(model, graph, record, config.evaluation.timing_runs)
        report.timing.append([record.record_id, record.n, inference, simulation, simulation / inference])

    accuracy = float(np.mean([o.predicted == o.record.topology for o in outcomes])) if outcomes else float("nan")
    rc_error = float(np.mean([abs(o.rc_pred - o.rc_true) for o in outcomes])) if outcomes else float("nan")
    report.summary = {
        "kind": dataset.kind.value,
        "records": len(outcomes),
        "threshold": threshold,
        "passed": {row[0]: bool(row[4]) for row in report.per_topology},
        "mean_er": {row[0]: row[2] for row in report.per_topology},
        "classification_accuracy": accuracy,
        "rc_mean_abs_error": rc_error,
        "median_speedup": statistics.median([row[4] for row in report.timing]) if report.timing else None,
    }

    out = Path(report_dir or config.paths.report_dir)
    _write_report(out, report)
    logger.info(
        "evaluation_completed",
        records=len(outcomes),
        out=str(out),
        accuracy=accuracy,
        rc_error=rc_error,
    )
    return report


def _write_report(out: Path, report: EvalReport) -> None:
    labels = [t.value for t in Topology]
    write_csv(out / "per_topology.csv", ["topology", "records", "mean_er", "threshold", "passed"], report.per_topology)
    write_csv(
        out / "error_curves.csv",
        ["record_id", "topology", "i", "er"],
        (
            [o.record.record_id, o.record.topology, i, float(e)]
            for o in report.outcomes if o.curve_er is not None
            for i, e in enumerate(o.curve_er, start=1)
        ),
    )
    write_csv(
        out / "rc_errors.csv",
        ["record_id", "topology", "rc_true", "rc_pred", "abs_error"],
        ([o.record.record_id, o.record.topology, o.rc_true, o.rc_pred, abs(o.rc_pred - o.rc_true)] for o in report.outcomes),
    )
    write_csv(
        out / "classification.csv",
        ["record_id", "topology", "predicted", "correct"] + [f"p_{label}" for label in labels],
        (
            [o.record.record_id, o.record.topology, o.predicted, o.predicted == o.record.topology] + list(o.probabilities)
            for o in report.outcomes
        ),
    )
    write_csv(out / "timing.csv", ["record_id", "n", "inference_s", "simulation_s", "speedup"], report.timing)
    write_json(out / "summary.json", report.summary)


def cmd_eval(
    config: PipelineConfig,
    model: NRLGT,
    dataset: Dataset,
    rc_truth: Optional[Dict[int, float]] = None,
) -> EvalReport:
    """Evaluate on the held-out split of ``dataset``."""
    _, val = split_records(dataset.records, config.training.val_fraction, config.pipeline.seed)
    return evaluate(config, model, dataset, val or dataset.records, rc_truth)


def cmd_transfer(
    config: PipelineConfig,
    model: NRLGT,
    dataset: Dataset,
    rc_truth: Optional[Dict[int, float]] = None,
) -> EvalReport:
    """Reuse the trained backbone on graphs of a new size.

    The curve head is rebuilt for the new size and fine-tuned on
    ``transfer_fraction`` of the training records with the encoder and
    backbone frozen; the other heads run unchanged. Evaluation covers the
    records that were not used for fine-tuning.
    """
    n = require_single_size(dataset.records)
    feature_hash = model.feature_hash()
    model.resize_curve_head(n)
    model.freeze_features()

    train, val = split_records(dataset.records, config.training.val_fraction, config.pipeline.seed)
    tuned = subsample(train, config.training.transfer_fraction, config.pipeline.seed)
    logger.info("transfer_started", n=n, fine_tune_records=len(tuned))
    fit_curve(
        model,
        ViewCache(dataset),
        tuned,
        val,
        config,
        config.training.transfer_epochs,
        prefixes=("curve_head.",),
        phase="transfer",
    )
    if model.feature_hash() != feature_hash:
        raise ModelError("transfer changed the frozen encoder/backbone parameters")

    tuned_ids = {r.record_id for r in tuned}
    held_out = [r for r in dataset.records if r.record_id not in tuned_ids] or dataset.records
    return evaluate(config, model, dataset, held_out, rc_truth)
