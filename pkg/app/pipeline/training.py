"""Two-step training.

Step 1 fits the degree encoder, the backbone and the curve head on the
curve loss. Step 2 keeps the encoder and backbone fixed and fits the class
and overall-robustness heads jointly, balancing the two task weights with
Grad-Norm once per batch.
"""
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from app.core.exceptions import ModelError
from app.diff.optim import AdamState, adam_step
from app.diff.tensor import Tape, Tensor, backward
from app.logging_config import get_logger
from app.models.graphview import GraphView
from app.models.losses import LossConfig, class_loss, gradnorm_update, rc_loss, step1_loss, step2_loss
from app.models.nrlgt import FEATURE_PREFIXES, NRLGT
from app.pipeline.dataset import Dataset, require_single_size, split_records
from app.schemas.dataset import DatasetRecord
from app.schemas.model import ModelManifest
from app.schemas.pipeline import PipelineConfig

logger = get_logger(__name__)

CURVE_PREFIXES = FEATURE_PREFIXES + ("curve_head.",)
STEP2_HEAD_PREFIXES = ("rc_head.", "class_head.")

STEP1_LOG_FIELDS = ["epoch", "train_loss", "val_mean_er"]
STEP2_LOG_FIELDS = ["epoch", "class_loss", "rc_loss", "w_c", "w_R", "val_accuracy", "val_rc_error"]


@dataclass
class TrainingRun:
    model: NRLGT
    log: List[list] = field(default_factory=list)


class ViewCache:
    """GraphView per record id, built once and reused across epochs."""

    def __init__(self, dataset: Dataset):
        self.dataset = dataset
        self._views: Dict[int, GraphView] = {}

    def __call__(self, record: DatasetRecord) -> GraphView:
        view = self._views.get(record.record_id)
        if view is None:
            view = GraphView.from_graph(self.dataset.graph(record))
            self._views[record.record_id] = view
        return view


def manifest_for(config: PipelineConfig, curve_size: int, directed: bool) -> ModelManifest:
    t = config.training
    return ModelManifest(
        d=t.d,
        layers=t.layers,
        inner_heads=t.inner_heads,
        outer_heads=t.outer_heads,
        curve_size=curve_size,
        max_degree=t.max_degree,
        curve_kind=t.curve_kind,
        aggregator=t.aggregator,
        leaky_slope=t.leaky_slope,
        gradnorm_alpha=t.gradnorm_alpha,
        shared_degree_table=not directed,
        seed=config.pipeline.seed,
    )


def _selected(model: NRLGT, prefixes: Tuple[str, ...]) -> List[Tuple[str, Tensor]]:
    return [(name, t) for name, t in model.named_parameters() if name.startswith(prefixes) and t.requires_grad]


def _batches(order: np.ndarray, size: int) -> List[np.ndarray]:
    return [order[i:i + size] for i in range(0, len(order), size)]


def _accumulate(total: Dict[str, np.ndarray], grads: Dict[Tensor, np.ndarray], names: Dict[int, str]) -> None:
    for t, g in grads.items():
        name = names.get(t.id)
        if name is None:
            continue
        total[name] = total[name] + g if name in total else g.copy()


def curve_mean_error(model: NRLGT, views: ViewCache, records: Sequence[DatasetRecord]) -> float:
    if not records:
        return float("nan")
    errors = []
    for r in records:
        main, _ = model.curve(views(r))
        errors.append(float(np.mean(np.abs(main.data - np.asarray(r.curve)))))
    return float(np.mean(errors))


def fit_curve(
    model: NRLGT,
    views: ViewCache,
    train: Sequence[DatasetRecord],
    val: Sequence[DatasetRecord],
    config: PipelineConfig,
    epochs: int,
    prefixes: Tuple[str, ...] = CURVE_PREFIXES,
    phase: str = "step1",
) -> List[list]:
    """Adam on the curve loss with gradients summed over each batch of graphs."""
    t = config.training
    params = _selected(model, prefixes)
    names = {p.id: name for name, p in params}
    state = AdamState(lr=t.lr, weight_decay=t.weight_decay)
    rng = np.random.default_rng([config.pipeline.seed, 1])
    log = []
    for epoch in range(1, epochs + 1):
        losses = []
        for batch in _batches(rng.permutation(len(train)), t.batch_size):
            grads: Dict[str, np.ndarray] = {}
            for index in batch:
                record = train[int(index)]
                with Tape() as tape:
                    main, branch = model.curve(views(record))
                    loss = step1_loss(main, branch, record.curve, t.rho)
                losses.append(loss.item())
                _accumulate(grads, backward(tape, loss), names)
            adam_step(params, grads, state)
        train_loss = float(np.mean(losses)) if losses else float("nan")
        val_er = curve_mean_error(model, views, val if val else train)
        log.append([epoch, train_loss, val_er])
        logger.info("epoch_completed", phase=phase, epoch=epoch, train_loss=train_loss, val_mean_er=val_er)
    return log


def cmd_train_step1(config: PipelineConfig, dataset: Dataset) -> TrainingRun:
    """Train encoder, backbone and curve head from scratch.

    Raises:
        DatasetError: If the records do not share one graph size.
    """
    n = require_single_size(dataset.records)
    train, val = split_records(dataset.records, config.training.val_fraction, config.pipeline.seed)
    model = NRLGT(manifest_for(config, n, dataset.manifest.directed))
    logger.info(
        "training_started",
        phase="step1",
        records=len(train),
        validation=len(val),
        parameters=model.parameter_count(),
    )
    log = fit_curve(model, ViewCache(dataset), train, val, config, config.training.epochs)
    return TrainingRun(model=model, log=log)


def step2_validation(model: NRLGT, views: ViewCache, records: Sequence[DatasetRecord]) -> Tuple[float, float]:
    """Classification accuracy and mean |R̂c - Rc| over ``records``."""
    if not records:
        return float("nan"), float("nan")
    labels = model.manifest.class_labels
    correct, rc_errors = 0, []
    for r in records:
        view = views(r)
        h_0, h_l = model.features(view)
        probs = model.class_head(h_0, h_l, view).data
        correct += int(labels[int(np.argmax(probs))] == r.topology)
        rc_errors.append(abs(model.rc_head(h_0, h_l, view).item() - r.rc))
    return correct / len(records), float(np.mean(rc_errors))


def _check_step2_compatible(model: NRLGT, dataset: Dataset) -> None:
    if not model.backbone:
        raise ModelError("step 2 needs at least one backbone layer to balance task gradients")
    if model.manifest.shared_degree_table == dataset.manifest.directed:
        trained_on = "undirected" if model.manifest.shared_degree_table else "directed"
        given = "directed" if dataset.manifest.directed else "undirected"
        raise ModelError(f"checkpoint was trained on {trained_on} graphs, dataset is {given}")


def cmd_train_step2(config: PipelineConfig, dataset: Dataset, model: NRLGT) -> TrainingRun:
    """Train the class and R_c heads jointly on top of a step-1 model.

    Raises:
        ModelError: If the checkpoint does not fit the dataset.
    """
    _check_step2_compatible(model, dataset)
    t = config.training
    train, val = split_records(dataset.records, t.val_fraction, config.pipeline.seed)
    views = ViewCache(dataset)
    labels = model.manifest.class_labels

    frozen_hash: Optional[str] = None
    prefixes = STEP2_HEAD_PREFIXES
    if t.freeze_features:
        model.freeze_features()
        frozen_hash = model.feature_hash()
    else:
        prefixes = STEP2_HEAD_PREFIXES + FEATURE_PREFIXES

    params = _selected(model, prefixes)
    names = {p.id: name for name, p in params}
    shared = model.last_backbone_layer().parameters()
    shared_flags = [p.requires_grad for p in shared]
    state = AdamState(lr=t.lr, weight_decay=t.weight_decay)
    cfg = LossConfig(rho=t.rho, alpha=t.gradnorm_alpha, lr_w=t.gradnorm_lr)
    rng = np.random.default_rng([config.pipeline.seed, 2])
    logger.info("training_started", phase="step2", records=len(train), validation=len(val))

    log = []
    try:
        for p in shared:
            p.requires_grad = True
        for epoch in range(1, t.step2_epochs + 1):
            class_losses, rc_losses = [], []
            for batch in _batches(rng.permutation(len(train)), t.batch_size):
                grads: Dict[str, np.ndarray] = {}
                norms = np.zeros(2)
                batch_losses = np.zeros(2)
                for index in batch:
                    record = train[int(index)]
                    view = views(record)
                    with Tape() as tape:
                        h_0, h_l = model.features(view)
                        l_class = class_loss(model.class_head(h_0, h_l, view), labels.index(record.topology))
                        l_rc = rc_loss(model.rc_head(h_0, h_l, view), record.rc)
                        total = step2_loss(l_class, l_rc, cfg)
                    for task, task_loss in enumerate((l_class, l_rc)):
                        shared_grads = backward(tape, task_loss, params=shared, retain=True)
                        norms[task] += np.sqrt(sum(float(np.sum(shared_grads[p] ** 2)) for p in shared))
                    _accumulate(grads, backward(tape, total), names)
                    batch_losses += (l_class.item(), l_rc.item())
                    class_losses.append(l_class.item())
                    rc_losses.append(l_rc.item())
                adam_step(params, grads, state)
                gradnorm_update(tuple(norms / len(batch)), tuple(batch_losses / len(batch)), cfg)

            accuracy, rc_error = step2_validation(model, views, val if val else train)
            row = [epoch, float(np.mean(class_losses)), float(np.mean(rc_losses)), cfg.w_c, cfg.w_r, accuracy, rc_error]
            log.append(row)
            logger.info(
                "epoch_completed",
                phase="step2",
                epoch=epoch,
                class_loss=row[1],
                rc_loss=row[2],
                w_c=cfg.w_c,
                w_r=cfg.w_r,
                val_accuracy=accuracy,
                val_rc_error=rc_error,
            )
    finally:
        for p, flag in zip(shared, shared_flags):
            p.requires_grad = flag

    if frozen_hash is not None and model.feature_hash() != frozen_hash:
        raise ModelError("frozen encoder/backbone parameters changed during step 2")
    return TrainingRun(model=model, log=log)
