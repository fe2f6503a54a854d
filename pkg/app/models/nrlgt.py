"""The NRL-GT network: degree encoder, transformer backbone and three heads."""
from pathlib import Path
from typing import Tuple, Union

import numpy as np
from pydantic import ValidationError

from app.core.exceptions import ModelError
from app.core.graph import Graph
from app.diff.checkpoint import load_checkpoint, save_checkpoint
from app.diff.module import Module
from app.diff.tensor import Tensor
from app.logging_config import get_logger
from app.models.encoder import DegreeCentralityEncoder
from app.models.graphview import GraphView
from app.models.gt_layer import make_layer
from app.models.heads import ClassHead, CurveHead, RcHead
from app.schemas.model import ModelManifest, Prediction

logger = get_logger(__name__)

# Parameter-name prefixes of the shared feature extractor.
FEATURE_PREFIXES = ("encoder.", "backbone.")


class NRLGT(Module):
    def __init__(self, manifest: ModelManifest):
        self.manifest = manifest
        rng = np.random.default_rng(manifest.seed)
        layer_args = dict(
            aggregator=manifest.aggregator,
            inner_heads=manifest.inner_heads,
            outer_heads=manifest.outer_heads,
            slope=manifest.leaky_slope,
        )
        self.encoder = DegreeCentralityEncoder(rng, manifest.d, manifest.max_degree, manifest.shared_degree_table)
        self.backbone = [
            make_layer(manifest.aggregator, rng, manifest.d, manifest.inner_heads, manifest.outer_heads, manifest.leaky_slope)
            for _ in range(manifest.layers)
        ]
        self.curve_head = CurveHead(rng, manifest.curve_size, manifest.curve_kind, manifest.d, **layer_args)
        self.rc_head = RcHead(rng, manifest.d, **layer_args)
        self.class_head = ClassHead(rng, manifest.d, manifest.classes, **layer_args)

    def features(self, view: GraphView) -> Tuple[Tensor, Tensor]:
        """``(h0, hL)``: degree encodings and backbone output."""
        h_0 = self.encoder(view)
        h = h_0
        for layer in self.backbone:
            h = layer(h, view)
        return h_0, h

    def curve(self, view: GraphView) -> Tuple[Tensor, Tensor]:
        _, h_l = self.features(view)
        return self.curve_head(h_l, view)

    def rc(self, view: GraphView) -> Tensor:
        h_0, h_l = self.features(view)
        return self.rc_head(h_0, h_l, view)

    def classify(self, view: GraphView) -> Tensor:
        h_0, h_l = self.features(view)
        return self.class_head(h_0, h_l, view)

    def last_backbone_layer(self) -> Module:
        if not self.backbone:
            raise ModelError("model has no backbone layers")
        return self.backbone[-1]

    def feature_hash(self) -> str:
        return self.parameter_hash(FEATURE_PREFIXES)

    def freeze_features(self) -> None:
        self.encoder.freeze()
        for layer in self.backbone:
            layer.freeze()

    def resize_curve_head(self, n: int) -> None:
        """Replace the curve head with a freshly initialized one for ``n``-node graphs."""
        rng = np.random.default_rng([self.manifest.seed, n])
        self.curve_head = CurveHead(
            rng,
            n,
            self.manifest.curve_kind,
            self.manifest.d,
            aggregator=self.manifest.aggregator,
            inner_heads=self.manifest.inner_heads,
            outer_heads=self.manifest.outer_heads,
            slope=self.manifest.leaky_slope,
        )
        self.manifest = self.manifest.model_copy(update={"curve_size": n})
        logger.info("curve_head_resized", curve_size=n)

    def predict(self, g: Graph) -> Prediction:
        """Run every head that applies to ``g`` (no tape, no gradients)."""
        view = GraphView.from_graph(g)
        h_0, h_l = self.features(view)
        curve = None
        if view.n_real == self.manifest.curve_size:
            main, _ = self.curve_head(h_l, view)
            curve = main.data.tolist()
        probs = self.class_head(h_0, h_l, view).data
        label = self.manifest.class_labels[int(np.argmax(probs))]
        return Prediction(
            curve=curve,
            rc=self.rc_head(h_0, h_l, view).item(),
            probabilities=probs.tolist(),
            label=label,
        )

    def save(self, path: Union[str, Path]) -> None:
        save_checkpoint(path, self.state_dict(), self.manifest.model_dump(mode="json"))

    @classmethod
    def load(cls, path: Union[str, Path]) -> "NRLGT":
        """Rebuild a model from its checkpoint.

        Raises:
            ModelError: If the file or its manifest is not a valid checkpoint.
        """
        raw_manifest, state = load_checkpoint(path)
        try:
            manifest = ModelManifest.model_validate(raw_manifest)
        except ValidationError as exc:
            raise ModelError(f"incompatible checkpoint manifest: {exc}")
        model = cls(manifest)
        model.load_state_dict(state)
        return model
