from typing import List, Literal, Optional

from pydantic import BaseModel, Field

from app.schemas.attack import CurveKind
from app.schemas.generation import Topology


class ModelManifest(BaseModel):
    """Hyperparameters that make a checkpoint self-describing."""
    d: int = Field(default=10, ge=2)
    layers: int = Field(default=2, ge=0)
    inner_heads: int = Field(default=2, ge=1)
    outer_heads: int = Field(default=3, ge=1)
    curve_size: int = Field(default=100, ge=2)
    classes: int = Field(default=5, ge=2)
    max_degree: int = Field(default=30, ge=1)
    curve_kind: CurveKind = CurveKind.CONTROLLABILITY
    aggregator: Literal["gt", "classical"] = "gt"
    leaky_slope: float = 0.2
    gradnorm_alpha: float = 1.5
    shared_degree_table: bool = False
    seed: int = Field(default=0, ge=0)
    class_labels: List[Topology] = Field(default_factory=lambda: list(Topology))


class Prediction(BaseModel):
    """Model outputs for one graph."""
    curve: Optional[List[float]] = None
    rc: float
    probabilities: List[float]
    label: Topology
