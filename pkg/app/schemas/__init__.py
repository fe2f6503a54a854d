from app.schemas.generation import GenSpec, Topology
from app.schemas.attack import AttackKind, AttackStrategy, CurveKind, OracleMode
from app.schemas.model import ModelManifest, Prediction
from app.schemas.dataset import DatasetManifest, DatasetRecord
from app.schemas.pipeline import PipelineConfig
from app.schemas.api import (
    AttackRequest,
    AttackResponse,
    CurveRequest,
    CurveResponse,
    GraphPayload,
    PredictRequest,
    SpectralResponse,
)
