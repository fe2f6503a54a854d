from typing import List, Optional, Tuple

from pydantic import BaseModel, Field

from app.schemas.attack import AttackKind, AttackStrategy, CurveKind, OracleMode


class GraphPayload(BaseModel):
    """Graph sent over HTTP: node count plus edge pairs, optionally weighted."""
    n: int = Field(ge=1)
    directed: bool = True
    edges: List[Tuple[int, int]] = Field(default_factory=list)
    weights: Optional[List[float]] = None


class CurveRequest(BaseModel):
    graph: GraphPayload
    strategy: AttackStrategy = Field(default_factory=AttackStrategy)
    kind: CurveKind = CurveKind.CONTROLLABILITY
    mode: OracleMode = OracleMode.STRUCTURAL
    batch_fraction: Optional[float] = Field(default=None, gt=0, lt=1)


class CurveResponse(BaseModel):
    kind: CurveKind
    values: List[float]
    rc: float
    order: List[int]


class AttackRequest(BaseModel):
    graph: GraphPayload
    strategy: AttackStrategy = Field(default_factory=AttackStrategy)


class AttackResponse(BaseModel):
    kind: AttackKind
    order: List[int]


class SpectralResponse(BaseModel):
    SR: float
    SG: float
    NC: float
    AC: float


class PredictRequest(BaseModel):
    graph: GraphPayload
