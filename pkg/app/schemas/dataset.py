from typing import Dict, List

from pydantic import BaseModel, Field

from app.schemas.attack import AttackKind, CurveKind
from app.schemas.generation import Topology

DATASET_FORMAT_VERSION = 2


class DatasetRecord(BaseModel):
    """One graph with its true robustness curve of one kind."""
    record_id: int = Field(ge=0)
    topology: Topology
    kind: CurveKind
    attack: AttackKind
    n: int
    directed: bool
    k_avg: float
    weighted: bool
    seed: int
    rc: float
    curve: List[float]

    @property
    def graph_file(self) -> str:
        return f"graphs/{self.record_id:06d}.txt"


class DatasetManifest(BaseModel):
    """Contents summary and integrity hashes of a dataset directory."""
    format_version: int = DATASET_FORMAT_VERSION
    config_hash: str
    n: int
    directed: bool
    kinds: List[CurveKind]
    topology_counts: Dict[str, int]
    skipped: int = 0
    records_sha256: Dict[str, str]
    graphs_sha256: str
