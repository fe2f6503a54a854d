import enum

from pydantic import BaseModel, Field


class AttackKind(str, enum.Enum):
    """Node-removal attack strategies."""
    RA = "RA"
    TDA = "TDA"
    TBA = "TBA"


class CurveKind(str, enum.Enum):
    """Robustness measure tracked along an attack."""
    CONTROLLABILITY = "controllability"
    CONNECTIVITY = "connectivity"


class OracleMode(str, enum.Enum):
    """How the number of driver nodes is computed."""
    STRUCTURAL = "structural"
    EXACT = "exact"


class AttackStrategy(BaseModel):
    """Attack kind plus its knobs; fixed for a whole trace."""
    kind: AttackKind = AttackKind.RA
    seed: int = Field(default=0, ge=0)
    recompute: bool = True

    model_config = {"frozen": True}
