import enum
from typing import Optional, Tuple

from pydantic import BaseModel, Field, model_validator


class Topology(str, enum.Enum):
    """Synthetic network families."""
    ER = "ER"
    BA = "BA"
    SF = "SF"
    NW = "NW"
    QSN = "QSN"


class GenSpec(BaseModel):
    """Parameters of one synthetic graph."""
    topology: Topology
    n: int = Field(ge=2)
    k_avg: float = Field(gt=0)
    directed: bool = True
    weighted: bool = False
    weight_range: Tuple[float, float] = (0.5, 1.5)
    q: Optional[float] = Field(default=None, gt=0, le=1)
    seed: int = Field(default=0, ge=0, lt=2**64)

    model_config = {"frozen": True}

    @model_validator(mode="after")
    def check_ranges(self) -> "GenSpec":
        if self.k_avg > self.n - 1:
            raise ValueError(f"k_avg must lie in (0, n-1], got {self.k_avg} for n={self.n}")
        lo, hi = self.weight_range
        if lo <= 0 or lo > hi:
            raise ValueError(f"weight_range must satisfy 0 < lo <= hi, got {self.weight_range}")
        return self

    @property
    def edge_target(self) -> int:
        """Edge count M the generator must hit exactly."""
        if self.directed:
            return int(round(self.k_avg * self.n))
        return int(round(self.k_avg * self.n / 2))
