"""Pipeline configuration: INI text validated into a pydantic model tree."""
import configparser
import hashlib
import json
from pathlib import Path
from typing import List, Literal, Optional, Union

from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator

from app.core.exceptions import ConfigError
from app.schemas.attack import AttackKind, CurveKind, OracleMode
from app.schemas.generation import Topology


def _split_list(value):
    if isinstance(value, str):
        return [item.strip() for item in value.split(",") if item.strip()]
    return value


class _Section(BaseModel):
    model_config = {"extra": "forbid"}


class PipelineSection(_Section):
    seed: int = Field(default=0, ge=0)
    threads: int = Field(default=1, ge=1)


class GenerationSection(_Section):
    topologies: List[Topology] = Field(default_factory=lambda: list(Topology))
    n: int = Field(default=100, ge=3)
    k_min: float = Field(default=1.0, gt=0)
    k_max: float = Field(default=10.0, gt=0)
    directed: bool = True
    weighted: bool = False
    weight_lo: float = Field(default=0.5, gt=0)
    weight_hi: float = Field(default=1.5, gt=0)
    samples_per_topology: int = Field(default=100, ge=1)
    attack: AttackKind = AttackKind.RA
    recompute: bool = True
    oracle_mode: OracleMode = OracleMode.STRUCTURAL
    kinds: List[CurveKind] = Field(default_factory=lambda: list(CurveKind))
    # Odd-numbered samples additionally get random edge weights.
    weighted_copies: bool = False

    @field_validator("topologies", "kinds", mode="before")
    @classmethod
    def split_lists(cls, value):
        return _split_list(value)

    @model_validator(mode="after")
    def check_ranges(self) -> "GenerationSection":
        if self.k_min > self.k_max:
            raise ValueError("k_min must not exceed k_max")
        if self.k_max > self.n - 1:
            raise ValueError("k_max must not exceed n - 1")
        if self.weight_lo > self.weight_hi:
            raise ValueError("weight_lo must not exceed weight_hi")
        if not self.topologies or not self.kinds:
            raise ValueError("topologies and kinds must not be empty")
        return self


class TrainingSection(_Section):
    epochs: int = Field(default=100, ge=1)
    batch_size: int = Field(default=32, ge=1)
    lr: float = Field(default=1e-4, gt=0)
    weight_decay: float = Field(default=5e-5, ge=0)
    rho: float = Field(default=0.5, ge=0)
    d: int = Field(default=10, ge=2)
    layers: int = Field(default=2, ge=0)
    inner_heads: int = Field(default=2, ge=1)
    outer_heads: int = Field(default=3, ge=1)
    max_degree: int = Field(default=30, ge=1)
    leaky_slope: float = 0.2
    aggregator: Literal["gt", "classical"] = "gt"
    gradnorm_alpha: float = Field(default=1.5, ge=0)
    gradnorm_lr: float = Field(default=0.025, gt=0)
    val_fraction: float = Field(default=0.1, ge=0, lt=1)
    step2_epochs: int = Field(default=50, ge=1)
    freeze_features: bool = True
    transfer_fraction: float = Field(default=0.5, gt=0, le=1)
    transfer_epochs: int = Field(default=50, ge=1)
    curve_kind: CurveKind = CurveKind.CONTROLLABILITY
    rc_kind: CurveKind = CurveKind.CONNECTIVITY


class EvaluationSection(_Section):
    controllability_threshold: float = Field(default=0.03, gt=0)
    connectivity_threshold: float = Field(default=0.06, gt=0)
    timing_runs: int = Field(default=20, ge=1)
    timing_graphs: int = Field(default=5, ge=1)

    def threshold(self, kind: CurveKind) -> float:
        if kind == CurveKind.CONTROLLABILITY:
            return self.controllability_threshold
        return self.connectivity_threshold


class PathsSection(_Section):
    dataset_dir: str = "data/dataset"
    checkpoint: str = "data/model.ckpt"
    report_dir: str = "data/reports"

    @model_validator(mode="after")
    def check_distinct(self) -> "PathsSection":
        paths = [Path(p).resolve() for p in (self.dataset_dir, self.checkpoint, self.report_dir)]
        if len(set(paths)) != len(paths):
            raise ValueError("dataset_dir, checkpoint and report_dir must be distinct")
        return self


class PipelineConfig(_Section):
    pipeline: PipelineSection = Field(default_factory=PipelineSection)
    generation: GenerationSection = Field(default_factory=GenerationSection)
    training: TrainingSection = Field(default_factory=TrainingSection)
    evaluation: EvaluationSection = Field(default_factory=EvaluationSection)
    paths: PathsSection = Field(default_factory=PathsSection)

    @classmethod
    def from_ini_text(cls, text: str) -> "PipelineConfig":
        """Parse ``[section]`` / ``key = value`` text.

        Raises:
            ConfigError: On malformed text, unknown keys or invalid values.
        """
        parser = configparser.ConfigParser(interpolation=None)
        try:
            parser.read_string(text)
        except configparser.Error as exc:
            raise ConfigError(f"malformed config: {exc}")
        raw = {section: dict(parser.items(section)) for section in parser.sections()}
        return cls.from_dict(raw)

    @classmethod
    def from_ini(cls, path: Union[str, Path]) -> "PipelineConfig":
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}")
        return cls.from_ini_text(path.read_text())

    @classmethod
    def from_dict(cls, raw: dict) -> "PipelineConfig":
        try:
            return cls.model_validate(raw)
        except ValidationError as exc:
            raise ConfigError(str(exc))

    def with_overrides(
        self,
        seed: Optional[int] = None,
        threads: Optional[int] = None,
        out: Optional[str] = None,
    ) -> "PipelineConfig":
        """Apply command-line flags; ``out`` replaces the report directory."""
        raw = self.model_dump(mode="json")
        if seed is not None:
            raw["pipeline"]["seed"] = seed
        if threads is not None:
            raw["pipeline"]["threads"] = threads
        if out is not None:
            raw["paths"]["report_dir"] = out
        return PipelineConfig.from_dict(raw)

    def generation_hash(self) -> str:
        """sha256 of everything that determines a generated dataset."""
        canonical = json.dumps(
            {"seed": self.pipeline.seed, "generation": self.generation.model_dump(mode="json")},
            sort_keys=True,
            separators=(",", ":"),
        )
        return hashlib.sha256(canonical.encode()).hexdigest()
