"""Experiment configuration files.

Each experiment reads a flat ``key=value`` file from the experiments
directory. Lists are comma separated; unknown keys are rejected.
"""

import logging
from pathlib import Path
from typing import Annotated, Any, Optional, TypeVar, Union

from dotenv import dotenv_values
from pydantic import (
    BaseModel,
    BeforeValidator,
    ConfigDict,
    Field,
    field_validator,
    model_validator,
)

from flblab.config import settings
from flblab.models import DurationMode

logger = logging.getLogger(__name__)


def _split_commas(value: Any) -> Any:
    if isinstance(value, str):
        return [part.strip() for part in value.split(",") if part.strip()]
    return value


def _optional_int(value: Any) -> Any:
    if isinstance(value, str) and value.strip() == "":
        return None
    return value


IntList = Annotated[list[int], BeforeValidator(_split_commas)]
FloatList = Annotated[list[float], BeforeValidator(_split_commas)]
StrList = Annotated[list[str], BeforeValidator(_split_commas)]
OptionalSeed = Annotated[Optional[int], BeforeValidator(_optional_int)]


class ExperimentConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    seed: OptionalSeed = Field(None, description="Overrides FLBLAB_SEED when set")

    def resolved_seed(self) -> int:
        return settings.seed if self.seed is None else self.seed


class WorstcaseConfig(ExperimentConfig):
    M: int = Field(1000, ge=1, description="Number of jobs in the full instance")
    R: float = Field(10.0, ge=1, description="Reward bound")
    D: float = Field(10.0, ge=1, description="Duration bound")
    c: int = Field(200, ge=1, description="Server capacity")
    policies: StrList = Field(default_factory=lambda: ["flb", "balance", "greedy"])


class RandomConfig(ExperimentConfig):
    n: int = Field(3, ge=1, description="Number of identical servers")
    capacities: IntList = Field(default_factory=lambda: [5, 10, 20, 50])
    m: int = Field(500, ge=1, description="Jobs per instance")
    rates: FloatList = Field(default_factory=lambda: [1.0, 10.0, 50.0, 100.0, 250.0])
    trials: int = Field(20, ge=2, description="Random instances per (c, rate)")
    mu: float = Field(2.0, description="Truncated-normal mean")
    sigma: float = Field(3.0, gt=0, description="Truncated-normal standard deviation")
    R: float = Field(10.0, ge=1, description="Reward bound handed to FLB and BALANCE")
    D: float = Field(10.0, ge=1, description="Duration bound handed to FLB and BALANCE")
    policies: StrList = Field(default_factory=lambda: ["flb", "balance", "greedy"])
    box_pairs: list[tuple[int, float]] = Field(
        default_factory=lambda: [(10, 50.0), (50, 100.0)],
        description="(c, rate) pairs whose per-trial ratios are kept for box plots",
    )

    @field_validator("box_pairs", mode="before")
    @classmethod
    def _parse_pairs(cls, value: Any) -> Any:
        if isinstance(value, str):
            pairs = []
            for item in _split_commas(value):
                c, sep, rate = item.partition(":")
                if not sep:
                    raise ValueError(f"box pair {item!r} is not c:rate")
                pairs.append((int(c), float(rate)))
            return pairs
        return value


class CertificateConfig(ExperimentConfig):
    trials: int = Field(200, ge=0, description="Random small instances per duration mode")
    max_jobs: int = Field(10, ge=1)
    max_servers: int = Field(2, ge=1)
    min_capacity: int = Field(1, ge=1, description="Smallest server capacity drawn")
    max_capacity: int = Field(3, ge=1)
    R: int = Field(3, ge=1)
    D: int = Field(3, ge=1)
    modes: Annotated[list[DurationMode], BeforeValidator(_split_commas)] = Field(
        default_factory=lambda: [DurationMode.INTEGER, DurationMode.REAL]
    )

    @model_validator(mode="after")
    def _capacity_range(self) -> "CertificateConfig":
        if self.min_capacity > self.max_capacity:
            raise ValueError(
                f"min_capacity {self.min_capacity} exceeds max_capacity {self.max_capacity}"
            )
        return self


class BoundsConfig(ExperimentConfig):
    points: int = Field(20, ge=2, description="Grid points per axis")
    low: float = Field(1.0, ge=1)
    high: float = Field(1000.0, ge=1)
    solvers: StrList = Field(default_factory=lambda: ["int", "real"])


ConfigT = TypeVar("ConfigT", bound=ExperimentConfig)


def load_config(path: Union[Path, str], model: type[ConfigT]) -> ConfigT:
    path = Path(path)
    if not path.is_file():
        raise ValueError(f"experiment config {path} not found")
    values = {k: v for k, v in dotenv_values(path).items() if v is not None}
    unknown = sorted(set(values) - set(model.model_fields))
    if unknown:
        raise ValueError(f"{path}: unknown keys {', '.join(unknown)}")
    config = model.model_validate(values)
    logger.debug("loaded %s from %s", model.__name__, path)
    return config


def default_config_path(name: str) -> Path:
    return Path(settings.experiments_dir) / f"{name}.conf"
