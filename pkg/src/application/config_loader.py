"""
The single structured config document: every section optional, unknown keys rejected,
and a canonical JSON form that loads back to the same document.
"""
import json
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from src.domain.entities import SolverConfig
from src.domain.errors import ConfigError
from src.domain.experiment import ExperimentSpec, ObjectiveSpec
from src.domain.meanfield import MeanFieldParams, PhaseGrid


class MeanFieldRunSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    pde: str = Field(default="pso", pattern="^(pso|pso_mem|cbo)$")
    objective: ObjectiveSpec = Field(default_factory=lambda: ObjectiveSpec(name="ackley", dim=1, domain=(-3.0, 3.0)))
    grid: PhaseGrid = Field(default_factory=PhaseGrid)
    params: MeanFieldParams = Field(default_factory=MeanFieldParams)
    cbo_nodes: int = Field(default=120, ge=3)
    t_final: float = Field(default=1.0, gt=0.0)
    snapshots: list[float] = Field(default_factory=lambda: [0.5, 1.0])
    compare_particles: int = Field(default=0, ge=0)
    seed: int = Field(default=0, ge=0)


class LimitSpec(BaseModel):
    model_config = ConfigDict(extra="forbid", ser_json_inf_nan="constants")

    objective: ObjectiveSpec = Field(default_factory=lambda: ObjectiveSpec(name="ackley", dim=1, domain=(-3.0, 3.0)))
    solver: SolverConfig = Field(default_factory=SolverConfig)
    m_list: list[float] = Field(default_factory=lambda: [0.2, 0.1, 0.05, 0.025])
    n_particles: int = Field(default=1000, ge=1)
    t_final: float = Field(default=1.0, gt=0.0)
    seed: int = Field(default=0, ge=0)


class ConfigDocument(BaseModel):
    model_config = ConfigDict(extra="forbid", ser_json_inf_nan="constants")

    experiment: Optional[ExperimentSpec] = None
    meanfield: Optional[MeanFieldRunSpec] = None
    limit: Optional[LimitSpec] = None

    def canonical_json(self) -> str:
        """Sorted keys, defaults filled in."""
        data = json.loads(self.model_dump_json(round_trip=True))
        return json.dumps(data, sort_keys=True, indent=2)


def load_config(text: str) -> ConfigDocument:
    try:
        return ConfigDocument.model_validate_json(text)
    except ValidationError as e:
        raise ConfigError(f"Invalid config document:\n{e}") from e


def load_config_file(path: str) -> ConfigDocument:
    try:
        with open(path, encoding="utf-8") as fh:
            return load_config(fh.read())
    except OSError as e:
        raise ConfigError(f"Cannot read config {path}: {e}") from e


def config_schema() -> str:
    return json.dumps(ConfigDocument.model_json_schema(), indent=2, sort_keys=True)
