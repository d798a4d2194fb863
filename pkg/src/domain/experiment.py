import hashlib
from enum import Enum
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from src.domain.entities import SolverConfig
from src.domain.objectives import Objective, make_objective, rescale_to_reference, shift_minimum


class SuccessCriterion(str, Enum):
    POSITION_ONLY = "position_only"
    POSITION_OR_VALUE = "position_or_value"


class ObjectiveSpec(BaseModel):
    """
    Recipe for an objective: table function, dimension, optional box override,
    reference-cube rescaling and translation of the minimizer (applied in that order).
    """
    model_config = ConfigDict(extra="forbid")

    name: str = "ackley"
    dim: int = Field(default=20, gt=0)
    domain: Optional[tuple[float, float]] = None
    rescale: bool = False
    x_star: Optional[list[float]] = None

    def build(self, rng: Optional[np.random.Generator] = None) -> Objective:
        obj = make_objective(self.name, self.dim, self.domain, rng)
        if self.rescale:
            obj = rescale_to_reference(obj)
        if self.x_star is not None:
            obj = shift_minimum(obj, self.x_star)
        return obj


class StoppingRule(BaseModel):
    model_config = ConfigDict(extra="forbid")

    delta_stall: float = Field(default=1e-4, gt=0.0)
    n_stall: int = Field(default=1000, ge=1)
    n_max: int = Field(default=10_000, ge=1)


class ExperimentSpec(BaseModel):
    """One row of a benchmark table: objective, solver, swarm size and the replicate protocol."""
    model_config = ConfigDict(extra="forbid", ser_json_inf_nan="constants")

    label: str = ""
    objective: ObjectiveSpec = Field(default_factory=ObjectiveSpec)
    solver: SolverConfig = Field(default_factory=SolverConfig)
    n_particles: int = Field(default=100, ge=1)
    n_r: int = Field(default=500, ge=1)
    seed: int = Field(default=0, ge=0)
    delta_err: float = Field(default=0.25, gt=0.0)
    delta_fun: float = Field(default=0.01, gt=0.0)
    delta_stall: float = Field(default=1e-4, gt=0.0)
    n_stall: int = Field(default=1000, ge=1)
    n_max: int = Field(default=10_000, ge=1)
    success_criterion: SuccessCriterion = SuccessCriterion.POSITION_ONLY
    init_box: Optional[tuple[float, float]] = None

    @property
    def stopping(self) -> StoppingRule:
        return StoppingRule(delta_stall=self.delta_stall, n_stall=self.n_stall, n_max=self.n_max)

    def canonical_json(self) -> str:
        return self.model_dump_json(exclude={"label"}, round_trip=True)

    def fingerprint(self) -> str:
        return hashlib.sha256(self.canonical_json().encode("utf-8")).hexdigest()[:12]


class TrajectoryRecord(BaseModel):
    step: int
    consensus: list[float]
    value: float
    variance: float


class OptimizationResult(BaseModel):
    """Outcome of a single swarm run, before it is judged against a spec."""
    consensus: list[float]
    f_value: float
    n_iter: int
    n_evals: int
    diverged: bool = False
    divergence_step: Optional[int] = None
    stalled: bool = False
    trajectory: Optional[list[TrajectoryRecord]] = None


class RunReport(BaseModel):
    run_id: int
    seed: int
    success: bool
    diverged: bool
    error_l2: float = Field(..., ge=0.0)
    f_value: float
    n_iter: int


class AggregateReport(BaseModel):
    fingerprint: str
    label: str = ""
    n_particles: int
    n_runs: int
    rate: float = Field(..., ge=0.0, le=1.0)
    mean_error: Optional[float] = None
    mean_f: float
    mean_iter: float
    n_diverged: int = 0
