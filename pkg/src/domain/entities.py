import math
from enum import Enum
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.domain.consensus import ConsensusParams


class SolverMode(str, Enum):
    SDPSO_NOMEM = "sdpso_nomem"
    SDPSO_MEM = "sdpso_mem"
    CBO_MEM = "cbo_mem"
    CLASSIC_PSO = "classic_pso"
    CLASSIC_PSO_INERTIA = "classic_pso_inertia"


class NoiseKind(str, Enum):
    GAUSSIAN = "gaussian"
    # sqrt(3) * U[-1, 1], unit variance
    UNIFORM = "uniform"


class VelocityInit(str, Enum):
    ZERO = "zero"
    UNIFORM = "uniform"


class SolverConfig(BaseModel):
    """
    Dynamical and regularization parameters of every swarm scheme.

    ``lam``/``sigma`` drive the memoryless scheme, ``lambda1``/``sigma1`` the pull to
    the local best and ``lambda2``/``sigma2`` the pull to the global best. ``gamma``
    defaults to 1 - m when left unset.
    """
    model_config = ConfigDict(extra="forbid", ser_json_inf_nan="constants")

    mode: SolverMode = SolverMode.SDPSO_NOMEM
    m: float = Field(default=0.0, ge=0.0, description="inertia weight")
    gamma: Optional[float] = Field(default=None, ge=0.0, description="friction, 1 - m when unset")
    lam: float = Field(default=1.0, ge=0.0)
    sigma: float = Field(default=1.0 / math.sqrt(3.0), ge=0.0)
    lambda1: float = Field(default=0.0, ge=0.0)
    sigma1: float = Field(default=0.0, ge=0.0)
    lambda2: float = Field(default=1.0, ge=0.0)
    sigma2: float = Field(default=1.0 / math.sqrt(3.0), ge=0.0)
    nu: float = Field(default=0.5, ge=0.0, description="memory relaxation rate")
    alpha: float = Field(default=30.0, ge=0.0)
    beta: float = Field(default=30.0, ge=0.0)
    dt: float = Field(default=0.01, gt=0.0)
    noise: NoiseKind = NoiseKind.GAUSSIAN
    c1: float = Field(default=2.0, ge=0.0)
    c2: float = Field(default=2.0, ge=0.0)
    clamp_to_domain: bool = False
    velocity_init: VelocityInit = VelocityInit.ZERO
    velocity_box: tuple[float, float] = (-4.0, 4.0)

    @model_validator(mode="after")
    def _check_coupling(self) -> "SolverConfig":
        if self.gamma is None and self.m > 1.0:
            raise ValueError(f"gamma = 1 - m is negative for m = {self.m}; set gamma explicitly")
        if self.m + self.friction * self.dt <= 0.0:
            raise ValueError("m + gamma * dt must be positive (set gamma > 0 when m = 0)")
        if self.velocity_box[0] > self.velocity_box[1]:
            raise ValueError("velocity_box must be ordered (lo, hi)")
        return self

    @property
    def friction(self) -> float:
        return 1.0 - self.m if self.gamma is None else self.gamma

    @property
    def consensus(self) -> ConsensusParams:
        return ConsensusParams(alpha=self.alpha, beta=self.beta)

    @property
    def uses_memory(self) -> bool:
        return self.mode != SolverMode.SDPSO_NOMEM

    @property
    def is_classic(self) -> bool:
        return self.mode in (SolverMode.CLASSIC_PSO, SolverMode.CLASSIC_PSO_INERTIA)

    @property
    def inertia_weight(self) -> float:
        """w of the classic update; the plain classic mode keeps w = 1."""
        return 1.0 if self.mode == SolverMode.CLASSIC_PSO else self.m

    @classmethod
    def from_classic(cls, c1: float, c2: float, w: float, **overrides) -> "SolverConfig":
        """
        Memory scheme parameters under which one step coincides with the classic
        inertia PSO update v' = w v + c1 R1 (p - x) + c2 R2 (g - x).
        """
        params = dict(
            mode=SolverMode.SDPSO_MEM,
            m=w,
            gamma=1.0 - w,
            lambda1=c1 / 2.0,
            sigma1=c1 / (2.0 * math.sqrt(3.0)),
            lambda2=c2 / 2.0,
            sigma2=c2 / (2.0 * math.sqrt(3.0)),
            dt=1.0,
            nu=0.5,
            alpha=math.inf,
            beta=math.inf,
            noise=NoiseKind.UNIFORM,
            c1=c1,
            c2=c2,
        )
        params.update(overrides)
        return cls(**params)


class Swarm(BaseModel):
    """
    Particle state: positions X, velocities V (N x d), optional local-best memory P,
    cached objective values of X and P, and the step counter.
    """
    model_config = ConfigDict(arbitrary_types_allowed=True)

    X: np.ndarray
    V: np.ndarray
    P: Optional[np.ndarray] = None
    fX: np.ndarray
    fP: Optional[np.ndarray] = None
    step_index: int = 0

    @property
    def n_particles(self) -> int:
        return self.X.shape[0]

    @property
    def dim(self) -> int:
        return self.X.shape[1]

    def is_finite(self) -> bool:
        arrays = [self.X, self.V, self.fX]
        if self.P is not None:
            arrays += [self.P, self.fP]
        return all(np.isfinite(a).all() for a in arrays)
