import math

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator


class PhaseGrid(BaseModel):
    """
    Uniform tensor grid for the one-dimensional kinetic solvers. With ``with_memory``
    the local-best variable y shares the x mesh.
    """
    model_config = ConfigDict(extra="forbid")

    x_lo: float = -3.0
    x_hi: float = 3.0
    nx: int = Field(default=90, ge=3)
    v_lo: float = -4.0
    v_hi: float = 4.0
    nv: int = Field(default=120, ge=3)
    with_memory: bool = False
    dt: float = Field(default=0.01, gt=0.0)

    @model_validator(mode="after")
    def _check_box(self) -> "PhaseGrid":
        if self.x_lo >= self.x_hi or self.v_lo >= self.v_hi:
            raise ValueError("grid bounds must satisfy lo < hi")
        return self

    @property
    def x_nodes(self) -> np.ndarray:
        return np.linspace(self.x_lo, self.x_hi, self.nx)

    @property
    def v_nodes(self) -> np.ndarray:
        return np.linspace(self.v_lo, self.v_hi, self.nv)

    @property
    def y_nodes(self) -> np.ndarray:
        return self.x_nodes

    @property
    def dx(self) -> float:
        return (self.x_hi - self.x_lo) / (self.nx - 1)

    @property
    def dv(self) -> float:
        return (self.v_hi - self.v_lo) / (self.nv - 1)

    @property
    def dy(self) -> float:
        return self.dx

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.nx, self.nx, self.nv) if self.with_memory else (self.nx, self.nv)


class PhaseDensity(BaseModel):
    """f(x, v) of shape (nx, nv) or f(x, y, v) of shape (nx, ny, nv)."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    grid: PhaseGrid
    values: np.ndarray
    time: float = 0.0

    def mass(self) -> float:
        out = np.trapezoid(self.values, dx=self.grid.dv, axis=-1)
        if self.grid.with_memory:
            out = np.trapezoid(out, dx=self.grid.dy, axis=-1)
        return float(np.trapezoid(out, dx=self.grid.dx))


class Density1D(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    x_nodes: np.ndarray
    values: np.ndarray
    time: float = 0.0

    @property
    def dx(self) -> float:
        return float(self.x_nodes[1] - self.x_nodes[0])

    def mass(self) -> float:
        return float(np.trapezoid(self.values, self.x_nodes))


class MeanFieldParams(BaseModel):
    """
    Coefficients of the kinetic equations. Defaults follow the validation runs:
    gamma = 0.5, m = 0.5, lambda = 1, sigma = 1/sqrt(3), alpha = 30.
    """
    model_config = ConfigDict(extra="forbid")

    m: float = Field(default=0.5, gt=0.0)
    gamma: float = Field(default=0.5, ge=0.0)
    lam: float = Field(default=1.0, ge=0.0)
    sigma: float = Field(default=1.0 / math.sqrt(3.0), ge=0.0)
    lambda1: float = Field(default=1.0, ge=0.0)
    sigma1: float = Field(default=1.0 / math.sqrt(3.0), ge=0.0)
    lambda2: float = Field(default=1.0, ge=0.0)
    sigma2: float = Field(default=1.0 / math.sqrt(3.0), ge=0.0)
    nu: float = Field(default=0.5, ge=0.0)
    alpha: float = Field(default=30.0, ge=0.0)
    beta: float = Field(default=30.0, ge=0.0)
    limiter: bool = True
