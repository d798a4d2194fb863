from typing import Optional

from pydantic import BaseModel, Field


class LyapunovSample(BaseModel):
    """Population surrogate of the energy functional H with its two quadratic parts."""
    t: float
    H: float
    variance: float = Field(..., ge=0.0)
    kinetic: float = Field(..., ge=0.0)
    mu: Optional[float] = None


class DistanceReport(BaseModel):
    w1: float = Field(..., ge=0.0)
    l1: float = Field(..., ge=0.0)
    sup: float = Field(..., ge=0.0)


class RateRow(BaseModel):
    m: float
    gap: float = Field(..., ge=0.0)
    w1: float = Field(..., ge=0.0)


class LaplaceRow(BaseModel):
    alpha: float
    value: float
    gap: float


class DecayFit(BaseModel):
    """Least-squares fit of log E[H] against time with a two-sided 95% interval on the slope."""
    slope: float
    intercept: float
    ci_low: float
    ci_high: float
    n_replicates: int
    mu_initial: Optional[float] = None

    @property
    def decays(self) -> bool:
        return self.ci_high < 0.0
