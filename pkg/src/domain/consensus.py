"""
Regularized global best (softmin consensus), Laplace value and local-best switches.

All weights are shift-stabilized by the population minimum so that the largest
weight is exactly 1 and no exponent overflows for any alpha.
"""
import math
from typing import Optional

import numpy as np
from pydantic import BaseModel, Field

from src.domain.errors import ConsensusError


class ConsensusParams(BaseModel):
    alpha: float = Field(default=30.0, ge=0.0)
    beta: float = Field(default=30.0, ge=0.0)


def _validated(points: np.ndarray, values: np.ndarray, weights: Optional[np.ndarray]):
    if points.ndim == 1:
        points = points[:, None]
    if values.ndim != 1 or points.shape[0] == 0 or values.shape[0] == 0:
        raise ConsensusError("Consensus needs a non-empty population")
    if points.shape[0] != values.shape[0]:
        raise ConsensusError(f"{points.shape[0]} points but {values.shape[0]} values")
    if np.isnan(values).any():
        raise ConsensusError("NaN objective value in consensus population")
    if weights is not None:
        if weights.shape != values.shape or (weights < 0).any():
            raise ConsensusError("Measure weights must be non-negative and match the values")
        if not (weights > 0).any():
            raise ConsensusError("Measure weights have no support")
    return points, values


def log_weights(values: np.ndarray, alpha: float, weights: Optional[np.ndarray] = None) -> np.ndarray:
    """-alpha * (F - F_min) with F_min taken over the support; -inf outside the support."""
    support = np.ones(values.shape, dtype=bool) if weights is None else weights > 0
    f_min = np.min(values[support])
    with np.errstate(invalid="ignore"):
        logw = -alpha * (values - f_min) if alpha > 0 else np.zeros_like(values)
    if weights is not None:
        with np.errstate(divide="ignore"):
            logw = logw + np.log(weights)
    return np.where(support, logw, -np.inf)


def argmin_point(points, values, weights: Optional[np.ndarray] = None) -> np.ndarray:
    """Hard argmin over the support, lowest index on ties."""
    points, values = _validated(np.asarray(points, dtype=float), np.asarray(values, dtype=float),
                                None if weights is None else np.asarray(weights, dtype=float))
    masked = values if weights is None else np.where(np.asarray(weights) > 0, values, np.inf)
    return points[int(np.argmin(masked))].copy()


def global_best(points, values, alpha: float, weights: Optional[np.ndarray] = None) -> np.ndarray:
    """
    Softmin consensus sum_i x_i w_i exp(-alpha F_i) / sum_i w_i exp(-alpha F_i).

    ``weights`` are optional measure weights (quadrature weights times density on a
    grid); particles carry unit weight. alpha = inf returns the argmin point.
    """
    if alpha < 0 or math.isnan(alpha):
        raise ConsensusError(f"alpha must be non-negative, got {alpha}")
    points = np.asarray(points, dtype=float)
    values = np.asarray(values, dtype=float)
    w_in = None if weights is None else np.asarray(weights, dtype=float)
    squeeze = points.ndim == 1
    points, values = _validated(points, values, w_in)
    if math.isinf(alpha):
        best = argmin_point(points, values, w_in)
        return best[0] if squeeze else best
    w = np.exp(log_weights(values, alpha, w_in))
    result = np.sum(w[:, None] * points, axis=0) / np.sum(w)
    return result[0] if squeeze else result


def local_global_best(local_bests, values, alpha: float, weights: Optional[np.ndarray] = None) -> np.ndarray:
    """Consensus over the local-best memory of the swarm; same formula as global_best."""
    return global_best(local_bests, values, alpha, weights)


def laplace_value(values, alpha: float, weights: Optional[np.ndarray] = None) -> float:
    """-(1/alpha) log(mean exp(-alpha F)); tends to min F as alpha grows."""
    if not alpha > 0:
        raise ConsensusError(f"Laplace value needs alpha > 0, got {alpha}")
    values = np.asarray(values, dtype=float)
    w_in = None if weights is None else np.asarray(weights, dtype=float)
    if values.ndim != 1:
        raise ConsensusError("Laplace value expects a flat list of objective values")
    _validated(values[:, None], values, w_in)
    support = np.ones(values.shape, dtype=bool) if w_in is None else w_in > 0
    f_min = float(np.min(values[support]))
    if math.isinf(alpha):
        return f_min
    mass = values.shape[0] if w_in is None else float(np.sum(w_in))
    w = np.exp(log_weights(values, alpha, w_in))
    return f_min - math.log(float(np.sum(w)) / mass) / alpha


def hard_switch(fx, fy):
    """1 + sign(fy - fx): 2 when the candidate improves on the memory."""
    out = 1.0 + np.sign(np.asarray(fy, dtype=float) - np.asarray(fx, dtype=float))
    return out if out.ndim else float(out)


def smooth_switch(fx, fy, beta: float):
    """1 + tanh(beta (fy - fx)) in (0, 2); beta = inf falls back to hard_switch."""
    if math.isinf(beta):
        return hard_switch(fx, fy)
    out = 1.0 + np.tanh(beta * (np.asarray(fy, dtype=float) - np.asarray(fx, dtype=float)))
    return out if out.ndim else float(out)
