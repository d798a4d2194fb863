"""
Benchmark objectives for gradient-free global optimization.

Every objective is vectorized over leading axes: ``eval`` accepts a single
point of shape (d,) or a population of shape (N, d) and returns a float or an
array of shape (N,).
"""
from typing import Callable, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.domain.errors import ConfigError, DimensionError, DomainError


def _ackley(u: np.ndarray, eta: Optional[np.ndarray]) -> np.ndarray:
    d = u.shape[-1]
    r = np.sqrt(np.sum(u * u, axis=-1) / d)
    c = np.sum(np.cos(2.0 * np.pi * u), axis=-1) / d
    return -20.0 * np.exp(-0.2 * r) - np.exp(c) + 20.0 + np.e


def _griewank(u: np.ndarray, eta: Optional[np.ndarray]) -> np.ndarray:
    # index divisor (not its square root) as printed in the benchmark table
    idx = np.arange(1, u.shape[-1] + 1, dtype=float)
    return 1.0 + np.sum(u * u, axis=-1) / 4000.0 - np.prod(np.cos(u / idx), axis=-1)


def _rastrigin(u: np.ndarray, eta: Optional[np.ndarray]) -> np.ndarray:
    d = u.shape[-1]
    return 10.0 * d + np.sum(u * u - 10.0 * np.cos(2.0 * np.pi * u), axis=-1)


def _rosenbrock(u: np.ndarray, eta: Optional[np.ndarray]) -> np.ndarray:
    head, tail = u[..., :-1], u[..., 1:]
    return np.sum(100.0 * (tail - head * head) ** 2 + (1.0 - head) ** 2, axis=-1)


def _salomon(u: np.ndarray, eta: Optional[np.ndarray]) -> np.ndarray:
    r = np.sqrt(np.sum(u * u, axis=-1))
    return 1.0 - np.cos(2.0 * np.pi * r) + 0.1 * r


def _schwefel220(u: np.ndarray, eta: Optional[np.ndarray]) -> np.ndarray:
    return np.sum(np.abs(u), axis=-1)


def _xsy_random(u: np.ndarray, eta: Optional[np.ndarray]) -> np.ndarray:
    powers = np.arange(1, u.shape[-1] + 1, dtype=float)
    return np.sum(eta * np.abs(u) ** powers, axis=-1)


def _xsy4(u: np.ndarray, eta: Optional[np.ndarray]) -> np.ndarray:
    s = np.sum(np.sin(u) ** 2, axis=-1)
    g = np.exp(-np.sum(u * u, axis=-1))
    h = np.exp(-np.sum(np.sin(np.sqrt(np.abs(u))) ** 2, axis=-1))
    return (s - g) * h


class _TableEntry(BaseModel):
    func: Callable[[np.ndarray, Optional[np.ndarray]], np.ndarray]
    lo: float
    hi: float
    minimizer: float
    min_value: float


_TABLE: dict[str, _TableEntry] = {
    "ackley": _TableEntry(func=_ackley, lo=-32.0, hi=32.0, minimizer=0.0, min_value=0.0),
    "griewank": _TableEntry(func=_griewank, lo=-600.0, hi=600.0, minimizer=0.0, min_value=0.0),
    "rastrigin": _TableEntry(func=_rastrigin, lo=-5.12, hi=5.12, minimizer=0.0, min_value=0.0),
    "rosenbrock": _TableEntry(func=_rosenbrock, lo=-5.0, hi=10.0, minimizer=1.0, min_value=0.0),
    "salomon": _TableEntry(func=_salomon, lo=-100.0, hi=100.0, minimizer=0.0, min_value=0.0),
    "schwefel220": _TableEntry(func=_schwefel220, lo=-100.0, hi=100.0, minimizer=0.0, min_value=0.0),
    "xsy_random": _TableEntry(func=_xsy_random, lo=-5.0, hi=5.0, minimizer=0.0, min_value=0.0),
    "xsy4": _TableEntry(func=_xsy4, lo=-10.0, hi=10.0, minimizer=0.0, min_value=-1.0),
}

OBJECTIVE_NAMES: tuple[str, ...] = tuple(_TABLE)


class Objective(BaseModel):
    """
    Immutable benchmark function with its box, minimizer and transforms.

    Evaluation maps x to u = x - shift, then (when rescaled) u = center + half_width * u,
    evaluates the closed form and subtracts value_offset.
    """
    model_config = ConfigDict(frozen=True)

    name: str
    dim: int = Field(..., gt=0)
    domain_lo: tuple[float, ...]
    domain_hi: tuple[float, ...]
    minimizer: tuple[float, ...]
    min_value: float
    shift: tuple[float, ...]
    rescaled: bool = False
    center: Optional[tuple[float, ...]] = None
    half_width: Optional[tuple[float, ...]] = None
    value_offset: float = 0.0
    random_coeffs: Optional[tuple[float, ...]] = None

    @model_validator(mode="after")
    def _check_shapes(self) -> "Objective":
        if self.name not in _TABLE:
            raise ValueError(f"Unknown objective '{self.name}'. Known: {', '.join(OBJECTIVE_NAMES)}")
        for field in ("domain_lo", "domain_hi", "minimizer", "shift"):
            if len(getattr(self, field)) != self.dim:
                raise ValueError(f"{field} has length {len(getattr(self, field))}, expected {self.dim}")
        if any(lo >= hi for lo, hi in zip(self.domain_lo, self.domain_hi)):
            raise ValueError(f"Empty domain for {self.name}: every lo must be < hi")
        if self.rescaled and (self.center is None or self.half_width is None):
            raise ValueError("Rescaled objective needs center and half_width")
        if self.random_coeffs is not None and len(self.random_coeffs) != self.dim:
            raise ValueError("random_coeffs length must equal dim")
        return self

    @property
    def needs_coefficients(self) -> bool:
        return self.name == "xsy_random" and self.random_coeffs is None

    @property
    def lower(self) -> np.ndarray:
        return np.asarray(self.domain_lo, dtype=float)

    @property
    def upper(self) -> np.ndarray:
        return np.asarray(self.domain_hi, dtype=float)

    @property
    def x_star(self) -> np.ndarray:
        return np.asarray(self.minimizer, dtype=float)

    def eval(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.ndim == 0 or x.shape[-1] != self.dim:
            raise DimensionError(f"{self.name} expects points of dimension {self.dim}, got shape {x.shape}")
        if self.needs_coefficients:
            raise ConfigError("xsy_random coefficients have not been drawn; call draw_coefficients first")
        u = x - np.asarray(self.shift)
        if self.rescaled:
            u = np.asarray(self.center) + np.asarray(self.half_width) * u
        eta = None if self.random_coeffs is None else np.asarray(self.random_coeffs)
        value = _TABLE[self.name].func(u, eta) - self.value_offset
        return value if value.ndim else float(value)

    def draw_coefficients(self, rng: np.random.Generator) -> "Objective":
        """Fix the random data of xsy_random for one run. Other objectives are returned unchanged."""
        if self.name != "xsy_random":
            return self
        return self.model_copy(update={"random_coeffs": tuple(rng.uniform(0.0, 1.0, self.dim).tolist())})


class EvalCounter(BaseModel):
    count: int = Field(default=0, ge=0)

    def add(self, n: int) -> None:
        if n < 0:
            raise ValueError("Evaluation counts only grow")
        self.count += n


def make_objective(name: str,
                   dim: int,
                   domain: Optional[tuple[float, float]] = None,
                   rng: Optional[np.random.Generator] = None) -> Objective:
    """
    Build a table objective in its classical domain, or in the cube [lo, hi]^d
    when ``domain`` overrides it. ``rng`` draws the xsy_random coefficients.
    """
    key = name.lower()
    if key not in _TABLE:
        raise ConfigError(f"Unknown objective '{name}'. Known: {', '.join(OBJECTIVE_NAMES)}")
    if dim < 1:
        raise DimensionError(f"dim must be positive, got {dim}")
    entry = _TABLE[key]
    lo, hi = domain if domain is not None else (entry.lo, entry.hi)
    obj = Objective(
        name=key,
        dim=dim,
        domain_lo=(float(lo),) * dim,
        domain_hi=(float(hi),) * dim,
        minimizer=(entry.minimizer,) * dim,
        min_value=entry.min_value,
        shift=(0.0,) * dim,
    )
    return obj.draw_coefficients(rng) if rng is not None else obj


def rescale_to_reference(obj: Objective) -> Objective:
    """
    Map the objective's box onto [-1, 1]^d and translate values so the minimum is 0.
    """
    if obj.rescaled:
        raise ConfigError(f"{obj.name} is already defined on the reference cube")
    lo, hi = obj.lower, obj.upper
    center = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    # old shift s becomes s / half in cube coordinates
    shift = np.asarray(obj.shift) / half
    minimizer = (obj.x_star - center) / half
    return obj.model_copy(update={
        "domain_lo": (-1.0,) * obj.dim,
        "domain_hi": (1.0,) * obj.dim,
        "minimizer": tuple(minimizer.tolist()),
        "min_value": 0.0,
        "shift": tuple(shift.tolist()),
        "rescaled": True,
        "center": tuple(center.tolist()),
        "half_width": tuple(half.tolist()),
        "value_offset": obj.value_offset + obj.min_value,
    })


def shift_minimum(obj: Objective, x_star) -> Objective:
    """Translate the objective so its minimizer sits at ``x_star``."""
    target = np.asarray(x_star, dtype=float)
    if target.shape != (obj.dim,):
        raise DimensionError(f"x_star must have shape ({obj.dim},), got {target.shape}")
    if np.any(target < obj.lower) or np.any(target > obj.upper):
        raise DomainError(f"x_star {target.tolist()} lies outside the domain of {obj.name}")
    delta = target - obj.x_star
    return obj.model_copy(update={
        "shift": tuple((np.asarray(obj.shift) + delta).tolist()),
        "minimizer": tuple(target.tolist()),
    })
