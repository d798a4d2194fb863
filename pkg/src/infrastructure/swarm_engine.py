"""
Numpy time steppers for the swarm schemes.

Every step is a two-phase barrier: the consensus point is reduced from the state
at step n, then all particles move independently. Each step draws exactly two
(N, d) noise blocks from the run's RngStream, theta1 then theta2, whatever the
mode, so runs that share a seed share their noise tape.
"""
import logging
import math
from typing import NamedTuple, Optional

import numpy as np

from src.domain.consensus import argmin_point, global_best, local_global_best, smooth_switch
from src.domain.entities import NoiseKind, SolverConfig, SolverMode, Swarm, VelocityInit
from src.domain.errors import ConfigError, DivergenceError, DomainError
from src.domain.objectives import EvalCounter, Objective
from src.domain.solver_interfaces import ISwarmEngine

logger = logging.getLogger(__name__)

SQRT3 = math.sqrt(3.0)


class SeedStreams(NamedTuple):
    init: np.random.Generator
    noise: np.random.Generator
    objective: np.random.Generator


def seed_streams(seed: int) -> SeedStreams:
    """Independent generators for initial data, noise and objective data of one run."""
    init_seq, noise_seq, obj_seq = np.random.SeedSequence(seed).spawn(3)
    return SeedStreams(np.random.default_rng(init_seq),
                       np.random.default_rng(noise_seq),
                       np.random.default_rng(obj_seq))


class RngStream:
    """Noise tape of one run: per-step, per-particle, per-dimension draws with unit variance."""

    def __init__(self, seed: int, kind: NoiseKind = NoiseKind.GAUSSIAN):
        self.seed = seed
        self.kind = NoiseKind(kind)
        self._rng = seed_streams(seed).noise

    def draw(self, n: int, d: int) -> tuple[np.ndarray, np.ndarray]:
        if self.kind == NoiseKind.GAUSSIAN:
            return self._rng.standard_normal((n, d)), self._rng.standard_normal((n, d))
        return (SQRT3 * self._rng.uniform(-1.0, 1.0, (n, d)),
                SQRT3 * self._rng.uniform(-1.0, 1.0, (n, d)))


def _box(box, dim: int) -> tuple[np.ndarray, np.ndarray]:
    lo = np.broadcast_to(np.asarray(box[0], dtype=float), (dim,))
    hi = np.broadcast_to(np.asarray(box[1], dtype=float), (dim,))
    return lo, hi


class NumpySwarmEngine(ISwarmEngine):

    def init(self, objective: Objective, config: SolverConfig, n_particles: int, seed: int,
             init_box=None) -> Swarm:
        if n_particles < 1:
            raise ConfigError(f"n_particles must be >= 1, got {n_particles}")
        d = objective.dim
        if init_box is None:
            lo, hi = objective.lower, objective.upper
        else:
            lo, hi = _box(init_box, d)
        if np.any(lo > hi):
            raise DomainError(f"Empty initialization box [{lo.tolist()}, {hi.tolist()}]")
        if np.any(lo < objective.lower) or np.any(hi > objective.upper):
            raise DomainError(f"Initialization box is not inside the domain of {objective.name}")

        rng = seed_streams(seed).init
        X = rng.uniform(lo, hi, (n_particles, d))
        if config.velocity_init == VelocityInit.UNIFORM and config.mode != SolverMode.CBO_MEM:
            V = rng.uniform(config.velocity_box[0], config.velocity_box[1], (n_particles, d))
        else:
            V = np.zeros((n_particles, d))
        fX = np.asarray(objective.eval(X), dtype=float)
        if config.uses_memory:
            return Swarm(X=X, V=V, P=X.copy(), fX=fX, fP=fX.copy())
        return Swarm(X=X, V=V, fX=fX)

    def consensus(self, swarm: Swarm, config: SolverConfig) -> np.ndarray:
        if config.is_classic:
            return argmin_point(swarm.P, swarm.fP)
        params = config.consensus
        if config.uses_memory:
            return local_global_best(swarm.P, swarm.fP, params.alpha)
        return global_best(swarm.X, swarm.fX, params.alpha)

    def step(self, swarm: Swarm, objective: Objective, config: SolverConfig, rng: RngStream,
             counter: Optional[EvalCounter] = None, consensus: Optional[np.ndarray] = None) -> Swarm:
        if config.mode == SolverMode.SDPSO_NOMEM:
            return self.step_no_memory(swarm, objective, config, rng, counter, consensus)
        if config.mode == SolverMode.SDPSO_MEM:
            return self.step_with_memory(swarm, objective, config, rng, counter, consensus)
        if config.mode == SolverMode.CBO_MEM:
            return self.step_cbo(swarm, objective, config, rng, counter, consensus)
        return self.step_classic(swarm, objective, config, rng, counter, consensus)

    def step_no_memory(self, swarm: Swarm, objective: Objective, config: SolverConfig, rng: RngStream,
                       counter: Optional[EvalCounter] = None, consensus: Optional[np.ndarray] = None) -> Swarm:
        q = self.consensus(swarm, config) if consensus is None else consensus
        _, theta = rng.draw(swarm.n_particles, swarm.dim)
        dt = config.dt
        denom = config.m + config.friction * dt
        diff = q - swarm.X
        V = ((config.m / denom) * swarm.V
             + (config.lam * dt / denom) * diff
             + (config.sigma * math.sqrt(dt) / denom) * diff * theta)
        X = swarm.X + dt * V
        fX = self._evaluate(objective, X, counter)
        return self._checked(Swarm(X=X, V=V, fX=fX, step_index=swarm.step_index + 1))

    def step_with_memory(self, swarm: Swarm, objective: Objective, config: SolverConfig, rng: RngStream,
                         counter: Optional[EvalCounter] = None, consensus: Optional[np.ndarray] = None) -> Swarm:
        g = self.consensus(swarm, config) if consensus is None else consensus
        theta1, theta2 = rng.draw(swarm.n_particles, swarm.dim)
        dt = config.dt
        denom = config.m + config.friction * dt
        diff1 = swarm.P - swarm.X
        diff2 = g - swarm.X
        root = math.sqrt(dt)
        V = ((config.m / denom) * swarm.V
             + (config.lambda1 * dt / denom) * diff1
             + (config.lambda2 * dt / denom) * diff2
             + (config.sigma1 * root / denom) * diff1 * theta1
             + (config.sigma2 * root / denom) * diff2 * theta2)
        X = swarm.X + dt * V
        fX = self._evaluate(objective, X, counter)
        P, fP = self._relax_memory(swarm.P, swarm.fP, X, fX, objective, config, counter)
        return self._checked(Swarm(X=X, V=V, P=P, fX=fX, fP=fP, step_index=swarm.step_index + 1))

    def step_cbo(self, swarm: Swarm, objective: Objective, config: SolverConfig, rng: RngStream,
                 counter: Optional[EvalCounter] = None, consensus: Optional[np.ndarray] = None) -> Swarm:
        g = self.consensus(swarm, config) if consensus is None else consensus
        theta1, theta2 = rng.draw(swarm.n_particles, swarm.dim)
        dt = config.dt
        root = math.sqrt(dt)
        diff1 = swarm.P - swarm.X
        diff2 = g - swarm.X
        X = (swarm.X
             + (config.lambda1 * dt) * diff1
             + (config.lambda2 * dt) * diff2
             + (config.sigma1 * root) * diff1 * theta1
             + (config.sigma2 * root) * diff2 * theta2)
        fX = self._evaluate(objective, X, counter)
        P, fP = self._relax_memory(swarm.P, swarm.fP, X, fX, objective, config, counter)
        return self._checked(Swarm(X=X, V=swarm.V, P=P, fX=fX, fP=fP, step_index=swarm.step_index + 1))

    def step_classic(self, swarm: Swarm, objective: Objective, config: SolverConfig, rng: RngStream,
                     counter: Optional[EvalCounter] = None, consensus: Optional[np.ndarray] = None) -> Swarm:
        if rng.kind != NoiseKind.UNIFORM:
            raise ConfigError("Classic PSO draws R1, R2 from a uniform noise stream")
        g = self.consensus(swarm, config) if consensus is None else consensus
        theta1, theta2 = rng.draw(swarm.n_particles, swarm.dim)
        # R in [0, 1] from theta = sqrt(3) U[-1, 1]
        r1 = 0.5 * (1.0 + theta1 / SQRT3)
        r2 = 0.5 * (1.0 + theta2 / SQRT3)
        V = (config.inertia_weight * swarm.V
             + config.c1 * r1 * (swarm.P - swarm.X)
             + config.c2 * r2 * (g - swarm.X))
        X = swarm.X + V
        if config.clamp_to_domain:
            X = np.clip(X, objective.lower, objective.upper)
        fX = self._evaluate(objective, X, counter)
        improved = fX < swarm.fP
        P = np.where(improved[:, None], X, swarm.P)
        fP = np.where(improved, fX, swarm.fP)
        return self._checked(Swarm(X=X, V=V, P=P, fX=fX, fP=fP, step_index=swarm.step_index + 1))

    def _relax_memory(self, P: np.ndarray, fP: np.ndarray, X: np.ndarray, fX: np.ndarray,
                      objective: Objective, config: SolverConfig,
                      counter: Optional[EvalCounter]) -> tuple[np.ndarray, np.ndarray]:
        # P' = P + nu dt S (X' - P), written as a convex combination so full replacement is exact
        if config.nu == 0.0:
            return P, fP
        coef = config.nu * config.dt * np.asarray(smooth_switch(fX, fP, config.consensus.beta))
        P_new = (1.0 - coef)[:, None] * P + coef[:, None] * X
        fP_new = np.where(coef == 1.0, fX, fP)
        moved = (coef != 0.0) & (coef != 1.0)
        if moved.any():
            fP_new[moved] = self._evaluate(objective, P_new[moved], counter)
        return P_new, fP_new

    @staticmethod
    def _evaluate(objective: Objective, X: np.ndarray, counter: Optional[EvalCounter]) -> np.ndarray:
        if counter is not None:
            counter.add(X.shape[0])
        with np.errstate(over="ignore", invalid="ignore"):
            return np.asarray(objective.eval(X), dtype=float)

    @staticmethod
    def _checked(swarm: Swarm) -> Swarm:
        if not swarm.is_finite():
            logger.warning(f"[Swarm] Non-finite state detected at step {swarm.step_index}")
            raise DivergenceError("Swarm state is no longer finite", swarm.step_index)
        return swarm
