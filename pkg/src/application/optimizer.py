import logging
from typing import Callable, Optional

import numpy as np

from src.domain.entities import NoiseKind, SolverConfig, Swarm
from src.domain.errors import DivergenceError
from src.domain.experiment import OptimizationResult, StoppingRule, TrajectoryRecord
from src.domain.objectives import EvalCounter, Objective
from src.domain.solver_interfaces import ISwarmEngine
from src.infrastructure.swarm_engine import RngStream, seed_streams

logger = logging.getLogger(__name__)


def population_variance(X: np.ndarray) -> float:
    """Mean squared distance of the particles to their centroid."""
    return float(np.mean(np.sum((X - X.mean(axis=0)) ** 2, axis=1)))


class SwarmOptimizer:
    """
    Runs one swarm until the consensus point stalls or the iteration budget is spent.
    Depends only on the ISwarmEngine port, so any stepper implementation can be plugged in.
    """
    def __init__(self, engine: ISwarmEngine):
        self.engine = engine

    def run(self,
            objective: Objective,
            config: SolverConfig,
            n_particles: int,
            seed: int,
            stopping: Optional[StoppingRule] = None,
            init_box=None,
            trace: bool = False,
            observer: Optional[Callable[[Swarm], None]] = None) -> OptimizationResult:
        stopping = stopping or StoppingRule()
        if objective.needs_coefficients:
            objective = objective.draw_coefficients(seed_streams(seed).objective)
        kind = NoiseKind.UNIFORM if config.is_classic else config.noise
        rng = RngStream(seed, kind)
        counter = EvalCounter()

        swarm = self.engine.init(objective, config, n_particles, seed, init_box)
        counter.add(n_particles)
        q = self.engine.consensus(swarm, config)
        trajectory: Optional[list[TrajectoryRecord]] = [] if trace else None
        if trace:
            trajectory.append(self._record(swarm, q, objective))
        if observer is not None:
            observer(swarm)

        logger.debug(f"[Optimizer] {config.mode.value} on {objective.name} (d={objective.dim}), "
                     f"N={n_particles}, seed={seed}")
        stall = 0
        stalled = False
        try:
            while swarm.step_index < stopping.n_max:
                swarm = self.engine.step(swarm, objective, config, rng, counter, consensus=q)
                q_next = self.engine.consensus(swarm, config)
                if np.linalg.norm(q_next - q) < stopping.delta_stall:
                    stall += 1
                else:
                    stall = 0
                q = q_next
                if observer is not None:
                    observer(swarm)
                if trace:
                    trajectory.append(self._record(swarm, q, objective))
                if stall >= stopping.n_stall:
                    stalled = True
                    break
        except DivergenceError as e:
            logger.warning(f"[Optimizer] Run with seed {seed} diverged: {e}")
            return OptimizationResult(
                consensus=q.tolist(),
                f_value=float(objective.eval(q)),
                n_iter=e.step_index,
                n_evals=counter.count,
                diverged=True,
                divergence_step=e.step_index,
                trajectory=trajectory,
            )

        counter.add(1)
        return OptimizationResult(
            consensus=q.tolist(),
            f_value=float(objective.eval(q)),
            n_iter=swarm.step_index,
            n_evals=counter.count,
            stalled=stalled,
            trajectory=trajectory,
        )

    @staticmethod
    def _record(swarm: Swarm, q: np.ndarray, objective: Objective) -> TrajectoryRecord:
        return TrajectoryRecord(
            step=swarm.step_index,
            consensus=q.tolist(),
            value=float(objective.eval(q)),
            variance=population_variance(swarm.X),
        )
