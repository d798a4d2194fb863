from abc import ABC, abstractmethod
from typing import Optional

import numpy as np

from src.domain.entities import SolverConfig, Swarm
from src.domain.meanfield import Density1D, MeanFieldParams, PhaseDensity
from src.domain.objectives import EvalCounter, Objective


class ISwarmEngine(ABC):
    @abstractmethod
    def init(self, objective: Objective, config: SolverConfig, n_particles: int, seed: int,
             init_box=None) -> Swarm:
        """Draw the initial swarm uniformly in init_box (default: the objective domain)."""
        pass

    @abstractmethod
    def consensus(self, swarm: Swarm, config: SolverConfig) -> np.ndarray:
        """Consensus point of the current state for the configured mode."""
        pass

    @abstractmethod
    def step(self, swarm: Swarm, objective: Objective, config: SolverConfig, rng,
             counter: Optional[EvalCounter] = None, consensus: Optional[np.ndarray] = None) -> Swarm:
        """Advance one step with the scheme selected by config.mode."""
        pass


class IMeanFieldSolver(ABC):
    @abstractmethod
    def mf_pso_step(self, f: PhaseDensity, objective: Objective, params: MeanFieldParams) -> PhaseDensity:
        """One splitting step of the kinetic equation without memory."""
        pass

    @abstractmethod
    def mf_pso_memory_step(self, f: PhaseDensity, objective: Objective, params: MeanFieldParams) -> PhaseDensity:
        """One splitting step of the kinetic equation with local-best memory."""
        pass

    @abstractmethod
    def mf_cbo_step(self, rho: Density1D, objective: Objective, params: MeanFieldParams, dt: float) -> Density1D:
        """One step of the first-order consensus equation."""
        pass

    @abstractmethod
    def marginal_x(self, f: PhaseDensity) -> Density1D:
        """Integrate out v (and y)."""
        pass

    @abstractmethod
    def velocity_step(self, values: np.ndarray, v_nodes: np.ndarray, dt: float, friction: float,
                      offset: np.ndarray, diffusion: np.ndarray) -> np.ndarray:
        """Implicit velocity Fokker-Planck step with coefficients frozen per slice."""
        pass
