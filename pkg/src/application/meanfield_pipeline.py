import logging
import math
import os
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from src.application.config_loader import MeanFieldRunSpec
from src.domain.diagnostics import DistanceReport
from src.domain.entities import SolverConfig, SolverMode, VelocityInit
from src.domain.errors import ConfigError
from src.domain.interfaces import IResultRepository
from src.domain.meanfield import Density1D, MeanFieldParams, PhaseDensity
from src.domain.objectives import Objective
from src.domain.solver_interfaces import IMeanFieldSolver, ISwarmEngine
from src.infrastructure.statistics import density_distance, kde
from src.infrastructure.swarm_engine import RngStream
from src.infrastructure.vfp_solver import local_maxwellian, uniform_density_1d, uniform_phase_density

logger = logging.getLogger(__name__)


class MeanFieldOutcome(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    pde: str
    times: list[float] = Field(default_factory=list)
    masses: list[float] = Field(default_factory=list)
    marginals: dict[float, Density1D] = Field(default_factory=dict)
    particle_marginals: dict[float, Density1D] = Field(default_factory=dict)
    distances: dict[float, DistanceReport] = Field(default_factory=dict)
    files: list[str] = Field(default_factory=list)


def particle_config(pde: str, params: MeanFieldParams, dt: float, v_box: tuple[float, float]) -> SolverConfig:
    """Particle scheme whose mean-field limit is the requested equation."""
    base = dict(dt=dt, alpha=params.alpha, velocity_init=VelocityInit.UNIFORM, velocity_box=v_box)
    if pde == "pso":
        return SolverConfig(mode=SolverMode.SDPSO_NOMEM, m=params.m, gamma=params.gamma,
                            lam=params.lam, sigma=params.sigma, **base)
    if pde == "pso_mem":
        return SolverConfig(mode=SolverMode.SDPSO_MEM, m=params.m, gamma=params.gamma,
                            lambda1=params.lambda1, sigma1=params.sigma1,
                            lambda2=params.lambda2, sigma2=params.sigma2,
                            nu=params.nu, beta=params.beta, **base)
    if pde == "cbo":
        # the memoryless scheme at m = 0, gamma = 1 is the first-order consensus scheme
        base["velocity_init"] = VelocityInit.ZERO
        return SolverConfig(mode=SolverMode.SDPSO_NOMEM, m=0.0, gamma=1.0,
                            lam=params.lam, sigma=params.sigma, **base)
    raise ConfigError(f"Unknown pde '{pde}'")


def particle_samples(engine: ISwarmEngine, objective: Objective, config: SolverConfig, n_particles: int,
                     seed: int, times: list[float], init_box) -> dict[float, np.ndarray]:
    """First coordinate of the particle positions at the requested times."""
    steps = {int(round(t / config.dt)): t for t in times}
    swarm = engine.init(objective, config, n_particles, seed, init_box)
    rng = RngStream(seed, config.noise)
    out = {}
    if 0 in steps:
        out[steps[0]] = swarm.X[:, 0].copy()
    for n in range(1, max(steps) + 1):
        swarm = engine.step(swarm, objective, config, rng)
        if n in steps:
            out[steps[n]] = swarm.X[:, 0].copy()
    return out


class MeanFieldPipeline:
    """
    Time loop of the kinetic solvers with snapshot output and optional
    cross-validation against the matching particle system.
    """
    def __init__(self, solver: IMeanFieldSolver, engine: ISwarmEngine,
                 repository: Optional[IResultRepository] = None):
        self.solver = solver
        self.engine = engine
        self.repo = repository

    def run(self, spec: MeanFieldRunSpec, out_dir: Optional[str] = None) -> MeanFieldOutcome:
        objective = spec.objective.build()
        if objective.dim != 1:
            raise ConfigError("The kinetic solvers are one-dimensional; use an objective with dim = 1")
        grid = spec.grid.model_copy(update={"with_memory": spec.pde == "pso_mem"})
        dt = grid.dt
        n_steps = int(round(spec.t_final / dt))
        snaps = {int(round(t / dt)): t for t in spec.snapshots if t <= spec.t_final + 1e-12}
        outcome = MeanFieldOutcome(pde=spec.pde)
        logger.info(f"[MeanField] {spec.pde}: {n_steps} steps of dt={dt}, snapshots at {sorted(snaps.values())}")

        if spec.pde == "cbo":
            state = uniform_density_1d(grid.x_lo, grid.x_hi, spec.cbo_nodes)
        else:
            state = uniform_phase_density(grid)

        for n in range(1, n_steps + 1):
            if spec.pde == "pso":
                state = self.solver.mf_pso_step(state, objective, spec.params)
            elif spec.pde == "pso_mem":
                state = self.solver.mf_pso_memory_step(state, objective, spec.params)
            else:
                state = self.solver.mf_cbo_step(state, objective, spec.params, dt)
            if n in snaps:
                self._snapshot(state, snaps[n], outcome, spec.pde, out_dir)

        if spec.compare_particles > 0 and outcome.times:
            self._compare(spec, objective, grid, outcome, out_dir)
        return outcome

    def _snapshot(self, state, t: float, outcome: MeanFieldOutcome, pde: str, out_dir: Optional[str]) -> None:
        if isinstance(state, PhaseDensity):
            marginal = self.solver.marginal_x(state)
            mass = state.mass()
        else:
            marginal = state
            mass = state.mass()
        outcome.times.append(t)
        outcome.masses.append(mass)
        outcome.marginals[t] = marginal
        logger.info(f"[MeanField] t={t:g} mass={mass:.12f}")
        if self.repo is not None and out_dir is not None:
            if isinstance(state, PhaseDensity):
                outcome.files.append(self.repo.write_density(os.path.join(out_dir, f"density_{pde}_t{t:.3f}.txt"), state))
            outcome.files.append(self.repo.write_marginal(os.path.join(out_dir, f"marginal_{pde}_t{t:.3f}.csv"), marginal))

    def _compare(self, spec: MeanFieldRunSpec, objective: Objective, grid, outcome: MeanFieldOutcome,
                 out_dir: Optional[str]) -> None:
        config = particle_config(spec.pde, spec.params, grid.dt, (grid.v_lo, grid.v_hi))
        samples = particle_samples(self.engine, objective, config, spec.compare_particles, spec.seed,
                                   outcome.times, (grid.x_lo, grid.x_hi))
        for t in outcome.times:
            pde_marginal = outcome.marginals[t]
            estimate = kde(samples[t], pde_marginal.x_nodes)
            outcome.particle_marginals[t] = estimate
            outcome.distances[t] = density_distance(pde_marginal, estimate)
            logger.info(f"[MeanField] t={t:g} particles vs PDE: L1={outcome.distances[t].l1:.4f} "
                        f"W1={outcome.distances[t].w1:.4f}")
            if self.repo is not None and out_dir is not None:
                outcome.files.append(self.repo.write_marginal(
                    os.path.join(out_dir, f"kde_{spec.pde}_t{t:.3f}.csv"), estimate))
        if self.repo is not None and out_dir is not None:
            outcome.files.append(self.repo.write_distance(os.path.join(out_dir, f"distance_{spec.pde}.csv"),
                                                          outcome.distances))


def maxwellian_residual(solver: IMeanFieldSolver, nv: int, dt: float = 0.01, sigma: float = 1.0,
                        m: float = 0.5, gamma: float = 1.0, v_max: float = 8.0) -> float:
    """
    Max-norm change of the analytic local Maxwellian under one frozen-coefficient
    velocity step at unit distance from the consensus point.
    """
    v = np.linspace(-v_max, v_max, nv)
    maxwellian = local_maxwellian(v, x=1.0, consensus=0.0, sigma=sigma, m=m, gamma=gamma)
    maxwellian[0] = maxwellian[-1] = 0.0
    stepped = solver.velocity_step(maxwellian, v, dt, friction=gamma / m, offset=np.array(0.0),
                                   diffusion=np.array(sigma ** 2 / (2.0 * m ** 2)))
    return float(np.max(np.abs(stepped - maxwellian)))


def maxwellian_order(solver: IMeanFieldSolver, nv_coarse: int = 41, levels: int = 3,
                     floor: float = 1e-12) -> float:
    """
    Observed order of the Maxwellian residual under successive halving of dv.
    Residuals at rounding level on the finest grids mean the sampled Maxwellian is a
    discrete equilibrium of the scheme; the order is then reported as infinite.
    """
    sizes = [(nv_coarse - 1) * 2 ** k + 1 for k in range(levels)]
    res = [maxwellian_residual(solver, nv) for nv in sizes]
    if res[-1] <= floor and res[-2] <= floor:
        return math.inf
    return float(math.log2(res[-2] / max(res[-1], floor)))
