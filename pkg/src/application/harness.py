import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Optional

import numpy as np

from src.application.optimizer import SwarmOptimizer
from src.domain.entities import SolverConfig, SolverMode
from src.domain.errors import ConfigError
from src.domain.experiment import (AggregateReport, ExperimentSpec, ObjectiveSpec, OptimizationResult,
                                   RunReport, SuccessCriterion)
from src.domain.interfaces import IResultRepository
from src.domain.objectives import Objective
from src.domain.solver_interfaces import ISwarmEngine
from src.infrastructure.swarm_engine import NumpySwarmEngine

logger = logging.getLogger(__name__)

TABLE_NAMES = ("table1R", "table1A", "table3R", "table3A", "tableFunctions")

# (m, sigma without memory, sigma2 with memory)
_INERTIA_ROWS = ((0.0, 9.0, 11.0), (0.01, 7.0, 9.0), (0.05, 3.5, 4.5), (0.10, 2.0, 3.0))
_PARTICLES = (50, 100, 200)
_FUNCTION_ROWS = ("ackley", "griewank", "rastrigin", "rosenbrock", "schwefel220", "salomon", "xsy_random", "xsy4")


def derive_seed(master_seed: int, run_id: int) -> int:
    """Counter-based child seed: adding runs never perturbs the streams of earlier runs."""
    seq = np.random.SeedSequence(master_seed, spawn_key=(run_id,))
    return int(seq.generate_state(1, dtype=np.uint32)[0])


def judge(result: OptimizationResult, spec: ExperimentSpec, objective: Objective) -> bool:
    """Strict position test in the max norm, optionally relaxed by a value test."""
    if result.diverged:
        return False
    final = np.asarray(result.consensus)
    if float(np.max(np.abs(final - objective.x_star))) < spec.delta_err:
        return True
    if spec.success_criterion == SuccessCriterion.POSITION_OR_VALUE:
        return abs(result.f_value - objective.min_value) < spec.delta_fun
    return False


def run_single(spec: ExperimentSpec, run_id: int,
               engine_factory: Callable[[], ISwarmEngine] = NumpySwarmEngine) -> RunReport:
    """One replicate of a spec. Module level so worker processes can pickle it."""
    seed = derive_seed(spec.seed, run_id)
    objective = spec.objective.build()
    optimizer = SwarmOptimizer(engine_factory())
    result = optimizer.run(objective, spec.solver, spec.n_particles, seed, spec.stopping, spec.init_box)
    return RunReport(
        run_id=run_id,
        seed=seed,
        success=judge(result, spec, objective),
        diverged=result.diverged,
        error_l2=float(np.linalg.norm(np.asarray(result.consensus) - objective.x_star)),
        f_value=result.f_value,
        n_iter=result.n_iter,
    )


def aggregate(spec: ExperimentSpec, reports: list[RunReport]) -> AggregateReport:
    """Deterministic fold in run-index order: error over successes, value and iterations over all runs."""
    reports = sorted(reports, key=lambda r: r.run_id)
    n = len(reports)
    if n == 0:
        raise ConfigError("Cannot aggregate an empty set of runs")
    successes = [r for r in reports if r.success]
    return AggregateReport(
        fingerprint=spec.fingerprint(),
        label=spec.label,
        n_particles=spec.n_particles,
        n_runs=n,
        rate=len(successes) / n,
        mean_error=math.fsum(r.error_l2 for r in successes) / len(successes) if successes else None,
        mean_f=math.fsum(r.f_value for r in reports) / n,
        mean_iter=math.fsum(r.n_iter for r in reports) / n,
        n_diverged=sum(r.diverged for r in reports),
    )


class ExperimentHarness:
    """
    Replicated-experiment driver. Runs are independent; they execute in a process
    pool when more than one worker is configured and are folded in run order.
    """
    def __init__(self,
                 repository: Optional[IResultRepository] = None,
                 workers: int = 1,
                 engine_factory: Callable[[], ISwarmEngine] = NumpySwarmEngine):
        self.repo = repository
        self.workers = max(1, workers)
        self.engine_factory = engine_factory

    def replicate(self, spec: ExperimentSpec, out_dir: Optional[str] = None) -> tuple[AggregateReport, list[RunReport]]:
        logger.info(f"[Harness] {spec.label or spec.fingerprint()}: {spec.n_r} runs, N={spec.n_particles}, "
                    f"{spec.solver.mode.value} on {spec.objective.name}")
        run_ids = list(range(spec.n_r))
        if self.workers == 1 or spec.n_r == 1:
            reports = [run_single(spec, i, self.engine_factory) for i in run_ids]
        else:
            with ProcessPoolExecutor(max_workers=self.workers) as pool:
                reports = list(pool.map(run_single, [spec] * spec.n_r, run_ids,
                                        [self.engine_factory] * spec.n_r))
        result = aggregate(spec, reports)
        logger.info(f"[Harness] rate {result.rate:.1%}, mean_iter {result.mean_iter:.1f}, "
                    f"mean_f {result.mean_f:.3e}, diverged {result.n_diverged}")
        if self.repo is not None and out_dir is not None:
            self.repo.write_runs(os.path.join(out_dir, f"runs_{result.fingerprint}.csv"), reports)
        return result, reports

    def run_suite(self, specs: list[ExperimentSpec], out_dir: Optional[str] = None) -> list[AggregateReport]:
        results = []
        for spec in specs:
            try:
                results.append(self.replicate(spec, out_dir)[0])
            except Exception as e:
                logger.error(f"[Harness] Spec {spec.label or spec.fingerprint()} failed: {e}")
                raise
        if self.repo is not None and out_dir is not None:
            self.repo.write_aggregates(os.path.join(out_dir, "aggregate.csv"), results)
        return results


def _memory_params(xi: float, sigma2: float) -> dict:
    return dict(lambda1=xi * 1.0, sigma1=xi * sigma2, lambda2=1.0, sigma2=sigma2)


def table_suite(name: str, n_r: int = 500, seed: int = 0) -> list[ExperimentSpec]:
    """Parameter grids of the benchmark tables."""
    common = dict(dt=0.01, nu=50.0, beta=3e3, alpha=5e4)
    specs: list[ExperimentSpec] = []

    if name in ("table1R", "table1A"):
        func = "rastrigin" if name == "table1R" else "ackley"
        objective = ObjectiveSpec(name=func, dim=20, domain=(-3.0, 3.0))
        for m, sigma, sigma2 in _INERTIA_ROWS:
            for memory in (False, True):
                if memory:
                    solver = SolverConfig(mode=SolverMode.SDPSO_MEM, m=m, **common, **_memory_params(0.0, sigma2))
                else:
                    solver = SolverConfig(mode=SolverMode.SDPSO_NOMEM, m=m, lam=1.0, sigma=sigma, **common)
                for n in _PARTICLES:
                    label = f"{name} m={m:g} {'mem' if memory else 'nomem'} N={n}"
                    specs.append(ExperimentSpec(label=label, objective=objective, solver=solver,
                                                n_particles=n, n_r=n_r, seed=seed))

    elif name in ("table3R", "table3A"):
        func = "rastrigin" if name == "table3R" else "ackley"
        for shift in (0.0, 1.0, 2.0):
            objective = ObjectiveSpec(name=func, dim=20, domain=(-3.0, 3.0), x_star=[shift] * 20)
            for xi, sigma2 in ((0.0, 11.0), (0.25, 8.5)):
                solver = SolverConfig(mode=SolverMode.CBO_MEM, m=0.0, **common, **_memory_params(xi, sigma2))
                for n in _PARTICLES:
                    label = f"{name} x*={shift:g} xi={xi:g} N={n}"
                    specs.append(ExperimentSpec(label=label, objective=objective, solver=solver,
                                                n_particles=n, n_r=n_r, seed=seed))

    elif name == "tableFunctions":
        for func in _FUNCTION_ROWS:
            objective = ObjectiveSpec(name=func, dim=20, rescale=True)
            for xi, sigma2 in ((0.0, 8.0), (0.25, 6.5)):
                solver = SolverConfig(mode=SolverMode.CBO_MEM, m=0.0, **common, **_memory_params(xi, sigma2))
                for n in _PARTICLES:
                    label = f"{name} {func} xi={xi:g} N={n}"
                    specs.append(ExperimentSpec(
                        label=label, objective=objective, solver=solver, n_particles=n, n_r=n_r, seed=seed,
                        delta_err=0.1, delta_fun=0.01,
                        success_criterion=SuccessCriterion.POSITION_OR_VALUE))
    else:
        raise ConfigError(f"Unknown table '{name}'. Known: {', '.join(TABLE_NAMES)}")
    return specs
