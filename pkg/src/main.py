import functools
import logging
import math
import os
import sys
from typing import Optional

import click
import numpy as np
from pydantic import ValidationError

from src.application.acceptance import run_acceptance
from src.application.config_loader import ConfigDocument, LimitSpec, MeanFieldRunSpec, config_schema, load_config_file
from src.application.diagnostics import loglog_slope, lyapunov_trace, zero_inertia_rate
from src.application.harness import TABLE_NAMES, ExperimentHarness, table_suite
from src.application.meanfield_pipeline import MeanFieldPipeline
from src.application.optimizer import SwarmOptimizer
from src.config import Config, configure_logging
from src.domain.entities import SolverConfig, SolverMode
from src.domain.errors import ConfigError, DivergenceError, PsoError
from src.domain.experiment import ExperimentSpec, ObjectiveSpec
from src.domain.meanfield import MeanFieldParams, PhaseGrid
from src.infrastructure.csv_repository import CsvResultRepository
from src.infrastructure.swarm_engine import NumpySwarmEngine
from src.infrastructure.vfp_solver import SplittingVfpSolver

logger = logging.getLogger(__name__)

EXIT_CONFIG = 2
EXIT_DIVERGED = 3
EXIT_CHECK_FAILED = 4

DESK_RUNS = 50


def _exit_codes(command):
    """Map domain failures onto the documented process exit codes."""
    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except (ConfigError, ValidationError) as e:
            click.echo(f"Configuration error: {e}", err=True)
            sys.exit(EXIT_CONFIG)
        except DivergenceError as e:
            click.echo(f"Diverged at step {e.step_index}: {e}", err=True)
            sys.exit(EXIT_DIVERGED)
        except PsoError as e:
            logger.error(f"[CLI] {type(e).__name__}: {e}")
            click.echo(f"Error: {e}", err=True)
            sys.exit(1)
    return wrapper


def _floats(ctx, param, value: Optional[str]) -> Optional[list[float]]:
    if value is None:
        return None
    try:
        return [float(v) for v in value.split(",") if v.strip()]
    except ValueError:
        raise click.BadParameter(f"expected comma-separated numbers, got '{value}'")


def _document(path: Optional[str]) -> ConfigDocument:
    return load_config_file(path) if path else ConfigDocument()


def _section(doc: ConfigDocument, name: str):
    section = getattr(doc, name)
    if section is None:
        raise ConfigError(f"Config document has no '{name}' section")
    return section


@click.group()
@click.option("--log-level", default="", show_default="PSO_LOG_LEVEL", help="Overrides PSO_LOG_LEVEL.")
def cli(log_level: str):
    """Stochastic-differential PSO, consensus-based optimization and their mean-field solvers."""
    configure_logging(log_level)


@cli.command()
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), show_default="none",
              help="JSON document with an 'experiment' section; replaces the inline flags.")
@click.option("--function", "function", default="ackley", show_default=True)
@click.option("--dim", default=20, show_default=True, type=int)
@click.option("--domain", callback=_floats, show_default="classical domain",
              help="lo,hi cube overriding the classical domain.")
@click.option("--particles", default=100, show_default=True, type=int)
@click.option("--mode", type=click.Choice([m.value for m in SolverMode]), default=SolverMode.SDPSO_NOMEM.value,
              show_default=True)
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--m", "m", default=0.0, show_default=True, type=float, help="Inertia weight.")
@click.option("--gamma", default=None, show_default="1 - m", type=float, help="Friction; 1 - m when unset.")
@click.option("--lam", default=1.0, show_default=True, type=float)
@click.option("--sigma", default=1.0 / math.sqrt(3.0), show_default=True, type=float)
@click.option("--lambda1", default=0.0, show_default=True, type=float)
@click.option("--sigma1", default=0.0, show_default=True, type=float)
@click.option("--lambda2", default=1.0, show_default=True, type=float)
@click.option("--sigma2", default=1.0 / math.sqrt(3.0), show_default=True, type=float)
@click.option("--nu", default=0.5, show_default=True, type=float)
@click.option("--alpha", default=30.0, show_default=True, type=float)
@click.option("--beta", default=30.0, show_default=True, type=float)
@click.option("--dt", default=0.01, show_default=True, type=float)
@click.option("--n-max", default=10000, show_default=True, type=int)
@click.option("--out", default=Config.OUTPUT_DIR, show_default=True, type=click.Path(file_okay=False))
@click.option("--trace", is_flag=True, help="Write the consensus trajectory CSV.")
@click.option("--lyapunov", is_flag=True, help="Also write the energy trace (memoryless mode, m > 0).")
@_exit_codes
def optimize(config_path, function, dim, domain, particles, mode, seed, m, gamma, lam, sigma,
             lambda1, sigma1, lambda2, sigma2, nu, alpha, beta, dt, n_max, out, trace, lyapunov):
    """Run a single optimization and print the consensus point."""
    if config_path:
        spec = _section(_document(config_path), "experiment")
    else:
        if domain is not None and len(domain) != 2:
            raise ConfigError("--domain expects exactly two numbers lo,hi")
        solver = SolverConfig(mode=mode, m=m, gamma=gamma, lam=lam, sigma=sigma, lambda1=lambda1, sigma1=sigma1,
                              lambda2=lambda2, sigma2=sigma2, nu=nu, alpha=alpha, beta=beta, dt=dt)
        spec = ExperimentSpec(objective=ObjectiveSpec(name=function, dim=dim,
                                                      domain=tuple(domain) if domain else None),
                              solver=solver, n_particles=particles, seed=seed, n_max=n_max, n_r=1)

    objective = spec.objective.build()
    optimizer = SwarmOptimizer(NumpySwarmEngine())
    result = optimizer.run(objective, spec.solver, spec.n_particles, spec.seed, spec.stopping, spec.init_box,
                           trace=trace)
    repo = CsvResultRepository(out)
    stem = f"{spec.objective.name}_{spec.solver.mode.value}_seed{spec.seed}"
    if trace and result.trajectory is not None:
        path = repo.write_trajectory(f"trajectory_{stem}.csv", result.trajectory)
        click.echo(f"trajectory: {path}")
    if lyapunov:
        samples = lyapunov_trace(objective, spec.solver, spec.n_particles, spec.seed,
                                 n_steps=max(result.n_iter, 1), init_box=spec.init_box)
        click.echo(f"lyapunov: {repo.write_lyapunov(f'lyapunov_{stem}.csv', samples)}")

    click.echo(f"consensus: {' '.join(f'{v:.6g}' for v in result.consensus)}")
    click.echo(f"value: {result.f_value:.6e}")
    click.echo(f"iterations: {result.n_iter}")
    click.echo(f"evaluations: {result.n_evals}")
    if result.diverged:
        raise DivergenceError("Swarm state became non-finite", result.divergence_step or result.n_iter)


@cli.command()
@click.option("--table", type=click.Choice(TABLE_NAMES), help="Parameter grid of a benchmark table.")
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), show_default="none",
              help="JSON document with an 'experiment' section.")
@click.option("--runs", default=None, show_default="50, or n_r of --config", type=int,
              help="Replicates per row (50 for tables and --check); "
                   "a config document keeps its own n_r unless this is given.")
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--workers", default=Config.WORKERS, show_default=True, type=int)
@click.option("--out", default=Config.OUTPUT_DIR, show_default=True, type=click.Path(file_okay=False))
@click.option("--check", is_flag=True, help="Run the desk-scale acceptance suite instead.")
@_exit_codes
def benchmark(table, config_path, runs, seed, workers, out, check):
    """Replicate experiments and write per-run and aggregate CSVs."""
    if runs is not None and runs < 1:
        raise ConfigError("--runs must be positive")
    harness = ExperimentHarness(CsvResultRepository(out), workers=workers)
    if check:
        results = run_acceptance(harness, runs or DESK_RUNS)
        for r in results:
            click.echo(f"{'PASS' if r.passed else 'FAIL'} {r.name}: {r.detail}")
        if not all(r.passed for r in results):
            sys.exit(EXIT_CHECK_FAILED)
        return

    if table:
        specs = table_suite(table, n_r=runs or DESK_RUNS, seed=seed)
    elif config_path:
        spec = _section(_document(config_path), "experiment")
        specs = [spec if runs is None else spec.model_copy(update={"n_r": runs})]
    else:
        raise ConfigError("benchmark needs --table, --config or --check")
    aggregates = harness.run_suite(specs, out_dir="")
    for a in aggregates:
        err = "-" if a.mean_error is None else f"{a.mean_error:.2e}"
        click.echo(f"{a.label or a.fingerprint}: rate {a.rate:.1%}  error {err}  iter {a.mean_iter:.1f}")


@cli.command()
@click.option("--pde", type=click.Choice(["pso", "pso_mem", "cbo"]), default="pso", show_default=True)
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), show_default="none",
              help="JSON document with a 'meanfield' section.")
@click.option("--tfinal", default=1.0, show_default=True, type=float)
@click.option("--snap", default="0.5,1", show_default=True, callback=_floats, help="Snapshot times.")
@click.option("--nx", default=90, show_default=True, type=int)
@click.option("--nv", default=120, show_default=True, type=int)
@click.option("--dt", default=0.01, show_default=True, type=float)
@click.option("--compare-particles", default=0, show_default=True, type=int,
              help="Particles of the matching SDE system for the KDE comparison (0 disables).")
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--out", default=Config.OUTPUT_DIR, show_default=True, type=click.Path(file_okay=False))
@_exit_codes
def meanfield(pde, config_path, tfinal, snap, nx, nv, dt, compare_particles, seed, out):
    """Integrate a mean-field equation and dump density snapshots."""
    if config_path:
        spec = _section(_document(config_path), "meanfield")
    else:
        spec = MeanFieldRunSpec(pde=pde, grid=PhaseGrid(nx=nx, nv=nv, dt=dt), params=MeanFieldParams(),
                                t_final=tfinal, snapshots=snap, compare_particles=compare_particles, seed=seed)
    pipeline = MeanFieldPipeline(SplittingVfpSolver(), NumpySwarmEngine(), CsvResultRepository(out))
    outcome = pipeline.run(spec, out_dir="")
    for t, mass in zip(outcome.times, outcome.masses):
        line = f"t={t:g} mass={mass:.12f}"
        if t in outcome.distances:
            d = outcome.distances[t]
            line += f" L1={d.l1:.4f} W1={d.w1:.4f}"
        click.echo(line)
    for path in outcome.files:
        click.echo(path)


@cli.command()
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), show_default="none",
              help="JSON document with a 'limit' section.")
@click.option("--m-list", default="0.2,0.1,0.05,0.025", show_default=True, callback=_floats)
@click.option("--tfinal", default=1.0, show_default=True, type=float)
@click.option("--particles", default=1000, show_default=True, type=int)
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--out", default=Config.OUTPUT_DIR, show_default=True, type=click.Path(file_okay=False))
@_exit_codes
def limit(config_path, m_list, tfinal, particles, seed, out):
    """Coupled zero-inertia comparison: gap and W1 per inertia plus the log-log slope."""
    if config_path:
        spec = _section(_document(config_path), "limit")
    else:
        spec = LimitSpec(m_list=m_list, t_final=tfinal, n_particles=particles, seed=seed)
    objective = spec.objective.build()
    rows = zero_inertia_rate(objective, spec.solver, spec.m_list, spec.seed, spec.t_final, spec.n_particles)
    slope = loglog_slope(rows)
    path = CsvResultRepository(out).write_rates(f"limit_seed{spec.seed}.csv", rows, slope)
    for r in rows:
        click.echo(f"m={r.m:g} gap={r.gap:.3e} W1={r.w1:.3e}")
    click.echo(f"slope: {slope:.3f}")
    click.echo(path)


@cli.command()
@click.argument("dump", type=click.Path(exists=True, dir_okay=False))
@click.option("--marginal", "marginal_path", default=None, show_default="none", type=click.Path(dir_okay=False),
              help="Write the x-marginal of the dump to this CSV.")
@_exit_codes
def density(dump, marginal_path):
    """Summarize a density dump written by the meanfield command."""
    repo = CsvResultRepository(os.path.dirname(os.path.abspath(dump)))
    f = repo.read_density(os.path.abspath(dump))
    solver = SplittingVfpSolver()
    g = f.grid
    click.echo(f"grid: {' x '.join(str(n) for n in g.shape)} x=[{g.x_lo:g}, {g.x_hi:g}] v=[{g.v_lo:g}, {g.v_hi:g}]")
    click.echo(f"t={f.time:g} mass={f.mass():.12f} min={float(f.values.min()):.3e}")
    rho_x = solver.marginal_x(f)
    click.echo(f"x-peak: {float(rho_x.x_nodes[np.argmax(rho_x.values)]):g}")
    if g.with_memory:
        rho_y = solver.marginal_y(f)
        click.echo(f"y-peak: {float(rho_y.x_nodes[np.argmax(rho_y.values)]):g}")
    if marginal_path:
        click.echo(repo.write_marginal(os.path.abspath(marginal_path), rho_x))


@cli.command()
def schema():
    """Print the JSON schema of the config document."""
    click.echo(config_schema())


if __name__ == "__main__":
    cli()
