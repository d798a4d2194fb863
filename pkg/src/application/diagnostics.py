"""
Runtime probes of the convergence theory: the energy functional H, its
well-conditioning coefficient mu, the coupled zero-inertia gap and the
Laplace sweep.
"""
import logging
import math
from typing import Optional

import numpy as np
from scipy import stats
from scipy.special import logsumexp

from src.application.optimizer import SwarmOptimizer
from src.domain.consensus import laplace_value
from src.domain.diagnostics import DecayFit, LaplaceRow, LyapunovSample, RateRow
from src.domain.entities import SolverConfig, SolverMode, Swarm, VelocityInit
from src.domain.errors import ConfigError, ConsensusError
from src.domain.experiment import StoppingRule
from src.domain.objectives import Objective
from src.domain.solver_interfaces import ISwarmEngine
from src.infrastructure.statistics import wasserstein1_1d
from src.infrastructure.swarm_engine import NumpySwarmEngine, RngStream

logger = logging.getLogger(__name__)


def lyapunov(swarm: Swarm, m: float, gamma: float, t: float = 0.0) -> LyapunovSample:
    """
    H = mean_i[k^2 |dX_i|^2 + |V_i|^2 + k dX_i . V_i] with k = gamma / (2 m) and
    dX_i the deviation from the population mean.
    """
    if m <= 0.0:
        raise ConfigError("The energy functional needs a positive inertia m")
    k = gamma / (2.0 * m)
    dX = swarm.X - swarm.X.mean(axis=0)
    sq = np.sum(dX * dX, axis=1)
    kin = np.sum(swarm.V * swarm.V, axis=1)
    cross = np.sum(dX * swarm.V, axis=1)
    return LyapunovSample(
        t=t,
        H=float(np.mean(k * k * sq + kin + k * cross)),
        variance=float(np.mean(sq)),
        kinetic=float(np.mean(kin)),
    )


def mu_condition(swarm: Swarm, objective: Objective, params: SolverConfig,
                 best_seen: Optional[float] = None) -> float:
    """
    mu = lam gamma / (2 m^2) - (2 lam^2 / (gamma m) + sigma^2 / m^2) * 4 e^{-alpha F_low} / mean e^{-alpha F}.
    F_low is the best value seen so far (population minimum when not supplied).
    """
    m, gamma, lam, sigma, alpha = params.m, params.friction, params.lam, params.sigma, params.alpha
    if m <= 0.0 or gamma <= 0.0:
        raise ConfigError("mu needs m > 0 and gamma > 0")
    if not math.isfinite(alpha):
        raise ConfigError("mu needs a finite alpha")
    drive = lam * gamma / (2.0 * m * m)
    noise = 2.0 * lam * lam / (gamma * m) + sigma * sigma / (m * m)
    if noise == 0.0:
        return drive
    values = np.asarray(objective.eval(swarm.X), dtype=float)
    f_low = float(values.min()) if best_seen is None else min(best_seen, float(values.min()))
    # 1 / mean e^{-alpha (F - F_low)} in log space; all weights may underflow when F_low is a past best
    log_ratio = math.log(values.size) - float(logsumexp(-alpha * (values - f_low)))
    if log_ratio > math.log(np.finfo(float).max):
        return -math.inf
    return drive - noise * 4.0 * math.exp(log_ratio)


def lyapunov_trace(objective: Objective, config: SolverConfig, n_particles: int, seed: int,
                   n_steps: int, init_box=None, engine: Optional[ISwarmEngine] = None) -> list[LyapunovSample]:
    """H, its quadratic parts and mu after every step of a memoryless run of fixed length."""
    if config.mode != SolverMode.SDPSO_NOMEM:
        raise ConfigError("The energy functional is defined for the memoryless scheme")
    optimizer = SwarmOptimizer(engine or NumpySwarmEngine())
    samples: list[LyapunovSample] = []
    best = [math.inf]

    def observe(swarm: Swarm) -> None:
        best[0] = min(best[0], float(swarm.fX.min()))
        sample = lyapunov(swarm, config.m, config.friction, t=swarm.step_index * config.dt)
        sample.mu = mu_condition(swarm, objective, config, best[0])
        samples.append(sample)

    optimizer.run(objective, config, n_particles, seed,
                  StoppingRule(n_max=n_steps, n_stall=n_steps), init_box, observer=observe)
    return samples


def lyapunov_decay(objective: Objective, config: SolverConfig, n_particles: int, seed: int,
                   n_replicates: int = 50, n_steps: int = 500, init_box=None) -> DecayFit:
    """
    Fit log E[H(t)] = a + b t over replicated runs; the 95% interval on b decides
    whether the energy decays.
    """
    if n_replicates < 2:
        raise ConfigError("A decay fit needs at least two replicates")
    seeds = np.random.SeedSequence(seed).generate_state(n_replicates, dtype=np.uint32)
    traces = [lyapunov_trace(objective, config, n_particles, int(s), n_steps, init_box) for s in seeds]
    length = min(len(tr) for tr in traces)
    t = np.array([traces[0][i].t for i in range(length)])
    mean_h = np.mean([[tr[i].H for i in range(length)] for tr in traces], axis=0)
    mu0 = float(np.mean([tr[0].mu for tr in traces]))
    if mu0 <= 0.0:
        logger.warning(f"[Diagnostics] mu = {mu0:.3g} at initialization; decay is not guaranteed")
    fit = stats.linregress(t, np.log(mean_h))
    half = stats.t.ppf(0.975, length - 2) * fit.stderr
    logger.info(f"[Diagnostics] log E[H] slope {fit.slope:.4g} +/- {half:.2g} over {n_replicates} replicates")
    return DecayFit(slope=float(fit.slope), intercept=float(fit.intercept),
                    ci_low=float(fit.slope - half), ci_high=float(fit.slope + half),
                    n_replicates=n_replicates, mu_initial=mu0)


def zero_inertia_rate(objective: Objective, base_config: SolverConfig, m_list: list[float], seed: int,
                      t_final: float, n_particles: int = 1000, init_box=None,
                      engine: Optional[ISwarmEngine] = None) -> list[RateRow]:
    """
    Couple the inertial system (gamma = 1 - m) with the first-order system (m = 0, gamma = 1)
    through a shared seed: same initial data, same noise tape. Reports the sup over steps
    of mean_i |X_i^m - X_i^0|^2 and W1 between the final first coordinates.
    """
    if any(m < 0.0 for m in m_list):
        raise ConfigError("Inertias must be non-negative")
    engine = engine or NumpySwarmEngine()
    n_steps = int(round(t_final / base_config.dt))
    common = dict(mode=SolverMode.SDPSO_NOMEM, velocity_init=VelocityInit.ZERO)
    reference = SolverConfig(**{**base_config.model_dump(), **common, "m": 0.0, "gamma": 1.0})
    ref_path = _positions(engine, objective, reference, n_particles, seed, n_steps, init_box)

    rows = []
    for m in m_list:
        config = SolverConfig(**{**base_config.model_dump(), **common, "m": m, "gamma": None})
        path = _positions(engine, objective, config, n_particles, seed, n_steps, init_box)
        gap = max(float(np.mean(np.sum((a - b) ** 2, axis=1))) for a, b in zip(path, ref_path))
        w1 = wasserstein1_1d(path[-1][:, 0], ref_path[-1][:, 0])
        logger.info(f"[Diagnostics] m={m:g}: coupled gap {gap:.3e}, W1 {w1:.3e}")
        rows.append(RateRow(m=m, gap=gap, w1=w1))
    return rows


def _positions(engine: ISwarmEngine, objective: Objective, config: SolverConfig, n_particles: int,
               seed: int, n_steps: int, init_box) -> list[np.ndarray]:
    swarm = engine.init(objective, config, n_particles, seed, init_box)
    rng = RngStream(seed, config.noise)
    path = [swarm.X]
    for _ in range(n_steps):
        swarm = engine.step(swarm, objective, config, rng)
        path.append(swarm.X)
    return path


def loglog_slope(rows: list[RateRow]) -> float:
    """Least-squares slope of log gap against log m over rows with m > 0 and gap > 0."""
    usable = [(r.m, r.gap) for r in rows if r.m > 0.0 and r.gap > 0.0]
    if len(usable) < 2:
        raise ConfigError("A slope needs at least two rows with positive m and gap")
    m, gap = np.log(np.array(usable)).T
    return float(np.polyfit(m, gap, 1)[0])


def laplace_sweep(values, alpha_list: list[float]) -> list[LaplaceRow]:
    alphas = np.asarray(alpha_list, dtype=float)
    if alphas.size == 0 or np.any(alphas <= 0.0) or np.any(np.diff(alphas) <= 0.0):
        raise ConfigError("alpha_list must be positive and strictly increasing")
    f_min = float(np.min(values))
    rows = []
    for alpha in alphas:
        value = laplace_value(values, float(alpha))
        rows.append(LaplaceRow(alpha=float(alpha), value=value, gap=value - f_min))
    for prev, cur in zip(rows, rows[1:]):
        if cur.gap > prev.gap + 1e-12:
            raise ConsensusError(f"Laplace gap increased between alpha={prev.alpha} and alpha={cur.alpha}")
    return rows
