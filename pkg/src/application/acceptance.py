"""
Desk-scale acceptance suite behind ``benchmark --check``. Each check returns a
CheckResult; the CLI exits non-zero when any of them fails.
"""
import logging
import math
from typing import Callable

import numpy as np
from pydantic import BaseModel

from src.application.diagnostics import loglog_slope, lyapunov_decay, zero_inertia_rate
from src.application.harness import ExperimentHarness, table_suite
from src.application.config_loader import MeanFieldRunSpec
from src.application.meanfield_pipeline import (MeanFieldPipeline, maxwellian_order, particle_config,
                                                particle_samples)
from src.domain.consensus import argmin_point, global_best, laplace_value, smooth_switch
from src.domain.entities import SolverConfig, SolverMode
from src.domain.meanfield import MeanFieldParams, PhaseGrid
from src.domain.objectives import make_objective, shift_minimum
from src.infrastructure.statistics import wasserstein1_samples_grid
from src.infrastructure.swarm_engine import NumpySwarmEngine, RngStream
from src.infrastructure.vfp_solver import SplittingVfpSolver, uniform_density_1d, uniform_phase_density

logger = logging.getLogger(__name__)


class CheckResult(BaseModel):
    name: str
    passed: bool
    detail: str = ""


def check_ackley_table(harness: ExperimentHarness, runs: int) -> CheckResult:
    specs = [s for s in table_suite("table1A", n_r=runs)
             if s.solver.mode == SolverMode.SDPSO_NOMEM and s.solver.m == 0.0]
    aggs = harness.run_suite(specs)
    ok = all(a.rate == 1.0 and a.mean_error is not None and a.mean_error <= 1e-3 for a in aggs)
    mid = next(a for a, s in zip(aggs, specs) if s.n_particles == 100)
    ok = ok and abs(mid.mean_iter - 1032.4) <= 0.3 * 1032.4
    return CheckResult(name="ackley_table", passed=ok,
                       detail=", ".join(f"N={a.n_particles}: rate {a.rate:.2f} iter {a.mean_iter:.0f}" for a in aggs))


def check_rastrigin_table(harness: ExperimentHarness, runs: int) -> CheckResult:
    specs = table_suite("table1R", n_r=runs)
    mem = [s for s in specs if s.solver.mode == SolverMode.SDPSO_MEM and s.solver.m == 0.0 and s.n_particles == 200]
    low = [s for s in specs if s.solver.mode == SolverMode.SDPSO_NOMEM and s.n_particles == 50
           and s.solver.m in (0.0, 0.10)]
    mem_rate = harness.replicate(mem[0])[0].rate
    rates = {s.solver.m: harness.replicate(s)[0].rate for s in low}
    ok = mem_rate >= 0.95 and rates[0.10] < 0.2 and rates[0.0] > rates[0.10]
    return CheckResult(name="rastrigin_table", passed=ok,
                       detail=f"memory N=200 {mem_rate:.2f}; nomem N=50 m=0 {rates[0.0]:.2f}, m=0.1 {rates[0.10]:.2f}")


def check_function_table(harness: ExperimentHarness, runs: int) -> CheckResult:
    specs = [s for s in table_suite("tableFunctions", n_r=runs)
             if s.n_particles == 100 and s.solver.lambda1 > 0.0
             and s.objective.name in ("schwefel220", "xsy4", "salomon")]
    results = {s.objective.name: harness.replicate(s)[0] for s in specs}
    salomon = results["salomon"].mean_f
    ok = (results["schwefel220"].rate == 1.0 and results["xsy4"].rate == 1.0
          and 0.321 / 2.0 <= salomon <= 0.321 * 2.0)
    return CheckResult(name="function_table", passed=ok,
                       detail=f"schwefel220 {results['schwefel220'].rate:.2f}, xsy4 {results['xsy4'].rate:.2f}, "
                              f"salomon mean_f {salomon:.3e}")


def classic_gap(n_steps: int = 100, n_particles: int = 10, dim: int = 5, seed: int = 7) -> float:
    """Max deviation between the memory scheme in its classic limit and the classic update."""
    objective = make_objective("rastrigin", dim)
    engine = NumpySwarmEngine()
    sd = SolverConfig.from_classic(c1=1.0, c2=1.0, w=0.5)
    classic = SolverConfig(mode=SolverMode.CLASSIC_PSO_INERTIA, m=0.5, c1=1.0, c2=1.0, noise="uniform")
    a = engine.init(objective, sd, n_particles, seed)
    b = engine.init(objective, classic, n_particles, seed)
    rng_a, rng_b = RngStream(seed, sd.noise), RngStream(seed, classic.noise)
    gap = 0.0
    for _ in range(n_steps):
        a = engine.step(a, objective, sd, rng_a)
        b = engine.step(b, objective, classic, rng_b)
        gap = max(gap, float(np.max(np.abs(a.X - b.X))), float(np.max(np.abs(a.P - b.P))))
    return gap


def check_classic_equivalence() -> CheckResult:
    gap = classic_gap()
    return CheckResult(name="classic_equivalence", passed=gap <= 1e-12, detail=f"max gap {gap:.2e}")


def check_zero_inertia() -> CheckResult:
    objective = make_objective("ackley", 1, domain=(-3.0, 3.0))
    rows = zero_inertia_rate(objective, SolverConfig(), [0.2, 0.1, 0.05, 0.025, 0.0], seed=3, t_final=1.0)
    slope = loglog_slope(rows)
    zero_gap = rows[-1].gap
    return CheckResult(name="zero_inertia", passed=slope >= 0.8 and zero_gap == 0.0,
                       detail=f"slope {slope:.3f}, gap at m=0 {zero_gap:g}")


def check_meanfield_validation(n_particles: int = 100_000) -> CheckResult:
    pipeline = MeanFieldPipeline(SplittingVfpSolver(), NumpySwarmEngine())
    spec = MeanFieldRunSpec(pde="pso", t_final=1.0, snapshots=[0.5, 1.0], compare_particles=n_particles)
    outcome = pipeline.run(spec)
    l1 = {t: r.l1 for t, r in outcome.distances.items()}
    return CheckResult(name="meanfield_validation", passed=all(v <= 0.1 for v in l1.values()),
                       detail=", ".join(f"t={t:g}: L1 {v:.4f}" for t, v in sorted(l1.items())))


def low_inertia_distances(minimum: float, m_values=(0.5, 0.1, 0.01), n_particles: int = 20_000,
                          t_final: float = 2.0, seed: int = 0) -> list[float]:
    """W1 at t_final between the inertial particle density and the mean-field consensus density."""
    solver = SplittingVfpSolver()
    objective = make_objective("ackley", 1, domain=(-3.0, 3.0))
    if minimum != 0.0:
        objective = shift_minimum(objective, [minimum])
    params = MeanFieldParams()
    dt = 0.01
    rho = uniform_density_1d(-3.0, 3.0, 120)
    for _ in range(int(round(t_final / dt))):
        rho = solver.mf_cbo_step(rho, objective, params, dt)
    engine = NumpySwarmEngine()
    out = []
    for m in m_values:
        config = particle_config("pso", params.model_copy(update={"m": m, "gamma": 1.0 - m}), dt, (-4.0, 4.0))
        samples = particle_samples(engine, objective, config, n_particles, seed, [t_final], (-3.0, 3.0))
        out.append(wasserstein1_samples_grid(samples[t_final], rho))
    return out


def check_low_inertia_ordering() -> CheckResult:
    details, ok = [], True
    for minimum in (0.0, 1.0):
        w1 = low_inertia_distances(minimum)
        ok = ok and all(a > b for a, b in zip(w1, w1[1:]))
        details.append(f"x*={minimum:g}: " + ", ".join(f"{v:.4f}" for v in w1))
    return CheckResult(name="low_inertia_ordering", passed=ok, detail="; ".join(details))


def check_pde_invariants(n_steps: int = 100) -> CheckResult:
    solver = SplittingVfpSolver()
    objective = make_objective("ackley", 1, domain=(-3.0, 3.0))
    params = MeanFieldParams()
    f = uniform_phase_density(PhaseGrid())
    masses, low = [f.mass()], float(f.values.min())
    for _ in range(n_steps):
        f = solver.mf_pso_step(f, objective, params)
        masses.append(f.mass())
        low = min(low, float(f.values.min()))
    monotone = all(b <= a + 1e-10 for a, b in zip(masses, masses[1:]))
    order = maxwellian_order(solver)
    ok = monotone and masses[-1] <= masses[0] + 1e-10 and low >= -1e-12 and order >= 1.8
    return CheckResult(name="pde_invariants", passed=ok,
                       detail=f"mass {masses[0]:.12f} -> {masses[-1]:.12f}, min {low:.2e}, Maxwellian order {order}")


LYAPUNOV_CONFIG = SolverConfig(mode=SolverMode.SDPSO_NOMEM, m=0.05, lam=0.5, sigma=0.1, alpha=0.1, dt=0.01)


def check_lyapunov(replicates: int = 50) -> CheckResult:
    objective = make_objective("ackley", 20, domain=(-3.0, 3.0))
    fit = lyapunov_decay(objective, LYAPUNOV_CONFIG, n_particles=100, seed=11,
                         n_replicates=replicates, n_steps=500)
    ok = fit.decays and fit.mu_initial is not None and fit.mu_initial > 0.0
    return CheckResult(name="lyapunov_decay", passed=ok,
                       detail=f"slope {fit.slope:.4g} in [{fit.ci_low:.4g}, {fit.ci_high:.4g}], mu0 {fit.mu_initial:.3g}")


def check_consensus_properties(cases: int = 10_000, seed: int = 5) -> CheckResult:
    rng = np.random.default_rng(seed)
    failures = 0
    for _ in range(cases):
        n, d = int(rng.integers(1, 8)), int(rng.integers(1, 4))
        x = rng.normal(size=(n, d))
        # dyadic values keep the shifted exponents exact
        f = rng.integers(-512, 512, n) / 32.0
        alpha = float(10 ** rng.uniform(-2, 3))
        c = float(rng.integers(-4096, 4096)) / 32.0
        q = global_best(x, f, alpha)
        failures += not np.allclose(q, global_best(x, f + c, alpha), atol=1e-12, rtol=0)
        failures += not (np.all(q >= x.min(axis=0) - 1e-12) and np.all(q <= x.max(axis=0) + 1e-12))
        lv = laplace_value(f, alpha)
        failures += not (f.min() - 1e-12 <= lv <= f.min() + math.log(n) / alpha + 1e-12)
        fx, fy = rng.normal(size=2)
        failures += abs(smooth_switch(fx, fy, alpha) + smooth_switch(fy, fx, alpha) - 2.0) > 1e-15
    x = rng.normal(size=(50, 3))
    f = rng.permutation(50).astype(float)
    sharp = float(np.max(np.abs(global_best(x, f, 1e6) - argmin_point(x, f))))
    failures += sharp > 1e-9
    return CheckResult(name="consensus_properties", passed=failures == 0, detail=f"{failures} failures")


def acceptance_checks(harness: ExperimentHarness, runs: int = 50) -> list[tuple[str, Callable[[], CheckResult]]]:
    return [
        ("ackley_table", lambda: check_ackley_table(harness, runs)),
        ("rastrigin_table", lambda: check_rastrigin_table(harness, runs)),
        ("function_table", lambda: check_function_table(harness, runs)),
        ("classic_equivalence", check_classic_equivalence),
        ("zero_inertia", check_zero_inertia),
        ("meanfield_validation", check_meanfield_validation),
        ("low_inertia_ordering", check_low_inertia_ordering),
        ("pde_invariants", check_pde_invariants),
        ("lyapunov_decay", lambda: check_lyapunov(runs)),
        ("consensus_properties", check_consensus_properties),
    ]


def run_acceptance(harness: ExperimentHarness, runs: int = 50) -> list[CheckResult]:
    results = []
    for name, check in acceptance_checks(harness, runs):
        try:
            result = check()
        except Exception as e:
            logger.error(f"[Acceptance] check raised: {e}")
            result = CheckResult(name=name, passed=False, detail=str(e))
        logger.info(f"[Acceptance] {result.name}: {'PASS' if result.passed else 'FAIL'} ({result.detail})")
        results.append(result)
    return results
