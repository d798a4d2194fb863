"""
Dimensional-splitting solvers for the one-dimensional kinetic consensus equations.

Sub-steps (Lie splitting, in this order):
  x-transport   backward semi-Lagrangian, linear interpolation, zero inflow
  v-collision   implicit Chang-Cooper (exponentially fitted) flux, batched Thomas solve
  y-relaxation  conservative Lax-Wendroff with minmod limiter (memory equation only)

Boundary nodes of every axis are held at zero, so the trapezoidal mass equals the
interior sum and can only leave through the boundary.
"""
import logging
from typing import Optional

import numpy as np

from src.domain.consensus import global_best, smooth_switch
from src.domain.errors import CflError, ConsensusError, SchemeError
from src.domain.meanfield import Density1D, MeanFieldParams, PhaseDensity, PhaseGrid
from src.domain.objectives import Objective
from src.domain.solver_interfaces import IMeanFieldSolver

logger = logging.getLogger(__name__)

MASS_TOLERANCE = 1e-10
NEGATIVITY_TOLERANCE = -1e-12
CFL_LIMIT = 0.9


def solve_tridiagonal(lower: np.ndarray, diag: np.ndarray, upper: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """
    Thomas algorithm over the last axis, batched over all leading axes.
    lower[..., 0] and upper[..., -1] are ignored.
    """
    n = diag.shape[-1]
    shape = np.broadcast_shapes(lower.shape, diag.shape, upper.shape, rhs.shape)
    lower, diag, upper = (np.broadcast_to(a, shape) for a in (lower, diag, upper))
    gamma = np.empty(shape)
    x = np.empty(shape)
    beta = diag[..., 0]
    gamma[..., 0] = upper[..., 0] / beta
    x[..., 0] = rhs[..., 0] / beta
    for i in range(1, n):
        beta = diag[..., i] - lower[..., i] * gamma[..., i - 1]
        if i < n - 1:
            gamma[..., i] = upper[..., i] / beta
        x[..., i] = (rhs[..., i] - lower[..., i] * x[..., i - 1]) / beta
    for i in range(n - 2, -1, -1):
        x[..., i] -= gamma[..., i] * x[..., i + 1]
    return x


def bernoulli(w: np.ndarray) -> np.ndarray:
    """B(w) = w / (exp(w) - 1), with B(0) = 1."""
    w = np.asarray(w, dtype=float)
    small = np.abs(w) < 1e-8
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        out = w / np.expm1(w)
    return np.where(small, 1.0 - 0.5 * w, out)


def chang_cooper_weights(a: np.ndarray, D: np.ndarray, h: float) -> tuple[np.ndarray, np.ndarray]:
    """
    Face coefficients of the flux J = a f + D f' written as J = cp f_right - cm f_left.
    Zero diffusion falls back to first-order upwinding.
    """
    a, D = np.broadcast_arrays(np.asarray(a, dtype=float), np.asarray(D, dtype=float))
    diffusive = D > 0.0
    safe_D = np.where(diffusive, D, 1.0)
    w = a * h / safe_D
    cp = np.where(diffusive, (safe_D / h) * bernoulli(-w), np.maximum(a, 0.0))
    cm = np.where(diffusive, (safe_D / h) * bernoulli(w), np.maximum(-a, 0.0))
    return cp, cm


def implicit_flux_step(values: np.ndarray, a_faces: np.ndarray, D_faces: np.ndarray,
                       h: float, dt: float) -> np.ndarray:
    """
    Backward-Euler step of f_t = d/ds (a f + D f_s) along the last axis.
    ``a_faces``/``D_faces`` live on the n - 1 faces between nodes; the end nodes stay zero.
    """
    cp, cm = chang_cooper_weights(a_faces, D_faces, h)
    r = dt / h
    # interior unknowns 1..n-2; face k sits between nodes k and k+1
    lower = -r * cm[..., :-1]
    upper = -r * cp[..., 1:]
    diag = 1.0 + r * (cm[..., 1:] + cp[..., :-1])
    out = np.zeros_like(values)
    out[..., 1:-1] = solve_tridiagonal(lower, diag, upper, values[..., 1:-1])
    return out


def transport_x(values: np.ndarray, v_nodes: np.ndarray, dx: float, dt: float) -> np.ndarray:
    """
    Backward semi-Lagrangian transport along axis 0 with speed v (last axis):
    f*(x_i, v) = f(x_i - v dt, v), linear interpolation, zero outside the box.
    """
    nx = values.shape[0]
    out = np.zeros_like(values)
    for j, v in enumerate(v_nodes):
        s = v * dt / dx
        n = int(np.floor(s))
        theta = s - n
        column = values[..., j]
        out[..., j] = (1.0 - theta) * _shifted(column, n, nx) + theta * _shifted(column, n + 1, nx)
    out[0] = 0.0
    out[-1] = 0.0
    return out


def _shifted(column: np.ndarray, k: int, n: int) -> np.ndarray:
    """b[i] = column[i - k] where that index exists, else 0."""
    b = np.zeros_like(column)
    if abs(k) >= n:
        return b
    if k >= 0:
        b[k:] = column[:n - k]
    else:
        b[:n + k] = column[-k:]
    return b


def _minmod(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.where(a * b > 0.0, np.sign(a) * np.minimum(np.abs(a), np.abs(b)), 0.0)


def advect_conservative(values: np.ndarray, c_faces: np.ndarray, h: float, dt: float,
                        axis: int, limiter: bool = True) -> np.ndarray:
    """
    Flux-form Lax-Wendroff step of f_t + (c f)_s = 0 along ``axis``.
    c_faces holds the speed on the n - 1 faces. Boundary faces use pure upwinding.
    """
    f = np.moveaxis(values, axis, -1)
    c = np.moveaxis(c_faces, axis, -1)
    lam = dt / h
    padded = np.concatenate([np.zeros(f.shape[:-1] + (1,)), f, np.zeros(f.shape[:-1] + (1,))], axis=-1)
    delta = np.diff(padded, axis=-1)          # delta[..., k] = f_k - f_{k-1}, k = 0..n
    jump = delta[..., 1:-1]                   # f_{k+1} - f_k on faces k = 0..n-2
    if limiter:
        slope_left = _minmod(delta[..., :-2], delta[..., 1:-1])   # node k
        slope_right = _minmod(delta[..., 1:-1], delta[..., 2:])   # node k+1
        correction = np.where(c >= 0.0, slope_left, slope_right)
    else:
        correction = jump
    face = np.where(c >= 0.0, f[..., :-1], f[..., 1:]) \
        + 0.5 * np.sign(c) * (1.0 - lam * np.abs(c)) * correction
    face[..., 0] = np.where(c[..., 0] >= 0.0, f[..., 0], f[..., 1])
    face[..., -1] = np.where(c[..., -1] >= 0.0, f[..., -2], f[..., -1])
    flux = c * face
    out = np.zeros_like(f)
    out[..., 1:-1] = f[..., 1:-1] - lam * (flux[..., 1:] - flux[..., :-1])
    return np.moveaxis(out, -1, axis)


def trapezoid_weights(n: int, h: float) -> np.ndarray:
    w = np.full(n, h)
    w[0] = w[-1] = 0.5 * h
    return w


def uniform_phase_density(grid: PhaseGrid) -> PhaseDensity:
    """Uniform datum on the box (y = x on the diagonal with memory), unit trapezoidal mass."""
    g = np.zeros((grid.nx, grid.nv))
    g[1:-1, 1:-1] = 1.0
    if grid.with_memory:
        values = np.zeros(grid.shape)
        idx = np.arange(grid.nx)
        values[idx, idx, :] = g / grid.dy
        values[:, 0, :] = 0.0
        values[:, -1, :] = 0.0
    else:
        values = g
    density = PhaseDensity(grid=grid, values=values)
    return PhaseDensity(grid=grid, values=values / density.mass())


def uniform_density_1d(x_lo: float = -3.0, x_hi: float = 3.0, nx: int = 120) -> Density1D:
    nodes = np.linspace(x_lo, x_hi, nx)
    values = np.zeros(nx)
    values[1:-1] = 1.0
    return Density1D(x_nodes=nodes, values=values / np.trapezoid(values, nodes))


def local_maxwellian(v: np.ndarray, x: float, consensus: float, sigma: float, m: float,
                     gamma: float = 1.0, lam: float = 0.0) -> np.ndarray:
    """
    Stationary solution of the frozen-coefficient velocity equation at position x:
    Gaussian with mean -lam (x - consensus) / gamma and variance sigma^2 (x - consensus)^2 / (2 m gamma).
    """
    dist = x - consensus
    mean = -lam * dist / gamma
    var = sigma ** 2 * dist ** 2 / (2.0 * m * gamma)
    return np.exp(-0.5 * (v - mean) ** 2 / var) / np.sqrt(2.0 * np.pi * var)


def admissible_dt(grid: PhaseGrid, objective: Objective, params: MeanFieldParams) -> float:
    """Largest dt for which the y-relaxation keeps its CFL number at the limit."""
    c = _relaxation_speed(grid, objective, params)
    c_max = float(np.max(np.abs(c)))
    return np.inf if c_max == 0.0 else CFL_LIMIT * grid.dy / c_max


def _relaxation_speed(grid: PhaseGrid, objective: Objective, params: MeanFieldParams) -> np.ndarray:
    """nu (x - y) S(x, y) on the y-faces, shape (nx, ny - 1)."""
    x = grid.x_nodes
    y_faces = 0.5 * (grid.y_nodes[:-1] + grid.y_nodes[1:])
    fx = np.asarray(objective.eval(x[:, None]))
    fy = np.asarray(objective.eval(y_faces[:, None]))
    s = smooth_switch(fx[:, None], fy[None, :], params.beta)
    return params.nu * (x[:, None] - y_faces[None, :]) * s


class SplittingVfpSolver(IMeanFieldSolver):

    def consensus_on_grid(self, nodes: np.ndarray, rho: np.ndarray, objective: Objective, alpha: float) -> float:
        """Softmin consensus of the grid measure rho dx (trapezoidal weights)."""
        weights = trapezoid_weights(nodes.size, float(nodes[1] - nodes[0])) * np.maximum(rho, 0.0)
        if not (weights > 0).any():
            raise ConsensusError("Density has no mass left on the grid")
        values = np.asarray(objective.eval(nodes[:, None]))
        return float(global_best(nodes, values, alpha, weights))

    def marginal_x(self, f: PhaseDensity) -> Density1D:
        rho = np.trapezoid(f.values, dx=f.grid.dv, axis=-1)
        if f.grid.with_memory:
            rho = np.trapezoid(rho, dx=f.grid.dy, axis=-1)
        return Density1D(x_nodes=f.grid.x_nodes, values=rho, time=f.time)

    def marginal_y(self, f: PhaseDensity) -> Density1D:
        if not f.grid.with_memory:
            raise SchemeError("marginal_y needs a density over (x, y, v)")
        rho = np.trapezoid(np.trapezoid(f.values, dx=f.grid.dv, axis=-1), dx=f.grid.dx, axis=0)
        return Density1D(x_nodes=f.grid.y_nodes, values=rho, time=f.time)

    def velocity_step(self, values: np.ndarray, v_nodes: np.ndarray, dt: float, friction: float,
                      offset: np.ndarray, diffusion: np.ndarray) -> np.ndarray:
        """
        Implicit step of f_t = d/dv ((friction v + offset) f + diffusion f_v) per slice.
        ``offset`` and ``diffusion`` are constant in v and broadcast over the leading axes.
        """
        dv = float(v_nodes[1] - v_nodes[0])
        v_faces = 0.5 * (v_nodes[:-1] + v_nodes[1:])
        a = friction * v_faces + np.asarray(offset)[..., None]
        D = np.broadcast_to(np.asarray(diffusion)[..., None], a.shape)
        return implicit_flux_step(values, a, D, dv, dt)

    def mf_pso_step(self, f: PhaseDensity, objective: Objective, params: MeanFieldParams,
                    consensus: Optional[float] = None) -> PhaseDensity:
        grid = f.grid
        if grid.with_memory:
            raise SchemeError("mf_pso_step expects a density over (x, v)")
        mass_before = f.mass()
        x = grid.x_nodes
        if consensus is None:
            consensus = self.consensus_on_grid(x, self.marginal_x(f).values, objective, params.alpha)
        values = transport_x(f.values, grid.v_nodes, grid.dx, grid.dt)
        dist = x - consensus
        values = self.velocity_step(
            values, grid.v_nodes, grid.dt,
            friction=params.gamma / params.m,
            offset=(params.lam / params.m) * dist,
            diffusion=params.sigma ** 2 / (2.0 * params.m ** 2) * dist ** 2,
        )
        out = PhaseDensity(grid=grid, values=values, time=f.time + grid.dt)
        self._check(out.values, out.mass(), mass_before, strict=True)
        return out

    def mf_pso_memory_step(self, f: PhaseDensity, objective: Objective, params: MeanFieldParams,
                           consensus: Optional[float] = None) -> PhaseDensity:
        grid = f.grid
        if not grid.with_memory:
            raise SchemeError("mf_pso_memory_step expects a density over (x, y, v)")
        mass_before = f.mass()
        if params.nu > 0.0:
            dt_max = admissible_dt(grid, objective, params)
            if grid.dt > dt_max:
                raise CflError(grid.dt * CFL_LIMIT / dt_max, dt_max)
        x, y = grid.x_nodes, grid.y_nodes
        if consensus is None:
            consensus = self.consensus_on_grid(y, self.marginal_y(f).values, objective, params.alpha)

        values = transport_x(f.values, grid.v_nodes, grid.dx, grid.dt)
        to_local = x[:, None] - y[None, :]
        to_global = (x - consensus)[:, None]
        m2 = 2.0 * params.m ** 2
        values = self.velocity_step(
            values, grid.v_nodes, grid.dt,
            friction=params.gamma / params.m,
            offset=(params.lambda1 * to_local + params.lambda2 * to_global) / params.m,
            diffusion=(params.sigma1 ** 2 * to_local ** 2 + params.sigma2 ** 2 * to_global ** 2) / m2,
        )
        if params.nu > 0.0:
            c = _relaxation_speed(grid, objective, params)[:, :, None]
            values = advect_conservative(values, np.broadcast_to(c, (grid.nx, grid.nx - 1, grid.nv)),
                                         grid.dy, grid.dt, axis=1, limiter=params.limiter)
        out = PhaseDensity(grid=grid, values=values, time=f.time + grid.dt)
        self._check(out.values, out.mass(), mass_before, strict=params.limiter)
        return out

    def mf_cbo_step(self, rho: Density1D, objective: Objective, params: MeanFieldParams, dt: float,
                    consensus: Optional[float] = None) -> Density1D:
        """
        rho_t = d/dx (lam (x - X) rho) + sigma^2 / 2 d2/dx2 ((x - X)^2 rho), written in flux form
        with drift (lam + sigma^2)(x - X) and diffusion sigma^2 (x - X)^2 / 2.
        """
        nodes = rho.x_nodes
        mass_before = rho.mass()
        if consensus is None:
            consensus = self.consensus_on_grid(nodes, rho.values, objective, params.alpha)
        faces = 0.5 * (nodes[:-1] + nodes[1:]) - consensus
        a = (params.lam + params.sigma ** 2) * faces
        D = 0.5 * params.sigma ** 2 * faces ** 2
        values = implicit_flux_step(rho.values, a, D, float(nodes[1] - nodes[0]), dt)
        out = Density1D(x_nodes=nodes, values=values, time=rho.time + dt)
        self._check(out.values, out.mass(), mass_before, strict=True)
        return out

    @staticmethod
    def _check(values: np.ndarray, mass_after: float, mass_before: float, strict: bool) -> None:
        if mass_after > mass_before + MASS_TOLERANCE:
            raise SchemeError(f"Mass increased from {mass_before:.15g} to {mass_after:.15g}")
        low = float(values.min())
        if low < NEGATIVITY_TOLERANCE:
            if strict:
                raise SchemeError(f"Negative density {low:.3e}")
            logger.warning(f"[MeanField] Unlimited Lax-Wendroff produced negative density {low:.3e}")
