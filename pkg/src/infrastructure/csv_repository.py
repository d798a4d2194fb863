import csv
import logging
import os

import numpy as np

from src.config import Config
from src.domain.diagnostics import DistanceReport, LyapunovSample, RateRow
from src.domain.errors import ConfigError
from src.domain.experiment import AggregateReport, RunReport, TrajectoryRecord
from src.domain.interfaces import IResultRepository
from src.domain.meanfield import Density1D, PhaseDensity, PhaseGrid

logger = logging.getLogger(__name__)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return repr(value)
    return str(value)


class CsvResultRepository(IResultRepository):
    """Plain CSV and text-grid persistence. Relative paths resolve against the output directory."""

    def __init__(self, base_dir: str = ""):
        self.base_dir = base_dir or Config.OUTPUT_DIR

    def _resolve(self, path: str) -> str:
        full = path if os.path.isabs(path) else os.path.join(self.base_dir, path)
        parent = os.path.dirname(full)
        if parent:
            os.makedirs(parent, exist_ok=True)
        return full

    def _write_rows(self, path: str, header: list[str], rows: list[list]) -> str:
        full = self._resolve(path)
        with open(full, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            for row in rows:
                writer.writerow([_fmt(v) for v in row])
        logger.debug(f"[Repository] wrote {len(rows)} rows to {full}")
        return full

    def write_runs(self, path: str, reports: list[RunReport]) -> str:
        return self._write_rows(
            path,
            ["run_id", "seed", "success", "diverged", "error_l2", "f_value", "n_iter"],
            [[r.run_id, r.seed, r.success, r.diverged, r.error_l2, r.f_value, r.n_iter] for r in reports],
        )

    def write_aggregates(self, path: str, aggregates: list[AggregateReport]) -> str:
        return self._write_rows(
            path,
            ["fingerprint", "label", "n_particles", "n_runs", "rate", "mean_error", "mean_f", "mean_iter",
             "n_diverged"],
            [[a.fingerprint, a.label, a.n_particles, a.n_runs, a.rate, a.mean_error, a.mean_f, a.mean_iter,
              a.n_diverged] for a in aggregates],
        )

    def write_trajectory(self, path: str, records: list[TrajectoryRecord]) -> str:
        dim = len(records[0].consensus) if records else 0
        header = ["step"] + [f"q{i}" for i in range(dim)] + ["value", "variance"]
        return self._write_rows(path, header,
                                [[r.step, *r.consensus, r.value, r.variance] for r in records])

    def write_density(self, path: str, density: PhaseDensity) -> str:
        g = density.grid
        if g.with_memory:
            fields = [g.nx, g.nv, g.nx, g.x_lo, g.x_hi, g.v_lo, g.v_hi, g.x_lo, g.x_hi]
        else:
            fields = [g.nx, g.nv, g.x_lo, g.x_hi, g.v_lo, g.v_hi]
        fields += [density.time, density.mass()]
        full = self._resolve(path)
        rows = density.values.reshape(-1, g.nv)
        np.savetxt(full, rows, header=" ".join(_fmt(v) for v in fields),
                   comments="")
        return full

    def read_density(self, path: str) -> PhaseDensity:
        full = self._resolve(path)
        with open(full, encoding="utf-8") as fh:
            header = fh.readline().split()
        if len(header) == 11:
            nx, nv, _, x_lo, x_hi, v_lo, v_hi, _, _, t, _ = header
            with_memory = True
        elif len(header) == 8:
            nx, nv, x_lo, x_hi, v_lo, v_hi, t, _ = header
            with_memory = False
        else:
            raise ConfigError(f"Unrecognized density header in {full}")
        grid = PhaseGrid(x_lo=float(x_lo), x_hi=float(x_hi), nx=int(nx),
                         v_lo=float(v_lo), v_hi=float(v_hi), nv=int(nv), with_memory=with_memory)
        values = np.loadtxt(full, skiprows=1, ndmin=2).reshape(grid.shape)
        return PhaseDensity(grid=grid, values=values, time=float(t))

    def write_marginal(self, path: str, density: Density1D) -> str:
        return self._write_rows(path, ["x", "rho"],
                                [[float(x), float(r)] for x, r in zip(density.x_nodes, density.values)])

    def write_distance(self, path: str, reports: dict[float, DistanceReport]) -> str:
        return self._write_rows(path, ["t", "w1", "l1", "sup"],
                                [[t, r.w1, r.l1, r.sup] for t, r in sorted(reports.items())])

    def write_rates(self, path: str, rows: list[RateRow], slope: float) -> str:
        out = [[r.m, r.gap, r.w1] for r in rows]
        out.append(["slope", slope, ""])
        return self._write_rows(path, ["m", "gap", "w1"], out)

    def write_lyapunov(self, path: str, samples: list[LyapunovSample]) -> str:
        return self._write_rows(path, ["t", "H", "variance", "kinetic", "mu"],
                                [[s.t, s.H, s.variance, s.kinetic, s.mu] for s in samples])
