from abc import ABC, abstractmethod

from src.domain.diagnostics import DistanceReport, LyapunovSample, RateRow
from src.domain.experiment import AggregateReport, RunReport, TrajectoryRecord
from src.domain.meanfield import Density1D, PhaseDensity


class IResultRepository(ABC):
    @abstractmethod
    def write_runs(self, path: str, reports: list[RunReport]) -> str:
        """Write one CSV row per replicate run and return the file path."""
        pass

    @abstractmethod
    def write_aggregates(self, path: str, aggregates: list[AggregateReport]) -> str:
        """Write the table-layout aggregate CSV (one row per experiment spec)."""
        pass

    @abstractmethod
    def write_trajectory(self, path: str, records: list[TrajectoryRecord]) -> str:
        """Write the per-step consensus trajectory of a single run."""
        pass

    @abstractmethod
    def write_density(self, path: str, density: PhaseDensity) -> str:
        """Dump a phase-space density as a plain-text grid with its header line."""
        pass

    @abstractmethod
    def read_density(self, path: str) -> PhaseDensity:
        """Load a density previously written by write_density."""
        pass

    @abstractmethod
    def write_marginal(self, path: str, density: Density1D) -> str:
        """Write a one-dimensional density as two-column CSV (x, rho)."""
        pass

    @abstractmethod
    def write_distance(self, path: str, reports: dict[float, DistanceReport]) -> str:
        """Write distance reports keyed by snapshot time."""
        pass

    @abstractmethod
    def write_rates(self, path: str, rows: list[RateRow], slope: float) -> str:
        """Write zero-inertia gap rows and the fitted log-log slope."""
        pass

    @abstractmethod
    def write_lyapunov(self, path: str, samples: list[LyapunovSample]) -> str:
        """Write Lyapunov diagnostic rows (t, H, variance, kinetic, mu)."""
        pass
