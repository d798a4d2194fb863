class PsoError(Exception):
    """Base class for every failure raised by the swarm toolkit."""


class ConfigError(PsoError, ValueError):
    """Invalid parameters, unknown config keys or inconsistent experiment specs."""


class DimensionError(PsoError, ValueError):
    pass


class DomainError(PsoError, ValueError):
    """A point or box lies outside the admissible domain of an objective."""


class ConsensusError(PsoError, ValueError):
    pass


class DivergenceError(PsoError, RuntimeError):
    """Non-finite swarm state. Carries the step at which it was detected."""

    def __init__(self, message: str, step_index: int):
        super().__init__(f"{message} (step {step_index})")
        self.step_index = step_index


class SchemeError(PsoError, RuntimeError):
    """A mean-field step produced mass growth or negative density."""


class CflError(SchemeError):
    def __init__(self, cfl: float, admissible_dt: float):
        super().__init__(
            f"y-advection CFL number {cfl:.3f} exceeds 0.9; use dt <= {admissible_dt:.6g}"
        )
        self.cfl = cfl
        self.admissible_dt = admissible_dt
