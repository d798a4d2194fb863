import numpy as np
import pytest

from src.domain.objectives import make_objective
from src.infrastructure.csv_repository import CsvResultRepository
from src.infrastructure.swarm_engine import NumpySwarmEngine


@pytest.fixture
def engine() -> NumpySwarmEngine:
    return NumpySwarmEngine()


@pytest.fixture
def ackley_1d():
    return make_objective("ackley", 1, domain=(-3.0, 3.0))


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture
def repository(tmp_path) -> CsvResultRepository:
    return CsvResultRepository(str(tmp_path))
