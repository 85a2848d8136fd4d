"""Shared fixtures: one operator cache per test session."""

import json

import pytest

from measure_lab.domain.services.green_ops import GreenOperator
from measure_lab.domain.services.reduction import ReductionEngine
from measure_lab.domain.services.semilinear import SemilinearSolver
from measure_lab.domain.value_objects.grid import Grid
from measure_lab.infrastructure.sparse import FactorizationRepository, SparseOperatorFactory


@pytest.fixture(scope="session")
def repository():
    return FactorizationRepository(SparseOperatorFactory(), max_entries=16)


@pytest.fixture(scope="session")
def green(repository):
    return GreenOperator(repository)


@pytest.fixture(scope="session")
def solver(repository):
    return SemilinearSolver(repository)


@pytest.fixture(scope="session")
def engine(solver):
    return ReductionEngine(solver)


@pytest.fixture
def grid31():
    return Grid.unit_square(31)


@pytest.fixture
def write_config(tmp_path):
    """Write a config dict to tmp_path/config.json and return the path."""

    def write(data: dict, name: str = "config.json"):
        path = tmp_path / name
        path.write_text(json.dumps(data), encoding="utf-8")
        return path

    return write
