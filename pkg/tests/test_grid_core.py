import math

import numpy as np
import pytest

from measure_lab.domain.exceptions import GridMismatchError
from measure_lab.domain.services.grid_core import build_grid, laplacian_apply, norms
from measure_lab.domain.value_objects.grid import Grid, GridFunction


def _sine(X, Y):
    return np.sin(np.pi * X) * np.sin(np.pi * Y)


def test_unit_square_spacing():
    assert build_grid((0.0, 1.0, 0.0, 1.0), 3).h == 0.25
    assert build_grid((0.0, 1.0, 0.0, 1.0), 127).h == 1.0 / 128


@pytest.mark.parametrize(
    "bounds, n",
    [
        ((1.0, 0.0, 0.0, 1.0), 7),
        ((0.0, 1.0, 0.0, 1.0), 2),
        ((0.0, 2.0, 0.0, 1.0), 7),
    ],
)
def test_build_grid_rejects_bad_geometry(bounds, n):
    with pytest.raises(ValueError):
        build_grid(bounds, n)


def test_node_layout_and_nearest_node():
    grid = Grid.unit_square(3)
    assert grid.node_point(0, 2) == (0.25, 0.75)
    # ties go to the lower index, boundary layer snaps inward
    assert grid.nearest_node(0.375, 0.5) == (0, 1)
    assert grid.nearest_node(0.01, 0.99) == (0, 2)


def test_refine_halves_spacing():
    grid = Grid.unit_square(15).refine()
    assert grid.n == 31
    assert grid.h == pytest.approx(1.0 / 32)


def test_laplacian_of_spike():
    grid = Grid.unit_square(3)
    values = np.zeros(grid.shape)
    values[1, 1] = 1.0
    out = laplacian_apply(grid, GridFunction(grid, values)).values
    assert out[1, 1] == pytest.approx(4.0 / grid.h**2)
    for i, j in [(0, 1), (2, 1), (1, 0), (1, 2)]:
        assert out[i, j] == pytest.approx(-1.0 / grid.h**2)
    assert out[0, 0] == 0.0


def test_laplacian_of_zero_is_zero():
    grid = Grid.unit_square(7)
    assert not np.any(laplacian_apply(grid, GridFunction.zeros(grid)).values)


def test_laplacian_eigenfunction_second_order():
    grid = Grid.unit_square(127)
    u = GridFunction.from_callable(grid, _sine)
    applied = laplacian_apply(grid, u).values
    error = np.abs(applied - 2.0 * np.pi**2 * u.values).max() / (2.0 * np.pi**2)
    assert error < 1e-3


def test_laplacian_grid_mismatch():
    with pytest.raises(GridMismatchError):
        laplacian_apply(Grid.unit_square(7), GridFunction.zeros(Grid.unit_square(5)))


def test_laplacian_linear_and_positive_definite():
    grid = Grid.unit_square(15)
    rng = np.random.default_rng(3)
    u = GridFunction(grid, rng.normal(size=grid.shape))
    v = GridFunction(grid, rng.normal(size=grid.shape))
    combined = laplacian_apply(grid, 2.0 * u + (-0.5) * v).values
    separate = 2.0 * laplacian_apply(grid, u).values - 0.5 * laplacian_apply(grid, v).values
    assert np.abs(combined - separate).max() <= 1e-12 * np.abs(separate).max()
    assert grid.h**2 * float((u.values * laplacian_apply(grid, u).values).sum()) > 0.0


def test_matrix_matches_stencil(repository):
    grid = Grid.unit_square(9)
    rng = np.random.default_rng(0)
    u = GridFunction(grid, rng.normal(size=grid.shape))
    matrix = repository.laplacian(grid)
    from_matrix = (matrix @ u.values.ravel()).reshape(grid.shape)
    assert np.allclose(from_matrix, laplacian_apply(grid, u).values, rtol=1e-13, atol=1e-9)
    dense = matrix.toarray()
    assert np.array_equal(dense, dense.T)
    lowest = np.linalg.eigvalsh(dense).min()
    exact = 8.0 / grid.h**2 * math.sin(math.pi * grid.h / 2.0) ** 2
    assert lowest == pytest.approx(exact, rel=1e-10)


def test_norms_of_constant_and_zero():
    grid = Grid.unit_square(31)
    l1, linf, _ = norms(GridFunction.constant(grid, 1.0), 1.5)
    assert l1 == pytest.approx(grid.h**2 * grid.n**2)
    assert linf == 1.0
    assert norms(GridFunction.zeros(grid), 1.0) == (0.0, 0.0, 0.0)


def test_w1q_of_sine_approaches_closed_form():
    grid = Grid.unit_square(127)
    w1q = GridFunction.from_callable(grid, _sine).w1q_norm(1.0)
    assert w1q == pytest.approx(8.0 / np.pi + 4.0 / np.pi**2, rel=2e-2)


@pytest.mark.parametrize("q", [0.5, 2.0, 3.0])
def test_norms_reject_q_outside_range(q):
    grid = Grid.unit_square(3)
    with pytest.raises(ValueError):
        norms(GridFunction.zeros(grid), q)


def test_grid_function_rejects_non_finite_values():
    grid = Grid.unit_square(3)
    values = np.zeros(grid.shape)
    values[0, 0] = np.nan
    with pytest.raises(ValueError):
        GridFunction(grid, values)


def test_grid_function_is_frozen():
    grid = Grid.unit_square(3)
    u = GridFunction.zeros(grid)
    with pytest.raises(ValueError):
        u.values[0, 0] = 1.0
