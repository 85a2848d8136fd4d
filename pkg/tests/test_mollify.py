import math

import numpy as np
import pytest

from measure_lab.domain.exceptions import PreconditionError
from measure_lab.domain.services.mollify import (
    analytic_normalization,
    build_kernel,
    check_green_domination,
    check_superharmonic_monotonicity,
    default_schedule,
    grid_limit_index,
    mollify_measure,
    narrow_pairing_gap,
    pairing,
    sphere_measure,
)
from measure_lab.domain.services.measure_model import discretize_rhs
from measure_lab.domain.value_objects.grid import Grid, GridFunction
from measure_lab.domain.value_objects.measure import Atom, Measure
from measure_lab.domain.value_objects.mollifier_kernel import bump_profile, cosine_profile


def _sine(X, Y):
    return np.sin(np.pi * X) * np.sin(np.pi * Y)


def test_profiles_vanish_outside_unit_ball():
    r = np.array([0.0, 0.5, 1.0, 1.5])
    assert bump_profile(r)[0] == pytest.approx(math.exp(-1.0))
    assert cosine_profile(r)[0] == 1.0
    assert not np.any(bump_profile(r)[2:])
    assert not np.any(cosine_profile(r)[2:])


def test_sphere_measure_in_two_dimensions():
    assert sphere_measure(2, 0.5) == pytest.approx(math.pi)


def test_cosine_normalization_closed_form():
    assert analytic_normalization("cosine") == pytest.approx(
        1.0 / (math.pi / 2.0 - 2.0 / math.pi), rel=1e-8
    )


@pytest.mark.parametrize("profile", ["bump", "cosine"])
@pytest.mark.parametrize("n", [4, 8, 16])
def test_kernel_has_unit_discrete_mass(profile, n):
    kernel = build_kernel(n, Grid.unit_square(63), profile)
    assert abs(kernel.mass - 1.0) < 1e-12
    assert kernel.radius_nodes == math.ceil(64 / n)
    assert np.allclose(kernel.weights, kernel.weights.T, rtol=1e-14, atol=0.0)


def test_kernel_normalization_gap_shrinks_with_resolution():
    coarse = build_kernel(8, Grid.unit_square(31)).normalization_gap
    fine = build_kernel(8, Grid.unit_square(127)).normalization_gap
    assert fine < coarse


def test_kernel_narrower_than_two_cells_is_rejected():
    grid = Grid.unit_square(31)
    build_kernel(16, grid)
    with pytest.raises(PreconditionError):
        build_kernel(17, grid)


def test_kernel_rejects_unknown_profile():
    with pytest.raises(ValueError):
        build_kernel(4, Grid.unit_square(31), "gauss")


def test_mollified_dirac_keeps_mass(grid31):
    m = Measure.dirac(grid31, 0.5, 0.5, 2.0)
    smoothed = mollify_measure(m, build_kernel(4, grid31), grid31)
    assert not smoothed.atoms
    assert smoothed.is_nonnegative()
    assert grid31.h**2 * smoothed.density.values.sum() == pytest.approx(2.0, abs=1e-12)


def test_mollification_is_linear_and_monotone(grid31):
    kernel = build_kernel(8, grid31)
    rng = np.random.default_rng(1)
    first = Measure(GridFunction(grid31, rng.uniform(size=grid31.shape)), (Atom(0.4, 0.6, 1.0),))
    second = Measure(GridFunction(grid31, rng.uniform(size=grid31.shape)))

    def smooth(m):
        return mollify_measure(m, kernel, grid31).density.values

    combined = smooth(3.0 * first - 0.5 * second)
    assert np.abs(combined - (3.0 * smooth(first) - 0.5 * smooth(second))).max() < 1e-10
    assert np.all(smooth(first) <= smooth(first + second) + 1e-12)


def test_default_schedule_from_support_distance():
    grid = Grid.unit_square(63)
    m = Measure.dirac(grid, 0.5, 0.5)
    assert default_schedule(m, grid) == [8, 16, 32]
    assert default_schedule(m, grid, n0=4, max_levels=2) == [4, 8]
    with pytest.raises(PreconditionError):
        default_schedule(m, Grid.unit_square(7), n0=8)


def test_default_schedule_without_interior_atoms():
    grid = Grid.unit_square(63)
    density = Measure(GridFunction.from_callable(grid, _sine))
    assert default_schedule(density, grid) == [8, 16, 32]
    assert default_schedule(Measure.dirac(grid, 0.1, 0.5), grid) == [8, 16, 32]
    near = Measure.from_atoms(grid, [Atom(0.1, 0.5, 1.0), Atom(0.25, 0.5, 1.0)])
    assert default_schedule(near, grid) == [16, 32]


def test_grid_limit_kernel_is_the_nodal_identity(grid31):
    limit = grid_limit_index(grid31)
    assert limit == 32
    with pytest.raises(PreconditionError):
        build_kernel(limit, grid31)
    kernel = build_kernel(limit, grid31, subcell=True)
    assert kernel.is_identity
    assert kernel.mass == pytest.approx(1.0)
    m = Measure(GridFunction.from_callable(grid31, _sine), (Atom(0.3, 0.6, 1.0),))
    smoothed = mollify_measure(m, kernel, grid31)
    assert np.allclose(smoothed.density.values, discretize_rhs(m, grid31).values)


def test_kernel_support_nodes():
    grid = Grid.unit_square(63)
    assert build_kernel(8, grid).support_nodes == 7
    assert not build_kernel(8, grid).is_identity
    assert build_kernel(16, grid, "cosine").support_nodes == 3


def test_pairing_with_atoms_and_density(grid31):
    m = Measure(GridFunction.constant(grid31, 0.0), (Atom(0.5, 0.5, 2.0),))
    assert pairing(m, _sine) == pytest.approx(2.0)


def test_narrow_convergence_improves_with_n():
    grid = Grid.unit_square(127)
    m = Measure.dirac(grid, 0.5, 0.5)
    wide = narrow_pairing_gap(m, build_kernel(8, grid), _sine)
    narrow = narrow_pairing_gap(m, build_kernel(32, grid), _sine)
    assert narrow < wide
    assert narrow < 1e-2


def test_superharmonic_chain_for_green_potential(green):
    grid = Grid.unit_square(63)
    u = green.apply(Measure.dirac(grid, 0.5, 0.5), grid)
    center = grid.nearest_node(0.5, 0.5)
    node = (center[0] + 1, center[1])
    for n in (4, 5, 6, 8):
        check = check_superharmonic_monotonicity(u, node, n)
        assert check.superharmonic
        assert check.holds


def test_superharmonic_chain_needs_interior_node(green, grid31):
    u = green.apply(Measure.dirac(grid31, 0.5, 0.5), grid31)
    with pytest.raises(PreconditionError):
        check_superharmonic_monotonicity(u, (0, 0), 4)


def test_green_domination(green):
    grid = Grid.unit_square(63)
    result = check_green_domination(Measure.dirac(grid, 0.5, 0.5), 8, green)
    assert result.holds
    assert result.c_est <= 1.05


def test_green_domination_preconditions(green, grid31):
    with pytest.raises(PreconditionError):
        check_green_domination(Measure.dirac(grid31, 0.5, 0.5, -1.0), 8, green)
    with pytest.raises(PreconditionError):
        check_green_domination(Measure.dirac(grid31, 0.1, 0.5), 4, green)
    assert check_green_domination(Measure.zero(grid31), 4, green).c_est is None


def test_green_domination_restricted_to_interior(green):
    grid = Grid.unit_square(63)
    near = check_green_domination(Measure.dirac(grid, 0.1, 0.5), 4, green, restrict=True)
    assert near.holds and near.c_est is None
    density = Measure(GridFunction.from_callable(grid, _sine))
    result = check_green_domination(density, 8, green, restrict=True)
    assert result.holds
    assert result.c_est <= 1.05
