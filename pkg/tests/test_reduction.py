import math

import numpy as np
import pytest

from measure_lab.domain.entities.results import Scheme
from measure_lab.domain.exceptions import PreconditionError, SequenceNotConvergedError
from measure_lab.domain.services.measure_model import total_variation
from measure_lab.domain.services.reduction import (
    ReductionEngine,
    ReductionOptions,
    extract_measure,
    ring_radii,
)
from measure_lab.domain.value_objects.grid import Grid, GridFunction
from measure_lab.domain.value_objects.measure import Atom, Measure
from measure_lab.domain.value_objects.nonlinearity import Nonlinearity


def signed_pair(grid):
    return Measure.from_atoms(grid, [Atom(0.25, 0.5, 1.0), Atom(0.75, 0.5, -1.0)])


def test_ring_radii():
    root2 = math.sqrt(2.0)
    assert ring_radii(1, 10) == pytest.approx([1.0, 2.0, 3.0, 3.0 * root2, 6.0, 6.0 * root2, 10.0])
    assert ring_radii(1, 1) == [1.0]
    assert ring_radii(2, 2.4) == [2.0]


def test_options_validation():
    with pytest.raises(ValueError):
        ReductionOptions(jobs=0)
    with pytest.raises(ValueError):
        ReductionOptions(patch_radius=-1)
    assert ReductionOptions(max_truncation_level=3).truncation_levels() == [1.0, 2.0, 4.0, 8.0]


def test_extract_measure_of_green_potential(green, grid31):
    u = green.apply(Measure.dirac(grid31, 0.5, 0.5, 2.0), grid31)
    extracted = extract_measure(u, Nonlinearity.zero(), [Atom(0.5, 0.5, 2.0)])
    assert extracted.atom_masses() == [pytest.approx(2.0, abs=1e-9)]
    assert total_variation(Measure(extracted.density)) < 1e-9


def test_extract_measure_with_shared_node(green, grid31):
    u = green.apply(Measure.dirac(grid31, 0.5, 0.5), grid31)
    h = grid31.h
    atoms = [Atom(0.5, 0.5, 0.5), Atom(0.5 + 0.1 * h, 0.5, 0.5)]
    extracted = extract_measure(u, Nonlinearity.zero(), atoms)
    assert len(extracted.atoms) == 1
    assert extracted.atom_masses()[0] == pytest.approx(1.0, abs=1e-9)


def test_truncation_keeps_good_atom(engine, grid31):
    m = Measure.dirac(grid31, 0.5, 0.5)
    result = engine.reduce_by_truncation(Nonlinearity.linear(1.0), m, grid31)
    assert result.converged
    assert result.scheme is Scheme.TRUNCATION
    assert result.extracted.atom_masses()[0] == pytest.approx(1.0, abs=0.05)
    assert result.trace[0].l1_increment is None
    assert result.increments[-1] < result.tolerance


def test_truncation_trace_rows(engine, grid31):
    m = Measure.dirac(grid31, 0.5, 0.5)
    result = engine.reduce_by_truncation(Nonlinearity.power(3.0), m, grid31)
    row = result.trace[-1].to_row()
    assert row["level"] == result.trace[-1].level
    assert row["atom_mass"] == pytest.approx(1.0, abs=0.05)
    assert result.summary()["n"] == 31


def test_truncation_levels_must_increase(engine, grid31):
    m = Measure.dirac(grid31, 0.5, 0.5)
    with pytest.raises(PreconditionError):
        engine.reduce_by_truncation(Nonlinearity.power(3.0), m, grid31, levels=[2.0, 1.0])
    with pytest.raises(PreconditionError):
        engine.reduce_by_truncation(Nonlinearity.power(3.0), m, grid31, levels=[])


def test_single_level_ladder_is_not_cauchy(engine, grid31):
    m = Measure.dirac(grid31, 0.5, 0.5)
    with pytest.raises(SequenceNotConvergedError) as excinfo:
        engine.reduce_by_truncation(Nonlinearity.power(3.0), m, grid31, levels=[1.0])
    result = excinfo.value.result
    assert result is not None
    assert not result.converged
    assert len(result.trace) == 1


def test_mollification_ladder_parallel_matches_serial(solver):
    grid = Grid.unit_square(63)
    m = Measure.dirac(grid, 0.5, 0.5)
    f = Nonlinearity.power(3.0)
    serial = ReductionEngine(solver, ReductionOptions(jobs=1))
    parallel = ReductionEngine(solver, ReductionOptions(jobs=3))
    first = serial.reduce_by_mollification(f, m, grid)
    second = parallel.reduce_by_mollification(f, m, grid)
    assert [t.level for t in first.trace] == [8.0, 16.0, 32.0, 64.0]
    assert first.u_star.max_abs_difference(second.u_star) == 0.0
    assert first.extracted.atom_masses()[0] == pytest.approx(1.0, abs=0.05)


def test_reduced_measure_of_zero(engine, grid31):
    assert engine.reduced_measure(Nonlinearity.power(3.0), Measure.zero(grid31), grid31).is_zero()


def test_projection_of_signed_pair_under_linear_absorption(engine, grid31):
    m = signed_pair(grid31)
    projected = engine.project(Nonlinearity.linear(1.0), m, grid31)
    assert total_variation(projected - m) <= 1e-2 * total_variation(m)
    masses = projected.atom_masses()
    assert masses[0] > 0.0 > masses[1]


def test_projection_variant_agrees(engine, grid31):
    m = signed_pair(grid31)
    f = Nonlinearity.linear(1.0)
    gap = total_variation(engine.project(f, m, grid31) - engine.project_variant(f, m, grid31))
    assert gap <= 1e-2 * total_variation(m)


def test_project_parts_skip_zero_parts(engine, grid31):
    positive, negative = engine.project_parts(
        Nonlinearity.power(3.0), Measure.dirac(grid31, 0.5, 0.5), grid31
    )
    assert positive is not None
    assert negative is None


def test_reduction_identities_for_mixed_measure(engine, grid31):
    m = Measure(GridFunction.constant(grid31, 1.0), (Atom(0.5, 0.5, 1.0),))
    report = engine.check_reduction_identities(Nonlinearity.power(3.0), m, grid31)
    assert set(report.discrepancies) == {
        "positive_part",
        "concentrated_part",
        "diffuse_part",
        "total_variation",
    }
    assert report.all_passed, report.discrepancies


def test_reduction_identities_need_nonnegative_measure(engine, grid31):
    with pytest.raises(PreconditionError):
        engine.check_reduction_identities(Nonlinearity.power(3.0), signed_pair(grid31), grid31)


def test_good_measure_is_invariant_across_nonlinearities(engine, grid31):
    m = Measure.dirac(grid31, 0.5, 0.5)
    f1, f2 = Nonlinearity.power(3.0), Nonlinearity.linear(1.0)
    distance = engine.reduced_measure_distance(f1, f2, m, grid31)
    assert distance <= 1e-2


def test_bounded_perturbation_leaves_reduced_measure_unchanged(engine, grid31):
    m = Measure.dirac(grid31, 0.5, 0.5, 4.0 * math.pi)
    f = Nonlinearity.exponential(2.0)
    distance = engine.reduced_measure_distance(f, f.plus_constant(1.0), m, grid31)
    assert distance <= 3.0 * engine.options.identity_rel * total_variation(m)


def test_sandwich_and_reflection(engine, grid31):
    f = Nonlinearity.linear(1.0).plus_constant(1.0)
    m = signed_pair(grid31)
    assert engine.sandwich_bounds(f, m, grid31) <= 1e-6
    assert engine.check_reflection_symmetry(Nonlinearity.power(3.0), m, grid31) <= 1e-6


def test_reduce_dispatches_on_scheme(engine, grid31):
    m = Measure.dirac(grid31, 0.5, 0.5)
    result = engine.reduce(Nonlinearity.power(3.0), m, grid31, Scheme.TRUNCATION)
    assert result.scheme is Scheme.TRUNCATION
    assert np.all(result.u_star.values >= 0.0)


def sine_density(grid, scale=10.0):
    return Measure(
        GridFunction.from_callable(grid, lambda X, Y: scale * np.sin(np.pi * X) * np.sin(np.pi * Y))
    )


def test_smooth_density_reduces_to_itself_under_both_schemes(engine, grid31):
    m = sine_density(grid31)
    f = Nonlinearity.power(3.0)
    truncation, mollification, gap = engine.compare_schemes(f, m, grid31)
    assert truncation.converged and mollification.converged
    assert mollification.trace[-1].level == 32.0
    assert gap < 1e-4
    for result in (truncation, mollification):
        assert not result.extracted.atoms
        assert total_variation(result.extracted - m) <= 1e-3 * total_variation(m)


def test_mollification_ladder_without_grid_limit_needs_cauchy_increments(solver, grid31):
    engine = ReductionEngine(solver, ReductionOptions(resolve_to_grid=False))
    m = Measure.dirac(grid31, 0.5, 0.5)
    result = engine.reduce_by_mollification(Nonlinearity.power(3.0), m, grid31, tol_seq=1.0)
    assert [t.level for t in result.trace] == [8.0, 16.0]
    with pytest.raises(SequenceNotConvergedError):
        engine.reduce_by_mollification(Nonlinearity.power(3.0), m, grid31, tol_seq=1e-12)


def test_supercritical_atom_is_reduced_by_both_schemes(engine, grid31):
    m = Measure.dirac(grid31, 0.5, 0.5, 4.0 * math.pi)
    truncation, mollification, gap = engine.compare_schemes(
        Nonlinearity.exponential(2.0), m, grid31
    )
    assert gap < 0.03
    masses = [sum(r.extracted.atom_masses()) for r in (truncation, mollification)]
    for mass in masses:
        assert 1.5 * math.pi < mass < 2.5 * math.pi
    assert masses[0] == pytest.approx(masses[1], abs=0.02 * 4.0 * math.pi)


def test_extraction_widens_around_a_reduced_atom(engine, grid31):
    m = Measure.dirac(grid31, 0.5, 0.5, 4.0 * math.pi)
    f = Nonlinearity.exponential(2.0)
    u = engine.solver.solve(f, m, grid31).u
    extracted = extract_measure(u, f, m.atoms)
    i, j = grid31.nearest_node(0.5, 0.5)
    assert 0.35 * 4.0 * math.pi < extracted.atom_masses()[0] < 0.65 * 4.0 * math.pi
    assert np.all(extracted.density.values[i - 1 : i + 2, j] == 0.0)
    assert np.all(extracted.density.values[i, j - 1 : j + 2] == 0.0)


def test_signed_supercritical_projection(engine):
    f = Nonlinearity.exponential(2.0)
    for n in (31, 63):
        grid = Grid.unit_square(n)
        m = Measure.from_atoms(
            grid, [Atom(0.25, 0.5, 4.0 * math.pi), Atom(0.75, 0.5, -4.0 * math.pi)]
        )
        negative, positive = sorted(engine.project(f, m, grid).atom_masses())
        assert 1.5 * math.pi < positive < 2.5 * math.pi
        assert negative == pytest.approx(-4.0 * math.pi, rel=1e-3)


def test_signed_mollification_limit_solves_the_projected_data(engine):
    grid = Grid.unit_square(63)
    f = Nonlinearity.exponential(2.0)
    m = Measure.from_atoms(grid, [Atom(0.25, 0.5, 4.0 * math.pi), Atom(0.75, 0.5, -4.0 * math.pi)])
    result = engine.reduce_by_mollification(f, m, grid)
    assert result.converged
    negative, positive = sorted(result.extracted.atom_masses())
    assert 1.6 * math.pi < positive < 2.5 * math.pi
    assert negative == pytest.approx(-4.0 * math.pi, rel=1e-3)
    projected = engine.project(f, m, grid)
    u_pi = engine.solver.solve(f, projected, grid).u
    gap = (result.u_star - u_pi).l1_norm() / u_pi.l1_norm()
    assert gap < 0.2


def test_project_parts_returns_unconverged_ladders_when_not_strict(solver, grid31):
    engine = ReductionEngine(solver, ReductionOptions(max_truncation_level=0))
    m = signed_pair(grid31)
    f = Nonlinearity.power(3.0)
    with pytest.raises(SequenceNotConvergedError):
        engine.project_parts(f, m, grid31)
    positive, negative = engine.project_parts(f, m, grid31, strict=False)
    assert not positive.converged and not negative.converged
    projection = ReductionEngine.assemble_projection(grid31, positive, negative)
    assert sorted(projection.atom_masses()) == pytest.approx([-1.0, 1.0], abs=0.05)
