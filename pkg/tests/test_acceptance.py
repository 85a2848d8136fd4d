"""Acceptance-scale studies on n up to 255; run with `pytest -m slow`."""

import math

import numpy as np
import pytest

from measure_lab.application.use_cases import SweepUseCase, VerifyUseCase
from measure_lab.domain.entities.results import Verdict
from measure_lab.domain.services.extrapolation import richardson
from measure_lab.domain.services.mollify import build_kernel, check_superharmonic_monotonicity
from measure_lab.domain.value_objects.grid import Grid, GridFunction
from measure_lab.domain.value_objects.measure import Measure
from measure_lab.domain.value_objects.nonlinearity import Nonlinearity
from measure_lab.infrastructure.io import parse_config

pytestmark = pytest.mark.slow

LADDER = (63, 127, 255)


def _sine(X, Y):
    return np.sin(np.pi * X) * np.sin(np.pi * Y)


def center_dirac(grid, mass=1.0):
    return Measure.dirac(grid, 0.5, 0.5, mass)


def test_manufactured_solution_on_fine_ladder(green):
    errors = []
    for n in LADDER:
        grid = Grid.unit_square(n)
        rhs = GridFunction.from_callable(grid, lambda X, Y: 2.0 * np.pi**2 * _sine(X, Y))
        exact = GridFunction.from_callable(grid, _sine)
        errors.append(green.apply_rhs(rhs).max_abs_difference(exact))
    for coarse, fine in zip(errors, errors[1:]):
        assert 3.5 <= coarse / fine <= 4.5


def test_mollifier_chain_at_every_resolvable_index(green):
    grid = Grid.unit_square(127)
    u = green.apply(center_dirac(grid), grid)
    center = grid.nearest_node(0.5, 0.5)
    node = (center[0] + 1, center[1])
    for n in range(4, 64):
        check = check_superharmonic_monotonicity(u, node, n)
        assert check.holds, n
    for profile in ("bump", "cosine"):
        for n in (4, 8, 16, 32, 64):
            assert abs(build_kernel(n, grid, profile).mass - 1.0) < 1e-12


@pytest.mark.parametrize(
    "mass, expected",
    [
        (math.pi, Verdict.ADMISSIBLE),
        (1.5 * math.pi, Verdict.ADMISSIBLE),
        (2.5 * math.pi, Verdict.NOT_ADMISSIBLE),
        (3.0 * math.pi, Verdict.NOT_ADMISSIBLE),
    ],
)
def test_exponential_admissibility_threshold(green, mass, expected):
    ladder = [Grid.unit_square(n) for n in LADDER]
    verdict = green.admissibility_check(
        Nonlinearity.exponential(2.0), lambda g: center_dirac(g, mass), ladder
    )
    assert verdict.verdict is expected, verdict.to_dict()


def extrapolated_atom_mass(engine, f, mass):
    results = []
    for n in LADDER:
        grid = Grid.unit_square(n)
        results.append(engine.reduce_by_truncation(f, center_dirac(grid, mass), grid))
    hs = [r.u_star.grid.h for r in results]
    return richardson(hs, [sum(r.extracted.atom_masses()) for r in results])


def test_good_atom_schemes_agree(engine):
    f = Nonlinearity.power(3.0)
    grid = Grid.unit_square(127)
    _, _, gap = engine.compare_schemes(f, center_dirac(grid), grid)
    assert gap < 0.02
    assert extrapolated_atom_mass(engine, f, 1.0).value == pytest.approx(1.0, rel=0.05)


def test_supercritical_atom_is_reduced_to_threshold(engine):
    f = Nonlinearity.exponential(2.0)
    grid = Grid.unit_square(127)
    _, _, gap = engine.compare_schemes(f, center_dirac(grid, 4.0 * math.pi), grid)
    assert gap < 0.03
    fit = extrapolated_atom_mass(engine, f, 4.0 * math.pi)
    assert fit.value == pytest.approx(2.0 * math.pi, rel=0.10)


def test_apriori_ratio_is_uniform_over_family(repository, tmp_path):
    config = parse_config(
        {
            "nonlinearity": {"family": "power", "p": 3},
            "measure": {"atoms": [{"x": 0.5, "y": 0.5, "mass": 1.0}]},
            "grids": list(LADDER),
            "mollification": {"levels": [16, 32]},
        }
    )
    result = SweepUseCase(repository, jobs=2).execute(config, ".", tmp_path)
    assert result["success"], result.get("error")
    assert len(result["report"].apriori) == 9


def test_full_verify_corpus(repository, tmp_path):
    result = VerifyUseCase(repository, jobs=2).execute(None, ".", tmp_path)
    failed = [
        (row.name, row.value, row.detail) for row in result["report"].invariants if not row.passed
    ]
    assert not failed
    assert result["success"]
