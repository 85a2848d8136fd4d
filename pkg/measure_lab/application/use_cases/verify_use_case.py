"""Verify Use Case

Runs the invariant suite on the built-in corpus of (f, μ) pairs and writes
a pass/fail table. Failures are report rows, never exceptions.

Corpus nonlinearities: linear, power p ∈ {2, 3}, exponential a ∈ {1, 2}.
Corpus measures: smooth densities, single sub- and supercritical atoms,
signed atom pairs and mixed density + atom data.
"""

import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, List, Optional

import numpy as np

from ...domain.entities.results import Verdict
from ...domain.exceptions import MeasureLabError
from ...domain.services.green_ops import near_field_log_coefficient
from ...domain.services.measure_model import (
    dominance_excess,
    mutually_singular,
    order_violation,
    total_variation,
)
from ...domain.services.mollify import (
    build_kernel,
    check_green_domination,
    check_superharmonic_monotonicity,
    default_schedule,
    mollify_measure,
    narrow_pairing_gap,
)
from ...domain.services.semilinear import check_apriori_bound
from ...domain.value_objects.grid import Grid, GridFunction
from ...domain.value_objects.measure import Atom, Measure
from ...domain.value_objects.nonlinearity import Nonlinearity
from ...infrastructure.io.persistence import write_rows
from ...shared.models import ExperimentConfig, InvariantRow, StudyReport
from .study_use_case import LabServices, StudyUseCase
from .sweep_use_case import apriori_spread

logger = logging.getLogger(__name__)

VERIFY_COLUMNS = ["name", "passed", "value", "threshold", "detail"]

COARSE_N = 31
FINE_N = 63
COMPARISON_PAIRS = 20


def _row(name: str, passed: bool, value=None, threshold=None, detail: str = "") -> InvariantRow:
    value = None if value is None or not math.isfinite(value) else float(value)
    return InvariantRow(
        name=name, passed=bool(passed), value=value, threshold=threshold, detail=detail
    )


def _sine(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    return np.sin(np.pi * X) * np.sin(np.pi * Y)


def smooth_density(grid: Grid, scale: float = 10.0) -> Measure:
    return Measure(GridFunction.from_callable(grid, lambda X, Y: scale * _sine(X, Y)))


def center_dirac(grid: Grid, mass: float = 1.0) -> Measure:
    return Measure.dirac(grid, 0.5, 0.5, mass)


def signed_pair(grid: Grid) -> Measure:
    """Atoms of mass ±1 at (0.25, 0.5) and (0.75, 0.5) over a signed density."""
    density = GridFunction.from_callable(
        grid, lambda X, Y: 0.5 * np.sin(2.0 * np.pi * X) * np.sin(np.pi * Y)
    )
    return Measure(density, (Atom(0.25, 0.5, 1.0), Atom(0.75, 0.5, -1.0)))


@dataclass(frozen=True)
class CorpusCase:
    """One named group of invariant rows."""

    name: str
    check: Callable[[LabServices, int], List[InvariantRow]]


# Discrete operator

def laplacian_spd(services: LabServices, seed: int) -> List[InvariantRow]:
    grid = Grid.unit_square(15)
    A = services.green.repository.laplacian(grid).toarray()
    asymmetry = float(np.abs(A - A.T).max())
    lowest = float(np.linalg.eigvalsh(A).min())
    exact = 8.0 / grid.h**2 * math.sin(math.pi * grid.h / 2.0) ** 2
    passed = asymmetry == 0.0 and lowest > 0.0 and abs(lowest - exact) <= 1e-8 * exact
    detail = f"asymmetry {asymmetry:.1e}, smallest eigenvalue exact {exact:.10g}"
    return [_row("laplacian_spd", passed, lowest, None, detail)]


def maximum_principle(services: LabServices, seed: int) -> List[InvariantRow]:
    grid = Grid.unit_square(COARSE_N)
    rng = np.random.default_rng(seed)
    m = Measure(GridFunction(grid, rng.uniform(0.0, 1.0, grid.shape)), (Atom(0.3, 0.6, 0.5),))
    u = services.green.apply(m, grid)
    lowest = float(u.values.min())
    return [_row("green_nonnegative", lowest >= -1e-14 * u.linf_norm(), lowest, 0.0)]


def green_linearity(services: LabServices, seed: int) -> List[InvariantRow]:
    grid = Grid.unit_square(COARSE_N)
    green = services.green
    a, b = 2.0, -3.0
    first, second = smooth_density(grid), Measure.dirac(grid, 0.3, 0.7, 1.0)
    combined = green.apply(a * first + b * second, grid)
    separate = a * green.apply(first, grid) + b * green.apply(second, grid)
    error = combined.max_abs_difference(separate) / max(combined.linf_norm(), 1e-300)
    return [_row("green_linearity", error <= 1e-10, error, 1e-10)]


def manufactured_order(services: LabServices, seed: int) -> List[InvariantRow]:
    errors = []
    for n in (15, 31, 63):
        grid = Grid.unit_square(n)
        rhs = GridFunction.from_callable(grid, lambda X, Y: 2.0 * np.pi**2 * _sine(X, Y))
        u = services.green.apply_rhs(rhs)
        errors.append(u.max_abs_difference(GridFunction.from_callable(grid, _sine)))
    ratios = [coarse / fine for coarse, fine in zip(errors, errors[1:])]
    passed = all(3.5 <= r <= 4.5 for r in ratios)
    detail = "error ratios " + ", ".join(f"{r:.3f}" for r in ratios)
    return [_row("manufactured_second_order", passed, min(ratios), 3.5, detail)]


# Mollifiers

def kernel_mass(services: LabServices, seed: int) -> List[InvariantRow]:
    grid = Grid.unit_square(FINE_N)
    gaps = [
        abs(build_kernel(n, grid, profile).mass - 1.0)
        for profile in ("bump", "cosine")
        for n in (4, 8, 16)
    ]
    worst = max(gaps)
    return [_row("kernel_unit_mass", worst < 1e-12, worst, 1e-12)]


def mollifier_contract(services: LabServices, seed: int) -> List[InvariantRow]:
    grid = Grid.unit_square(FINE_N)
    kernel = build_kernel(8, grid)
    rng = np.random.default_rng(seed)
    lower = Measure(GridFunction(grid, rng.uniform(0.0, 1.0, grid.shape)), (Atom(0.4, 0.4, 1.0),))
    upper = lower + Measure(GridFunction(grid, rng.uniform(0.0, 1.0, grid.shape)))

    def smooth(m: Measure) -> np.ndarray:
        return mollify_measure(m, kernel, grid).density.values

    low, high = smooth(lower), smooth(upper)
    scale = max(float(np.abs(high).max()), 1.0)
    positivity = float(low.min())
    monotonicity = float((low - high).max())
    linear = smooth(2.0 * lower - 0.5 * upper)
    linearity = float(np.abs(linear - (2.0 * low - 0.5 * high)).max()) / scale
    return [
        _row("mollifier_positive", positivity >= 0.0, positivity, 0.0),
        _row("mollifier_monotone", monotonicity <= 1e-12 * scale, monotonicity, 1e-12 * scale),
        _row("mollifier_linear", linearity <= 1e-12, linearity, 1e-12),
    ]


def narrow_convergence(services: LabServices, seed: int) -> List[InvariantRow]:
    grid = Grid.unit_square(127)
    m = center_dirac(grid)
    schedule = default_schedule(m, grid)
    gaps = [narrow_pairing_gap(m, build_kernel(n, grid), _sine) for n in schedule]
    detail = ", ".join(f"n={n}: {gap:.2e}" for n, gap in zip(schedule, gaps))
    return [_row("narrow_convergence", gaps[-1] < 1e-3, gaps[-1], 1e-3, detail)]


def superharmonic_chain(services: LabServices, seed: int) -> List[InvariantRow]:
    grid = Grid.unit_square(FINE_N)
    u = services.green.apply(center_dirac(grid), grid)
    center = grid.nearest_node(0.5, 0.5)
    node = (center[0] + 1, center[1])
    checks = [check_superharmonic_monotonicity(u, node, n) for n in (4, 5, 6, 8)]
    passed = all(c.holds and c.superharmonic for c in checks)
    worst = max(max(c.v_n - c.v_next, c.v_next - c.u_x) for c in checks)
    return [_row("superharmonic_mean_chain", passed, worst, checks[0].slack)]


def green_domination(services: LabServices, seed: int) -> List[InvariantRow]:
    grid = Grid.unit_square(FINE_N)
    atom = check_green_domination(center_dirac(grid), 8, services.green)
    density = check_green_domination(smooth_density(grid), 8, services.green, restrict=True)
    return [
        _row("green_domination", atom.holds, atom.c_est, 1.05),
        _row(
            "green_domination_density",
            density.holds,
            density.c_est,
            1.05,
            "sine density restricted to distance >= 1/8 from the boundary",
        ),
    ]


def green_log_coefficient(services: LabServices, seed: int) -> List[InvariantRow]:
    grid = Grid.unit_square(FINE_N)
    mass = 2.0
    u = services.green.apply(center_dirac(grid, mass), grid)
    coefficient = 2.0 * math.pi * near_field_log_coefficient(u, (0.5, 0.5), 4.0 * grid.h, 0.2)
    error = abs(coefficient - mass) / mass
    detail = f"2π times the log(1/r) slope of G_h({mass:g}δ) over 4h <= r <= 0.2"
    return [_row("green_log_coefficient", error <= 0.05, error, 0.05, detail)]


# Comparison principle

def comparison_atoms(services: LabServices, seed: int) -> List[InvariantRow]:
    grid = Grid.unit_square(FINE_N)
    lower = center_dirac(grid)
    upper = lower + Measure.dirac(grid, 0.25, 0.25, 1.0)
    result = services.solver.check_comparison(
        Nonlinearity.power(3.0), lower, Nonlinearity.power(3.0), upper, grid
    )
    return [_row("comparison_atom_vs_atom_plus_delta", result.holds, result.max_violation, 1e-10)]


def comparison_random(services: LabServices, seed: int) -> List[InvariantRow]:
    grid = Grid.unit_square(FINE_N)
    rng = np.random.default_rng(seed)
    families = [
        Nonlinearity.linear(1.0),
        Nonlinearity.power(2.0),
        Nonlinearity.power(3.0),
        Nonlinearity.exponential(1.0),
    ]
    worst = 0.0
    for k in range(COMPARISON_PAIRS):
        f = families[k % len(families)]
        x, y = rng.uniform(0.2, 0.8, 2)
        density = GridFunction(grid, rng.uniform(-5.0, 5.0, grid.shape))
        lower = Measure(density, (Atom(float(x), float(y), float(rng.uniform(-2.0, 2.0))),))
        extra = Measure(
            GridFunction(grid, rng.uniform(0.1, 1.0, grid.shape)),
            (Atom(float(1.0 - x), float(1.0 - y) + 0.01, float(rng.uniform(0.0, 2.0))),),
        )
        result = services.solver.check_comparison(
            f, lower, f.plus_constant(float(rng.uniform(0.0, 1.0))), lower + extra, grid
        )
        worst = max(worst, result.max_violation)
    detail = f"{COMPARISON_PAIRS} randomized pairs on n={FINE_N}"
    return [_row("comparison_random_pairs", worst <= 1e-10, worst, 1e-10, detail)]


def truncation_monotone(services: LabServices, seed: int) -> List[InvariantRow]:
    grid = Grid.unit_square(COARSE_N)
    f = Nonlinearity.exponential(2.0)
    m = center_dirac(grid, 4.0 * math.pi)
    worst = 0.0
    for level in (1.0, 2.0, 4.0, 8.0, 16.0):
        result = services.solver.check_comparison(
            f.truncate(2.0 * level), m, f.truncate(level), m, grid
        )
        worst = max(worst, result.max_violation)
    return [_row("truncation_ladder_monotone", worst <= 1e-10, worst, 1e-10)]


# Admissibility

def admissibility_scale(services: LabServices, seed: int) -> List[InvariantRow]:
    f = Nonlinearity.exponential(2.0)
    ladder = [Grid.unit_square(n) for n in (15, 31, 63)]
    rows = []
    for label, mass, expected in (
        ("pi", math.pi, Verdict.ADMISSIBLE),
        ("3pi", 3.0 * math.pi, Verdict.NOT_ADMISSIBLE),
    ):
        verdict = services.green.admissibility_check(
            f, lambda grid, mass=mass: center_dirac(grid, mass), ladder
        )
        rows.append(
            _row(
                f"admissibility_exp2_mass_{label}",
                verdict.verdict is expected,
                verdict.growth_exponent,
                verdict.divergence_threshold,
                f"verdict {verdict.verdict}, expected {expected}",
            )
        )
    return rows


# Reduced measures

def _identity_rows(prefix: str, report) -> List[InvariantRow]:
    return [
        _row(f"{prefix}_{key}", report.passed[key], value, report.tolerance)
        for key, value in sorted(report.discrepancies.items())
    ]


def good_measure_identities(services: LabServices, seed: int) -> List[InvariantRow]:
    grid = Grid.unit_square(COARSE_N)
    report = services.engine.check_reduction_identities(
        Nonlinearity.power(3.0), smooth_density(grid), grid
    )
    return _identity_rows("identities_good_density", report)


def mixed_supercritical_identities(services: LabServices, seed: int) -> List[InvariantRow]:
    grid = Grid.unit_square(COARSE_N)
    m = smooth_density(grid, 0.5) + center_dirac(grid, 4.0 * math.pi)
    report = services.engine.check_reduction_identities(Nonlinearity.exponential(2.0), m, grid)
    return _identity_rows("identities_mixed_supercritical", report)


def supercritical_reduction(services: LabServices, seed: int) -> List[InvariantRow]:
    grid = Grid.unit_square(COARSE_N)
    mass = 4.0 * math.pi
    m = center_dirac(grid, mass)
    star = services.engine.reduced_measure(Nonlinearity.exponential(2.0), m, grid)
    extracted = sum(star.atom_masses())
    tolerance = services.engine.options.identity_rel * mass
    violation = order_violation(star, m)
    return [
        _row(
            "supercritical_atom_reduced",
            0.0 <= extracted <= 0.95 * mass,
            extracted,
            0.95 * mass,
            "extracted atom mass of 4π·δ under exp a=2",
        ),
        _row("extracted_below_data", violation <= tolerance, violation, tolerance),
    ]


def mollified_data_reproduced(services: LabServices, seed: int) -> List[InvariantRow]:
    grid = Grid.unit_square(COARSE_N)
    smoothed = mollify_measure(center_dirac(grid), build_kernel(8, grid), grid)
    star = services.engine.reduced_measure(Nonlinearity.power(3.0), smoothed, grid)
    scale = total_variation(smoothed)
    gap = total_variation(star - smoothed) / scale
    tolerance = services.engine.options.identity_rel
    return [_row("mollified_data_is_good", gap <= tolerance, gap, tolerance)]


def two_scheme_agreement(services: LabServices, seed: int) -> List[InvariantRow]:
    grid = Grid.unit_square(FINE_N)
    _, _, gap = services.engine.compare_schemes(Nonlinearity.power(3.0), center_dirac(grid), grid)
    return [_row("two_scheme_agreement_power3", gap < 0.03, gap, 0.03)]


def separated_pair(grid: Grid) -> Measure:
    """signed_pair with its density removed within 0.1 of both atoms."""
    m = signed_pair(grid)
    X, Y = grid.node_coordinates()
    near = np.zeros(grid.shape, dtype=bool)
    for atom in m.atoms:
        near |= np.hypot(X - atom.x, Y - atom.y) < 0.1
    return Measure(m.density.with_values(np.where(near, 0.0, m.density.values)), m.atoms)


def projection_identities(services: LabServices, seed: int) -> List[InvariantRow]:
    grid = Grid.unit_square(COARSE_N)
    engine = services.engine
    tol = engine.options.identity_rel
    m = separated_pair(grid)
    scale = total_variation(m)
    diffuse = Measure(m.density)
    concentrated = Measure.from_atoms(grid, m.atoms)
    singular = mutually_singular(diffuse, concentrated)
    rows = []
    for f in (Nonlinearity.power(3.0), Nonlinearity.linear(1.0)):
        projection = engine.project(f, m, grid)
        variant = total_variation(projection - engine.project_variant(f, m, grid)) / scale
        split = engine.project(f, diffuse, grid) + engine.project(f, concentrated, grid)
        additivity = total_variation(projection - split) / scale
        excess = dominance_excess(projection, m) / scale
        rows.extend(
            [
                _row(f"projection_variant[{f.name}]", variant <= 2.0 * tol, variant, 2.0 * tol),
                _row(
                    f"projection_additive[{f.name}]",
                    singular and additivity <= 3.0 * tol,
                    additivity,
                    3.0 * tol,
                    "diffuse and concentrated parts mutually singular: " + str(singular),
                ),
                _row(f"projection_tv_bound[{f.name}]", excess <= tol, excess, tol),
            ]
        )
    return rows


def reduced_measure_perturbation(services: LabServices, seed: int) -> List[InvariantRow]:
    grid = Grid.unit_square(COARSE_N)
    m = center_dirac(grid, 4.0 * math.pi)
    f = Nonlinearity.exponential(2.0)
    distance = services.engine.reduced_measure_distance(f, f.plus_constant(1.0), m, grid)
    threshold = 3.0 * services.engine.options.identity_rel * total_variation(m)
    detail = "4π·δ under exp a=2 and exp a=2 plus 1"
    return [
        _row("reduced_measure_perturbation", distance <= threshold, distance, threshold, detail)
    ]


def sandwich_and_reflection(services: LabServices, seed: int) -> List[InvariantRow]:
    grid = Grid.unit_square(COARSE_N)
    engine = services.engine
    m = signed_pair(grid)
    sandwich = engine.sandwich_bounds(Nonlinearity.linear(1.0), m, grid)
    reflection = engine.check_reflection_symmetry(Nonlinearity.power(3.0), m, grid)
    return [
        _row("sandwich_bounds", sandwich <= 1e-8, sandwich, 1e-8),
        _row("reflection_symmetry", reflection <= 1e-8, reflection, 1e-8),
    ]


def apriori_uniform(services: LabServices, seed: int) -> List[InvariantRow]:
    grid = Grid.unit_square(FINE_N)
    f = Nonlinearity.power(3.0)
    m = center_dirac(grid)
    solver = services.solver
    ratios = [check_apriori_bound(solver.solve(f, m, grid), f, m, solver.options.q).ratio]
    for n in (16, 32):
        smoothed = mollify_measure(m, build_kernel(n, grid), grid)
        solved = solver.solve(f, smoothed, grid)
        ratios.append(check_apriori_bound(solved, f, m, solver.options.q).ratio)
    spread = apriori_spread(ratios)
    detail = "ratios " + ", ".join(f"{r:.4g}" for r in ratios)
    return [_row("apriori_bound_uniform", spread < 0.2, spread, 0.2, detail)]


CORPUS: List[CorpusCase] = [
    CorpusCase("laplacian_spd", laplacian_spd),
    CorpusCase("maximum_principle", maximum_principle),
    CorpusCase("green_linearity", green_linearity),
    CorpusCase("manufactured_order", manufactured_order),
    CorpusCase("kernel_mass", kernel_mass),
    CorpusCase("mollifier_contract", mollifier_contract),
    CorpusCase("narrow_convergence", narrow_convergence),
    CorpusCase("superharmonic_chain", superharmonic_chain),
    CorpusCase("green_domination", green_domination),
    CorpusCase("green_log_coefficient", green_log_coefficient),
    CorpusCase("comparison_atoms", comparison_atoms),
    CorpusCase("comparison_random", comparison_random),
    CorpusCase("truncation_monotone", truncation_monotone),
    CorpusCase("admissibility_scale", admissibility_scale),
    CorpusCase("good_measure_identities", good_measure_identities),
    CorpusCase("mixed_supercritical_identities", mixed_supercritical_identities),
    CorpusCase("supercritical_reduction", supercritical_reduction),
    CorpusCase("mollified_data_reproduced", mollified_data_reproduced),
    CorpusCase("two_scheme_agreement", two_scheme_agreement),
    CorpusCase("projection_identities", projection_identities),
    CorpusCase("reduced_measure_perturbation", reduced_measure_perturbation),
    CorpusCase("sandwich_and_reflection", sandwich_and_reflection),
    CorpusCase("apriori_uniform", apriori_uniform),
]


class VerifyUseCase(StudyUseCase):
    """Invariant suite over the built-in corpus."""

    command = "verify"

    def __init__(self, repository, jobs: int = 1, cases: Optional[List[CorpusCase]] = None):
        """Initialize use case with operator repository.

        Args:
            repository: Source of -Δ_h and its cached factorizations
            jobs: Worker threads for corpus cases
            cases: Corpus to run, the built-in CORPUS if omitted
        """
        super().__init__(repository, jobs)
        self.cases = list(CORPUS if cases is None else cases)

    def run_case(self, case: CorpusCase, services: LabServices, seed: int) -> List[InvariantRow]:
        try:
            rows = case.check(services, seed)
        except (MeasureLabError, ArithmeticError, ValueError) as e:
            logger.warning("corpus case %s failed: %s", case.name, e)
            return [_row(case.name, False, detail=f"{type(e).__name__}: {e}")]
        for row in rows:
            logger.info("%s: %s", row.name, "pass" if row.passed else "FAIL")
        return rows

    def run(self, config: Optional[ExperimentConfig], base_dir: Path, out_dir: Path) -> StudyReport:
        report = self.new_report(config)
        services = self.services(config)
        seed = config.seed if config is not None else 0
        for rows in self.map(lambda case: self.run_case(case, services, seed), self.cases):
            report.invariants.extend(rows)
        table = [row.model_dump() for row in report.invariants]
        write_rows(out_dir / "verify.csv", VERIFY_COLUMNS, table)
        report.files.append("verify.csv")
        report.notes["cases"] = [case.name for case in self.cases]
        self.write_trace(out_dir, [], report)
        return report
