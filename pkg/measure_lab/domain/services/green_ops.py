"""Green operator G_h, the Green representation residual and admissibility.

G_h is the exact inverse of -Δ_h with zero Dirichlet data, obtained from the
operator repository's cached factorization.
"""

import logging
import math
from typing import Callable, Sequence, Union

import numpy as np

from ..entities.results import AdmissibilityVerdict, Verdict
from ..exceptions import PreconditionError
from ..repositories.operator_repository import OperatorRepository
from ..value_objects.grid import Grid, GridFunction
from ..value_objects.measure import Measure
from ..value_objects.nonlinearity import Nonlinearity
from .extrapolation import growth_exponent, relative_increments
from .measure_model import discretize_rhs, realize

logger = logging.getLogger(__name__)

MeasureSource = Union[Measure, Callable[[Grid], Measure]]

CAUCHY_TOL = 0.02
DIVERGENCE_THRESHOLD = 0.1


class GreenOperator:
    """Discrete Green operator backed by an OperatorRepository."""

    def __init__(self, repository: OperatorRepository):
        """Initialize with operator repository.

        Args:
            repository: Source of -Δ_h and its factorized solves
        """
        self._repository = repository

    @property
    def repository(self) -> OperatorRepository:
        return self._repository

    def apply_rhs(self, rhs: GridFunction) -> GridFunction:
        """Solve -Δ_h u = rhs."""
        grid = rhs.grid
        solution = self._repository.solve(grid, rhs.values.ravel())
        return GridFunction(grid, solution.reshape(grid.shape))

    def apply(self, m: Measure, g: Grid) -> GridFunction:
        """G_h m: solve -Δ_h u = μ_h with zero boundary values.

        Raises:
            LinearSolveError: If the solve misses its residual target
        """
        return self.apply_rhs(discretize_rhs(m, g))

    def representation_residual(self, u: GridFunction, f: Nonlinearity, m: Measure) -> float:
        """‖u - G_h(f(·,u)) - G_h(m)‖_{L¹}."""
        grid = u.grid
        X, Y = grid.node_coordinates()
        absorption = f(X, Y, u.values)
        if not np.all(np.isfinite(absorption)):
            raise PreconditionError("f(·,u) is not finite on the grid")
        rhs = discretize_rhs(m, grid).values + absorption
        return (u - self.apply_rhs(GridFunction(grid, rhs))).l1_norm()

    def absorption_integral(self, f: Nonlinearity, m: Measure, g: Grid) -> float:
        """I_h = h²·Σ|f(·, G_h m)|."""
        potential = self.apply(m, g)
        X, Y = g.node_coordinates()
        with np.errstate(over="ignore"):
            value = float(g.h**2 * np.abs(f(X, Y, potential.values)).sum())
        return value

    def admissibility_check(
        self,
        f: Nonlinearity,
        m: MeasureSource,
        ladder: Sequence[Grid],
        cauchy_tol: float = CAUCHY_TOL,
        divergence_threshold: float = DIVERGENCE_THRESHOLD,
    ) -> AdmissibilityVerdict:
        """Decide μ ∈ A(f) from the trend of I_h along a refinement ladder.

        not_admissible if the growth exponent exceeds divergence_threshold;
        admissible if the last relative increment is below cauchy_tol or all
        increments contract; inconclusive otherwise.

        Raises:
            PreconditionError: If the ladder has fewer than three grids
        """
        grids = list(ladder)
        if len(grids) < 3:
            raise PreconditionError(f"admissibility needs >= 3 grids, got {len(grids)}")
        ns = [g.n for g in grids]
        if any(b <= a for a, b in zip(ns, ns[1:])):
            raise PreconditionError(f"ladder must be strictly increasing, got {ns}")

        hs = [g.h for g in grids]
        integrals = [self.absorption_integral(f, realize(m, g), g) for g in grids]
        for n, value in zip(ns, integrals):
            logger.info("admissibility: n=%d I_h=%.6g", n, value)
        if not all(math.isfinite(v) for v in integrals):
            exponent = math.inf
        else:
            exponent = growth_exponent(hs, integrals)
        increments = relative_increments(integrals)

        if all(v == 0.0 for v in integrals):
            verdict = Verdict.ADMISSIBLE
        elif exponent > divergence_threshold:
            verdict = Verdict.NOT_ADMISSIBLE
        elif increments[-1] < cauchy_tol or all(
            b < a for a, b in zip(increments, increments[1:])
        ):
            verdict = Verdict.ADMISSIBLE
        else:
            verdict = Verdict.INCONCLUSIVE
        logger.info("admissibility verdict %s (exponent %.3f)", verdict, exponent)
        return AdmissibilityVerdict(
            ns=ns,
            hs=hs,
            integrals=integrals,
            growth_exponent=exponent,
            relative_increments=increments,
            verdict=verdict,
            cauchy_tol=cauchy_tol,
            divergence_threshold=divergence_threshold,
        )


def near_field_log_coefficient(
    u: GridFunction, center: tuple, r_min: float, r_max: float
) -> float:
    """Slope of u against log(1/|x - center|) over nodes with r_min <= r <= r_max."""
    X, Y = u.grid.node_coordinates()
    r = np.hypot(X - center[0], Y - center[1])
    band = (r >= r_min) & (r <= r_max)
    if np.count_nonzero(band) < 2:
        raise PreconditionError("too few nodes in the fitting band")
    slope, _ = np.polyfit(np.log(1.0 / r[band]), u.values[band], 1)
    return float(slope)
