"""Semilinear solver for -Δ_h u = f(·,u) + μ_h and its verification helpers."""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from ..entities.results import AprioriBound, CertificationResult, ComparisonResult, SolveReport
from ..exceptions import MonotonicityViolationError, NonConvergedError, PreconditionError
from ..repositories.operator_repository import OperatorRepository
from ..value_objects.grid import Grid, GridFunction, Norms
from ..value_objects.measure import Measure
from ..value_objects.nonlinearity import Nonlinearity
from .grid_core import apply_stencil
from .measure_model import discretize_rhs, order_violation, total_variation

logger = logging.getLogger(__name__)

# Certification lattice: 0 and ±10^k for k = -6..6.
U_LATTICE = np.array(
    sorted([0.0] + [s * 10.0**k for k in range(-6, 7) for s in (-1.0, 1.0)]), dtype=float
)
MAX_CERTIFICATION_POINTS = 4096
_MONOTONE_RTOL = 1e-9
_FLAG_B_ATOL = 1e-12


@dataclass(frozen=True)
class SolverOptions:
    """Tuning knobs of the semilinear solver."""

    newton_rel: float = 1e-8
    max_newton: int = 100
    max_backtracks: int = 30
    damped_before_sweeps: int = 3
    sweeps_per_fallback: int = 20
    max_sweeps: int = 200
    certify: bool = True
    seed: int = 0
    q: float = 1.5

    def __post_init__(self) -> None:
        """Validate options after initialization."""
        if self.newton_rel <= 0:
            raise ValueError("newton_rel must be positive")
        if not 1.0 <= self.q < 2.0:
            raise ValueError(f"q must lie in [1, 2), got {self.q}")


def _sample_points(grid: Grid, seed: int) -> Tuple[np.ndarray, np.ndarray]:
    X, Y = grid.node_coordinates()
    xs, ys = X.ravel(), Y.ravel()
    if xs.size > MAX_CERTIFICATION_POINTS:
        rng = np.random.default_rng(seed)
        pick = np.sort(rng.choice(xs.size, MAX_CERTIFICATION_POINTS, replace=False))
        xs, ys = xs[pick], ys[pick]
    return xs, ys


def _lattice_values(f: Nonlinearity, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """f on the (points × U_LATTICE) table."""
    U = np.broadcast_to(U_LATTICE[None, :], (xs.size, U_LATTICE.size))
    return f(xs[:, None], ys[:, None], U)


def certify_monotonicity(f: Nonlinearity, grid: Grid, seed: int = 0) -> CertificationResult:
    """Sample f on grid points × U_LATTICE for monotonicity and vanishing on u ≤ 0."""
    xs, ys = _sample_points(grid, seed)
    table = _lattice_values(f, xs, ys)
    prev, nxt = table[:, :-1], table[:, 1:]
    with np.errstate(invalid="ignore"):
        diff = nxt - prev
        finite = np.isfinite(diff)
        excess = np.where(finite, diff - _MONOTONE_RTOL * (1.0 + np.abs(prev)), -np.inf)
        jumps_up = ((nxt == np.inf) & (prev < np.inf)) | ((prev == -np.inf) & (nxt > -np.inf))
    max_violation = float(excess.max()) if excess.size else 0.0
    monotone = max_violation <= 0.0 and not bool(jumps_up.any())
    if jumps_up.any():
        max_violation = float("inf")
    nonpositive = table[:, U_LATTICE <= 0.0]
    flag_b_holds = bool(np.all(np.abs(nonpositive) <= _FLAG_B_ATOL))
    logger.debug(
        "certified %s on %d samples: monotone=%s flag_b=%s",
        f.name, table.size, monotone, flag_b_holds,
    )
    return CertificationResult(
        monotone=monotone,
        max_violation=max(max_violation, 0.0),
        flag_b_holds=flag_b_holds,
        samples=int(table.size),
    )


def residual_field(u: GridFunction, f: Nonlinearity, rhs: GridFunction) -> np.ndarray:
    """-Δ_h u - f(·,u) - rhs at every node."""
    X, Y = u.grid.node_coordinates()
    return apply_stencil(u.values, u.grid.h) - f(X, Y, u.values) - rhs.values


def _default_tolerance(rhs: GridFunction, newton_rel: float) -> float:
    return newton_rel * (1.0 + rhs.linf_norm())


def verify_subsolution(
    u: GridFunction, f: Nonlinearity, m: Measure, tol: Optional[float] = None
) -> bool:
    """True iff -Δ_h u - f(·,u) - μ_h <= tol at every node."""
    rhs = discretize_rhs(m, u.grid)
    tol = _default_tolerance(rhs, SolverOptions.newton_rel) if tol is None else tol
    return bool(np.all(residual_field(u, f, rhs) <= tol))


def verify_supersolution(
    u: GridFunction, f: Nonlinearity, m: Measure, tol: Optional[float] = None
) -> bool:
    """True iff -Δ_h u - f(·,u) - μ_h >= -tol at every node."""
    rhs = discretize_rhs(m, u.grid)
    tol = _default_tolerance(rhs, SolverOptions.newton_rel) if tol is None else tol
    return bool(np.all(residual_field(u, f, rhs) >= -tol))


def check_apriori_bound(report: SolveReport, f: Nonlinearity, m: Measure, q: float) -> AprioriBound:
    """lhs = ‖u‖_{W^{1,q}} + ‖f(·,u)‖_{L¹}, rhs = ‖f(·,0)‖_{L¹} + ‖m‖_υ."""
    u = report.u
    grid = u.grid
    X, Y = grid.node_coordinates()
    absorption = GridFunction(grid, f(X, Y, u.values))
    at_zero = GridFunction(grid, f(X, Y, np.zeros(grid.shape)))
    lhs = u.w1q_norm(q) + absorption.l1_norm()
    rhs = at_zero.l1_norm() + total_variation(m)
    return AprioriBound(lhs=lhs, rhs=rhs)


class SemilinearSolver:
    """Damped Newton solver with a nonlinear Jacobi fallback.

    The Jacobian -Δ_h - diag(∂_u f) is an M-matrix because ∂_u f <= 0, so
    every Newton step is solvable.
    """

    def __init__(self, repository: OperatorRepository, options: Optional[SolverOptions] = None):
        """Initialize with operator repository.

        Args:
            repository: Source of -Δ_h and its solves
            options: Solver options, defaults if omitted
        """
        self._repository = repository
        self.options = options or SolverOptions()

    @property
    def repository(self) -> OperatorRepository:
        return self._repository

    def certify(self, f: Nonlinearity, grid: Grid) -> CertificationResult:
        """Certify f on grid, raising if it increases in u.

        Raises:
            MonotonicityViolationError: If sampled f increases in u
        """
        result = certify_monotonicity(f, grid, self.options.seed)
        if not result.monotone:
            raise MonotonicityViolationError(
                f"{f.name} increases in u on the certification lattice "
                f"(max violation {result.max_violation:.3g})",
                max_violation=result.max_violation,
            )
        if f.flag_b and not result.flag_b_holds:
            logger.warning("%s declares f = 0 on u <= 0 but is nonzero for some u <= 0", f.name)
        return result

    def solve(
        self,
        f: Nonlinearity,
        m: Measure,
        g: Grid,
        initial: Optional[GridFunction] = None,
    ) -> SolveReport:
        """Solve -Δ_h u = f(·,u) + μ_h on g.

        Raises:
            MonotonicityViolationError: If f fails certification
            NonConvergedError: If Newton and the fallback exhaust their budgets
        """
        return self.solve_rhs(f, discretize_rhs(m, g), initial)

    def solve_rhs(
        self, f: Nonlinearity, rhs: GridFunction, initial: Optional[GridFunction] = None
    ) -> SolveReport:
        """Solve -Δ_h u = f(·,u) + rhs for a nodal right-hand side."""
        grid = rhs.grid
        opts = self.options
        if opts.certify:
            self.certify(f, grid)
        X, Y = grid.node_coordinates()
        A = self._repository.laplacian(grid)
        b = rhs.values.ravel()
        xs, ys = X.ravel(), Y.ravel()
        tol = _default_tolerance(rhs, opts.newton_rel)

        def residual(v: np.ndarray) -> np.ndarray:
            return A @ v - f(xs, ys, v) - b

        if initial is not None:
            initial.require_grid(grid)
            u = initial.values.ravel().copy()
        else:
            u = self._repository.solve(grid, b + f(xs, ys, np.zeros_like(b)))

        F = residual(u)
        iters = sweeps = damped_streak = 0
        logger.info("solve %s on n=%d (tol %.3g)", f.name, grid.n, tol)
        while True:
            norm_inf = float(np.abs(F).max()) if np.all(np.isfinite(F)) else np.inf
            if norm_inf <= tol or iters >= opts.max_newton:
                break
            iters += 1
            shift = np.minimum(np.maximum(-f.du(xs, ys, u), 0.0), 1e100)
            shift = np.where(np.isfinite(shift), shift, 1e100)
            delta = self._repository.solve_shifted(grid, shift, -F)
            step, F_new = self._line_search(residual, u, delta, F)
            logger.debug("newton %d: |F|inf=%.3e step=%.3g", iters, norm_inf, step)
            if step == 0.0:
                if sweeps >= opts.max_sweeps:
                    break
                u, sweeps = self._fallback(f, rhs, u, sweeps)
                F = residual(u)
                damped_streak = 0
                continue
            u = u + step * delta
            F = F_new
            damped_streak = damped_streak + 1 if step < 1.0 else 0
            if damped_streak >= opts.damped_before_sweeps and sweeps < opts.max_sweeps:
                u, sweeps = self._fallback(f, rhs, u, sweeps)
                F = residual(u)
                damped_streak = 0

        final = float(np.abs(F).max()) if np.all(np.isfinite(F)) else float("inf")
        converged = final <= tol
        solution = GridFunction(grid, u.reshape(grid.shape)) if np.all(np.isfinite(u)) else None
        if solution is None:
            raise NonConvergedError(f"solve of {f.name} on n={grid.n} diverged", report=None)
        report = self._report(f, solution, iters, final, tol, converged, sweeps)
        if not converged:
            raise NonConvergedError(
                f"solve of {f.name} on n={grid.n} stopped at residual {final:.3e} > {tol:.3e}",
                report=report,
            )
        logger.info("solved n=%d in %d Newton steps (residual %.3e)", grid.n, iters, final)
        return report

    def _line_search(self, residual, u: np.ndarray, delta: np.ndarray, F: np.ndarray):
        """Halve the step until ‖F‖₂ decreases; step 0 means every trial failed."""
        current = float(np.linalg.norm(F))
        step = 1.0
        for _ in range(self.options.max_backtracks + 1):
            F_try = residual(u + step * delta)
            if np.all(np.isfinite(F_try)):
                trial = float(np.linalg.norm(F_try))
                if trial < (1.0 - 1e-4 * step) * current:
                    return step, F_try
            step *= 0.5
        return 0.0, F

    def _fallback(self, f: Nonlinearity, rhs: GridFunction, u: np.ndarray, sweeps: int):
        """Run nonlinear Jacobi sweeps, each node solving its scalar monotone equation."""
        opts = self.options
        budget = min(opts.sweeps_per_fallback, opts.max_sweeps - sweeps)
        logger.warning("Newton stalled on n=%d; running %d Jacobi sweeps", rhs.grid.n, budget)
        grid = rhs.grid
        h2 = grid.h**2
        X, Y = grid.node_coordinates()
        values = u.reshape(grid.shape)
        for _ in range(budget):
            padded = np.pad(values, 1)
            neighbours = padded[:-2, 1:-1] + padded[2:, 1:-1] + padded[1:-1, :-2] + padded[1:-1, 2:]
            target = rhs.values + neighbours / h2
            values = _scalar_monotone_solve(f, X, Y, 4.0 / h2, target, values)
        return values.ravel().copy(), sweeps + budget

    def _report(self, f, u, iters, final, tol, converged, sweeps) -> SolveReport:
        X, Y = u.grid.node_coordinates()
        absorption = GridFunction(u.grid, f(X, Y, u.values))
        return SolveReport(
            u=u,
            newton_iters=iters,
            final_residual=final,
            tolerance=tol,
            converged=converged,
            norm_table=Norms(u.l1_norm(), u.linf_norm(), u.w1q_norm(self.options.q)),
            absorption_l1=absorption.l1_norm(),
            sweeps=sweeps,
        )

    def check_comparison(
        self,
        f1: Nonlinearity,
        m1: Measure,
        f2: Nonlinearity,
        m2: Measure,
        g: Grid,
        tol: float = 1e-10,
    ) -> ComparisonResult:
        """Solve both problems and test u1 <= u2 + tol nodewise.

        Raises:
            PreconditionError: If m1 <= m2 or f1 <= f2 fails on samples
        """
        if order_violation(m1, m2) > 0.0:
            raise PreconditionError("comparison needs m1 <= m2")
        xs, ys = _sample_points(g, self.options.seed)
        first, second = _lattice_values(f1, xs, ys), _lattice_values(f2, xs, ys)
        with np.errstate(invalid="ignore"):
            gap = first - second
            bad = np.isfinite(gap) & (gap > 1e-12 * (1.0 + np.abs(second)))
        if bad.any():
            raise PreconditionError("comparison needs f1 <= f2 on the sample lattice")
        u1 = self.solve(f1, m1, g).u
        u2 = self.solve(f2, m2, g).u
        violation = float((u1.values - u2.values).max())
        return ComparisonResult(holds=violation <= tol, max_violation=max(violation, 0.0))


def _scalar_monotone_solve(
    f: Nonlinearity,
    X: np.ndarray,
    Y: np.ndarray,
    diagonal: float,
    target: np.ndarray,
    guess: np.ndarray,
    iterations: int = 100,
) -> np.ndarray:
    """Solve diagonal·v - f(x, v) = target nodewise by bracketing and bisection."""

    def g(v: np.ndarray) -> np.ndarray:
        with np.errstate(invalid="ignore"):
            return np.nan_to_num(diagonal * v - f(X, Y, v) - target, nan=np.inf)

    lo, hi = guess.copy(), guess.copy()
    width = np.maximum(1.0, np.abs(guess))
    for _ in range(200):
        too_high = g(lo) > 0.0
        if not too_high.any():
            break
        lo = np.where(too_high, lo - width, lo)
        width = np.where(too_high, 2.0 * width, width)
    width = np.maximum(1.0, np.abs(guess))
    for _ in range(200):
        too_low = g(hi) < 0.0
        if not too_low.any():
            break
        hi = np.where(too_low, hi + width, hi)
        width = np.where(too_low, 2.0 * width, width)
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        below = g(mid) <= 0.0
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return 0.5 * (lo + hi)
