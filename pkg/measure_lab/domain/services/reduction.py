"""Reduced measures and the projection Π_f via the truncation and mollification ladders.

The measure driving a limit solution is read back from its discrete
residual: around every original atom the flux -Δ_h u* - f(·,0) through a
disk becomes the atom's mass; elsewhere the residual -Δ_h u* - f(·,u*) is
kept as density. The disk is a small patch for atoms that keep their mass
and widens to the threshold scale for atoms that lose part of it.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..entities.results import IdentityReport, LevelTrace, ReductionResult, Scheme, SolveReport
from ..exceptions import PreconditionError, SequenceNotConvergedError
from ..value_objects.grid import Grid, GridFunction
from ..value_objects.measure import Atom, Measure
from ..value_objects.mollifier_kernel import MollifierKernel
from ..value_objects.nonlinearity import Nonlinearity
from .grid_core import apply_stencil
from .measure_model import (
    dominance_excess,
    jordan_decompose,
    split_diffuse_concentrated,
    total_variation,
)
from .mollify import build_kernel, default_schedule, grid_limit_index, mollify_measure
from .semilinear import SemilinearSolver

logger = logging.getLogger(__name__)

_EPS = 1e-9
_RING_RATIO = math.sqrt(2.0)
# absorption per log-scale next to an atom, as a share of its patch flux
_CONCENTRATION_SHARE = 0.05


@dataclass(frozen=True)
class ReductionOptions:
    """Ladder and extraction settings."""

    seq_rel: float = 1e-4
    seq_rel_mollification: float = 2e-2
    max_truncation_level: int = 40
    patch_radius: int = 1
    profile: str = "bump"
    n0: Optional[int] = None
    identity_rel: float = 3e-3
    resolve_to_grid: bool = True
    jobs: int = 1

    def __post_init__(self) -> None:
        """Validate options after initialization."""
        if self.seq_rel <= 0 or self.seq_rel_mollification <= 0:
            raise ValueError("sequence tolerances must be positive")
        if self.patch_radius < 0:
            raise ValueError("patch_radius must be >= 0")
        if self.jobs < 1:
            raise ValueError("jobs must be >= 1")

    def truncation_levels(self) -> List[float]:
        return [2.0**j for j in range(self.max_truncation_level + 1)]


def ring_radii(inner: float, outer: float) -> List[float]:
    """Radii (in cells) r_0 = inner, r_{k+1} = max(√2·r_k, r_k + 1), up to outer."""
    radii = [float(inner)]
    while True:
        nxt = max(_RING_RATIO * radii[-1], radii[-1] + 1.0)
        if nxt > outer + _EPS:
            break
        radii.append(nxt)
    if outer - radii[-1] >= 0.5:
        radii.append(float(outer))
    return radii


def _search_radius(grid: Grid, atom: Atom, others: Sequence[Atom]) -> float:
    """Half the distance to ∂D or to the midpoint towards the nearest other atom, in cells."""
    reach = grid.distance_to_boundary(atom.x, atom.y)
    for other in others:
        gap = float(np.hypot(other.x - atom.x, other.y - atom.y))
        if gap > 0.5 * grid.h:
            reach = min(reach, 0.5 * gap)
    return 0.5 * reach / grid.h


def _threshold_radius(radii: List[float], distance: np.ndarray, absorption: np.ndarray) -> float:
    """Log-radius where the absorption per log-scale is smallest.

    Rings with a smallest interior value are refined by a parabola through
    log-absorption at the ring and its neighbours.
    """
    centers, density = [], []
    for inner, outer in zip(radii, radii[1:]):
        ring = (distance > inner + _EPS) & (distance <= outer + _EPS)
        width = math.log(outer / max(inner, 0.5))
        centers.append(0.5 * (math.log(max(inner, 0.5)) + math.log(outer)))
        density.append(float(absorption[ring].sum()) / width)
    k = int(np.argmin(density))
    if 0 < k < len(density) - 1 and min(density[k - 1 : k + 2]) > 0.0:
        t = np.array(centers[k - 1 : k + 2])
        y = np.log(density[k - 1 : k + 2])
        a, b, _ = np.polyfit(t, y, 2)
        if a > 0.0:
            return float(np.clip(-b / (2.0 * a), t[0], t[2]))
    return centers[k]


def extract_measure(
    u_star: GridFunction, f: Nonlinearity, atoms: Sequence[Atom], patch_radius: int = 1
) -> Measure:
    """Split the residual of u_star into atom masses and a density.

    An atom's mass is the flux h²·Σ(-Δ_h u_star - f(·,0)) through a disk
    around it. The disk is the patch of the given radius unless the
    absorption around the atom takes more than a few percent of that
    flux; then the disk grows to the radius where the absorption per
    log-scale is smallest, the scale separating concentrated from diffuse
    absorption. Density is -Δ_h u_star - f(·,u_star) off the disks.
    Atoms sharing a node are represented by the first of them; nodes
    already claimed by an earlier atom are not counted twice.
    """
    grid = u_star.grid
    h2 = grid.h**2
    X, Y = grid.node_coordinates()
    flux = apply_stencil(u_star.values, grid.h)
    reaction = f(X, Y, u_star.values)
    density = flux - reaction
    baseline = f(X, Y, np.zeros_like(u_star.values))
    source = flux - baseline
    absorption = h2 * np.abs(reaction - baseline)
    I, J = np.indices(grid.shape)
    claimed = np.zeros(grid.shape, dtype=bool)
    extracted: List[Atom] = []
    seen_nodes = set()
    for atom in atoms:
        i, j = grid.nearest_node(atom.x, atom.y)
        if (i, j) in seen_nodes:
            continue
        seen_nodes.add((i, j))
        distance = np.hypot(I - i, J - j)
        free = ~claimed
        radii = ring_radii(patch_radius, max(_search_radius(grid, atom, atoms), patch_radius))
        inner = free & (distance <= patch_radius + _EPS)
        mass = h2 * float(source[inner].sum())
        radius = float(patch_radius)
        if len(radii) > 2:
            first_ring = free & (distance > radii[0] + _EPS) & (distance <= radii[1] + _EPS)
            share = float(absorption[first_ring].sum()) / math.log(radii[1] / max(radii[0], 0.5))
            if share > _CONCENTRATION_SHARE * max(abs(mass), _EPS):
                local = np.where(free, absorption, 0.0)
                radius = math.exp(_threshold_radius(radii, distance, local))
                below = max(r for r in radii if r <= radius + _EPS)
                above = min((r for r in radii if r > radius + _EPS), default=below)
                m_below = h2 * float(source[free & (distance <= below + _EPS)].sum())
                m_above = h2 * float(source[free & (distance <= above + _EPS)].sum())
                weight = 0.0 if above == below else math.log(radius / below) / math.log(
                    above / below
                )
                mass = (1.0 - weight) * m_below + weight * m_above
                radius = below
                logger.debug("atom at %s: threshold radius %.3g cells", atom.point, radius)
        disk = free & (distance <= radius + _EPS)
        claimed |= disk
        extracted.append(Atom(atom.x, atom.y, mass))
    density = np.where(claimed, 0.0, density)
    return Measure(GridFunction(grid, density), tuple(a for a in extracted if a.mass != 0.0))


def _atom_mass_estimate(extracted: Measure) -> Optional[float]:
    return float(sum(extracted.atom_masses())) if extracted.atoms else None


def _is_converged(increments: List[float], tolerance: float) -> bool:
    if not increments or increments[-1] >= tolerance:
        return False
    return len(increments) < 2 or increments[-1] <= increments[-2]


class ReductionEngine:
    """Computes μ^{*,f} and Π_f(μ) on a fixed grid."""

    def __init__(self, solver: SemilinearSolver, options: Optional[ReductionOptions] = None):
        """Initialize with a semilinear solver.

        Args:
            solver: Solver used at every ladder level
            options: Ladder and extraction settings, defaults if omitted
        """
        self._solver = solver
        self.options = options or ReductionOptions()

    @property
    def solver(self) -> SemilinearSolver:
        return self._solver

    def _trace_row(
        self,
        level: float,
        report: SolveReport,
        previous: Optional[GridFunction],
        f: Nonlinearity,
        atoms: Sequence[Atom],
        patch_radius: int,
    ) -> LevelTrace:
        increment = None if previous is None else (report.u - previous).l1_norm()
        estimate = extract_measure(report.u, f, atoms, patch_radius)
        return LevelTrace(
            level=float(level),
            l1_increment=increment,
            norms=report.norm_table,
            atom_mass=_atom_mass_estimate(estimate),
            newton_iters=report.newton_iters,
        )

    def _finish(
        self,
        scheme: Scheme,
        u_star: GridFunction,
        f: Nonlinearity,
        m: Measure,
        trace: List[LevelTrace],
        tolerance: float,
        patch_radius: int,
        attained: bool = False,
    ) -> ReductionResult:
        increments = [t.l1_increment for t in trace if t.l1_increment is not None]
        converged = attained or _is_converged(increments, tolerance)
        result = ReductionResult(
            u_star=u_star,
            extracted=extract_measure(u_star, f, m.atoms, patch_radius),
            trace=trace,
            scheme=scheme,
            converged=converged,
            tolerance=tolerance,
        )
        if not converged:
            logger.warning(
                "%s ladder for %s on n=%d did not converge (last increment %s, tol %.3g)",
                scheme, f.name, u_star.grid.n, increments[-1] if increments else None, tolerance,
            )
            raise SequenceNotConvergedError(
                f"{scheme} ladder on n={u_star.grid.n} is not Cauchy in L¹", result=result
            )
        n_levels = len(trace)
        if attained:
            logger.info(
                "%s ladder on n=%d reached the grid limit after %d levels",
                scheme, u_star.grid.n, n_levels,
            )
        else:
            logger.info(
                "%s ladder on n=%d converged after %d levels", scheme, u_star.grid.n, n_levels
            )
        return result

    def reduce_by_truncation(
        self,
        f: Nonlinearity,
        m: Measure,
        g: Grid,
        levels: Optional[Sequence[float]] = None,
        tol_seq: Optional[float] = None,
    ) -> ReductionResult:
        """Solve with f ∨ (-n) for increasing heights n, warm-starting each level.

        Stops at the first level whose L¹ increment falls below the tolerance
        (seq_rel·‖first iterate‖_{L¹} unless tol_seq is given).

        Raises:
            SequenceNotConvergedError: If the ladder ends without meeting the criterion
        """
        heights = list(levels) if levels is not None else self.options.truncation_levels()
        if not heights or any(b <= a for a, b in zip(heights, heights[1:])):
            raise PreconditionError("truncation levels must be a non-empty increasing sequence")
        radius = self.options.patch_radius
        trace: List[LevelTrace] = []
        previous: Optional[GridFunction] = None
        tolerance = tol_seq
        for height in heights:
            report = self._solver.solve(f.truncate(height), m, g, initial=previous)
            row = self._trace_row(height, report, previous, f, m.atoms, radius)
            trace.append(row)
            if tolerance is None:
                tolerance = self.options.seq_rel * max(report.u.l1_norm(), 1e-300)
            previous = report.u
            logger.debug("truncation level %g: increment %s", height, row.l1_increment)
            if row.l1_increment is not None and row.l1_increment < tolerance:
                break
        return self._finish(Scheme.TRUNCATION, previous, f, m, trace, tolerance, radius)

    def reduce_by_mollification(
        self,
        f: Nonlinearity,
        m: Measure,
        g: Grid,
        schedule: Optional[Sequence[int]] = None,
        tol_seq: Optional[float] = None,
    ) -> ReductionResult:
        """Solve with R_{n_k}(m) along a mollification schedule.

        With resolve_to_grid the schedule is closed by the grid-limit index,
        whose kernel collapses to a single node, so that R_n(m) realizes μ_h
        itself. Reaching that level attains the limit of the ladder on g;
        otherwise the last increment must fall below the tolerance
        (seq_rel_mollification·‖first iterate‖_{L¹} unless tol_seq is given).
        Levels are independent and run on a thread pool when jobs > 1.

        Raises:
            PreconditionError: If the schedule is empty
            SequenceNotConvergedError: If the ladder is not Cauchy in L¹
        """
        opts = self.options
        indices = list(schedule) if schedule is not None else default_schedule(m, g, opts.n0)
        if not indices:
            raise PreconditionError("mollification schedule is empty")
        kernels = [build_kernel(n, g, opts.profile) for n in indices]
        limit = grid_limit_index(g)
        if opts.resolve_to_grid and indices[-1] < limit:
            kernels.append(build_kernel(limit, g, opts.profile, subcell=True))

        def run(kernel: MollifierKernel) -> SolveReport:
            return self._solver.solve(f, mollify_measure(m, kernel, g), g)

        if opts.jobs > 1 and len(kernels) > 1:
            with ThreadPoolExecutor(max_workers=opts.jobs) as pool:
                reports = list(pool.map(run, kernels))
        else:
            reports = [run(k) for k in kernels]

        trace: List[LevelTrace] = []
        previous: Optional[GridFunction] = None
        for kernel, report in zip(kernels, reports):
            radius = opts.patch_radius + kernel.support_nodes
            trace.append(self._trace_row(kernel.n, report, previous, f, m.atoms, radius))
            previous = report.u
        tolerance = tol_seq
        if tolerance is None:
            tolerance = opts.seq_rel_mollification * max(reports[0].u.l1_norm(), 1e-300)
        return self._finish(
            Scheme.MOLLIFICATION,
            previous,
            f,
            m,
            trace,
            tolerance,
            opts.patch_radius + kernels[-1].support_nodes,
            attained=kernels[-1].is_identity,
        )

    def reduce(self, f: Nonlinearity, m: Measure, g: Grid, scheme: Scheme = Scheme.TRUNCATION):
        if Scheme(scheme) is Scheme.MOLLIFICATION:
            return self.reduce_by_mollification(f, m, g)
        return self.reduce_by_truncation(f, m, g)

    def reduced_measure(self, f: Nonlinearity, m: Measure, g: Grid) -> Measure:
        """μ^{*,f} by truncation; the zero measure is returned unchanged."""
        if m.is_zero():
            return Measure.zero(g)
        return self.reduce_by_truncation(f, m, g).extracted

    def project_parts(
        self, f: Nonlinearity, m: Measure, g: Grid, strict: bool = True
    ) -> Tuple[Optional[ReductionResult], Optional[ReductionResult]]:
        """Truncation ladders of m⁺ under f and m⁻ under f̃; None for a zero part.

        With strict off a ladder that is not Cauchy is returned with
        converged=False instead of raising.
        """
        pos, neg = jordan_decompose(m)

        def ladder(f_part: Nonlinearity, part: Measure) -> Optional[ReductionResult]:
            if part.is_zero():
                return None
            try:
                return self.reduce_by_truncation(f_part, part, g)
            except SequenceNotConvergedError as e:
                if strict or e.result is None:
                    raise
                return e.result

        return ladder(f, pos), ladder(f.reflect(), neg)

    @staticmethod
    def assemble_projection(
        g: Grid, positive: Optional[ReductionResult], negative: Optional[ReductionResult]
    ) -> Measure:
        """(m⁺)* - (m⁻)* from the two ladders of project_parts."""
        result = Measure.zero(g)
        if positive is not None:
            result = result + positive.extracted
        if negative is not None:
            result = result - negative.extracted
        return result

    def project(self, f: Nonlinearity, m: Measure, g: Grid) -> Measure:
        """Π_f(m) = (m⁺)^{*,f} - (m⁻)^{*,f̃}."""
        return self.assemble_projection(g, *self.project_parts(f, m, g))

    def project_variant(self, f: Nonlinearity, m: Measure, g: Grid) -> Measure:
        """Π_f(m) = (m⁺)^{*,-f⁻} - (m⁻)^{*,reflect(f⁺)}."""
        pos, neg = jordan_decompose(m)
        return self.reduced_measure(f.negative_part(), pos, g) - self.reduced_measure(
            f.positive_part().reflect(), neg, g
        )

    def check_reduction_identities(self, f: Nonlinearity, m: Measure, g: Grid) -> IdentityReport:
        """TV discrepancies of the reduced-measure identities.

        Checks (μ⁺)* = (μ*)⁺, (μ_c)* = (μ*)_c, (μ*)_d = μ_d and |μ*| <= |μ|, the
        last one atom by atom and node by node. Each discrepancy must stay
        below 3·identity_rel·|μ|(D).

        Raises:
            PreconditionError: If m is not nonnegative
        """
        if not m.is_nonnegative():
            raise PreconditionError("reduction identities are checked for m >= 0")
        star = self.reduced_measure(f, m, g)
        star_pos, _ = jordan_decompose(star)
        star_diffuse, star_concentrated = split_diffuse_concentrated(star)
        m_pos, _ = jordan_decompose(m)
        m_diffuse, m_concentrated = split_diffuse_concentrated(m)

        discrepancies: Dict[str, float] = {
            "positive_part": total_variation(self.reduced_measure(f, m_pos, g) - star_pos),
            "concentrated_part": total_variation(
                self.reduced_measure(f, m_concentrated, g) - star_concentrated
            ),
            "diffuse_part": total_variation(star_diffuse - m_diffuse),
            "total_variation": dominance_excess(star, m),
        }
        tolerance = 3.0 * self.options.identity_rel * max(total_variation(m), 1e-300)
        passed = {name: value <= tolerance for name, value in discrepancies.items()}
        return IdentityReport(discrepancies=discrepancies, tolerance=tolerance, passed=passed)

    def reduced_measure_distance(
        self, f1: Nonlinearity, f2: Nonlinearity, m: Measure, g: Grid
    ) -> float:
        """TV distance between the reduced measures of m under f1 and f2."""
        return total_variation(self.reduced_measure(f1, m, g) - self.reduced_measure(f2, m, g))

    def sandwich_bounds(self, f: Nonlinearity, m: Measure, g: Grid) -> float:
        """Largest violation of v <= u <= w for the solutions with -f⁻, f and f⁺."""
        solve = self._solver.solve
        v = solve(f.negative_part(), m, g).u.values
        u = solve(f, m, g).u.values
        w = solve(f.positive_part(), m, g).u.values
        return float(max((v - u).max(), (u - w).max(), 0.0))

    def check_reflection_symmetry(self, f: Nonlinearity, m: Measure, g: Grid) -> float:
        """max|u + ũ| where u solves (f, m) and ũ solves (f̃, -m)."""
        u = self._solver.solve(f, m, g).u
        reflected = self._solver.solve(f.reflect(), -m, g).u
        return float(np.abs(u.values + reflected.values).max())

    def compare_schemes(
        self, f: Nonlinearity, m: Measure, g: Grid
    ) -> Tuple[ReductionResult, ReductionResult, float]:
        """Both ladders and the L¹ gap of their limits relative to the truncation limit."""
        truncation = self.reduce_by_truncation(f, m, g)
        mollification = self.reduce_by_mollification(f, m, g)
        gap = (truncation.u_star - mollification.u_star).l1_norm()
        scale = max(truncation.u_star.l1_norm(), 1e-300)
        return truncation, mollification, gap / scale