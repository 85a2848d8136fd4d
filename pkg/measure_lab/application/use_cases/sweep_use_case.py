"""Sweep Use Case

Refinement and mollification sweep: solves with μ and with ρ_n ∗ μ on every
grid of the ladder, tracking the a priori bound
‖u‖_{W^{1,q}} + ‖f(·,u)‖_{L¹} <= C·(‖f(·,0)‖_{L¹} + ‖μ‖) across the family.
"""

import logging
from pathlib import Path
from typing import List, Optional, Tuple

from ...domain.entities.results import LevelTrace, SolveReport
from ...domain.exceptions import NonConvergedError
from ...domain.services.mollify import build_kernel, mollify_measure
from ...domain.services.semilinear import check_apriori_bound
from ...domain.value_objects.grid import Grid
from ...infrastructure.io.persistence import write_grid_function
from ...infrastructure.io.spec_loader import build_ladder, build_nonlinearity, measure_factory_for
from ...shared.models import AprioriRow, ExperimentConfig, GridSummary, InvariantRow, StudyReport
from .study_use_case import StudyUseCase, level_row, mollification_schedule, trace_rows

logger = logging.getLogger(__name__)


def apriori_spread(ratios: List[float]) -> float:
    """max/min - 1 over the bound ratios of a family."""
    finite = [r for r in ratios if r > 0.0]
    if len(finite) < 2:
        return 0.0
    return max(finite) / min(finite) - 1.0


class SweepUseCase(StudyUseCase):
    """A priori bound across the grid ladder and the mollification family."""

    command = "sweep"

    def run(self, config: ExperimentConfig, base_dir: Path, out_dir: Path) -> StudyReport:
        report = self.new_report(config)
        solver = self.services(config).solver
        f = build_nonlinearity(config.nonlinearity, config.domain.bounds())
        factory = measure_factory_for(config, base_dir)
        profile = config.mollification.profile

        def solve(m, grid: Grid) -> SolveReport:
            try:
                return solver.solve(f, m, grid)
            except NonConvergedError as e:
                if e.report is None:
                    raise
                logger.warning("sweep solve on n=%d did not converge: %s", grid.n, e)
                return e.report

        def sweep_on(grid: Grid):
            m = factory(grid)
            plain = solve(m, grid)
            family: List[Tuple[int, SolveReport]] = []
            for n in mollification_schedule(config, m, grid):
                smoothed = mollify_measure(m, build_kernel(n, grid, profile), grid)
                family.append((n, solve(smoothed, grid)))
            return m, plain, family

        rows = []
        ratios = []
        ladder = build_ladder(config)
        for grid, (m, plain, family) in zip(ladder, self.map(sweep_on, ladder)):
            name = f"solution_{grid.n}.csv"
            write_grid_function(out_dir / name, plain.u)
            report.files.extend([name, f"solution_{grid.n}.json"])

            bound = check_apriori_bound(plain, f, m, config.q)
            report.apriori.append(
                AprioriRow(n=grid.n, lhs=bound.lhs, rhs=bound.rhs, ratio=bound.ratio)
            )
            ratios.append(bound.ratio)
            trace: List[LevelTrace] = []
            previous: Optional[SolveReport] = None
            for n, solved in family:
                # ‖ρ_n ∗ μ‖ = ‖μ‖ for the unit-mass kernel
                smoothed_bound = check_apriori_bound(solved, f, m, config.q)
                report.apriori.append(
                    AprioriRow(
                        n=grid.n,
                        mollification_index=n,
                        lhs=smoothed_bound.lhs,
                        rhs=smoothed_bound.rhs,
                        ratio=smoothed_bound.ratio,
                    )
                )
                ratios.append(smoothed_bound.ratio)
                increment = None if previous is None else (solved.u - previous.u).l1_norm()
                trace.append(
                    LevelTrace(
                        level=float(n),
                        l1_increment=increment,
                        norms=solved.norm_table,
                        atom_mass=None,
                        newton_iters=solved.newton_iters,
                    )
                )
                previous = solved
            rows.extend(trace_rows("mollification", grid.n, trace))
            if config.mollification.dump_kernels:
                self.dump_kernels(out_dir, grid, [n for n, _ in family], profile, report)
            report.grids.append(
                GridSummary(
                    n=grid.n,
                    h=grid.h,
                    scheme="mollification",
                    converged=plain.converged and all(s.converged for _, s in family),
                    levels=[level_row(t) for t in trace],
                    u_l1=plain.u.l1_norm(),
                    newton_iters=plain.newton_iters,
                    final_residual=plain.final_residual,
                    solution_file=name,
                )
            )

        spread = apriori_spread(ratios)
        threshold = config.tolerances.apriori_spread
        report.invariants.append(
            InvariantRow(
                name="apriori_bound_uniform",
                passed=spread < threshold,
                value=spread,
                threshold=threshold,
                detail=f"{len(ratios)} solves, ratio range "
                f"[{min(ratios):.4g}, {max(ratios):.4g}]",
            )
        )
        report.notes["nonlinearity"] = f.name
        self.write_trace(out_dir, rows, report)
        return report
