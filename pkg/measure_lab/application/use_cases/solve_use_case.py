"""Solve Use Case

Plain discrete solves over the grid ladder, checked as sub- and
supersolutions and against their Green representation.
"""

import logging
from pathlib import Path

from ...domain.exceptions import NonConvergedError
from ...domain.services.semilinear import (
    check_apriori_bound,
    verify_subsolution,
    verify_supersolution,
)
from ...domain.value_objects.grid import Grid
from ...infrastructure.io.persistence import write_grid_function
from ...infrastructure.io.spec_loader import build_ladder, build_nonlinearity, measure_factory_for
from ...shared.models import AprioriRow, ExperimentConfig, GridSummary, InvariantRow, StudyReport
from .study_use_case import StudyUseCase

logger = logging.getLogger(__name__)


class SolveUseCase(StudyUseCase):
    """Solve -Δ_h u = f(·,u) + μ_h on every grid of the ladder."""

    command = "solve"

    def run(self, config: ExperimentConfig, base_dir: Path, out_dir: Path) -> StudyReport:
        report = self.new_report(config)
        services = self.services(config)
        f = build_nonlinearity(config.nonlinearity, config.domain.bounds())
        factory = measure_factory_for(config, base_dir)

        def solve_on(grid: Grid):
            m = factory(grid)
            try:
                return m, services.solver.solve(f, m, grid)
            except NonConvergedError as e:
                if e.report is None:
                    raise
                logger.warning("solve on n=%d did not converge: %s", grid.n, e)
                return m, e.report

        rows = []
        ladder = build_ladder(config)
        for grid, (m, solved) in zip(ladder, self.map(solve_on, ladder)):
            name = f"solution_{grid.n}.csv"
            write_grid_function(out_dir / name, solved.u)
            report.files.extend([name, f"solution_{grid.n}.json"])
            report.grids.append(
                GridSummary(
                    n=grid.n,
                    h=grid.h,
                    converged=solved.converged,
                    u_l1=solved.u.l1_norm(),
                    newton_iters=solved.newton_iters,
                    final_residual=solved.final_residual,
                    solution_file=name,
                )
            )
            bound = check_apriori_bound(solved, f, m, config.q)
            report.apriori.append(
                AprioriRow(n=grid.n, lhs=bound.lhs, rhs=bound.rhs, ratio=bound.ratio)
            )
            sub = verify_subsolution(solved.u, f, m, solved.tolerance)
            sup = verify_supersolution(solved.u, f, m, solved.tolerance)
            report.invariants.append(
                InvariantRow(
                    name=f"discrete_solution[n={grid.n}]",
                    passed=sub and sup,
                    value=solved.final_residual,
                    threshold=solved.tolerance,
                    detail=f"subsolution={sub} supersolution={sup}",
                )
            )
            residual = services.green.representation_residual(solved.u, f, m)
            report.invariants.append(
                InvariantRow(
                    name=f"green_representation[n={grid.n}]",
                    passed=residual <= solved.tolerance,
                    value=residual,
                    threshold=solved.tolerance,
                    detail="L¹ norm of u - G_h(f(·,u)) - G_h(μ)",
                )
            )
            rows.append(
                {
                    "scheme": "solve",
                    "n": grid.n,
                    "level": 0.0,
                    "l1_increment": None,
                    "atom_mass": None,
                    "newton_iters": solved.newton_iters,
                }
            )
        report.notes["nonlinearity"] = f.name
        self.write_trace(out_dir, rows, report)
        return report
