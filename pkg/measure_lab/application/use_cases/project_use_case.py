"""Project Use Case

The projection Π_f(μ) onto good measures along the grid ladder, checked
against its variant form and, for mixed data, against additivity over the
diffuse and concentrated parts.
"""

import logging
from pathlib import Path

from ...domain.exceptions import NonConvergedError, SequenceNotConvergedError
from ...domain.services.measure_model import (
    mutually_singular,
    split_diffuse_concentrated,
    total_variation,
)
from ...domain.value_objects.grid import Grid
from ...infrastructure.io.persistence import write_grid_function, write_measure
from ...infrastructure.io.spec_loader import build_ladder, build_nonlinearity, measure_factory_for
from ...shared.models import ExperimentConfig, GridSummary, InvariantRow, StudyReport
from .study_use_case import StudyUseCase, level_row, trace_rows

logger = logging.getLogger(__name__)


class ProjectUseCase(StudyUseCase):
    """Compute Π_f(μ) = (μ⁺)^{*,f} - (μ⁻)^{*,f̃} on every grid."""

    command = "project"

    def run(self, config: ExperimentConfig, base_dir: Path, out_dir: Path) -> StudyReport:
        report = self.new_report(config)
        services = self.services(config)
        engine = services.engine
        f = build_nonlinearity(config.nonlinearity, config.domain.bounds())
        factory = measure_factory_for(config, base_dir)
        threshold_rel = config.tolerances.identity_rel

        def project_on(grid: Grid):
            m = factory(grid)
            parts = engine.project_parts(f, m, grid, strict=False)
            converged = all(part is None or part.converged for part in parts)
            projection = engine.assemble_projection(grid, *parts)
            rows = {}
            if converged:
                scale = max(total_variation(m), 1e-300)
                try:
                    variant = engine.project_variant(f, m, grid)
                    rows["variant_agreement"] = (
                        total_variation(projection - variant) / scale,
                        2.0 * threshold_rel,
                    )
                    diffuse, concentrated = split_diffuse_concentrated(m)
                    if (
                        not diffuse.is_zero()
                        and not concentrated.is_zero()
                        and mutually_singular(diffuse, concentrated)
                    ):
                        additive = engine.project(f, diffuse, grid) + engine.project(
                            f, concentrated, grid
                        )
                        rows["additivity"] = (
                            total_variation(projection - additive) / scale,
                            3.0 * threshold_rel,
                        )
                except SequenceNotConvergedError as e:
                    logger.warning("projection check on n=%d did not converge: %s", grid.n, e)
                    converged = False
            try:
                solved = services.solver.solve(f, m, grid)
            except NonConvergedError as e:
                if e.report is None:
                    raise
                solved = e.report
            return projection, parts, converged and solved.converged, solved, rows

        trace = []
        ladder = build_ladder(config)
        for grid, (projection, parts, converged, solved, rows) in zip(
            ladder, self.map(project_on, ladder)
        ):
            name = f"solution_{grid.n}.csv"
            write_grid_function(out_dir / name, solved.u)
            measure_file = f"projection_{grid.n}.json"
            write_measure(out_dir / measure_file, projection)
            report.files.extend([name, f"solution_{grid.n}.json", measure_file])
            levels = []
            for sign, part in zip(("positive", "negative"), parts):
                if part is not None:
                    levels.extend(level_row(t) for t in part.trace)
                    trace.extend(trace_rows(f"truncation_{sign}", grid.n, part.trace))
            report.grids.append(
                GridSummary(
                    n=grid.n,
                    h=grid.h,
                    scheme="truncation",
                    converged=converged,
                    levels=levels,
                    atom_masses=projection.atom_masses(),
                    extracted_tv=total_variation(projection),
                    u_l1=solved.u.l1_norm(),
                    newton_iters=solved.newton_iters,
                    final_residual=solved.final_residual,
                    solution_file=name,
                )
            )
            for key, (value, threshold) in rows.items():
                report.invariants.append(
                    InvariantRow(
                        name=f"projection_{key}[n={grid.n}]",
                        passed=value <= threshold,
                        value=value,
                        threshold=threshold,
                        detail="TV discrepancy relative to |μ|(D)",
                    )
                )
        report.notes["nonlinearity"] = f.name
        self.write_trace(out_dir, trace, report)
        return report
