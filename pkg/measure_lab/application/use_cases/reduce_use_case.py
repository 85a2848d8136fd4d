"""Reduce Use Case

Reduced measures along the grid ladder by truncation, mollification or
both, with Richardson extrapolation of the extracted atom mass.
"""

import logging
from pathlib import Path
from typing import Dict, List, Tuple

from ...domain.entities.results import ReductionResult, Scheme
from ...domain.exceptions import SequenceNotConvergedError
from ...domain.services.extrapolation import richardson
from ...domain.services.measure_model import order_violation, total_variation
from ...domain.value_objects.grid import Grid
from ...domain.value_objects.measure import Measure
from ...infrastructure.io.persistence import write_grid_function, write_measure
from ...infrastructure.io.spec_loader import build_ladder, build_nonlinearity, measure_factory_for
from ...shared.models import (
    ExperimentConfig,
    ExtrapolationModel,
    InvariantRow,
    SchemeGapRow,
    StudyReport,
)
from .study_use_case import StudyUseCase, mollification_schedule, reduction_summary, trace_rows

logger = logging.getLogger(__name__)


def schemes_for(config: ExperimentConfig) -> List[Scheme]:
    if config.scheme == 'both':
        return [Scheme.TRUNCATION, Scheme.MOLLIFICATION]
    return [Scheme(config.scheme)]


class ReduceUseCase(StudyUseCase):
    """Compute μ^{*,f} on every grid and extrapolate its atom mass."""

    command = "reduce"

    def run(self, config: ExperimentConfig, base_dir: Path, out_dir: Path) -> StudyReport:
        report = self.new_report(config)
        engine = self.services(config).engine
        f = build_nonlinearity(config.nonlinearity, config.domain.bounds())
        factory = measure_factory_for(config, base_dir)
        schemes = schemes_for(config)
        ladder = build_ladder(config)
        tol = config.tolerances

        def reduce_on(grid: Grid) -> Tuple[Measure, Dict[Scheme, ReductionResult]]:
            m = factory(grid)
            results = {}
            for scheme in schemes:
                try:
                    if scheme is Scheme.TRUNCATION:
                        results[scheme] = engine.reduce_by_truncation(
                            f, m, grid, levels=config.truncation_levels
                        )
                    else:
                        schedule = mollification_schedule(config, m, grid)
                        results[scheme] = engine.reduce_by_mollification(f, m, grid, schedule)
                except SequenceNotConvergedError as e:
                    results[scheme] = e.result
            return m, results

        rows = []
        by_scheme: Dict[Scheme, List[ReductionResult]] = {s: [] for s in schemes}
        for grid, (m, results) in zip(ladder, self.map(reduce_on, ladder)):
            for scheme, result in results.items():
                by_scheme[scheme].append(result)
                primary = scheme is schemes[0]
                name = f"solution_{grid.n}.csv" if primary else f"solution_{scheme}_{grid.n}.csv"
                write_grid_function(out_dir / name, result.u_star)
                extracted = f"extracted_{scheme}_{grid.n}.json"
                write_measure(out_dir / extracted, result.extracted)
                report.files.extend([name, name.replace(".csv", ".json"), extracted])
                report.grids.append(reduction_summary(result, name))
                rows.extend(trace_rows(str(scheme), grid.n, result.trace))
                if scheme is Scheme.MOLLIFICATION and config.mollification.dump_kernels:
                    indices = [int(t.level) for t in result.trace]
                    self.dump_kernels(out_dir, grid, indices, engine.options.profile, report)
                if m.is_nonnegative() and f.flag_b:
                    violation = order_violation(result.extracted, m)
                    threshold = 3.0 * tol.identity_rel * max(total_variation(m), 1e-300)
                    report.invariants.append(
                        InvariantRow(
                            name=f"extracted_below_data[{scheme},n={grid.n}]",
                            passed=violation <= threshold,
                            value=violation,
                            threshold=threshold,
                        )
                    )
            if len(results) == 2:
                truncation = results[Scheme.TRUNCATION].u_star
                mollification = results[Scheme.MOLLIFICATION].u_star
                gap = (truncation - mollification).l1_norm()
                relative = gap / max(truncation.l1_norm(), 1e-300)
                report.scheme_gaps.append(SchemeGapRow(n=grid.n, l1_gap=gap, relative_gap=relative))

        for scheme, results in by_scheme.items():
            fit = self._extrapolate(results)
            if fit is not None:
                report.extrapolations[f"{scheme}.atom_mass"] = fit
        if report.scheme_gaps:
            finest = report.scheme_gaps[-1]
            report.invariants.append(
                InvariantRow(
                    name=f"scheme_agreement[n={finest.n}]",
                    passed=finest.relative_gap < tol.scheme_gap_rel,
                    value=finest.relative_gap,
                    threshold=tol.scheme_gap_rel,
                )
            )
        report.notes["nonlinearity"] = f.name
        self.write_trace(out_dir, rows, report)
        return report

    @staticmethod
    def _extrapolate(results: List[ReductionResult]):
        """Richardson fit of the total extracted atom mass, if every grid has atoms."""
        if len(results) < 2 or not all(r.extracted.atoms for r in results):
            return None
        hs = [r.u_star.grid.h for r in results]
        masses = [sum(r.extracted.atom_masses()) for r in results]
        fit = richardson(hs, masses)
        return ExtrapolationModel(**fit.to_dict())
