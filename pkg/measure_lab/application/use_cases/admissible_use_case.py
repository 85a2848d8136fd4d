"""Admissible Use Case

Decides μ ∈ A(f) from the absorption integrals I_h = h²·Σ|f(·, G_h μ)|
along the grid ladder.
"""

import logging
from pathlib import Path

from ...domain.exceptions import ConfigError
from ...infrastructure.io.persistence import write_rows
from ...infrastructure.io.spec_loader import build_ladder, build_nonlinearity, measure_factory_for
from ...shared.models import AdmissibilityModel, ExperimentConfig, StudyReport
from .study_use_case import StudyUseCase

logger = logging.getLogger(__name__)

ADMISSIBILITY_COLUMNS = ["n", "h", "integral", "relative_increment"]


class AdmissibleUseCase(StudyUseCase):
    """Admissibility verdict over a refinement ladder of at least three grids."""

    command = "admissible"

    def run(self, config: ExperimentConfig, base_dir: Path, out_dir: Path) -> StudyReport:
        if len(config.grids) < 3:
            raise ConfigError("admissibility needs at least three grids", key="grids")
        report = self.new_report(config)
        green = self.services(config).green
        f = build_nonlinearity(config.nonlinearity, config.domain.bounds())
        factory = measure_factory_for(config, base_dir)
        tol = config.tolerances

        verdict = green.admissibility_check(
            f,
            factory,
            build_ladder(config),
            cauchy_tol=tol.cauchy,
            divergence_threshold=tol.divergence_exponent,
        )
        report.admissibility = AdmissibilityModel(**verdict.to_dict())
        increments = [None] + list(verdict.relative_increments)
        rows = [
            {"n": n, "h": h, "integral": value, "relative_increment": increment}
            for n, h, value, increment in zip(verdict.ns, verdict.hs, verdict.integrals, increments)
        ]
        write_rows(out_dir / "admissibility.csv", ADMISSIBILITY_COLUMNS, rows)
        report.files.append("admissibility.csv")
        report.notes["nonlinearity"] = f.name
        report.notes["verdict"] = str(verdict.verdict)
        self.write_trace(out_dir, [], report)
        return report
