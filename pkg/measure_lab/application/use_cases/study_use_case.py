"""Study Use Case

Shared plumbing of the experiment pipelines: service wiring from a config,
the grid-ladder worker pool, provenance and the common output files.
"""

import hashlib
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Dict, Iterable, List, Optional, TypeVar

from ... import __version__
from ...domain.entities.results import LevelTrace, ReductionResult
from ...domain.exceptions import ConfigError
from ...domain.repositories.operator_repository import OperatorRepository
from ...domain.services.green_ops import GreenOperator
from ...domain.services.measure_model import total_variation
from ...domain.services.mollify import build_kernel, default_schedule
from ...domain.services.reduction import ReductionEngine, ReductionOptions
from ...domain.services.semilinear import SemilinearSolver, SolverOptions
from ...domain.value_objects.grid import Grid
from ...domain.value_objects.measure import Measure
from ...infrastructure.io.persistence import (
    TRACE_COLUMNS,
    dumps,
    write_json,
    write_kernel,
    write_rows,
)
from ...infrastructure.io.plots import emit_plots
from ...infrastructure.sparse import FactorizationRepository, SparseOperatorFactory
from ...shared.models import ExperimentConfig, GridSummary, LevelRow, Provenance, StudyReport

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def config_hash(config: Optional[ExperimentConfig]) -> str:
    """sha256 of the config's canonical JSON ('' hashed for no config)."""
    payload = dumps(config.model_dump(mode="json")) if config is not None else ""
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def level_row(trace: LevelTrace) -> LevelRow:
    return LevelRow(**trace.to_row())


def trace_rows(scheme: str, n: int, trace: Iterable[LevelTrace]) -> List[Dict[str, Any]]:
    """Rows of trace.csv for one ladder."""
    return [
        {
            "scheme": scheme,
            "n": n,
            "level": t.level,
            "l1_increment": t.l1_increment,
            "atom_mass": t.atom_mass,
            "newton_iters": t.newton_iters,
        }
        for t in trace
    ]


def reduction_summary(result: ReductionResult, solution_file: Optional[str] = None) -> GridSummary:
    grid = result.u_star.grid
    return GridSummary(
        n=grid.n,
        h=grid.h,
        scheme=str(result.scheme),
        converged=result.converged,
        levels=[level_row(t) for t in result.trace],
        atom_masses=result.extracted.atom_masses(),
        extracted_tv=total_variation(result.extracted),
        u_l1=result.u_star.l1_norm(),
        newton_iters=sum(t.newton_iters for t in result.trace),
        solution_file=solution_file,
    )


@dataclass(frozen=True)
class LabServices:
    """Numerical services configured for one experiment."""

    green: GreenOperator
    solver: SemilinearSolver
    engine: ReductionEngine


class StudyUseCase:
    """Base for the pipelines behind the mplab subcommands.

    Subclasses implement run() and return a StudyReport; execute() wraps it
    with the common outputs and the result dictionary handed to interfaces.
    """

    command = "study"

    def __init__(self, repository: OperatorRepository, jobs: int = 1):
        """Initialize use case with operator repository.

        Args:
            repository: Source of -Δ_h and its cached factorizations
            jobs: Worker threads for grid ladders and independent levels
        """
        if jobs < 1:
            raise ValueError("jobs must be >= 1")
        self._repository = repository
        self.jobs = jobs

    @classmethod
    def create(cls, jobs: int = 1) -> "StudyUseCase":
        """Factory method to create use case with dependencies.

        Returns:
            Use case backed by a scipy.sparse factorization cache
        """
        return cls(FactorizationRepository(SparseOperatorFactory()), jobs=jobs)

    def services(self, config: Optional[ExperimentConfig] = None) -> LabServices:
        """Green operator, solver and reduction engine tuned by config."""
        config = config or _default_config()
        tol = config.tolerances
        solver = SemilinearSolver(
            self._repository,
            SolverOptions(newton_rel=tol.newton_rel, seed=config.seed, q=config.q),
        )
        engine = ReductionEngine(
            solver,
            ReductionOptions(
                seq_rel=tol.seq_rel,
                seq_rel_mollification=tol.seq_rel_mollification,
                max_truncation_level=config.max_truncation_level,
                patch_radius=config.patch_radius,
                profile=config.mollification.profile,
                n0=config.mollification.n0,
                identity_rel=tol.identity_rel,
                resolve_to_grid=config.mollification.resolve_to_grid,
                jobs=self.jobs,
            ),
        )
        return LabServices(GreenOperator(self._repository), solver, engine)

    def map(self, func: Callable[[T], R], items: Iterable[T]) -> List[R]:
        """Apply func to items on the worker pool, results in submission order."""
        items = list(items)
        if self.jobs == 1 or len(items) < 2:
            return [func(item) for item in items]
        with ThreadPoolExecutor(max_workers=self.jobs) as pool:
            return list(pool.map(func, items))

    def run(self, config: ExperimentConfig, base_dir: Path, out_dir: Path) -> StudyReport:
        raise NotImplementedError

    def execute(
        self,
        config: Optional[ExperimentConfig],
        base_dir=".",
        out_dir=None,
    ) -> Dict[str, Any]:
        """Execute the pipeline and write report.json, trace.csv and plots.

        Args:
            config: Validated experiment configuration
            base_dir: Directory relative paths in config are resolved against
            out_dir: Output directory, config.output_dir if omitted

        Returns:
            Result dictionary with 'success', 'report', 'files' and 'message'

        Raises:
            ConfigError: If the config cannot be realized
            OSError: If the output directory is not writable
        """
        if out_dir is None:
            out_dir = config.output_dir if config is not None else "mplab_out"
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        logger.info("running %s into %s", self.command, out)

        report = self.run(config, Path(base_dir), out)
        for path in emit_plots(report, out):
            report.files.append(path.relative_to(out).as_posix())
        report.files.sort()
        report.success = report.all_converged() and report.all_invariants_passed()
        write_json(out / "report.json", report.model_dump(mode="json"))

        if report.success:
            return {
                'success': True,
                'report': report,
                'files': list(report.files),
                'message': f"{self.command} finished on {len(report.grids)} grid(s)",
            }
        failed = [row.name for row in report.invariants if not row.passed]
        unconverged = [g.n for g in report.grids if not g.converged]
        return {
            'success': False,
            'report': report,
            'files': list(report.files),
            'error': f"{self.command}: non-converged grids {unconverged}, failed rows {failed}",
        }

    def new_report(self, config: Optional[ExperimentConfig]) -> StudyReport:
        return StudyReport(
            provenance=Provenance(
                command=self.command, config_hash=config_hash(config), version=__version__
            )
        )

    def write_trace(self, out: Path, rows: List[Dict[str, Any]], report: StudyReport) -> None:
        rows = sorted(rows, key=lambda r: (str(r["scheme"]), r["n"], r["level"]))
        write_rows(out / "trace.csv", TRACE_COLUMNS, rows)
        report.files.append("trace.csv")

    @staticmethod
    def dump_kernels(
        out: Path, grid: Grid, indices: Iterable[int], profile: str, report: StudyReport
    ) -> None:
        """kernels/kernel_<grid n>_<index>.csv for every mollification index used on grid."""
        for n in indices:
            name = f"kernels/kernel_{grid.n}_{n}.csv"
            write_kernel(out / name, build_kernel(n, grid, profile, subcell=True))
            report.files.extend([name, name.replace(".csv", ".json")])


def mollification_schedule(config: ExperimentConfig, m: Measure, g: Grid) -> List[int]:
    """Configured mollification indices resolvable on g, or the default schedule.

    Raises:
        ConfigError: If none of the configured indices is resolvable on g
    """
    levels = config.mollification.levels
    if levels is None:
        return default_schedule(m, g, config.mollification.n0)
    usable = [n for n in levels if 1.0 / n >= 2.0 * g.h - 1e-12]
    if not usable:
        raise ConfigError(
            f"no index gives a kernel at least two cells wide on n={g.n}",
            key="mollification.levels",
        )
    return usable


def finite_or_none(value: float) -> Optional[float]:
    return value if math.isfinite(value) else None


def _default_config() -> ExperimentConfig:
    return ExperimentConfig.model_validate(
        {"nonlinearity": {"family": "zero"}, "measure": {}, "grids": [31]}
    )
