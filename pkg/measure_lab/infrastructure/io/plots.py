"""SVG Plots

Line plots of study reports rendered with matplotlib. Output depends only on
the report contents: no date metadata, fixed hash salt, text kept as text.
"""

import io
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import matplotlib

matplotlib.use("Agg")

from matplotlib.figure import Figure  # noqa: E402

from ...shared.models import StudyReport  # noqa: E402
from .persistence import atomic_write_text  # noqa: E402

logger = logging.getLogger(__name__)

FIGSIZE = (6.4, 4.2)
RC = {"svg.hashsalt": "measure_lab", "svg.fonttype": "none", "font.size": 10}


@dataclass
class Series:
    name: str
    xs: List[float]
    ys: List[float]


@dataclass
class LinePlot:
    """Line plot with optional log axes."""

    title: str
    x_label: str
    y_label: str
    log_x: bool = False
    log_y: bool = False
    series: List[Series] = field(default_factory=list)
    notes: List[str] = field(default_factory=list)

    def add_series(self, name: str, xs: Sequence[float], ys: Sequence[float]) -> None:
        """Add a curve; points that cannot be drawn on the axes are dropped."""
        points = [
            (float(x), float(y))
            for x, y in zip(xs, ys)
            if x is not None and y is not None and self._drawable(float(x), float(y))
        ]
        if points:
            self.series.append(Series(name, [p[0] for p in points], [p[1] for p in points]))

    def annotate(self, text: str) -> None:
        self.notes.append(text)

    def _drawable(self, x: float, y: float) -> bool:
        if not (math.isfinite(x) and math.isfinite(y)):
            return False
        return (x > 0 or not self.log_x) and (y > 0 or not self.log_y)

    def figure(self) -> Figure:
        fig = Figure(figsize=FIGSIZE)
        ax = fig.add_subplot()
        ax.set_title(self.title)
        ax.set_xlabel(self.x_label)
        ax.set_ylabel(self.y_label)
        if not self.series:
            ax.text(0.5, 0.5, "no data", color="gray", ha="center", transform=ax.transAxes)
        for s in self.series:
            ax.plot(s.xs, s.ys, "o-", linewidth=1.5, markersize=4, label=s.name)
        if self.series:
            if self.log_x:
                ax.set_xscale("log")
            if self.log_y:
                ax.set_yscale("log")
            ax.legend(loc="best")
        for index, note in enumerate(self.notes):
            ax.text(0.02, 0.95 - 0.06 * index, note, transform=ax.transAxes, va="top")
        ax.grid(True, alpha=0.3, linestyle="--")
        fig.tight_layout()
        return fig

    def render(self) -> str:
        """SVG document as text."""
        buffer = io.StringIO()
        with matplotlib.rc_context(RC):
            self.figure().savefig(buffer, format="svg", metadata={"Date": None})
        return buffer.getvalue()

    def save(self, path) -> Path:
        return atomic_write_text(path, self.render())


def _increments_figure(report: StudyReport) -> LinePlot:
    figure = LinePlot("L1 increment per ladder level", "level", "L1 increment", True, True)
    for summary in report.grids:
        xs = [row.level for row in summary.levels]
        ys = [row.l1_increment for row in summary.levels]
        figure.add_series(f"{summary.scheme or 'solve'} n={summary.n}", xs, ys)
    return figure


def _atom_mass_figure(report: StudyReport) -> Optional[LinePlot]:
    by_scheme: Dict[str, Tuple[List[float], List[float]]] = {}
    for summary in report.grids:
        if summary.atom_masses:
            hs, masses = by_scheme.setdefault(summary.scheme or "solve", ([], []))
            hs.append(summary.h)
            masses.append(sum(summary.atom_masses))
    if not by_scheme:
        return None
    figure = LinePlot("Extracted atom mass vs h", "h", "atom mass", log_x=True)
    for scheme, (hs, masses) in sorted(by_scheme.items()):
        figure.add_series(scheme, hs, masses)
    for name, fit in sorted(report.extrapolations.items()):
        figure.annotate(f"{name}: {fit.value:.5g} +/- {fit.error:.2g} (beta={fit.beta:.2f})")
    return figure


def _admissibility_figure(report: StudyReport) -> Optional[LinePlot]:
    study = report.admissibility
    if study is None:
        return None
    figure = LinePlot("Admissibility integral I_h vs h", "h", "I_h", True, True)
    figure.add_series("I_h", study.hs, study.integrals)
    figure.annotate(f"slope {study.growth_exponent:.3f}: {study.verdict}")
    return figure


def _schemes_figure(report: StudyReport) -> Optional[LinePlot]:
    schemes = {s.scheme for s in report.grids if s.scheme}
    if not {"truncation", "mollification"} <= schemes:
        return None
    figure = LinePlot("Convergence of both schemes", "rung", "L1 increment", log_y=True)
    for summary in report.grids:
        ys = [row.l1_increment for row in summary.levels]
        figure.add_series(f"{summary.scheme} n={summary.n}", list(range(len(ys))), ys)
    for row in report.scheme_gaps:
        figure.annotate(f"n={row.n}: relative L1 gap {row.relative_gap:.3g}")
    return figure


def _apriori_figure(report: StudyReport) -> Optional[LinePlot]:
    if not report.apriori:
        return None
    figure = LinePlot("A priori bound ratio", "grid n", "lhs / rhs", log_x=True)
    by_index: Dict[str, Tuple[List[float], List[float]]] = {}
    for row in report.apriori:
        label = "plain" if row.mollification_index is None else f"rho_{row.mollification_index}"
        xs, ys = by_index.setdefault(label, ([], []))
        xs.append(row.n)
        ys.append(row.ratio)
    for label, (xs, ys) in sorted(by_index.items()):
        figure.add_series(label, xs, ys)
    return figure


def emit_plots(report: StudyReport, out_dir) -> List[Path]:
    """Write the report's SVG plots under out_dir/plots.

    Raises:
        OSError: If the output directory is not writable
    """
    plots_dir = Path(out_dir) / "plots"
    plots_dir.mkdir(parents=True, exist_ok=True)
    figures = {
        "increments.svg": _increments_figure(report),
        "atom_mass.svg": _atom_mass_figure(report),
        "admissibility.svg": _admissibility_figure(report),
        "schemes.svg": _schemes_figure(report),
        "apriori.svg": _apriori_figure(report),
    }
    written = []
    for name, figure in figures.items():
        if figure is not None:
            written.append(figure.save(plots_dir / name))
    return written
