import json
import math

import numpy as np
import pytest

from measure_lab.domain.services.mollify import build_kernel
from measure_lab.domain.value_objects.grid import Grid, GridFunction
from measure_lab.domain.value_objects.measure import Atom, Measure
from measure_lab.infrastructure.io import LinePlot, emit_plots
from measure_lab.infrastructure.io.persistence import (
    dumps,
    read_grid_function,
    write_grid_function,
    write_kernel,
    write_measure,
    write_rows,
)
from measure_lab.shared.models import (
    AdmissibilityModel,
    GridSummary,
    LevelRow,
    Provenance,
    StudyReport,
)


def test_grid_function_file_keeps_values_and_header(tmp_path):
    grid = Grid(0.0, 2.0, 0.0, 2.0, 7)
    u = GridFunction.from_callable(grid, lambda X, Y: np.exp(X) * Y / 3.0)
    path = write_grid_function(tmp_path / "u.csv", u)
    values, header = read_grid_function(path)
    assert np.array_equal(values, u.values)
    assert Grid.from_dict(header) == grid
    assert sorted(p.name for p in tmp_path.iterdir()) == ["u.csv", "u.json"]


def test_read_grid_function_rejects_non_square(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("1,2,3\n4,5,6\n", encoding="utf-8")
    with pytest.raises(ValueError):
        read_grid_function(path)


def test_dumps_is_canonical():
    text = dumps({"b": float("nan"), "a": np.float64(1.5), "c": (1, math.inf)})
    assert json.loads(text) == {"a": 1.5, "b": None, "c": [1, None]}
    assert text.index('"a"') < text.index('"b"') < text.index('"c"')
    assert text.endswith("\n")


def test_write_rows_leaves_missing_cells_empty(tmp_path):
    path = write_rows(
        tmp_path / "trace.csv",
        ["n", "level", "l1_increment"],
        [{"n": 31, "level": 1.0, "l1_increment": None}, {"n": 31, "level": 2.0}],
    )
    assert path.read_text(encoding="utf-8").splitlines() == [
        "n,level,l1_increment",
        "31,1,",
        "31,2,",
    ]


def test_measure_and_kernel_files(tmp_path):
    grid = Grid.unit_square(7)
    m = Measure(GridFunction.constant(grid, 0.5), (Atom(0.5, 0.5, 2.0),))
    data = json.loads(write_measure(tmp_path / "m.json", m).read_text(encoding="utf-8"))
    assert data["atoms"] == [{"x": 0.5, "y": 0.5, "mass": 2.0}]
    assert data["grid"]["n"] == 7
    kernel = build_kernel(2, Grid.unit_square(15))
    write_kernel(tmp_path / "k.csv", kernel)
    weights, header = read_grid_function(tmp_path / "k.csv")
    assert weights.shape == kernel.weights.shape
    assert header is not None


def test_figure_drops_points_it_cannot_draw():
    figure = LinePlot("t", "x", "y", log_x=True, log_y=True)
    figure.add_series("s", [1.0, 2.0, 0.0, 4.0, 5.0], [0.0, 1e-3, 1.0, math.nan, None])
    assert len(figure.series) == 1
    assert figure.series[0].xs == [2.0]
    figure.add_series("empty", [1.0], [-1.0])
    assert len(figure.series) == 1


def test_empty_figure_renders_placeholder():
    svg = LinePlot("nothing", "x", "y").render()
    assert "<svg" in svg
    assert "no data" in svg


def test_figure_render_is_deterministic():
    def build():
        figure = LinePlot("a < b", "h", "mass", log_x=True)
        figure.add_series("truncation", [0.1, 0.01], [1.0, 1.1])
        figure.annotate("fit")
        return figure.render()

    assert build() == build()
    assert "a &lt; b" in build()
    assert "dc:date" not in build()


def report_with_ladder():
    levels = [
        LevelRow(level=1.0, l1=1.0, linf=1.0, w1q=1.0, newton_iters=3),
        LevelRow(level=2.0, l1_increment=1e-3, l1=1.0, linf=1.0, w1q=1.0, newton_iters=1),
        LevelRow(level=4.0, l1_increment=1e-6, l1=1.0, linf=1.0, w1q=1.0, newton_iters=0),
    ]
    summary = GridSummary(
        n=31, h=1.0 / 32, scheme="truncation", converged=True, levels=levels, atom_masses=[1.0]
    )
    return StudyReport(
        provenance=Provenance(command="reduce", config_hash="0" * 64, version="1.0.0"),
        grids=[summary],
    )


def test_emit_plots_writes_only_figures_with_data(tmp_path):
    written = emit_plots(report_with_ladder(), tmp_path)
    names = sorted(p.name for p in written)
    assert names == ["atom_mass.svg", "increments.svg"]
    assert all((tmp_path / "plots" / name).is_file() for name in names)
    assert not list((tmp_path / "plots").glob("*.tmp"))


def test_emit_plots_with_admissibility(tmp_path):
    report = report_with_ladder()
    report.admissibility = AdmissibilityModel(
        ns=[15, 31, 63],
        hs=[1 / 16, 1 / 32, 1 / 64],
        integrals=[1.0, 1.5, 2.0],
        growth_exponent=0.4,
        relative_increments=[0.33, 0.25],
        verdict="not_admissible",
        cauchy_tol=0.02,
        divergence_threshold=0.1,
    )
    names = {p.name for p in emit_plots(report, tmp_path)}
    assert "admissibility.svg" in names
    assert "not_admissible" in (tmp_path / "plots" / "admissibility.svg").read_text()
