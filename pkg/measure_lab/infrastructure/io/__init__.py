"""File formats: expressions, config loading, CSV/JSON persistence and matplotlib SVG plots."""

from .expressions import compile_expression
from .persistence import read_grid_function, write_grid_function, write_json, write_rows
from .plots import LinePlot, emit_plots
from .spec_loader import (
    build_ladder,
    build_measure_factory,
    build_nonlinearity,
    load_config,
    load_measure_spec,
    measure_factory_for,
    parse_config,
)

__all__ = [
    'LinePlot',
    'build_ladder',
    'build_measure_factory',
    'build_nonlinearity',
    'compile_expression',
    'emit_plots',
    'load_config',
    'load_measure_spec',
    'measure_factory_for',
    'parse_config',
    'read_grid_function',
    'write_grid_function',
    'write_json',
    'write_rows',
]
