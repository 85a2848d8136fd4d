"""Spec Loader

Turns validated configuration models into domain objects: nonlinearities,
grid-independent measure factories, and experiment configs read from disk.
"""

import json
import logging
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np
from pydantic import ValidationError
from scipy.interpolate import RegularGridInterpolator

from ...domain.exceptions import ConfigError
from ...domain.services.semilinear import U_LATTICE
from ...domain.value_objects.grid import Bounds, Grid, GridFunction
from ...domain.value_objects.measure import Atom, Measure, merge_atoms
from ...domain.value_objects.nonlinearity import Nonlinearity
from ...shared.models import (
    ConstantDensity,
    ExperimentConfig,
    ExpressionDensity,
    FileDensity,
    MeasureSpec,
    NonlinearitySpec,
)
from .expressions import compile_expression
from .persistence import read_grid_function

logger = logging.getLogger(__name__)

MeasureFactory = Callable[[Grid], Measure]


def _error_key(error: dict) -> str:
    return ".".join(str(part) for part in error.get("loc", ())) or "<root>"


def config_error_from_validation(e: ValidationError, prefix: str = "") -> ConfigError:
    """First pydantic error as a ConfigError naming the key path."""
    first = e.errors()[0]
    key = _error_key(first)
    return ConfigError(first.get("msg", str(e)), key=f"{prefix}{key}" if prefix else key)


def _read_json(path: Path) -> dict:
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError as e:
        raise ConfigError(f"file not found: {path}", key=str(path)) from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"invalid JSON at line {e.lineno}: {e.msg}", key=str(path)) from e


def load_config(path) -> ExperimentConfig:
    """Read and validate an experiment config; referenced files must exist.

    Raises:
        ConfigError: Naming the offending key path
    """
    path = Path(path)
    return parse_config(_read_json(path), path.parent)


def parse_config(data: dict, base: Path = Path(".")) -> ExperimentConfig:
    """Validate an in-memory config; relative file references resolve against base.

    Raises:
        ConfigError: Naming the offending key path
    """
    try:
        config = ExperimentConfig.model_validate(data)
    except ValidationError as e:
        raise config_error_from_validation(e) from e
    base = Path(base)
    if config.measure_file is not None:
        if not resolve_path(base, config.measure_file).is_file():
            raise ConfigError(f"file not found: {config.measure_file}", key="measure_file")
    if config.measure is not None:
        _check_density_file(config.measure, base, "measure.density.path")
    return config


def resolve_path(base: Path, value: str) -> Path:
    candidate = Path(value)
    return candidate if candidate.is_absolute() else base / candidate


def _check_density_file(spec: MeasureSpec, base: Path, key: str) -> None:
    if isinstance(spec.density, FileDensity):
        if not resolve_path(base, spec.density.path).is_file():
            raise ConfigError(f"file not found: {spec.density.path}", key=key)


def load_measure_spec(path) -> MeasureSpec:
    """Read a measure JSON file.

    Raises:
        ConfigError: For missing files or invalid content
    """
    path = Path(path)
    try:
        spec = MeasureSpec.model_validate(_read_json(path))
    except ValidationError as e:
        raise config_error_from_validation(e, prefix="measure_file.") from e
    _check_density_file(spec, path.parent, "measure_file.density.path")
    return spec


def _sample_bounds(bounds: Bounds, points: int = 9):
    x_min, x_max, y_min, y_max = bounds
    xs = np.linspace(x_min, x_max, points + 2)[1:-1]
    ys = np.linspace(y_min, y_max, points + 2)[1:-1]
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    return X.ravel(), Y.ravel()


def build_nonlinearity(spec: NonlinearitySpec, bounds: Optional[Bounds] = None) -> Nonlinearity:
    """Realize a NonlinearitySpec.

    Raises:
        ExpressionError: If expr or shift does not parse
    """
    if spec.family == "zero":
        f = Nonlinearity.zero()
    elif spec.family == "linear":
        f = Nonlinearity.linear(spec.c)
    elif spec.family == "power":
        f = Nonlinearity.power(spec.p)
    elif spec.family == "exp":
        f = Nonlinearity.exponential(spec.a)
    else:
        try:
            compiled = compile_expression(spec.expr or "", ("x", "y", "u"))
        except ConfigError as e:
            raise type(e)(str(e), key="nonlinearity.expr") from e
        derivative = compiled.derivative("u")
        f = Nonlinearity(f"expression:{spec.expr}", compiled, derivative, False)
        X, Y = _sample_bounds(bounds or (0.0, 1.0, 0.0, 1.0))
        nonpositive = U_LATTICE[U_LATTICE <= 0.0]
        table = f(X[:, None], Y[:, None], np.broadcast_to(nonpositive, (X.size, nonpositive.size)))
        if np.all(np.abs(table) <= 1e-12):
            f = Nonlinearity(f.name, compiled, derivative, True)
    if spec.shift:
        try:
            shift = compile_expression(spec.shift, ("x", "y"))
        except ConfigError as e:
            raise type(e)(str(e), key="nonlinearity.shift") from e
        f = f.shifted(shift, spec.shift)
    return f


def _resample(values: np.ndarray, source: Grid, target: Grid) -> np.ndarray:
    """Bilinear interpolation from source nodes (with zero boundary) to target nodes."""
    xs = np.linspace(source.x_min, source.x_max, source.n + 2)
    ys = np.linspace(source.y_min, source.y_max, source.n + 2)
    padded = np.pad(values, 1)
    interpolator = RegularGridInterpolator((xs, ys), padded, bounds_error=False, fill_value=0.0)
    X, Y = target.node_coordinates()
    return interpolator(np.stack([X.ravel(), Y.ravel()], axis=-1)).reshape(target.shape)


def _density_factory(spec, base: Path) -> Callable[[Grid], GridFunction]:
    if spec is None:
        return GridFunction.zeros
    if isinstance(spec, ConstantDensity):
        return lambda grid: GridFunction.constant(grid, spec.value)
    if isinstance(spec, ExpressionDensity):
        try:
            compiled = compile_expression(spec.expr, ("x", "y"))
        except ConfigError as e:
            raise type(e)(str(e), key="measure.density.expr") from e
        return lambda grid: GridFunction.from_callable(grid, compiled)
    path = resolve_path(base, spec.path)
    values, header = read_grid_function(path)

    def from_file(grid: Grid) -> GridFunction:
        n = values.shape[0]
        source = Grid.from_dict(header) if header else Grid(*grid.bounds, n)
        if source == grid:
            return GridFunction(grid, values)
        logger.debug("resampling density %s from n=%d to n=%d", path.name, n, grid.n)
        return GridFunction(grid, _resample(values, source, grid))

    return from_file


def build_measure_factory(spec: MeasureSpec, base_dir=".") -> MeasureFactory:
    """Grid-independent measure: realized on any grid on demand.

    Raises:
        ConfigError: For unparsable density expressions
    """
    density = _density_factory(spec.density, Path(base_dir))
    atoms = tuple(Atom(a.x, a.y, a.mass) for a in spec.atoms)

    def realize(grid: Grid) -> Measure:
        for atom in atoms:
            if not grid.contains(atom.x, atom.y):
                raise ConfigError(f"atom at {atom.point} is not strictly inside D", key="atoms")
        return Measure(density(grid), merge_atoms(atoms))

    return realize


def measure_factory_for(config: ExperimentConfig, base_dir=".") -> MeasureFactory:
    """Measure factory for a config's inline measure or measure_file."""
    base = Path(base_dir)
    if config.measure is not None:
        return build_measure_factory(config.measure, base)
    path = resolve_path(base, config.measure_file)
    return build_measure_factory(load_measure_spec(path), path.parent)


def build_ladder(config: ExperimentConfig, grids: Optional[Sequence[int]] = None):
    """Grids of the config's ladder over its domain.

    Raises:
        ConfigError: If the domain does not give square cells
    """
    bounds = config.domain.bounds()
    try:
        return [Grid(*bounds, n) for n in (grids or config.grids)]
    except ValueError as e:
        raise ConfigError(str(e), key="domain") from e
