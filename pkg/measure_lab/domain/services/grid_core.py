"""Grid core: grid construction, the 5-point Laplacian and discrete norms."""

from typing import Sequence

import numpy as np

from ..value_objects.grid import Grid, GridFunction, Norms


def build_grid(bounds: Sequence[float], n: int) -> Grid:
    """Build the n×n interior grid on bounds = (x_min, x_max, y_min, y_max).

    Raises:
        ValueError: For n < 3, degenerate bounds or non-square cells
    """
    if len(bounds) != 4:
        raise ValueError(f"bounds must be (x_min, x_max, y_min, y_max), got {bounds!r}")
    x_min, x_max, y_min, y_max = (float(b) for b in bounds)
    return Grid(x_min, x_max, y_min, y_max, n)


def apply_stencil(values: np.ndarray, h: float) -> np.ndarray:
    """(4u_ij - u_{i±1,j} - u_{i,j±1})/h² with zero values off the grid."""
    padded = np.pad(np.asarray(values, dtype=float), 1)
    neighbours = padded[:-2, 1:-1] + padded[2:, 1:-1] + padded[1:-1, :-2] + padded[1:-1, 2:]
    return (4.0 * padded[1:-1, 1:-1] - neighbours) / h**2


def laplacian_apply(g: Grid, u: GridFunction) -> GridFunction:
    """Return -Δ_h u.

    Raises:
        GridMismatchError: If u does not live on g
    """
    u.require_grid(g)
    return GridFunction(g, apply_stencil(u.values, g.h))


def norms(u: GridFunction, q: float) -> Norms:
    """Discrete (L¹, L∞, W^{1,q}) norms of u for q in [1, 2)."""
    return Norms(u.l1_norm(), u.linf_norm(), u.w1q_norm(q))
