"""Grid Value Objects

Uniform square-cell grid over a rectangle and the fields that live on it.
"""

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Tuple

import numpy as np

from ..exceptions import GridMismatchError

Bounds = Tuple[float, float, float, float]

# Relative tolerance for the square-cell condition.
_CELL_RTOL = 1e-12


@dataclass(frozen=True)
class Grid:
    """Uniform n×n interior grid on [x_min, x_max] × [y_min, y_max].

    Interior node (i, j), 1 ≤ i, j ≤ n, sits at (x_min + i·h, y_min + j·h).
    Arrays store node (i, j) at index [i-1, j-1], first axis along x.
    Boundary nodes are implicit and carry the value 0.

    Attributes:
        x_min: Left edge of the rectangle
        x_max: Right edge of the rectangle
        y_min: Bottom edge of the rectangle
        y_max: Top edge of the rectangle
        n: Interior nodes per axis
    """

    x_min: float
    x_max: float
    y_min: float
    y_max: float
    n: int

    def __post_init__(self) -> None:
        """Validate grid geometry after initialization."""
        if int(self.n) != self.n or self.n < 3:
            raise ValueError(f"n must be an integer >= 3, got {self.n}")
        if not self.x_max > self.x_min:
            raise ValueError(f"x_max ({self.x_max}) must exceed x_min ({self.x_min})")
        if not self.y_max > self.y_min:
            raise ValueError(f"y_max ({self.y_max}) must exceed y_min ({self.y_min})")
        hx = (self.x_max - self.x_min) / (self.n + 1)
        hy = (self.y_max - self.y_min) / (self.n + 1)
        if not math.isclose(hx, hy, rel_tol=_CELL_RTOL):
            raise ValueError(f"cells are not square: hx={hx!r}, hy={hy!r}")

    @property
    def h(self) -> float:
        """Grid spacing."""
        return (self.x_max - self.x_min) / (self.n + 1)

    @property
    def bounds(self) -> Bounds:
        return (self.x_min, self.x_max, self.y_min, self.y_max)

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.n, self.n)

    @property
    def diameter(self) -> float:
        return math.hypot(self.x_max - self.x_min, self.y_max - self.y_min)

    def axes(self) -> Tuple[np.ndarray, np.ndarray]:
        """Interior node coordinates along x and along y."""
        k = np.arange(1, self.n + 1, dtype=float)
        return self.x_min + k * self.h, self.y_min + k * self.h

    def node_coordinates(self) -> Tuple[np.ndarray, np.ndarray]:
        """Meshgrid (indexing='ij') of interior node coordinates."""
        xs, ys = self.axes()
        return np.meshgrid(xs, ys, indexing="ij")

    def node_point(self, i: int, j: int) -> Tuple[float, float]:
        """Coordinates of the zero-based interior node (i, j)."""
        return self.x_min + (i + 1) * self.h, self.y_min + (j + 1) * self.h

    def contains(self, x: float, y: float) -> bool:
        """True if (x, y) lies strictly inside the rectangle."""
        return self.x_min < x < self.x_max and self.y_min < y < self.y_max

    def distance_to_boundary(self, x: float, y: float) -> float:
        return min(x - self.x_min, self.x_max - x, y - self.y_min, self.y_max - y)

    def boundary_distance_field(self) -> np.ndarray:
        """Distance of every interior node to the rectangle boundary."""
        X, Y = self.node_coordinates()
        return np.minimum.reduce([X - self.x_min, self.x_max - X, Y - self.y_min, self.y_max - Y])

    def nearest_node(self, x: float, y: float) -> Tuple[int, int]:
        """Zero-based index of the interior node nearest to (x, y).

        Ties are broken toward the lower index; points in the boundary
        layer snap to the first or last interior node.
        """
        return self._nearest_index(x, self.x_min), self._nearest_index(y, self.y_min)

    def _nearest_index(self, coordinate: float, origin: float) -> int:
        t = (coordinate - origin) / self.h
        k = math.floor(t)
        if t - k > 0.5 + 1e-9:
            k += 1
        return min(max(k, 1), self.n) - 1

    def refine(self) -> "Grid":
        """Grid with halved spacing over the same rectangle."""
        return Grid(self.x_min, self.x_max, self.y_min, self.y_max, 2 * self.n + 1)

    def to_dict(self) -> dict:
        """Convert to the JSON header format."""
        return {
            "bounds": [self.x_min, self.x_max, self.y_min, self.y_max],
            "n": self.n,
            "h": self.h,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Grid":
        """Create from the JSON header format."""
        x_min, x_max, y_min, y_max = (float(v) for v in data["bounds"])
        return cls(x_min, x_max, y_min, y_max, int(data["n"]))

    @classmethod
    def unit_square(cls, n: int) -> "Grid":
        return cls(0.0, 1.0, 0.0, 1.0, n)


class Norms(NamedTuple):
    """Discrete L¹, L∞ and W^{1,q} norms of a grid function."""

    l1: float
    linf: float
    w1q: float


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Real values on the interior nodes of a grid.

    The value array is copied and frozen on construction.

    Attributes:
        grid: Grid the values live on
        values: n×n array, node (i, j) at [i-1, j-1]
    """

    grid: Grid
    values: np.ndarray

    def __post_init__(self) -> None:
        """Validate shape and finiteness, then freeze the array."""
        values = np.array(self.values, dtype=float, copy=True)
        if values.shape != self.grid.shape:
            raise ValueError(f"values have shape {values.shape}, grid needs {self.grid.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("grid function values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def zeros(cls, grid: Grid) -> "GridFunction":
        return cls(grid, np.zeros(grid.shape))

    @classmethod
    def constant(cls, grid: Grid, value: float) -> "GridFunction":
        return cls(grid, np.full(grid.shape, float(value)))

    @classmethod
    def from_callable(
        cls, grid: Grid, func: Callable[[np.ndarray, np.ndarray], np.ndarray]
    ) -> "GridFunction":
        """Sample func(x, y) at the interior nodes."""
        X, Y = grid.node_coordinates()
        return cls(grid, np.broadcast_to(np.asarray(func(X, Y), dtype=float), grid.shape))

    def require_grid(self, grid: Grid) -> None:
        """Raise GridMismatchError unless this field lives on grid."""
        if self.grid != grid:
            raise GridMismatchError(f"field on n={self.grid.n} used with grid n={grid.n}")

    def with_values(self, values: np.ndarray) -> "GridFunction":
        return GridFunction(self.grid, values)

    def _other_values(self, other: "GridFunction") -> np.ndarray:
        other.require_grid(self.grid)
        return other.values

    def __add__(self, other: "GridFunction") -> "GridFunction":
        return self.with_values(self.values + self._other_values(other))

    def __sub__(self, other: "GridFunction") -> "GridFunction":
        return self.with_values(self.values - self._other_values(other))

    def __neg__(self) -> "GridFunction":
        return self.with_values(-self.values)

    def __mul__(self, scalar: float) -> "GridFunction":
        return self.with_values(float(scalar) * self.values)

    __rmul__ = __mul__

    def l1_norm(self) -> float:
        return float(self.grid.h**2 * np.abs(self.values).sum())

    def linf_norm(self) -> float:
        return float(np.abs(self.values).max())

    def w1q_norm(self, q: float) -> float:
        """Discrete W^{1,q} norm with forward differences over the zero-padded field."""
        if not 1.0 <= q < 2.0:
            raise ValueError(f"q must lie in [1, 2), got {q}")
        h = self.grid.h
        padded = np.pad(self.values, 1)
        dx = np.diff(padded[:, 1:-1], axis=0) / h
        dy = np.diff(padded[1:-1, :], axis=1) / h
        total = (np.abs(dx) ** q).sum() + (np.abs(dy) ** q).sum() + (np.abs(self.values) ** q).sum()
        return float((h**2 * total) ** (1.0 / q))

    def max_abs_difference(self, other: "GridFunction") -> float:
        return float(np.abs(self.values - self._other_values(other)).max())
