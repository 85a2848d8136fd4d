"""Measure Value Objects

Signed bounded measures represented as a nodal density (the diffuse part)
plus a finite list of atoms (the concentrated part).
"""

import math
from dataclasses import dataclass
from typing import Dict, Iterable, List, Tuple

import numpy as np

from ..exceptions import GridMismatchError
from .grid import Grid, GridFunction


@dataclass(frozen=True)
class Atom:
    """Point mass at (x, y)."""

    x: float
    y: float
    mass: float

    def __post_init__(self) -> None:
        """Validate atom after initialization."""
        if not all(math.isfinite(v) for v in (self.x, self.y, self.mass)):
            raise ValueError(f"atom fields must be finite, got {self}")

    @property
    def point(self) -> Tuple[float, float]:
        return (self.x, self.y)

    def scaled(self, factor: float) -> "Atom":
        return Atom(self.x, self.y, factor * self.mass)

    def to_dict(self) -> dict:
        return {"x": self.x, "y": self.y, "mass": self.mass}

    @classmethod
    def from_dict(cls, data: dict) -> "Atom":
        return cls(float(data["x"]), float(data["y"]), float(data["mass"]))


def merge_atoms(atoms: Iterable[Atom]) -> Tuple[Atom, ...]:
    """Sum masses of atoms sharing a point and drop zero atoms, keeping first-seen order."""
    masses: Dict[Tuple[float, float], float] = {}
    for atom in atoms:
        masses[atom.point] = masses.get(atom.point, 0.0) + atom.mass
    return tuple(Atom(x, y, mass) for (x, y), mass in masses.items() if mass != 0.0)


@dataclass(frozen=True, eq=False)
class Measure:
    """Signed measure μ = μ_d + μ_c on the grid's rectangle.

    Attributes:
        density: Diffuse part μ_d as mass per unit area at the nodes
        atoms: Concentrated part μ_c, atoms strictly inside D at distinct points
    """

    density: GridFunction
    atoms: Tuple[Atom, ...] = ()

    def __post_init__(self) -> None:
        """Validate atom placement after initialization."""
        atoms = tuple(self.atoms)
        grid = self.density.grid
        seen = set()
        for atom in atoms:
            if not grid.contains(atom.x, atom.y):
                raise ValueError(f"atom at {atom.point} is not strictly inside D")
            if atom.point in seen:
                raise ValueError(f"duplicate atom point {atom.point}")
            seen.add(atom.point)
        object.__setattr__(self, "atoms", atoms)

    @property
    def grid(self) -> Grid:
        return self.density.grid

    @classmethod
    def zero(cls, grid: Grid) -> "Measure":
        return cls(GridFunction.zeros(grid))

    @classmethod
    def from_atoms(cls, grid: Grid, atoms: Iterable[Atom]) -> "Measure":
        return cls(GridFunction.zeros(grid), merge_atoms(atoms))

    @classmethod
    def dirac(cls, grid: Grid, x: float, y: float, mass: float = 1.0) -> "Measure":
        return cls.from_atoms(grid, [Atom(x, y, mass)])

    def require_grid(self, grid: Grid) -> None:
        if self.grid != grid:
            raise GridMismatchError(f"measure on n={self.grid.n} used with grid n={grid.n}")

    def __add__(self, other: "Measure") -> "Measure":
        other.require_grid(self.grid)
        return Measure(self.density + other.density, merge_atoms(self.atoms + other.atoms))

    def __neg__(self) -> "Measure":
        return self * -1.0

    def __sub__(self, other: "Measure") -> "Measure":
        return self + (-other)

    def __mul__(self, scalar: float) -> "Measure":
        factor = float(scalar)
        return Measure(self.density * factor, merge_atoms(a.scaled(factor) for a in self.atoms))

    __rmul__ = __mul__

    @property
    def has_atoms(self) -> bool:
        return bool(self.atoms)

    def atom_masses(self) -> List[float]:
        return [atom.mass for atom in self.atoms]

    def atom_nodes(self) -> List[Tuple[int, int]]:
        return [self.grid.nearest_node(atom.x, atom.y) for atom in self.atoms]

    def is_nonnegative(self) -> bool:
        return bool(np.all(self.density.values >= 0.0)) and all(a.mass >= 0.0 for a in self.atoms)

    def is_nonpositive(self) -> bool:
        return bool(np.all(self.density.values <= 0.0)) and all(a.mass <= 0.0 for a in self.atoms)

    def is_zero(self) -> bool:
        return not self.atoms and not np.any(self.density.values)

    def to_dict(self) -> dict:
        """Convert to the measure JSON format with an inline nodal density."""
        return {
            "grid": self.grid.to_dict(),
            "density": self.density.values.tolist(),
            "atoms": [atom.to_dict() for atom in self.atoms],
        }
