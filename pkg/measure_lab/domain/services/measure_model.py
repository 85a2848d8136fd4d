"""Measure model: decompositions, norms and grid realization of measures."""

import logging
from typing import Dict, Sequence, Tuple

import numpy as np

from ..exceptions import GridMismatchError, PreconditionError
from ..value_objects.grid import Grid, GridFunction
from ..value_objects.measure import Atom, Measure

logger = logging.getLogger(__name__)


def jordan_decompose(m: Measure) -> Tuple[Measure, Measure]:
    """Split m into (μ⁺, μ⁻), both nonnegative, with m = μ⁺ - μ⁻."""
    density = m.density.values
    pos = Measure(
        m.density.with_values(np.maximum(density, 0.0)),
        tuple(a for a in m.atoms if a.mass > 0.0),
    )
    neg = Measure(
        m.density.with_values(np.maximum(-density, 0.0)),
        tuple(Atom(a.x, a.y, -a.mass) for a in m.atoms if a.mass < 0.0),
    )
    return pos, neg


def split_diffuse_concentrated(m: Measure) -> Tuple[Measure, Measure]:
    """Split m into (μ_d, μ_c): the density part and the atom part."""
    return Measure(m.density), Measure(GridFunction.zeros(m.grid), m.atoms)


def total_variation(m: Measure) -> float:
    """|μ|(D) = h²·Σ|density| + Σ|mass|."""
    return m.density.l1_norm() + float(sum(abs(a.mass) for a in m.atoms))


def discretize_rhs(m: Measure, g: Grid) -> GridFunction:
    """Realize m as nodal right-hand side μ_h on g.

    Each atom adds mass/h² at its nearest interior node.

    Raises:
        GridMismatchError: If m's density lives on another grid
        PreconditionError: If an atom is not strictly inside D
    """
    if m.grid != g:
        raise GridMismatchError(f"measure on n={m.grid.n} discretized on n={g.n}")
    values = np.array(m.density.values, dtype=float)
    for atom in m.atoms:
        if not g.contains(atom.x, atom.y):
            raise PreconditionError(f"atom at {atom.point} lies outside D")
        i, j = g.nearest_node(atom.x, atom.y)
        values[i, j] += atom.mass / g.h**2
    return GridFunction(g, values)


def _atom_node_mask(m: Measure) -> np.ndarray:
    mask = np.zeros(m.grid.shape, dtype=bool)
    for i, j in m.atom_nodes():
        mask[i, j] = True
    return mask


def mutually_singular(a: Measure, b: Measure) -> bool:
    """True iff the density supports, the atom sets and cross atom/density cells are disjoint."""
    b.require_grid(a.grid)
    a_support = a.density.values != 0.0
    b_support = b.density.values != 0.0
    if np.any(a_support & b_support):
        return False
    if {atom.point for atom in a.atoms} & {atom.point for atom in b.atoms}:
        return False
    if np.any(_atom_node_mask(a) & b_support) or np.any(_atom_node_mask(b) & a_support):
        return False
    return True


def restrict_to_interior(m: Measure, margin: float) -> Measure:
    """Restriction of m to {x in D: dist(x, ∂D) >= margin}."""
    if margin < 0.0:
        raise PreconditionError(f"margin must be >= 0, got {margin}")
    keep = m.grid.boundary_distance_field() >= margin
    density = m.density.with_values(np.where(keep, m.density.values, 0.0))
    atoms = tuple(a for a in m.atoms if m.grid.distance_to_boundary(a.x, a.y) >= margin)
    dropped = len(m.atoms) - len(atoms)
    if dropped:
        logger.debug("restrict_to_interior dropped %d atom(s) within %.4g of ∂D", dropped, margin)
    return Measure(density, atoms)


def order_violation(a: Measure, b: Measure) -> float:
    """Largest amount by which a exceeds b, nodewise on h²·μ_h and atomwise.

    Non-positive iff a <= b in the nodewise/atomwise order.
    """
    b.require_grid(a.grid)
    h2 = a.grid.h**2
    worst = float(np.max(h2 * (a.density.values - b.density.values)))
    b_masses = {atom.point: atom.mass for atom in b.atoms}
    a_masses = {atom.point: atom.mass for atom in a.atoms}
    for point in set(a_masses) | set(b_masses):
        worst = max(worst, a_masses.get(point, 0.0) - b_masses.get(point, 0.0))
    return worst


def _masses_by_point(atoms: Sequence[Atom]) -> Dict[Tuple[float, float], float]:
    masses: Dict[Tuple[float, float], float] = {}
    for atom in atoms:
        masses[atom.point] = masses.get(atom.point, 0.0) + atom.mass
    return masses


def dominance_excess(a: Measure, b: Measure) -> float:
    """How far |a| exceeds |b|, summed node by node over the densities and atom by atom.

    Zero iff |a| <= |b| in the nodewise/atomwise order.
    """
    b.require_grid(a.grid)
    excess = np.maximum(np.abs(a.density.values) - np.abs(b.density.values), 0.0)
    total = a.grid.h**2 * float(excess.sum())
    b_masses = _masses_by_point(b.atoms)
    for point, mass in _masses_by_point(a.atoms).items():
        total += max(abs(mass) - abs(b_masses.get(point, 0.0)), 0.0)
    return total


def singular_support_distance(m: Measure) -> float:
    """Distance from the atoms (or the density support if there are none) to ∂D."""
    if m.atoms:
        return min(m.grid.distance_to_boundary(a.x, a.y) for a in m.atoms)
    support = m.density.values != 0.0
    if not np.any(support):
        return float("inf")
    return float(m.grid.boundary_distance_field()[support].min())


def realize(source, grid: Grid) -> Measure:
    """Realize a measure source on grid.

    A source is either a callable grid -> Measure or a Measure. A Measure
    is reused on its own grid and transferred elsewhere only if it has no
    density.

    Raises:
        PreconditionError: If a Measure with a density is asked for another grid
    """
    if isinstance(source, Measure):
        if source.grid == grid:
            return source
        if np.any(source.density.values):
            raise PreconditionError("a measure with a density cannot be moved to another grid")
        return Measure(GridFunction.zeros(grid), source.atoms)
    return source(grid)
