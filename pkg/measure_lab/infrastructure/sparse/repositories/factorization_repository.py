"""Factorization Repository Implementation

Per-grid cache of -Δ_h and its sparse LU factorization.
Implements the OperatorRepository interface from domain layer.
"""

import logging
import threading
from collections import OrderedDict
from typing import Callable, Dict, Tuple

import numpy as np
from scipy import sparse

from ....domain.exceptions import LinearSolveError
from ....domain.repositories.operator_repository import OperatorRepository
from ....domain.value_objects.grid import Grid
from ..operator_factory import SparseOperatorFactory

logger = logging.getLogger(__name__)

# Relative residual a Poisson solve must reach.
POISSON_RTOL = 1e-10


class FactorizationRepository(OperatorRepository):
    """Thread-safe repository of cached Laplacians and factorizations.

    Factorizations are built once per Grid; the oldest entry is evicted
    once more than max_entries grids are cached.
    """

    def __init__(self, operator_factory: SparseOperatorFactory, max_entries: int = 8):
        """Initialize repository with operator factory.

        Args:
            operator_factory: Factory assembling matrices and factorizations
            max_entries: Number of grids kept in the cache
        """
        if max_entries < 1:
            raise ValueError("max_entries must be >= 1")
        self._operator_factory = operator_factory
        self._max_entries = max_entries
        self._cache: "OrderedDict[Grid, Tuple[sparse.csr_matrix, Callable]]" = OrderedDict()
        self._lock = threading.Lock()
        self.stats: Dict[str, int] = {"hits": 0, "misses": 0}

    def _entry(self, grid: Grid) -> Tuple[sparse.csr_matrix, Callable]:
        with self._lock:
            entry = self._cache.get(grid)
            if entry is not None:
                self.stats["hits"] += 1
                self._cache.move_to_end(grid)
                return entry
            self.stats["misses"] += 1
            logger.debug("factorizing -Δ_h for n=%d", grid.n)
            laplacian = self._operator_factory.create_laplacian(grid)
            entry = (laplacian, self._operator_factory.create_factorization(laplacian))
            self._cache[grid] = entry
            while len(self._cache) > self._max_entries:
                self._cache.popitem(last=False)
            return entry

    def laplacian(self, grid: Grid) -> sparse.csr_matrix:
        """Get the cached matrix of -Δ_h."""
        return self._entry(grid)[0]

    def solve(self, grid: Grid, rhs: np.ndarray) -> np.ndarray:
        """Solve -Δ_h u = rhs with the cached factorization.

        Raises:
            LinearSolveError: If the relative residual exceeds POISSON_RTOL
        """
        laplacian, solver = self._entry(grid)
        rhs = np.asarray(rhs, dtype=float).ravel()
        rhs_norm = float(np.linalg.norm(rhs))
        if rhs_norm == 0.0:
            return np.zeros_like(rhs)
        solution = np.asarray(solver(rhs), dtype=float)
        residual = float(np.linalg.norm(laplacian @ solution - rhs)) / rhs_norm
        if not np.isfinite(residual) or residual > POISSON_RTOL:
            raise LinearSolveError(
                f"Poisson solve on n={grid.n} missed its target (relative residual {residual:.3e})",
                residual=residual,
            )
        return solution

    def solve_shifted(self, grid: Grid, shift: np.ndarray, rhs: np.ndarray) -> np.ndarray:
        """Solve (-Δ_h + diag(shift)) u = rhs with a fresh factorization.

        Raises:
            LinearSolveError: If the shift is invalid or the solution is not finite
        """
        shift = np.asarray(shift, dtype=float).ravel()
        if not np.all(np.isfinite(shift)) or np.any(shift < 0.0):
            raise LinearSolveError("shift must be finite and nonnegative")
        matrix = self._operator_factory.create_shifted(self.laplacian(grid), shift)
        solution = self._operator_factory.solve_once(matrix, np.asarray(rhs, dtype=float).ravel())
        if not np.all(np.isfinite(solution)):
            raise LinearSolveError(f"shifted solve on n={grid.n} produced non-finite values")
        return solution

    def clear(self) -> None:
        """Drop every cached operator."""
        with self._lock:
            self._cache.clear()

    def __len__(self) -> int:
        with self._lock:
            return len(self._cache)
