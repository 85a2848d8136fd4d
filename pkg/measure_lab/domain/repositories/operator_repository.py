"""Operator Repository Interface

Abstract access to the discrete Dirichlet Laplacian and its solves.
Follows the Repository pattern: the sparse backend lives in the
infrastructure layer.
"""

from abc import ABC, abstractmethod

import numpy as np
from scipy import sparse

from ..value_objects.grid import Grid


class OperatorRepository(ABC):
    """Abstract base class for discrete operator providers.

    Vectors are C-order flattenings of n×n node arrays.
    """

    @abstractmethod
    def laplacian(self, grid: Grid) -> sparse.csr_matrix:
        """Get the matrix of -Δ_h with homogeneous Dirichlet data.

        Args:
            grid: Grid the operator acts on

        Returns:
            Sparse n²×n² matrix
        """
        pass

    @abstractmethod
    def solve(self, grid: Grid, rhs: np.ndarray) -> np.ndarray:
        """Solve -Δ_h u = rhs.

        Args:
            grid: Grid the system lives on
            rhs: Flattened right-hand side of length n²

        Returns:
            Flattened solution

        Raises:
            LinearSolveError: If the solve fails or misses its residual target
        """
        pass

    @abstractmethod
    def solve_shifted(self, grid: Grid, shift: np.ndarray, rhs: np.ndarray) -> np.ndarray:
        """Solve (-Δ_h + diag(shift)) u = rhs for a nonnegative shift.

        Args:
            grid: Grid the system lives on
            shift: Flattened nonnegative diagonal
            rhs: Flattened right-hand side

        Returns:
            Flattened solution

        Raises:
            LinearSolveError: If the solve fails
        """
        pass

    @abstractmethod
    def clear(self) -> None:
        """Drop every cached operator."""
        pass
