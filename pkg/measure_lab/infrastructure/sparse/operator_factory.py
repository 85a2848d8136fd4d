"""Sparse Operator Factory

Factory for assembling discrete operators with scipy.sparse.
Follows Factory pattern for clean dependency injection.
"""

from typing import Callable

import numpy as np
from scipy import sparse
from scipy.sparse import linalg as splinalg

from ...domain.value_objects.grid import Grid

Solver = Callable[[np.ndarray], np.ndarray]


class SparseOperatorFactory:
    """Factory for the 5-point Dirichlet Laplacian and its factorizations.

    Node (i, j) maps to row i·n + j, matching a C-order flatten of the
    value array.
    """

    @staticmethod
    def create_laplacian(grid: Grid) -> sparse.csr_matrix:
        """Assemble -Δ_h as kron(T, I) + kron(I, T) scaled by 1/h².

        Args:
            grid: Grid the operator acts on

        Returns:
            Symmetric positive definite CSR matrix
        """
        n = grid.n
        tridiagonal = sparse.diags([-1.0, 2.0, -1.0], [-1, 0, 1], shape=(n, n))
        identity = sparse.identity(n)
        matrix = sparse.kron(tridiagonal, identity) + sparse.kron(identity, tridiagonal)
        return (matrix / grid.h**2).tocsr()

    @staticmethod
    def create_shifted(laplacian: sparse.spmatrix, shift: np.ndarray) -> sparse.csc_matrix:
        """Add a diagonal to -Δ_h.

        Args:
            laplacian: Matrix of -Δ_h
            shift: Diagonal entries

        Returns:
            CSC matrix ready for a direct solve
        """
        return (laplacian + sparse.diags(np.asarray(shift, dtype=float))).tocsc()

    @staticmethod
    def create_factorization(matrix: sparse.spmatrix) -> Solver:
        """Factorize a sparse matrix once for repeated solves.

        Args:
            matrix: Square sparse matrix

        Returns:
            Callable mapping a right-hand side to the solution
        """
        return splinalg.factorized(sparse.csc_matrix(matrix))

    @staticmethod
    def solve_once(matrix: sparse.spmatrix, rhs: np.ndarray) -> np.ndarray:
        return np.asarray(splinalg.spsolve(sparse.csc_matrix(matrix), rhs), dtype=float)
