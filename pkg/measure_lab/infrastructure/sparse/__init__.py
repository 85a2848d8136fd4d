"""Sparse linear algebra backend."""

from .operator_factory import SparseOperatorFactory
from .repositories import FactorizationRepository

__all__ = ['FactorizationRepository', 'SparseOperatorFactory']
