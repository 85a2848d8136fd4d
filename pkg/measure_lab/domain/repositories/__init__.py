"""Repository Interfaces

Abstract ports implemented in the infrastructure layer.
"""

from .operator_repository import OperatorRepository

__all__ = ['OperatorRepository']
