"""Operator repository implementations."""

from .factorization_repository import FactorizationRepository

__all__ = ['FactorizationRepository']
