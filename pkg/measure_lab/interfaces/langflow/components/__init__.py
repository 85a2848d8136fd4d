"""Langflow Components

Langflow components for the measure lab, organized by category for discovery.
"""

from .lab import (
    SolveComponent,
    ReduceComponent,
    ProjectComponent,
    AdmissibleComponent,
)

__all__ = [
    "SolveComponent",
    "ReduceComponent",
    "ProjectComponent",
    "AdmissibleComponent",
]
