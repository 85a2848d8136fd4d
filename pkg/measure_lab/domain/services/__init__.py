"""Numerical services of the lab.

grid_core, measure_model, mollify, green_ops, semilinear, reduction and
extrapolation, in dependency order.
"""

from .green_ops import GreenOperator
from .reduction import ReductionEngine, ReductionOptions, extract_measure
from .semilinear import SemilinearSolver, SolverOptions

__all__ = [
    'GreenOperator',
    'ReductionEngine',
    'ReductionOptions',
    'SemilinearSolver',
    'SolverOptions',
    'extract_measure',
]
