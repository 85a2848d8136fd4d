"""Lab Components

Components for the semilinear measure-data pipelines:
- Solve, Reduced Measure
- Good Measure Projection, Admissibility Check
"""

from .solve import SolveComponent
from .reduce import ReduceComponent
from .project import ProjectComponent
from .admissible import AdmissibleComponent

__all__ = [
    "SolveComponent",
    "ReduceComponent",
    "ProjectComponent",
    "AdmissibleComponent",
]
