"""Application Use Cases

One use case per mplab pipeline.
"""

from .admissible_use_case import AdmissibleUseCase
from .project_use_case import ProjectUseCase
from .reduce_use_case import ReduceUseCase
from .solve_use_case import SolveUseCase
from .study_use_case import LabServices, StudyUseCase
from .sweep_use_case import SweepUseCase
from .verify_use_case import CORPUS, VerifyUseCase

USE_CASES = {
    'solve': SolveUseCase,
    'reduce': ReduceUseCase,
    'project': ProjectUseCase,
    'admissible': AdmissibleUseCase,
    'sweep': SweepUseCase,
    'verify': VerifyUseCase,
}

__all__ = [
    'AdmissibleUseCase',
    'CORPUS',
    'LabServices',
    'ProjectUseCase',
    'ReduceUseCase',
    'SolveUseCase',
    'StudyUseCase',
    'SweepUseCase',
    'USE_CASES',
    'VerifyUseCase',
]
