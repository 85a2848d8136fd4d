"""Value Objects

Immutable objects that represent the lab's grids, fields, measures and kernels.
"""

from .grid import Bounds, Grid, GridFunction, Norms
from .measure import Atom, Measure, merge_atoms
from .mollifier_kernel import PROFILES, MollifierKernel, bump_profile, cosine_profile
from .nonlinearity import FieldFunction, Nonlinearity, ShiftFunction

__all__ = [
    'Atom',
    'Bounds',
    'FieldFunction',
    'Grid',
    'GridFunction',
    'Measure',
    'MollifierKernel',
    'Nonlinearity',
    'Norms',
    'PROFILES',
    'ShiftFunction',
    'bump_profile',
    'cosine_profile',
    'merge_atoms',
]
