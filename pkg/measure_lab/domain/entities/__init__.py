"""Entities

Result records produced by the numerical services.
"""

from .results import (
    AdmissibilityVerdict,
    AprioriBound,
    CertificationResult,
    ComparisonResult,
    GreenDomination,
    IdentityReport,
    LevelTrace,
    MonotonicityCheck,
    ReductionResult,
    Scheme,
    SolveReport,
    Verdict,
)

__all__ = [
    'AdmissibilityVerdict',
    'AprioriBound',
    'CertificationResult',
    'ComparisonResult',
    'GreenDomination',
    'IdentityReport',
    'LevelTrace',
    'MonotonicityCheck',
    'ReductionResult',
    'Scheme',
    'SolveReport',
    'Verdict',
]
