"""Result Entities

Records produced by the solver, the reduction engine and the admissibility
checker. Each record knows how to summarize itself for reports.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional

from ..value_objects.grid import GridFunction, Norms
from ..value_objects.measure import Measure


@dataclass(frozen=True)
class SolveReport:
    """Outcome of one semilinear solve.

    Attributes:
        u: Final iterate
        newton_iters: Newton steps taken
        final_residual: L∞ norm of -Δ_h u - f(·,u) - μ_h
        tolerance: Absolute residual target tol_abs
        converged: final_residual <= tolerance
        norm_table: (l1, linf, w1q) of u
        absorption_l1: ‖f(·,u)‖_{L¹}
        sweeps: Nonlinear Jacobi sweeps run as fallback
    """

    u: GridFunction
    newton_iters: int
    final_residual: float
    tolerance: float
    converged: bool
    norm_table: Norms
    absorption_l1: float
    sweeps: int = 0

    def summary(self) -> dict:
        return {
            "n": self.u.grid.n,
            "h": self.u.grid.h,
            "newton_iters": self.newton_iters,
            "sweeps": self.sweeps,
            "final_residual": self.final_residual,
            "tolerance": self.tolerance,
            "converged": self.converged,
            "l1": self.norm_table.l1,
            "linf": self.norm_table.linf,
            "w1q": self.norm_table.w1q,
            "absorption_l1": self.absorption_l1,
        }


class Scheme(str, Enum):
    """Limit scheme used to compute a reduced measure."""

    TRUNCATION = 'truncation'
    MOLLIFICATION = 'mollification'

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class LevelTrace:
    """One rung of a truncation or mollification ladder."""

    level: float
    l1_increment: Optional[float]
    norms: Norms
    atom_mass: Optional[float]
    newton_iters: int

    def to_row(self) -> dict:
        return {
            "level": self.level,
            "l1_increment": self.l1_increment,
            "atom_mass": self.atom_mass,
            "l1": self.norms.l1,
            "linf": self.norms.linf,
            "w1q": self.norms.w1q,
            "newton_iters": self.newton_iters,
        }


@dataclass(frozen=True)
class ReductionResult:
    """Limit of a ladder and the measure that drives it.

    Attributes:
        u_star: Last iterate of the ladder
        extracted: Residual measure of u_star split into density and atoms
        trace: Per-level diagnostics
        scheme: Ladder that produced the result
        converged: Cauchy criterion met with a contracting last step
        tolerance: Absolute L¹ sequence tolerance used
    """

    u_star: GridFunction
    extracted: Measure
    trace: List[LevelTrace]
    scheme: Scheme
    converged: bool
    tolerance: float

    @property
    def increments(self) -> List[float]:
        return [t.l1_increment for t in self.trace if t.l1_increment is not None]

    def summary(self) -> dict:
        return {
            "scheme": str(self.scheme),
            "n": self.u_star.grid.n,
            "h": self.u_star.grid.h,
            "converged": self.converged,
            "tolerance": self.tolerance,
            "levels": [t.to_row() for t in self.trace],
            "atom_masses": self.extracted.atom_masses(),
            "u_star_l1": self.u_star.l1_norm(),
        }


class Verdict(str, Enum):
    """Outcome of an admissibility study."""

    ADMISSIBLE = 'admissible'
    NOT_ADMISSIBLE = 'not_admissible'
    INCONCLUSIVE = 'inconclusive'

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class AdmissibilityVerdict:
    """Integrals I_h = h²·Σ|f(·, G_h μ)| along a refinement ladder."""

    ns: List[int]
    hs: List[float]
    integrals: List[float]
    growth_exponent: float
    relative_increments: List[float]
    verdict: Verdict
    cauchy_tol: float
    divergence_threshold: float

    def to_dict(self) -> dict:
        return {
            "ns": list(self.ns),
            "hs": list(self.hs),
            "integrals": list(self.integrals),
            "growth_exponent": self.growth_exponent,
            "relative_increments": list(self.relative_increments),
            "verdict": str(self.verdict),
            "cauchy_tol": self.cauchy_tol,
            "divergence_threshold": self.divergence_threshold,
        }


@dataclass(frozen=True)
class MonotonicityCheck:
    """Mollified values of u at a node for two consecutive indices."""

    v_n: float
    v_next: float
    u_x: float
    slack: float
    superharmonic: bool

    @property
    def holds(self) -> bool:
        return self.v_n <= self.v_next + self.slack and self.v_next <= self.u_x + self.slack


@dataclass(frozen=True)
class GreenDomination:
    """Max nodal ratio G_h(R m)/G_h m."""

    c_est: Optional[float]
    holds: bool


@dataclass(frozen=True)
class AprioriBound:
    """Both sides of the a priori estimate."""

    lhs: float
    rhs: float

    @property
    def ratio(self) -> float:
        if self.rhs == 0.0:
            return 0.0 if self.lhs == 0.0 else float("inf")
        return self.lhs / self.rhs


@dataclass(frozen=True)
class ComparisonResult:
    """Outcome of solving two ordered problems."""

    holds: bool
    max_violation: float


@dataclass(frozen=True)
class IdentityReport:
    """TV discrepancies of the reduced-measure identities."""

    discrepancies: Dict[str, float]
    tolerance: float
    passed: Dict[str, bool] = field(default_factory=dict)

    @property
    def all_passed(self) -> bool:
        return all(self.passed.values())


@dataclass(frozen=True)
class CertificationResult:
    """Sampled check of monotonicity and of f = 0 on u ≤ 0."""

    monotone: bool
    max_violation: float
    flag_b_holds: bool
    samples: int

