"""Pydantic models for Measure Lab

Experiment configuration read from JSON and the study report written back.
"""

from typing import Annotated, Any, Dict, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


# Families and schemes
NonlinearityFamily = Literal['zero', 'linear', 'power', 'exp', 'expression']
SchemeName = Literal['truncation', 'mollification', 'both']
ProfileName = Literal['bump', 'cosine']


class LabModel(BaseModel):
    model_config = ConfigDict(extra='forbid')


# Nonlinearity
class NonlinearitySpec(LabModel):
    family: NonlinearityFamily
    c: float = Field(1.0, ge=0.0)
    p: float = Field(3.0, ge=1.0)
    a: float = Field(1.0, gt=0.0)
    expr: Optional[str] = None
    shift: Optional[str] = None

    @model_validator(mode='after')
    def _expression_needs_expr(self) -> "NonlinearitySpec":
        if self.family == 'expression' and not self.expr:
            raise ValueError("family 'expression' requires 'expr'")
        return self


# Measure
class ConstantDensity(LabModel):
    kind: Literal['constant']
    value: float


class ExpressionDensity(LabModel):
    kind: Literal['expression']
    expr: str


class FileDensity(LabModel):
    kind: Literal['file']
    path: str


DensitySpec = Annotated[
    Union[ConstantDensity, ExpressionDensity, FileDensity], Field(discriminator='kind')
]


class AtomSpec(LabModel):
    x: float
    y: float
    mass: float


class MeasureSpec(LabModel):
    density: Optional[DensitySpec] = None
    atoms: List[AtomSpec] = Field(default_factory=list)


# Experiment
class DomainSpec(LabModel):
    x_min: float = 0.0
    x_max: float = 1.0
    y_min: float = 0.0
    y_max: float = 1.0

    def bounds(self) -> tuple:
        return (self.x_min, self.x_max, self.y_min, self.y_max)


class MollificationSpec(LabModel):
    profile: ProfileName = 'bump'
    n0: Optional[int] = Field(None, ge=1)
    levels: Optional[List[int]] = None
    resolve_to_grid: bool = True
    dump_kernels: bool = False

    @field_validator('levels')
    @classmethod
    def _levels_increasing(cls, levels: Optional[List[int]]) -> Optional[List[int]]:
        if levels is not None:
            if not levels or any(n < 1 for n in levels):
                raise ValueError("mollification levels must be positive integers")
            if any(b <= a for a, b in zip(levels, levels[1:])):
                raise ValueError("mollification levels must be strictly increasing")
        return levels


class ToleranceSpec(LabModel):
    newton_rel: float = Field(1e-8, gt=0.0)
    seq_rel: float = Field(1e-4, gt=0.0)
    seq_rel_mollification: float = Field(2e-2, gt=0.0)
    cauchy: float = Field(0.02, gt=0.0)
    divergence_exponent: float = Field(0.1, gt=0.0)
    comparison: float = Field(1e-10, gt=0.0)
    identity_rel: float = Field(3e-3, gt=0.0)
    scheme_gap_rel: float = Field(0.03, gt=0.0)
    apriori_spread: float = Field(0.2, gt=0.0)


class ExperimentConfig(LabModel):
    nonlinearity: NonlinearitySpec
    measure: Optional[MeasureSpec] = None
    measure_file: Optional[str] = None
    domain: DomainSpec = Field(default_factory=DomainSpec)
    grids: List[int]
    scheme: SchemeName = 'truncation'
    truncation_levels: Optional[List[float]] = None
    max_truncation_level: int = Field(40, ge=0, le=60)
    mollification: MollificationSpec = Field(default_factory=MollificationSpec)
    tolerances: ToleranceSpec = Field(default_factory=ToleranceSpec)
    patch_radius: int = Field(1, ge=0)
    q: float = Field(1.5, ge=1.0, lt=2.0)
    seed: int = 0
    output_dir: str = 'mplab_out'

    @field_validator('grids')
    @classmethod
    def _grids_increasing(cls, grids: List[int]) -> List[int]:
        if not grids:
            raise ValueError("at least one grid is required")
        if any(n < 3 for n in grids):
            raise ValueError("every grid needs n >= 3")
        if any(b <= a for a, b in zip(grids, grids[1:])):
            raise ValueError("grid ladder must be strictly increasing")
        return grids

    @field_validator('truncation_levels')
    @classmethod
    def _truncation_increasing(cls, levels: Optional[List[float]]) -> Optional[List[float]]:
        if levels is not None:
            if not levels or any(v <= 0 for v in levels):
                raise ValueError("truncation levels must be positive")
            if any(b <= a for a, b in zip(levels, levels[1:])):
                raise ValueError("truncation levels must be strictly increasing")
        return levels

    @model_validator(mode='after')
    def _one_measure_source(self) -> "ExperimentConfig":
        if (self.measure is None) == (self.measure_file is None):
            raise ValueError("give exactly one of 'measure' and 'measure_file'")
        return self


# Report
class LevelRow(LabModel):
    level: float
    l1_increment: Optional[float] = None
    atom_mass: Optional[float] = None
    l1: float
    linf: float
    w1q: float
    newton_iters: int


class GridSummary(LabModel):
    n: int
    h: float
    scheme: Optional[str] = None
    converged: bool
    levels: List[LevelRow] = Field(default_factory=list)
    atom_masses: List[float] = Field(default_factory=list)
    extracted_tv: Optional[float] = None
    u_l1: Optional[float] = None
    newton_iters: Optional[int] = None
    final_residual: Optional[float] = None
    solution_file: Optional[str] = None


class ExtrapolationModel(LabModel):
    value: float
    error: float
    beta: float
    coefficient: float
    residual: float
    hs: List[float]
    raw_values: List[float]


class InvariantRow(LabModel):
    name: str
    passed: bool
    value: Optional[float] = None
    threshold: Optional[float] = None
    detail: str = ''


class AdmissibilityModel(LabModel):
    ns: List[int]
    hs: List[float]
    integrals: List[float]
    growth_exponent: float
    relative_increments: List[float]
    verdict: str
    cauchy_tol: float
    divergence_threshold: float


class SchemeGapRow(LabModel):
    n: int
    l1_gap: float
    relative_gap: float


class AprioriRow(LabModel):
    n: int
    mollification_index: Optional[int] = None
    lhs: float
    rhs: float
    ratio: float


class Provenance(LabModel):
    command: str
    config_hash: str
    version: str


class StudyReport(LabModel):
    provenance: Provenance
    success: bool = True
    grids: List[GridSummary] = Field(default_factory=list)
    extrapolations: Dict[str, ExtrapolationModel] = Field(default_factory=dict)
    invariants: List[InvariantRow] = Field(default_factory=list)
    admissibility: Optional[AdmissibilityModel] = None
    scheme_gaps: List[SchemeGapRow] = Field(default_factory=list)
    apriori: List[AprioriRow] = Field(default_factory=list)
    files: List[str] = Field(default_factory=list)
    notes: Dict[str, Any] = Field(default_factory=dict)

    def all_converged(self) -> bool:
        return all(g.converged for g in self.grids)

    def all_invariants_passed(self) -> bool:
        return all(row.passed for row in self.invariants)
