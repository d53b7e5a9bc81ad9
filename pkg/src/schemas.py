from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, Field, model_validator

SIMPLICITY_NOTICE = ("The evaluation is dim S_{H,V}(G) only when V is a simple module; "
                     "simplicity is not checked.")


# Out(H) enumeration
class OutRepRow(BaseModel):
    index: int
    images: List[str]


class OutReport(BaseModel):
    group: str
    group_order: int
    generators: List[str]
    aut_order: int
    inner_order: int
    out_order: int
    reps: List[OutRepRow]
    mult_table: List[List[int]]


# Subgroup lattice
class SubgroupClassRow(BaseModel):
    index: int
    order: int
    class_size: int
    normal: bool
    generators: List[str]


class SubgroupsReport(BaseModel):
    group: str
    group_order: int
    subgroup_count: int
    classes: List[SubgroupClassRow]


# Sections
class OrbitRow(BaseModel):
    index: int
    t_order: int
    s_order: int
    orbit_size: int
    minimal: bool
    normalizer_order: int
    gamma_order: int
    t_generators: List[str]
    s_generators: List[str]


class SectionsReport(BaseModel):
    group: str
    subquotient: str
    orbits: List[OrbitRow]


# Evaluation
class CertificateModel(BaseModel):
    code: str
    name: str
    kind: Literal['nonvanishing', 'prediction', 'applicability']
    witness: Dict[str, Any] = Field(default_factory=dict)
    predicted_dim: Optional[int] = None


class OrbitTrace(BaseModel):
    orbit: int
    t_order: int
    s_order: int
    minimal: bool
    trace_dim: int


class EvaluationReport(BaseModel):
    group: str
    subquotient: str
    module: str
    field: str
    module_dim: int
    dim: int
    vanishes: bool
    method: Literal['rank-formula', 'closed-formula', 'empty-sigma']
    lower_bound: int
    rank_formula_dim: Optional[int] = None
    closed_formula_dim: Optional[int] = None
    verified: bool = False
    per_orbit_traces: List[OrbitTrace] = Field(default_factory=list)
    certificates: List[CertificateModel] = Field(default_factory=list)
    notice: str = SIMPLICITY_NOTICE

    @model_validator(mode='after')
    def check_dimensions(self):
        if self.vanishes != (self.dim == 0):
            raise ValueError("vanishes must agree with dim == 0")
        if self.dim < self.lower_bound:
            raise ValueError(f"dim {self.dim} is below the lower bound {self.lower_bound}")
        return self


class CertifyReport(BaseModel):
    group: str
    subquotient: str
    module: str
    field: str
    certificates: List[CertificateModel]


# Self-test
class SelftestResult(BaseModel):
    name: str
    passed: bool
    detail: str = ""
    seconds: float = 0.0
    # exception class name of a failed check
    error: Optional[str] = None


class SelftestReport(BaseModel):
    field: str
    results: List[SelftestResult]

    @property
    def failed(self) -> List[SelftestResult]:
        return [r for r in self.results if not r.passed]

    @property
    def passed(self) -> bool:
        return not self.failed

    def failed_with(self, error: str) -> bool:
        return any(r.error == error for r in self.failed)
