"""Request/response models shared by the HTTP service and the CLI client."""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field, model_validator

from .builtins import get_builtin
from .polynomials import MatrixPolynomial, parse_poly
from .sdp import SolverParams


class PolySpec(BaseModel):
    """A polynomial given either by builtin name or by inline DSL text."""

    builtin: Optional[str] = None
    dsl: Optional[str] = None

    @model_validator(mode="after")
    def _exactly_one(self):
        if (self.builtin is None) == (self.dsl is None):
            raise ValueError("give exactly one of 'builtin' or 'dsl'")
        return self

    def load(self) -> MatrixPolynomial:
        if self.builtin is not None:
            return get_builtin(self.builtin)
        return parse_poly(self.dsl)


class SolverOptions(BaseModel):
    tol: float = 1e-9
    max_iter: int = 20000
    restarts: int = 5
    rank: Optional[int] = None
    seed: int = 0
    dual_iters: int = 2000
    dual_polish: bool = True
    dense_cutoff: int = 4000

    def to_params(self) -> SolverParams:
        return SolverParams(**self.model_dump())


class ParseRequest(BaseModel):
    poly: PolySpec


class ParseResponse(BaseModel):
    d: int
    e: int
    r: int
    degree: int
    n_terms: int
    self_adjoint: bool
    name: Optional[str]
    canonical_dsl: str


class SampleRequest(BaseModel):
    poly: PolySpec
    n: int = Field(ge=2)
    seed: int = 0
    signed: bool = True
    include_matrix: bool = False


class LiftRecord(BaseModel):
    format: str = "liftsdp/lift-v1"
    d: int
    e: int
    n: int
    seed: int
    signed: bool


class SampleRequestResponse(BaseModel):
    record: LiftRecord
    dim: int
    nnz: int
    hermitian_defect: float
    matrix: Optional[str] = None


class SpectrumRequest(BaseModel):
    poly: PolySpec
    source: Literal["lift", "ball"] = "lift"
    n: Optional[int] = None
    seed: int = 0
    signed: bool = True
    f0: Optional[int] = None
    negate: bool = False
    dense_cutoff: int = 4000
    tol: float = 1e-9
    full: bool = True

    @model_validator(mode="after")
    def _source_fields(self):
        if self.source == "lift" and self.n is None:
            raise ValueError("lift spectrum needs n")
        if self.source == "ball" and self.f0 is None:
            raise ValueError("ball spectrum needs f0")
        return self


class SpectrumResponse(BaseModel):
    dim: int
    lambda_max: float
    lambda_min: float
    residual: float
    spectrum: Optional[list[float]] = None


class CompareSpectraRequest(BaseModel):
    poly: PolySpec
    n: int = Field(ge=2)
    seed: int = 0
    f0: int = Field(ge=0)
    signed: bool = True
    negate: bool = False
    dense_cutoff: int = 4000


class CompareSpectraResponse(BaseModel):
    dim_lift: int
    dim_ball: int
    hausdorff_distance: float
    lambda_max_lift: float
    lambda_max_ball: float
    lambda_max_diff: float
    caveat: str


class SdpRequest(BaseModel):
    poly: PolySpec
    n: int = Field(ge=2)
    seed: int = 0
    negate: bool = False
    params: SolverOptions = SolverOptions()
    include_dual: bool = False
    include_eig: bool = True
    include_opt: bool = False
    include_factor: bool = False


class DualInfo(BaseModel):
    value: float
    zeta: list[float]
    gap: float
    polished: bool


class SdpResponse(BaseModel):
    n: int
    dim: int
    objective: float
    max_residual: float
    factor_width: int
    converged: bool
    eig: Optional[float] = None
    dual: Optional[DualInfo] = None
    opt: Optional[float] = None
    factor: Optional[list[list[float]]] = None


class PartSdpRequest(BaseModel):
    poly: PolySpec
    f0: int = Field(ge=0)
    negate: bool = False
    params: SolverOptions = SolverOptions()
    include_dual: bool = True
    include_eig: bool = True
    export_ball: bool = False
    include_factor: bool = False


class PartSdpResponse(BaseModel):
    f0: int
    ball_size: int
    dim: int
    primal: float
    max_residual: float
    dual: Optional[DualInfo] = None
    eig: Optional[float] = None
    ball: Optional[dict] = None
    factor: Optional[list[list[float]]] = None


class PasteRequest(BaseModel):
    poly: PolySpec
    n: int = Field(ge=2)
    seed: int = 0
    f0: int = Field(ge=0)
    negate: bool = False
    params: SolverOptions = SolverOptions()
    include_basic_sdp: bool = False
    psd_check: bool = True


class PasteResponse(BaseModel):
    n: int
    seed: int
    f0: int
    f: int
    bad_fraction: float
    ball_size: int
    ball_objective: float
    sigma_objective: float
    sigma_prime_objective: float
    sigma_prime_diag_err: float
    sigma_min_eig: Optional[float]
    sigma_prime_min_eig: Optional[float]
    gentle_bound: float
    basic_sdp_objective: Optional[float]
    wall_time: float


class BracketRequest(BaseModel):
    poly: PolySpec
    f0_max: int = Field(ge=0)
    tol: float = 1e-3
    negate: bool = False
    params: SolverOptions = SolverOptions()


class RadiusRecord(BaseModel):
    f0: int
    ball_size: int
    dim: int
    primal: float
    dual: float
    gap: float


class BracketResponse(BaseModel):
    lower: float
    upper: float
    gap: float
    lower_note: str
    upper_note: str
    per_radius: list[RadiusRecord]
    convergence_diag: Optional[float]
    stopped_early: bool


class ExperimentConfig(BaseModel):
    poly: PolySpec
    n_list: list[int] = Field(min_length=1)
    seeds: list[int] = Field(min_length=1)
    f0_list: list[int] = Field(default_factory=list)
    negate: bool = False
    params: SolverOptions = SolverOptions()
    paste_f0: Optional[int] = None
    include_dual_max_dim: int = 600
    dense_cutoff: int = 4000
    threads: int = 1

    @model_validator(mode="after")
    def _nonempty(self):
        if any(n < 2 for n in self.n_list):
            raise ValueError("lift sizes must be at least 2")
        return self


class ExperimentRecord(BaseModel):
    n: int
    seed: int
    eig: Optional[float] = None
    sdp_primal: Optional[float] = None
    sdp_dual: Optional[float] = None
    pasted_lower: Optional[float] = None
    error: Optional[str] = None
    wall_time: float = 0.0


class ExperimentAggregate(BaseModel):
    n: int
    sdp_mean: Optional[float] = None
    sdp_min: Optional[float] = None
    sdp_max: Optional[float] = None
    seeds: int = 0


class ExperimentReport(BaseModel):
    config: ExperimentConfig
    records: list[ExperimentRecord]
    per_radius: list[RadiusRecord]
    bracket: Optional[BracketResponse] = None
    aggregates: list[ExperimentAggregate]
    version: str
    wall_time: float


class HealthResponse(BaseModel):
    status: str
    version: str


class BuiltinsResponse(BaseModel):
    names: list[str]
