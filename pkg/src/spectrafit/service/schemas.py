"""Request and response models for the HTTP API."""

from __future__ import annotations

from typing import Dict, List, Optional, Tuple, Union

from pydantic import BaseModel, Field

FAMILY_DESC = "one of er, dr, grg, ws, ba, bm"


class HealthResponse(BaseModel):
    status: str
    version: str


class GenerateRequest(BaseModel):
    family: str = Field(description=FAMILY_DESC)
    n: int = Field(gt=0)
    seed: int = 0
    # family-specific options as strings, e.g. {"p": "0.1"} for er
    options: Dict[str, str] = Field(default_factory=dict)


class GenerateResponse(BaseModel):
    n: int
    edge_count: int
    edge_hash: str
    edge_list: str
    seed: int
    version: str


class GridModel(BaseModel):
    x_min: float
    x_max: float
    points: int = 2048


class ScalingModel(BaseModel):
    """Scaling convention; extra fields depend on the mode."""

    mode: str = "sqrt-n"  # sqrt-n | raw | er-variance | dr-scaled |
    #                       dr-centered | bm-centered
    p: Optional[float] = None
    d: Optional[int] = None
    block_sizes: Optional[List[int]] = None
    p0: Optional[Union[float, List[List[float]]]] = None
    p_within: Optional[List[float]] = None


class SpectrumRequest(BaseModel):
    edge_list: str
    one_based: bool = False
    scaling: ScalingModel = Field(default_factory=ScalingModel)
    output: str = "eigenvalues"  # eigenvalues | ecdf | density
    sigma: Optional[float] = None
    grid: Optional[GridModel] = None


class SpectrumResponse(BaseModel):
    n: int
    scaling: str
    output: str
    eigenvalues: Optional[List[float]] = None
    csv: Optional[str] = None
    sigma: Optional[float] = None
    warnings: List[str] = Field(default_factory=list)
    version: str


class LawRequest(BaseModel):
    law: str  # semicircle | semicircle-p | kesten-mckay | kesten-mckay-scaled
    p: Optional[float] = None
    d: Optional[int] = None
    output: str = "density"  # density | cdf
    x: Optional[List[float]] = None
    grid: Optional[GridModel] = None


class LawResponse(BaseModel):
    law: str
    output: str
    x: List[float]
    values: List[float]
    support: Tuple[float, float]
    version: str


class BmDensityRequest(BaseModel):
    block_sizes: List[int]
    p0: Union[float, List[List[float]]]
    p_within: List[float]
    eta: float = 1e-3
    grid: Optional[GridModel] = None


class BmDensityResponse(BaseModel):
    csv: str
    raw_mass: float
    variance_ratios: List[float]
    p_star: float
    within_hypotheses: bool
    notes: List[str]
    version: str


class SearchSpaceModel(BaseModel):
    bounds: List[Tuple[float, float]]
    steps: List[float] = Field(default_factory=list)
    mode: str = "grid+golden"
    integer: bool = False
    values: Optional[List[List[float]]] = None


class FitOptions(BaseModel):
    divergence: str = "l1-density"
    mc_samples: int = 30
    seed: int = 0
    use_analytic: Union[str, bool] = "auto"
    grid_points: int = 2048
    ws_K: int = 4
    ba_m: int = 1


class FitRequest(BaseModel):
    edge_list: str
    one_based: bool = False
    family: str = Field(description=FAMILY_DESC)
    space: Optional[SearchSpaceModel] = None
    options: FitOptions = Field(default_factory=FitOptions)


class FitReportModel(BaseModel):
    family: str
    theta: List[float]
    divergence: str
    value: float
    provenance: str
    defaults: Dict
    warnings: List[str]
    bracket: Optional[List[float]] = None


class FitResponse(BaseModel):
    report: FitReportModel
    version: str


class SelectRequest(BaseModel):
    edge_list: str
    one_based: bool = False
    candidates: List[str]
    options: FitOptions = Field(default_factory=FitOptions)


class SelectResponse(BaseModel):
    winner: Optional[str]
    tie: bool
    fits: List[FitReportModel]
    failures: List[Dict[str, str]]
    version: str


class ExperimentRequest(BaseModel):
    config: str  # the line-oriented experiment description
    jobs: Optional[int] = None


class ExperimentResponse(BaseModel):
    kind: str
    csv: str
    result: Dict
    version: str


class ErrorResponse(BaseModel):
    error: str
    detail: str
