"""FastAPI application exposing generation, spectra, laws, fitting."""

from __future__ import annotations

import warnings
from typing import List

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..errors import SpectraFitError
from ..experiments import (BlockCurves, params_from_options,
                           parse_experiment_config, run_experiment)
from ..fitting import FitConfig, SearchSpace, fit_parameter, select_model
from ..generators import BMParams, generate
from ..graphs import dump_edge_list, parse_edge_list
from ..laws import (KestenMcKay, KestenMcKayScaled, SemicircleP,
                    SemicircleUnit, block_law_support_radius,
                    block_model_density, block_variance_ratios)
from ..spectrum import (BmCentered, DrCentered, DrScaled, ErVariance,
                        GridSpec, Raw, SqrtN, default_grid, ecdf,
                        eigenvalues, kernel_density, silverman_bandwidth)
from . import schemas


def _scaling_from_model(m: schemas.ScalingModel):
    if m.mode == "sqrt-n":
        return SqrtN()
    if m.mode == "raw":
        return Raw()
    if m.mode == "er-variance":
        if m.p is None:
            raise ValueError("er-variance scaling needs p")
        return ErVariance(m.p)
    if m.mode == "dr-scaled":
        if m.d is None:
            raise ValueError("dr-scaled scaling needs d")
        return DrScaled(m.d)
    if m.mode == "dr-centered":
        if m.d is None:
            raise ValueError("dr-centered scaling needs d")
        return DrCentered(m.d)
    if m.mode == "bm-centered":
        if not (m.block_sizes and m.p_within) or m.p0 is None:
            raise ValueError("bm-centered needs block_sizes, p0, p_within")
        return BmCentered(BMParams(m.block_sizes, m.p0, m.p_within))
    raise ValueError(f"unknown scaling mode {m.mode!r}")


def _law_from_request(req: schemas.LawRequest):
    if req.law == "semicircle":
        return SemicircleUnit()
    if req.law == "semicircle-p":
        if req.p is None:
            raise ValueError("semicircle-p needs p")
        return SemicircleP(req.p)
    if req.law == "kesten-mckay":
        if req.d is None:
            raise ValueError("kesten-mckay needs d")
        return KestenMcKay(req.d)
    if req.law == "kesten-mckay-scaled":
        if req.d is None:
            raise ValueError("kesten-mckay-scaled needs d")
        return KestenMcKayScaled(req.d)
    raise ValueError(f"unknown law {req.law!r}")


def _fit_config(opts: schemas.FitOptions, for_select: bool = False) -> FitConfig:
    use_analytic = opts.use_analytic
    if for_select and use_analytic == "auto":
        # selection compares like with like: Monte-Carlo curves everywhere
        use_analytic = False
    return FitConfig(divergence=opts.divergence, mc_samples=opts.mc_samples,
                     seed=opts.seed, use_analytic=use_analytic,
                     grid_points=opts.grid_points, ws_K=opts.ws_K,
                     ba_m=opts.ba_m)


def _space_from_model(m: schemas.SearchSpaceModel) -> SearchSpace:
    values = tuple(tuple(v) for v in m.values) if m.values else None
    return SearchSpace(bounds=tuple(tuple(b) for b in m.bounds),
                       steps=tuple(m.steps), mode=m.mode,
                       integer=m.integer, values=values)


def _report_model(rep) -> schemas.FitReportModel:
    return schemas.FitReportModel(**rep.to_dict())


def create_app() -> FastAPI:
    app = FastAPI(title="spectrafit", version=__version__)

    @app.exception_handler(SpectraFitError)
    async def _domain_error(request: Request, exc: SpectraFitError):
        return JSONResponse(status_code=400, content={
            "error": type(exc).__name__, "detail": str(exc)})

    @app.exception_handler(ValueError)
    async def _value_error(request: Request, exc: ValueError):
        return JSONResponse(status_code=400, content={
            "error": type(exc).__name__, "detail": str(exc)})

    @app.get("/health", response_model=schemas.HealthResponse)
    def health():
        return schemas.HealthResponse(status="ok", version=__version__)

    @app.post("/generate", response_model=schemas.GenerateResponse)
    def generate_graph(req: schemas.GenerateRequest):
        params = params_from_options(req.family, dict(req.options))
        g = generate(params, req.n, req.seed)
        return schemas.GenerateResponse(
            n=g.n, edge_count=g.edge_count, edge_hash=g.edge_hash(),
            edge_list=dump_edge_list(g), seed=req.seed, version=__version__)

    @app.post("/spectrum", response_model=schemas.SpectrumResponse)
    def spectrum(req: schemas.SpectrumRequest):
        report = parse_edge_list(req.edge_list, one_based=req.one_based)
        mode = _scaling_from_model(req.scaling)
        caught: List[str] = []
        with warnings.catch_warnings(record=True) as ws:
            warnings.simplefilter("always")
            spec = eigenvalues(report.graph, mode)
            if req.output == "eigenvalues":
                resp = schemas.SpectrumResponse(
                    n=spec.n, scaling=mode.label, output=req.output,
                    eigenvalues=spec.values.tolist(), version=__version__)
            elif req.output == "ecdf":
                resp = schemas.SpectrumResponse(
                    n=spec.n, scaling=mode.label, output=req.output,
                    csv=ecdf(spec).to_csv(), version=__version__)
            elif req.output == "density":
                sigma = req.sigma if req.sigma else silverman_bandwidth(spec)
                grid = GridSpec(req.grid.x_min, req.grid.x_max,
                                req.grid.points) if req.grid else None
                curve = kernel_density(spec, sigma, grid)
                resp = schemas.SpectrumResponse(
                    n=spec.n, scaling=mode.label, output=req.output,
                    csv=curve.to_csv(), sigma=sigma, version=__version__)
            else:
                raise ValueError(f"unknown output {req.output!r}")
            caught = [str(w.message) for w in ws]
        resp.warnings = caught
        return resp

    @app.post("/law", response_model=schemas.LawResponse)
    def law_curve(req: schemas.LawRequest):
        law = _law_from_request(req)
        lo, hi = law.support
        if req.x is not None:
            xs = np.asarray(req.x, dtype=np.float64)
        elif req.grid is not None:
            xs = GridSpec(req.grid.x_min, req.grid.x_max, req.grid.points).xs()
        else:
            margin = 0.05 * (hi - lo)
            xs = GridSpec(lo - margin, hi + margin, 2048).xs()
        values = law.density(xs) if req.output == "density" else law.cdf(xs)
        if req.output not in ("density", "cdf"):
            raise ValueError(f"unknown output {req.output!r}")
        return schemas.LawResponse(law=req.law, output=req.output,
                                   x=xs.tolist(),
                                   values=np.asarray(values).tolist(),
                                   support=(lo, hi), version=__version__)

    @app.post("/bm-density", response_model=schemas.BmDensityResponse)
    def bm_density(req: schemas.BmDensityRequest):
        params = BMParams(req.block_sizes, req.p0, req.p_within)
        law = block_variance_ratios(params)
        if req.grid is not None:
            grid = GridSpec(req.grid.x_min, req.grid.x_max, req.grid.points)
        else:
            r = block_law_support_radius(law)
            grid = GridSpec(-r, r, 2048)
        curve, raw_mass = block_model_density(law, grid, eta=req.eta)
        return schemas.BmDensityResponse(
            csv=curve.to_csv(), raw_mass=raw_mass,
            variance_ratios=list(law.ratios), p_star=law.p_star,
            within_hypotheses=law.within_hypotheses, notes=list(law.notes),
            version=__version__)

    @app.post("/fit", response_model=schemas.FitResponse)
    def fit(req: schemas.FitRequest):
        report = parse_edge_list(req.edge_list, one_based=req.one_based)
        space = _space_from_model(req.space) if req.space else None
        rep = fit_parameter(report.graph, req.family, space=space,
                            cfg=_fit_config(req.options))
        return schemas.FitResponse(report=_report_model(rep),
                                   version=__version__)

    @app.post("/select", response_model=schemas.SelectResponse)
    def select(req: schemas.SelectRequest):
        report = parse_edge_list(req.edge_list, one_based=req.one_based)
        sel = select_model(report.graph, req.candidates,
                           cfg=_fit_config(req.options, for_select=True))
        return schemas.SelectResponse(
            winner=sel.winner, tie=sel.tie,
            fits=[_report_model(f) for f in sel.ranking()],
            failures=[{"family": f, "error": e} for f, e in sel.failures],
            version=__version__)

    @app.post("/experiment", response_model=schemas.ExperimentResponse)
    def experiment(req: schemas.ExperimentRequest):
        config = parse_experiment_config(req.config)
        if req.jobs is not None:
            config.jobs = req.jobs
        result = run_experiment(config)
        return schemas.ExperimentResponse(
            kind=config.kind, csv=result.to_csv(), result=result.to_dict(),
            version=__version__)

    return app


app = create_app()
