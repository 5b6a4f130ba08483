"""Batch experiments: confusion matrices, estimator sweeps, block-model curves."""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed

from .errors import MalformedLineError
from .fitting import (FAMILIES, FitConfig, fit_parameter,
                      select_model_profiles)
from .generators import (BMParams, ModelParams, generate)
from .graphs import derive_seed
from .laws import (block_law_support_radius, block_model_density,
                   block_variance_ratios)
from .metrics import DIVERGENCES, l1_density
from .spectrum import (BmCentered, DensityCurve, ErVariance, GridSpec, Raw,
                       Spectrum, eigenvalues, kernel_density,
                       silverman_bandwidth)


def params_from_options(family: str, options: Dict[str, str]) -> ModelParams:
    """Build generator parameters from string key=value options."""
    from .generators import (BAParams, DRParams, ERParams, GRGParams,
                             WSParams)
    if family == "er":
        return ERParams(float(options["p"]))
    if family == "dr":
        return DRParams(int(options["d"]))
    if family == "grg":
        return GRGParams(float(options["r"]))
    if family == "ws":
        return WSParams(float(options["p_r"]), K=int(options.get("K", 4)))
    if family == "ba":
        return BAParams(float(options["p_s"]), m=int(options.get("m", 1)))
    if family == "bm":
        sizes = [int(s) for s in options["block_sizes"].split(",")]
        p_within = [float(p) for p in options["p_within"].split(",")]
        raw_p0 = options["p0"]
        if ";" in raw_p0:
            p0 = [[float(x) for x in row.split(",")]
                  for row in raw_p0.split(";")]
        else:
            p0 = float(raw_p0)
        return BMParams(sizes, p0, p_within)
    raise ValueError(f"unknown family {family!r}")


# -- experiment configuration files -------------------------------------------

@dataclass
class ExperimentConfig:
    """Parsed experiment description.

    kind: "confusion" (model-selection hit rates), "estimate"
    (parameter-recovery sweep), or "bm-curves" (block-model empirical
    vs theoretical densities).
    """

    kind: str
    n_values: Tuple[int, ...]
    reps: int = 50
    seed: int = 0
    divergences: Tuple[str, ...] = DIVERGENCES
    mc_samples: int = 30
    grid_points: int = 768
    jobs: int = 1
    eta: float = 1e-3
    models: List[Tuple[str, Dict[str, str]]] = field(default_factory=list)

    def __post_init__(self):
        if self.kind not in ("confusion", "estimate", "bm-curves"):
            raise ValueError(f"unknown experiment kind {self.kind!r}")
        for d in self.divergences:
            if d not in DIVERGENCES:
                raise ValueError(f"unknown divergence {d!r}")
        if not self.models:
            raise ValueError("experiment needs at least one [model] block")


def parse_experiment_config(text: str) -> ExperimentConfig:
    """Line-oriented key=value format with repeatable [model] blocks.

    Example::

        [experiment]
        kind = confusion
        n = 100
        reps = 50

        [model]
        family = er
        p = 0.1
    """
    section = None
    exp: Dict[str, str] = {}
    models: List[Dict[str, str]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip().lower()
            if section == "model":
                models.append({})
            elif section != "experiment":
                raise MalformedLineError(lineno, raw)
            continue
        if "=" not in line or section is None:
            raise MalformedLineError(lineno, raw)
        key, value = (part.strip() for part in line.split("=", 1))
        if section == "experiment":
            exp[key.lower()] = value
        else:
            models[-1][key.lower()] = value

    model_specs = []
    for opts in models:
        family = opts.pop("family", "").lower()
        if family not in FAMILIES:
            raise ValueError(f"model block needs a family in {FAMILIES}")
        model_specs.append((family, opts))
    n_values = tuple(int(v) for v in exp.get("n", "100").split(","))
    return ExperimentConfig(
        kind=exp.get("kind", "confusion"),
        n_values=n_values,
        reps=int(exp.get("reps", 50)),
        seed=int(exp.get("seed", 0)),
        divergences=tuple(d.strip() for d in
                          exp.get("divergences", ",".join(DIVERGENCES)).split(",")),
        mc_samples=int(exp.get("mc_samples", 30)),
        grid_points=int(exp.get("grid_points", 768)),
        jobs=int(exp.get("jobs", 1)),
        eta=float(exp.get("eta", 1e-3)),
        models=model_specs,
    )


# -- confusion matrices --------------------------------------------------------

@dataclass
class ConfusionResult:
    """counts[divergence][n][truth][winner] plus the candidate order."""

    candidates: Tuple[str, ...]
    counts: Dict[str, Dict[int, Dict[str, Dict[str, int]]]]
    reps: int

    def hit_rate(self, divergence: str, n: int,
                 family: Optional[str] = None) -> float:
        table = self.counts[divergence][n]
        fams = [family] if family else list(table)
        hits = sum(table[f].get(f, 0) for f in fams)
        total = sum(sum(table[f].values()) for f in fams)
        return hits / total if total else float("nan")

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("divergence,n,truth,winner,count\n")
        for div, per_n in self.counts.items():
            for n, table in per_n.items():
                for truth, winners in table.items():
                    for winner, count in sorted(winners.items()):
                        buf.write(f"{div},{n},{truth},{winner},{count}\n")
        return buf.getvalue()

    def to_dict(self) -> Dict:
        return {"candidates": list(self.candidates), "reps": self.reps,
                "counts": self.counts}


def _one_selection(family: str, params: ModelParams, n: int, graph_seed: int,
                   fit_seed: int, candidates: Sequence[str],
                   divergences: Sequence[str], mc_samples: int,
                   grid_points: int) -> Dict[str, str]:
    g = generate(params, n, graph_seed)
    cfg = FitConfig(use_analytic=False, seed=fit_seed,
                    mc_samples=mc_samples, grid_points=grid_points)
    best = select_model_profiles(g, candidates, cfg, divergences)
    return {d: min(best[d], key=best[d].get) for d in divergences}


def confusion_experiment(config: ExperimentConfig,
                         candidates: Optional[Sequence[str]] = None,
                         ) -> ConfusionResult:
    """Hit-rate experiment: generate graphs from each model, select among
    the candidates, tally winners per divergence."""
    candidates = tuple(candidates or [fam for fam, _ in config.models])
    models = [(fam, params_from_options(fam, dict(opts)))
              for fam, opts in config.models]
    counts: Dict[str, Dict[int, Dict[str, Dict[str, int]]]] = {
        d: {n: {fam: {} for fam, _ in models} for n in config.n_values}
        for d in config.divergences}

    for n in config.n_values:
        tasks = []
        for mi, (fam, params) in enumerate(models):
            for rep in range(config.reps):
                tasks.append((fam, params,
                              derive_seed(config.seed, n, mi, rep),
                              derive_seed(config.seed, n, mi, rep, 1) % 2**31))
        runner = Parallel(n_jobs=config.jobs) if config.jobs != 1 else None
        job = (delayed(_one_selection)(fam, params, n, gs, fs, candidates,
                                       config.divergences, config.mc_samples,
                                       config.grid_points)
               for fam, params, gs, fs in tasks)
        results = runner(job) if runner else [f(*a, **k) for f, a, k in job]
        for (fam, _, _, _), winners in zip(tasks, results):
            for d, w in winners.items():
                cell = counts[d][n][fam]
                cell[w] = cell.get(w, 0) + 1
    return ConfusionResult(candidates=candidates, counts=counts,
                           reps=config.reps)


# -- estimator sweeps -----------------------------------------------------------

@dataclass
class EstimateRow:
    family: str
    divergence: str
    n: int
    truth: float
    mean: float
    mean_abs_err: float
    ci_low: float
    ci_high: float
    estimates: List[float]


@dataclass
class EstimateResult:
    rows: List[EstimateRow]

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("family,divergence,n,truth,mean,mean_abs_err,ci_low,ci_high\n")
        for r in self.rows:
            buf.write(f"{r.family},{r.divergence},{r.n},{r.truth:.6g},"
                      f"{r.mean:.6g},{r.mean_abs_err:.6g},"
                      f"{r.ci_low:.6g},{r.ci_high:.6g}\n")
        return buf.getvalue()

    def to_dict(self) -> Dict:
        return {"rows": [vars(r) for r in self.rows]}


def _one_estimate(family: str, params: ModelParams, n: int, graph_seed: int,
                  fit_seed: int, divergence: str, mc_samples: int,
                  grid_points: int) -> float:
    g = generate(params, n, graph_seed)
    cfg = FitConfig(divergence=divergence, seed=fit_seed,
                    mc_samples=mc_samples, grid_points=grid_points)
    return fit_parameter(g, family, cfg=cfg).theta[0]


def _true_theta(family: str, params: ModelParams) -> float:
    return {"er": lambda: params.p, "dr": lambda: float(params.d),
            "grg": lambda: params.r, "ws": lambda: params.p_r,
            "ba": lambda: params.p_s}[family]()


def estimate_experiment(config: ExperimentConfig) -> EstimateResult:
    """Parameter-recovery sweep: repeated fits per (model, n, divergence)
    with the sample mean, mean absolute error, and a normal 95% CI."""
    rows: List[EstimateRow] = []
    for mi, (fam, opts) in enumerate(config.models):
        if fam == "bm":
            raise ValueError("estimate sweeps cover the scalar-parameter models")
        params = params_from_options(fam, dict(opts))
        truth = _true_theta(fam, params)
        for n in config.n_values:
            for div in config.divergences:
                seeds = [(derive_seed(config.seed, n, mi, rep),
                          derive_seed(config.seed, n, mi, rep, 1) % 2**31)
                         for rep in range(config.reps)]
                job = (delayed(_one_estimate)(fam, params, n, gs, fs, div,
                                              config.mc_samples,
                                              config.grid_points)
                       for gs, fs in seeds)
                if config.jobs != 1:
                    ests = Parallel(n_jobs=config.jobs)(job)
                else:
                    ests = [f(*a, **k) for f, a, k in job]
                ests = [float(e) for e in ests]
                mean = float(np.mean(ests))
                half = 1.96 * float(np.std(ests, ddof=1)) / math.sqrt(len(ests)) \
                    if len(ests) > 1 else 0.0
                rows.append(EstimateRow(
                    family=fam, divergence=div, n=n, truth=truth, mean=mean,
                    mean_abs_err=float(np.mean(np.abs(np.array(ests) - truth))),
                    ci_low=mean - half, ci_high=mean + half, estimates=ests))
    return EstimateResult(rows=rows)


# -- block-model curves ----------------------------------------------------------

@dataclass
class BlockCurves:
    """Theoretical block-model density next to two empirical ESD curves.

    centered: kernel ESD of (A - E[A]) / sqrt(n p*(1-p*)).
    scaled: kernel ESD of A / sqrt(n p*(1-p*)), no centering.
    """

    theory: DensityCurve
    centered: DensityCurve
    scaled: DensityCurve
    l1_centered_theory: float
    l1_scaled_theory: float
    l1_centered_scaled: float
    raw_mass: float
    law_notes: Tuple[str, ...]

    def to_csv(self) -> str:
        xs = self.theory.x
        cen = np.interp(xs, self.centered.x, self.centered.values,
                        left=0.0, right=0.0)
        sca = np.interp(xs, self.scaled.x, self.scaled.values,
                        left=0.0, right=0.0)
        buf = io.StringIO()
        buf.write("x,theory,centered_esd,scaled_esd\n")
        for x, t, c, s in zip(xs, self.theory.values, cen, sca):
            buf.write(f"{x:.12g},{t:.12g},{c:.12g},{s:.12g}\n")
        return buf.getvalue()

    def to_dict(self) -> Dict:
        return {
            "l1_centered_theory": self.l1_centered_theory,
            "l1_scaled_theory": self.l1_scaled_theory,
            "l1_centered_scaled": self.l1_centered_scaled,
            "raw_mass": self.raw_mass,
            "law_notes": list(self.law_notes),
        }


def block_model_curves(params: BMParams, seed: int = 0,
                       grid: Optional[GridSpec] = None,
                       eta: float = 1e-3,
                       grid_points: int = 2048) -> BlockCurves:
    """One block-model graph against its limiting density.

    The theoretical curve comes from the fixed-point solver; the two
    empirical curves are kernel ESDs of the centered matrix and of the
    merely rescaled adjacency matrix.
    """
    law = block_variance_ratios(params)
    g = generate(params, params.n, seed)
    p_star = max(params.p_within)

    centered_spec = eigenvalues(g, BmCentered(params))
    scaled_spec = eigenvalues(g, ErVariance(p_star))
    # drop the top Perron eigenvalues: the limit describes the bulk only
    bulk = scaled_spec.values[params.M:]
    sigma_c = silverman_bandwidth(centered_spec.values)
    sigma_s = silverman_bandwidth(bulk)

    if grid is None:
        r = block_law_support_radius(law)
        lo = min(float(centered_spec.values.min()) - 4 * sigma_c,
                 float(bulk.min()) - 4 * sigma_s, -r)
        hi = max(float(centered_spec.values.max()) + 4 * sigma_c,
                 float(bulk.max()) + 4 * sigma_s, r)
        grid = GridSpec(lo, hi, grid_points)

    theory, raw_mass = block_model_density(law, grid, eta=eta)
    centered = kernel_density(centered_spec, sigma_c, grid)
    scaled = kernel_density(Spectrum(values=bulk, mode=Raw()), sigma_s, grid)
    return BlockCurves(
        theory=theory, centered=centered, scaled=scaled,
        l1_centered_theory=l1_density(centered, theory),
        l1_scaled_theory=l1_density(scaled, theory),
        l1_centered_scaled=l1_density(centered, scaled),
        raw_mass=raw_mass, law_notes=law.notes)


def run_experiment(config: ExperimentConfig):
    """Dispatch on the experiment kind."""
    if config.kind == "confusion":
        return confusion_experiment(config)
    if config.kind == "estimate":
        return estimate_experiment(config)
    params = params_from_options(*[(f, dict(o)) for f, o in config.models][0])
    return block_model_curves(params, seed=config.seed, eta=config.eta,
                              grid_points=max(config.grid_points, 1024))
