"""Command-line client for the spectral fitting service.

Every subcommand talks to the HTTP API: by default an in-process
application instance, or a remote server via --server-url. Exit codes:
0 success, 1 domain error (bad input data, infeasible parameters,
solver failures), 2 usage error.
"""

from __future__ import annotations

import json
import sys
from typing import Dict, Optional

import click

from . import __version__


class ApiClient:
    """Thin wrapper over either a remote server or the in-process app."""

    def __init__(self, server_url: Optional[str] = None):
        if server_url:
            import httpx
            self._client = httpx.Client(base_url=server_url, timeout=None)
        else:
            import warnings
            with warnings.catch_warnings():
                # the in-process client warns about its http backend choice
                warnings.simplefilter("ignore")
                from fastapi.testclient import TestClient
            from .service import create_app
            self._client = TestClient(create_app())

    def post(self, path: str, payload: Dict) -> Dict:
        resp = self._client.post(path, json=payload)
        body = resp.json()
        if resp.status_code != 200:
            detail = body.get("detail", body)
            error = body.get("error", "request failed")
            raise ClickDomainError(f"{error}: {detail}")
        return body


class ClickDomainError(click.ClickException):
    exit_code = 1


def _client(ctx) -> ApiClient:
    return ApiClient(ctx.obj.get("server_url"))


def _read_input(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise ClickDomainError(f"cannot read {path}: {exc}") from exc


def _write_output(text: str, path: Optional[str]):
    if path and path != "-":
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=not text.endswith("\n"))


def _parse_grid(spec: Optional[str]) -> Optional[Dict]:
    if spec is None:
        return None
    parts = spec.split(",")
    if len(parts) not in (2, 3):
        raise click.UsageError("grid must be 'min,max' or 'min,max,points'")
    grid = {"x_min": float(parts[0]), "x_max": float(parts[1])}
    if len(parts) == 3:
        grid["points"] = int(parts[2])
    return grid


def _parse_options(pairs) -> Dict[str, str]:
    out = {}
    for pair in pairs:
        if "=" not in pair:
            raise click.UsageError(f"option {pair!r} is not key=value")
        key, value = pair.split("=", 1)
        out[key.strip()] = value.strip()
    return out


@click.group()
@click.version_option(__version__)
@click.option("--server-url", default=None, envvar="SPECTRAFIT_SERVER",
              help="Remote API base URL; default runs the app in-process.")
@click.pass_context
def main(ctx, server_url):
    """Fit random-graph models to observed graphs via spectral densities."""
    ctx.ensure_object(dict)
    ctx.obj["server_url"] = server_url


@main.command()
@click.option("--family", required=True,
              type=click.Choice(["er", "dr", "grg", "ws", "ba", "bm"]))
@click.option("--n", "n", required=True, type=int, help="Number of vertices.")
@click.option("--seed", default=0, type=int, show_default=True)
@click.option("-o", "--option", "options", multiple=True,
              help="Model parameter as key=value, e.g. -o p=0.1; repeatable.")
@click.option("--output", default=None, help="Edge-list file; default stdout.")
@click.pass_context
def generate(ctx, family, n, seed, options, output):
    """Sample a graph and emit its edge list."""
    body = _client(ctx).post("/generate", {
        "family": family, "n": n, "seed": seed,
        "options": _parse_options(options)})
    _write_output(body["edge_list"], output)
    click.echo(f"# n={body['n']} edges={body['edge_count']} "
               f"hash={body['edge_hash'][:16]}", err=True)


@main.command()
@click.argument("input_path")
@click.option("--one-based", is_flag=True,
              help="Vertex ids in the input start at 1.")
@click.option("--scaling", default="sqrt-n", show_default=True,
              type=click.Choice(["sqrt-n", "raw", "er-variance", "dr-scaled",
                                 "dr-centered", "bm-centered"]))
@click.option("--p", type=float, default=None, help="For er-variance scaling.")
@click.option("--d", type=int, default=None, help="For dr-* scalings.")
@click.option("--block-sizes", default=None, help="For bm-centered: 300,300,300")
@click.option("--p0", default=None, help="For bm-centered: scalar or rows a,b;c,d")
@click.option("--p-within", default=None, help="For bm-centered: 0.8,0.5,0.6")
@click.option("--kind", default="eigenvalues", show_default=True,
              type=click.Choice(["eigenvalues", "ecdf", "density"]))
@click.option("--sigma", type=float, default=None,
              help="Kernel bandwidth; default Silverman rule.")
@click.option("--grid", default=None, help="Density grid as min,max[,points].")
@click.option("--output", default=None, help="Output file; default stdout.")
@click.pass_context
def spectrum(ctx, input_path, one_based, scaling, p, d, block_sizes, p0,
             p_within, kind, sigma, grid, output):
    """Eigenvalues, ECDF, or kernel density of a graph's spectrum."""
    scale: Dict = {"mode": scaling, "p": p, "d": d}
    if block_sizes:
        scale["block_sizes"] = [int(s) for s in block_sizes.split(",")]
    if p_within:
        scale["p_within"] = [float(x) for x in p_within.split(",")]
    if p0 is not None:
        scale["p0"] = (
            [[float(x) for x in row.split(",")] for row in p0.split(";")]
            if ";" in p0 else float(p0))
    body = _client(ctx).post("/spectrum", {
        "edge_list": _read_input(input_path), "one_based": one_based,
        "scaling": scale, "output": kind, "sigma": sigma,
        "grid": _parse_grid(grid)})
    for w in body["warnings"]:
        click.echo(f"warning: {w}", err=True)
    if kind == "eigenvalues":
        _write_output("\n".join(f"{v:.12g}" for v in body["eigenvalues"]),
                      output)
    else:
        _write_output(body["csv"], output)


@main.command()
@click.option("--law", required=True,
              type=click.Choice(["semicircle", "semicircle-p", "kesten-mckay",
                                 "kesten-mckay-scaled"]))
@click.option("--p", type=float, default=None)
@click.option("--d", type=int, default=None)
@click.option("--kind", default="density", show_default=True,
              type=click.Choice(["density", "cdf"]))
@click.option("--grid", default=None, help="Evaluation grid min,max[,points].")
@click.option("--at", "at_points", default=None,
              help="Comma-separated points to evaluate instead of a grid.")
@click.option("--output", default=None, help="CSV file; default stdout.")
@click.pass_context
def law(ctx, law, p, d, kind, grid, at_points, output):
    """Evaluate a limiting spectral law's density or CDF."""
    payload = {"law": law, "p": p, "d": d, "output": kind,
               "grid": _parse_grid(grid)}
    if at_points:
        payload["x"] = [float(v) for v in at_points.split(",")]
    body = _client(ctx).post("/law", payload)
    lines = ["x,value"]
    lines += [f"{x:.12g},{v:.12g}" for x, v in zip(body["x"], body["values"])]
    _write_output("\n".join(lines) + "\n", output)


@main.command(name="bm-density")
@click.option("--block-sizes", required=True, help="e.g. 300,300,300")
@click.option("--p0", required=True,
              help="Off-block probability: scalar or rows a,b;c,d.")
@click.option("--p-within", required=True, help="e.g. 0.8,0.5,0.6")
@click.option("--eta", type=float, default=1e-3, show_default=True,
              help="Imaginary offset for the Stieltjes inversion.")
@click.option("--grid", default=None, help="Grid as min,max[,points].")
@click.option("--output", default=None, help="CSV file; default stdout.")
@click.pass_context
def bm_density(ctx, block_sizes, p0, p_within, eta, grid, output):
    """Theoretical block-model spectral density via its fixed-point system."""
    body = _client(ctx).post("/bm-density", {
        "block_sizes": [int(s) for s in block_sizes.split(",")],
        "p0": ([[float(x) for x in row.split(",")] for row in p0.split(";")]
               if ";" in p0 else float(p0)),
        "p_within": [float(x) for x in p_within.split(",")],
        "eta": eta, "grid": _parse_grid(grid)})
    for note in body["notes"]:
        click.echo(f"note: {note}", err=True)
    click.echo(f"# raw_mass={body['raw_mass']:.6f} p_star={body['p_star']}",
               err=True)
    _write_output(body["csv"], output)


def _fit_options(divergence, mc_samples, seed, use_analytic, grid_points):
    ua: object = use_analytic
    if use_analytic in ("true", "false"):
        ua = use_analytic == "true"
    return {"divergence": divergence, "mc_samples": mc_samples, "seed": seed,
            "use_analytic": ua, "grid_points": grid_points}


@main.command()
@click.argument("input_path")
@click.option("--one-based", is_flag=True)
@click.option("--family", required=True,
              type=click.Choice(["er", "dr", "grg", "ws", "ba", "bm"]))
@click.option("--divergence", default="l1-density", show_default=True,
              type=click.Choice(["kl", "l1-density", "l1-cdf"]))
@click.option("--mc-samples", default=30, show_default=True, type=int)
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--use-analytic", default="auto", show_default=True,
              type=click.Choice(["auto", "true", "false"]))
@click.option("--grid-points", default=2048, show_default=True, type=int)
@click.option("--bounds", default=None, help="Search interval lo,hi.")
@click.option("--step", default=None, type=float, help="Grid scan step.")
@click.option("--mode", default=None,
              type=click.Choice(["grid", "golden", "grid+golden"]))
@click.option("--integer", is_flag=True, help="Integer-valued parameter.")
@click.option("--output", default=None, help="JSON report file; default stdout.")
@click.pass_context
def fit(ctx, input_path, one_based, family, divergence, mc_samples, seed,
        use_analytic, grid_points, bounds, step, mode, integer, output):
    """Estimate one model's parameter for an observed graph."""
    payload = {
        "edge_list": _read_input(input_path), "one_based": one_based,
        "family": family,
        "options": _fit_options(divergence, mc_samples, seed, use_analytic,
                                grid_points)}
    if bounds:
        lo, hi = (float(v) for v in bounds.split(","))
        space = {"bounds": [[lo, hi]], "integer": integer}
        if step is not None:
            space["steps"] = [step]
        if mode:
            space["mode"] = mode
        payload["space"] = space
    body = _client(ctx).post("/fit", payload)
    _write_output(json.dumps(body["report"], indent=2) + "\n", output)


@main.command()
@click.argument("input_path")
@click.option("--one-based", is_flag=True)
@click.option("--candidates", default="er,grg,ws,ba", show_default=True,
              help="Comma-separated model families to compare.")
@click.option("--divergence", default="l1-cdf", show_default=True,
              type=click.Choice(["kl", "l1-density", "l1-cdf"]))
@click.option("--mc-samples", default=30, show_default=True, type=int)
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--grid-points", default=2048, show_default=True, type=int)
@click.option("--output", default=None, help="JSON report file; default stdout.")
@click.pass_context
def select(ctx, input_path, one_based, candidates, divergence, mc_samples,
           seed, grid_points, output):
    """Rank candidate models for an observed graph."""
    body = _client(ctx).post("/select", {
        "edge_list": _read_input(input_path), "one_based": one_based,
        "candidates": [c.strip() for c in candidates.split(",")],
        "options": _fit_options(divergence, mc_samples, seed, "auto",
                                grid_points)})
    report = {k: body[k] for k in ("winner", "tie", "fits", "failures")}
    _write_output(json.dumps(report, indent=2) + "\n", output)


@main.command()
@click.argument("config_path")
@click.option("--jobs", default=None, type=int,
              help="Parallel workers; default from the config file.")
@click.option("--csv-out", default=None, help="CSV results file.")
@click.option("--json-out", default=None, help="JSON results file.")
@click.pass_context
def experiment(ctx, config_path, jobs, csv_out, json_out):
    """Run a batch experiment described by a config file."""
    body = _client(ctx).post("/experiment", {
        "config": _read_input(config_path), "jobs": jobs})
    if csv_out:
        _write_output(body["csv"], csv_out)
    if json_out:
        _write_output(json.dumps(body["result"], indent=2) + "\n", json_out)
    if not csv_out and not json_out:
        _write_output(body["csv"], None)


if __name__ == "__main__":
    main()
