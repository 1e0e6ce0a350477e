"""Thin command-line client for the liftsdp service.

Every subcommand builds a request model, posts it to the service (a remote
URL via ``--server`` or the in-process app by default), and renders the JSON
response.  Exit codes: 0 success, 2 validation error, 3 solver
non-convergence (partial output is still printed when available).
"""

from __future__ import annotations

import json
import os
import pathlib
import sys

import click
import httpx
import pydantic

from . import __version__
from .errors import ConvergenceError, LiftSdpError
from .io import spectrum_to_csv, write_json
from .schemas import PolySpec, SolverOptions
from .service import ROUTES

EXIT_VALIDATION = 2
EXIT_CONVERGENCE = 3


class ClientError(Exception):
    def __init__(self, message, exit_code):
        super().__init__(message)
        self.exit_code = exit_code


class LocalClient:
    """Dispatch through the service route table without a network hop."""

    def post(self, path: str, payload: dict) -> dict:
        request_model, handler, _ = ROUTES[path]
        try:
            request = request_model.model_validate(payload)
            response = handler(request)
        except pydantic.ValidationError as exc:
            raise ClientError(str(exc), EXIT_VALIDATION) from exc
        except ConvergenceError as exc:
            raise ClientError(str(exc), EXIT_CONVERGENCE) from exc
        except (LiftSdpError, ValueError) as exc:
            raise ClientError(str(exc), EXIT_VALIDATION) from exc
        return response.model_dump()


class RemoteClient:
    def __init__(self, base_url: str):
        self.client = httpx.Client(base_url=base_url, timeout=None)

    def post(self, path: str, payload: dict) -> dict:
        response = self.client.post(path, json=payload)
        if response.status_code in (400, 422):
            raise ClientError(response.text, EXIT_VALIDATION)
        if response.status_code == 409:
            raise ClientError(response.text, EXIT_CONVERGENCE)
        response.raise_for_status()
        return response.json()


def poly_spec(text: str) -> dict:
    """--poly accepts 'builtin:<name>' or a DSL file path."""
    if text.startswith("builtin:"):
        return PolySpec(builtin=text.split(":", 1)[1]).model_dump()
    path = pathlib.Path(text)
    if not path.exists():
        raise click.UsageError(
            f"polynomial source {text!r}: no such file (use builtin:<name> for builtins)"
        )
    return PolySpec(dsl=path.read_text()).model_dump()


def parse_int_list(_ctx, _param, value):
    if not value:
        return []
    out = []
    for chunk in value:
        out.extend(int(tok) for tok in str(chunk).split(",") if tok)
    return out


def solver_options(tol, max_iter, restarts, solver_seed, dense_cutoff) -> dict:
    return SolverOptions(
        tol=tol, max_iter=max_iter, restarts=restarts,
        seed=solver_seed, dense_cutoff=dense_cutoff,
    ).model_dump()


def emit(ctx, payload: dict, out_name: str, fmt: str):
    out_dir = ctx.obj.get("out")
    if out_dir:
        out_dir = pathlib.Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        write_json(out_dir / out_name, payload)
    if fmt == "csv":
        for key, value in payload.items():
            if not isinstance(value, (dict, list)):
                click.echo(f"{key},{value}")
    else:
        click.echo(json.dumps(payload, indent=2, sort_keys=True))


def common_options(fn):
    fn = click.option("--tol", type=float, default=1e-9, show_default=True,
                      help="solver tolerance")(fn)
    fn = click.option("--max-iter", type=int, default=20000, show_default=True)(fn)
    fn = click.option("--restarts", type=int, default=5, show_default=True)(fn)
    fn = click.option("--solver-seed", type=int, default=0, show_default=True)(fn)
    fn = click.option("--dense-cutoff", type=int, default=4000, show_default=True)(fn)
    fn = click.option("--format", "fmt", type=click.Choice(["json", "csv"]),
                      default="json", show_default=True)(fn)
    return fn


@click.group()
@click.version_option(__version__)
@click.option("--server", envvar="LIFTSDP_SERVER", default=None,
              help="base URL of a running liftsdp service; default runs in-process")
@click.option("--out", type=click.Path(file_okay=False), default=None,
              help="directory for JSON/CSV artifacts")
@click.pass_context
def main(ctx, server, out):
    """Random 2CSP lifts: spectra, SDP bounds and pasting certificates."""
    ctx.ensure_object(dict)
    ctx.obj["client"] = RemoteClient(server) if server else LocalClient()
    ctx.obj["out"] = out


def _post(ctx, path, payload):
    try:
        return ctx.obj["client"].post(path, payload)
    except ClientError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(exc.exit_code)


@main.command()
@click.option("--poly", required=True, help="builtin:<name> or a DSL file path")
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json")
@click.pass_context
def parse(ctx, poly, fmt):
    """Parse a polynomial and print its canonical form."""
    payload = _post(ctx, "/parse", {"poly": poly_spec(poly)})
    emit(ctx, payload, "parse.json", fmt)


@main.command()
@click.option("--poly", required=True)
@click.option("--n", type=int, required=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--unsigned", is_flag=True, help="sample without edge signs")
@click.option("--include-matrix", is_flag=True, help="embed coordinate text of the evaluation")
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json")
@click.pass_context
def sample(ctx, poly, n, seed, unsigned, include_matrix, fmt):
    """Sample a random lift; the JSON record re-derives it exactly."""
    payload = _post(ctx, "/sample", {
        "poly": poly_spec(poly), "n": n, "seed": seed,
        "signed": not unsigned, "include_matrix": include_matrix,
    })
    out_dir = ctx.obj.get("out")
    if out_dir and payload.get("matrix"):
        matrix_dir = pathlib.Path(out_dir)
        matrix_dir.mkdir(parents=True, exist_ok=True)
        (matrix_dir / "lift_matrix.mtx").write_text(payload["matrix"])
        payload = {**payload, "matrix": str(matrix_dir / "lift_matrix.mtx")}
    emit(ctx, payload, "lift.json", fmt)


@main.command()
@click.option("--poly", required=True)
@click.option("--source", type=click.Choice(["lift", "ball", "compare"]), default="lift",
              show_default=True)
@click.option("--n", type=int, default=None)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--f0", type=int, default=None)
@click.option("--negate", is_flag=True)
@click.option("--unsigned", is_flag=True)
@click.option("--dense-cutoff", type=int, default=4000, show_default=True)
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json")
@click.pass_context
def spectrum(ctx, poly, source, n, seed, f0, negate, unsigned, dense_cutoff, fmt):
    """Spectrum of a lift or ball; 'compare' reports the Hausdorff distance."""
    if source == "compare":
        payload = _post(ctx, "/spectrum/compare", {
            "poly": poly_spec(poly), "n": n, "seed": seed, "f0": f0,
            "negate": negate, "signed": not unsigned, "dense_cutoff": dense_cutoff,
        })
        emit(ctx, payload, "spectra_compare.json", fmt)
        return
    payload = _post(ctx, "/spectrum", {
        "poly": poly_spec(poly), "source": source, "n": n, "seed": seed, "f0": f0,
        "negate": negate, "signed": not unsigned, "dense_cutoff": dense_cutoff,
    })
    out_dir = ctx.obj.get("out")
    if out_dir and payload.get("spectrum"):
        spectra_dir = pathlib.Path(out_dir) / "spectra"
        spectra_dir.mkdir(parents=True, exist_ok=True)
        name = f"{source}_n{n}_seed{seed}.csv" if source == "lift" else f"ball_f{f0}.csv"
        (spectra_dir / name).write_text(spectrum_to_csv(payload["spectrum"]))
    if fmt == "csv" and payload.get("spectrum"):
        click.echo(spectrum_to_csv(payload["spectrum"]), nl=False)
        return
    emit(ctx, payload, "spectrum.json", fmt)


@main.command()
@click.option("--poly", required=True)
@click.option("--n", type=int, required=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--negate", is_flag=True, help="optimize -A (cut-style objective)")
@click.option("--dual/--no-dual", default=False, show_default=True)
@click.option("--opt", is_flag=True, help="also brute-force the exact optimum (N <= 24)")
@click.option("--dump-factor", is_flag=True, help="include the dense Gram factor")
@common_options
@click.pass_context
def sdp(ctx, poly, n, seed, negate, dual, opt, dump_factor, tol, max_iter, restarts,
        solver_seed, dense_cutoff, fmt):
    """Row-normalized SDP bound of a random lift."""
    payload = _post(ctx, "/sdp", {
        "poly": poly_spec(poly), "n": n, "seed": seed, "negate": negate,
        "include_dual": dual, "include_opt": opt, "include_factor": dump_factor,
        "params": solver_options(tol, max_iter, restarts, solver_seed, dense_cutoff),
    })
    out_dir = ctx.obj.get("out")
    if out_dir:
        solutions = pathlib.Path(out_dir) / "solutions"
        solutions.mkdir(parents=True, exist_ok=True)
        write_json(solutions / f"sdp_n{n}_seed{seed}.json", payload)
    emit(ctx, payload, "sdp.json", fmt)


@main.command()
@click.option("--poly", required=True)
@click.option("--f0", type=int, required=True)
@click.option("--negate", is_flag=True)
@click.option("--dual/--no-dual", default=True, show_default=True)
@click.option("--export-ball", is_flag=True, help="include ball labels and coordinate text")
@click.option("--dump-factor", is_flag=True, help="include the dense Gram factor")
@common_options
@click.pass_context
def partsdp(ctx, poly, f0, negate, dual, export_ball, dump_factor, tol, max_iter,
            restarts, solver_seed, dense_cutoff, fmt):
    """Class-trace SDP bound of the ball-truncated infinite lift."""
    payload = _post(ctx, "/partsdp", {
        "poly": poly_spec(poly), "f0": f0, "negate": negate,
        "include_dual": dual, "export_ball": export_ball, "include_factor": dump_factor,
        "params": solver_options(tol, max_iter, restarts, solver_seed, dense_cutoff),
    })
    out_dir = ctx.obj.get("out")
    if out_dir:
        solutions = pathlib.Path(out_dir) / "solutions"
        solutions.mkdir(parents=True, exist_ok=True)
        write_json(solutions / f"partsdp_f{f0}.json", payload)
    emit(ctx, payload, "partsdp.json", fmt)


@main.command()
@click.option("--poly", required=True)
@click.option("--n", type=int, required=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--f0", type=int, required=True)
@click.option("--negate", is_flag=True)
@click.option("--basic-sdp", is_flag=True, help="also solve the plain SDP on the lift")
@click.option("--psd-check/--no-psd-check", default=True, show_default=True)
@common_options
@click.pass_context
def paste(ctx, poly, n, seed, f0, negate, basic_sdp, psd_check, tol, max_iter,
          restarts, solver_seed, dense_cutoff, fmt):
    """Paste a ball solution into a lift and certify the SDP lower bound."""
    payload = _post(ctx, "/paste", {
        "poly": poly_spec(poly), "n": n, "seed": seed, "f0": f0, "negate": negate,
        "include_basic_sdp": basic_sdp, "psd_check": psd_check,
        "params": solver_options(tol, max_iter, restarts, solver_seed, dense_cutoff),
    })
    emit(ctx, payload, "paste_report.json", fmt)


@main.command()
@click.option("--poly", required=True)
@click.option("--f0-max", type=int, required=True)
@click.option("--tol", type=float, default=1e-3, show_default=True,
              help="stop when the dual increment drops below this")
@click.option("--negate", is_flag=True)
@click.option("--restarts", type=int, default=5, show_default=True)
@click.option("--solver-seed", type=int, default=0, show_default=True)
@click.option("--dense-cutoff", type=int, default=4000, show_default=True)
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json")
@click.pass_context
def bracket(ctx, poly, f0_max, tol, negate, restarts, solver_seed, dense_cutoff, fmt):
    """Bracket the infinite-lift value from growing ball truncations."""
    payload = _post(ctx, "/bracket", {
        "poly": poly_spec(poly), "f0_max": f0_max, "tol": tol, "negate": negate,
        "params": solver_options(1e-9, 20000, restarts, solver_seed, dense_cutoff),
    })
    emit(ctx, payload, "bracket.json", fmt)


@main.command()
@click.option("--poly", required=True)
@click.option("--n", "n_list", multiple=True, callback=parse_int_list, required=True,
              help="lift sizes (repeat or comma-separate)")
@click.option("--seeds", multiple=True, callback=parse_int_list, required=True)
@click.option("--f0", "f0_list", multiple=True, callback=parse_int_list,
              help="ball radii for the bracket")
@click.option("--negate", is_flag=True)
@click.option("--paste-f0", type=int, default=None)
@click.option("--threads", type=int, default=1, show_default=True)
@common_options
@click.pass_context
def experiment(ctx, poly, n_list, seeds, f0_list, negate, paste_f0, threads,
               tol, max_iter, restarts, solver_seed, dense_cutoff, fmt):
    """Run the full pipeline over a grid of (n, seed) and emit a report."""
    payload = _post(ctx, "/experiment", {
        "poly": poly_spec(poly), "n_list": n_list, "seeds": seeds,
        "f0_list": f0_list, "negate": negate, "paste_f0": paste_f0,
        "threads": threads, "dense_cutoff": dense_cutoff,
        "params": solver_options(tol, max_iter, restarts, solver_seed, dense_cutoff),
    })
    emit(ctx, payload, "report.json", fmt)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
def serve(host, port):
    """Run the HTTP service."""
    import uvicorn

    uvicorn.run("liftsdp.service:app", host=host, port=port)


if __name__ == "__main__":
    main()
