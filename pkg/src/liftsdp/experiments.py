"""Orchestration: bracket estimation, spectra comparison, experiment batches."""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .ball import build_truncated_adjacency, enumerate_ball
from .errors import DimensionError
from .io import ball_export
from .lifts import SparseHermitianOperator, evaluate, sample_lift
from .pasting import certify_lower_bound
from .polynomials import MatrixPolynomial, is_self_adjoint, serialize_poly
from .schemas import (
    BracketResponse,
    CompareSpectraRequest,
    CompareSpectraResponse,
    DualInfo,
    ExperimentAggregate,
    ExperimentConfig,
    ExperimentRecord,
    ExperimentReport,
    BracketRequest,
    ParseRequest,
    ParseResponse,
    PartSdpRequest,
    PartSdpResponse,
    PasteRequest,
    PasteResponse,
    RadiusRecord,
    SampleRequest,
    SampleRequestResponse,
    SdpRequest,
    SdpResponse,
    SpectrumRequest,
    SpectrumResponse,
    LiftRecord,
)
from .sdp import SolverParams, opt_bruteforce, part_sdp_dual, part_sdp_primal, sdp_dual, sdp_primal
from .spectral import extreme_eigenpair, full_spectrum, hausdorff, spectrum_summary
from .io import matrix_to_coordinate_text

TRUNCATION_CAVEAT = (
    "ball truncation bounds the infinite operator from below; the dual value at "
    "the largest radius is a convergence estimate, not a certified upper bound"
)


def run_parse(req: ParseRequest) -> ParseResponse:
    poly = req.poly.load()
    return ParseResponse(
        d=poly.d, e=poly.e, r=poly.r,
        degree=poly.degree(), n_terms=len(poly.terms),
        self_adjoint=is_self_adjoint(poly),
        name=poly.name,
        canonical_dsl=serialize_poly(poly),
    )


def run_sample(req: SampleRequest) -> SampleRequestResponse:
    poly = req.poly.load()
    lift = sample_lift(poly.d, poly.e, req.n, req.seed, signed=req.signed)
    op = evaluate(poly, lift)
    return SampleRequestResponse(
        record=LiftRecord(**lift.record()),
        dim=op.dim,
        nnz=op.matrix.nnz,
        hermitian_defect=op.hermitian_defect(),
        matrix=matrix_to_coordinate_text(op.matrix) if req.include_matrix else None,
    )


def _lift_operator(poly, n, seed, signed, negate) -> SparseHermitianOperator:
    lift = sample_lift(poly.d, poly.e, n, seed, signed=signed)
    op = evaluate(poly, lift)
    if negate:
        op = SparseHermitianOperator(matrix=-op.matrix, n=op.n, r=op.r)
    return op


def run_spectrum(req: SpectrumRequest) -> SpectrumResponse:
    poly = req.poly.load()
    if req.source == "lift":
        op = _lift_operator(poly, req.n, req.seed, req.signed, req.negate)
        matrix, dim = op.matrix, op.dim
    else:
        ball = enumerate_ball(poly, req.f0)
        ta = build_truncated_adjacency(poly, ball, negate=req.negate)
        matrix, dim = ta.matrix, ta.dim
    if req.full and dim <= req.dense_cutoff:
        spec = full_spectrum(matrix, cutoff_dim=req.dense_cutoff)
        return SpectrumResponse(
            dim=dim, lambda_max=float(spec[-1]), lambda_min=float(spec[0]),
            residual=0.0, spectrum=[float(v) for v in spec],
        )
    summary = spectrum_summary(matrix, tol=req.tol, dense_cutoff=0)
    return SpectrumResponse(
        dim=dim, lambda_max=summary.lambda_max, lambda_min=summary.lambda_min,
        residual=summary.residual, spectrum=None,
    )


def run_compare_spectra(req: CompareSpectraRequest) -> CompareSpectraResponse:
    poly = req.poly.load()
    op = _lift_operator(poly, req.n, req.seed, req.signed, req.negate)
    if op.dim > req.dense_cutoff:
        raise DimensionError(
            f"lift dimension {op.dim} exceeds dense cutoff {req.dense_cutoff}"
        )
    ball = enumerate_ball(poly, req.f0)
    ta = build_truncated_adjacency(poly, ball, negate=req.negate)
    if ta.dim > req.dense_cutoff:
        raise DimensionError(
            f"ball dimension {ta.dim} exceeds dense cutoff {req.dense_cutoff}"
        )
    spec_lift = full_spectrum(op.matrix, cutoff_dim=req.dense_cutoff)
    spec_ball = full_spectrum(ta.matrix, cutoff_dim=req.dense_cutoff)
    return CompareSpectraResponse(
        dim_lift=op.dim, dim_ball=ta.dim,
        hausdorff_distance=hausdorff(spec_lift, spec_ball),
        lambda_max_lift=float(spec_lift[-1]),
        lambda_max_ball=float(spec_ball[-1]),
        lambda_max_diff=abs(float(spec_lift[-1]) - float(spec_ball[-1])),
        caveat=TRUNCATION_CAVEAT,
    )


def run_sdp(req: SdpRequest) -> SdpResponse:
    poly = req.poly.load()
    op = _lift_operator(poly, req.n, req.seed, True, req.negate)
    params = req.params.to_params()
    primal = sdp_primal(op, params)
    eig = None
    if req.include_eig:
        eig = extreme_eigenpair(op, "LA", tol=params.tol if params.tol > 1e-12 else 1e-9,
                                seed=params.seed)[0]
    dual = None
    if req.include_dual:
        cert = sdp_dual(op, params, primal_value=primal.objective)
        dual = DualInfo(
            value=cert.value, zeta=[float(z) for z in cert.zeta],
            gap=cert.value - primal.objective, polished=bool(cert.meta.get("polished")),
        )
    opt = opt_bruteforce(op) if req.include_opt else None
    return SdpResponse(
        n=req.n, dim=op.dim,
        objective=primal.objective,
        max_residual=float(np.max(primal.residuals)),
        factor_width=primal.k,
        converged=bool(primal.meta.get("converged")),
        eig=eig, dual=dual, opt=opt,
        factor=primal.factor.real.tolist() if req.include_factor else None,
    )


def run_part_sdp(req: PartSdpRequest) -> PartSdpResponse:
    poly = req.poly.load()
    ball = enumerate_ball(poly, req.f0)
    ta = build_truncated_adjacency(poly, ball, negate=req.negate)
    params = req.params.to_params()
    primal = part_sdp_primal(ta, params)
    dual = None
    if req.include_dual:
        cert = part_sdp_dual(ta, params, primal_value=primal.objective)
        dual = DualInfo(
            value=cert.value, zeta=[float(z) for z in cert.zeta],
            gap=cert.value - primal.objective, polished=bool(cert.meta.get("polished")),
        )
    eig = None
    if req.include_eig:
        eig = extreme_eigenpair(ta, "LA", tol=1e-9, seed=params.seed)[0]
    return PartSdpResponse(
        f0=req.f0, ball_size=ball.size, dim=ta.dim,
        primal=primal.objective,
        max_residual=float(np.max(primal.residuals)),
        dual=dual, eig=eig,
        ball=ball_export(ball, ta.matrix) if req.export_ball else None,
        factor=primal.factor.real.tolist() if req.include_factor else None,
    )


def run_paste(req: PasteRequest) -> PasteResponse:
    poly = req.poly.load()
    report = certify_lower_bound(
        poly, req.n, req.seed, req.f0,
        params=req.params.to_params(),
        negate=req.negate,
        include_basic_sdp=req.include_basic_sdp,
        psd_check=req.psd_check,
    )
    return PasteResponse(**report.to_json_dict())


def estimate_s_star(
    poly: MatrixPolynomial,
    f0_max: int,
    tol: float = 1e-3,
    params: SolverParams | None = None,
    negate: bool = False,
) -> BracketResponse:
    """Bracket the infinite-lift class-trace SDP value from ball truncations.

    The lower side is the best primal over radii, certified because any
    feasible ball solution embeds feasibly into the infinite problem.  The
    upper side is the dual at the largest radius; truncation approaches the
    infinite value from below, so it is reported with the per-radius sequence
    and the last increment as a convergence diagnostic.
    """
    params = params or SolverParams()
    records: list[RadiusRecord] = []
    lower = -np.inf
    prev_dual = None
    diag = None
    stopped = False
    for f0 in range(f0_max + 1):
        ball = enumerate_ball(poly, f0)
        ta = build_truncated_adjacency(poly, ball, negate=negate)
        use = params
        if ta.dim > params.dense_cutoff:
            use = params.replace(dual_iters=min(params.dual_iters, 80))
        primal = part_sdp_primal(ta, use)
        dual = part_sdp_dual(ta, use, primal_value=primal.objective)
        records.append(RadiusRecord(
            f0=f0, ball_size=ball.size, dim=ta.dim,
            primal=primal.objective, dual=dual.value,
            gap=dual.value - primal.objective,
        ))
        lower = max(lower, primal.objective)
        if prev_dual is not None:
            diag = abs(dual.value - prev_dual)
            if diag <= tol:
                stopped = f0 < f0_max
                prev_dual = dual.value
                break
        prev_dual = dual.value
    upper = records[-1].dual
    return BracketResponse(
        lower=lower,
        upper=upper,
        gap=upper - lower,
        lower_note="max over radii of the feasible truncated primal; certified lower bound",
        upper_note=TRUNCATION_CAVEAT,
        per_radius=records,
        convergence_diag=diag,
        stopped_early=stopped,
    )


def run_bracket(req: BracketRequest) -> BracketResponse:
    return estimate_s_star(
        req.poly.load(), req.f0_max, tol=req.tol,
        params=req.params.to_params(), negate=req.negate,
    )


def _experiment_record(config: ExperimentConfig, poly, n, seed) -> ExperimentRecord:
    t0 = time.time()
    params = config.params.to_params()
    try:
        op = _lift_operator(poly, n, seed, True, config.negate)
        eig = extreme_eigenpair(op, "LA", tol=1e-9, seed=params.seed)[0]
        primal = sdp_primal(op, params)
        dual_value = None
        if op.dim <= config.include_dual_max_dim:
            dual_value = sdp_dual(op, params, primal_value=primal.objective).value
        pasted = None
        if config.paste_f0 is not None:
            pasted = certify_lower_bound(
                poly, n, seed, config.paste_f0, params=params,
                negate=config.negate, psd_check=False,
            ).sigma_prime_objective
        return ExperimentRecord(
            n=n, seed=seed, eig=eig,
            sdp_primal=primal.objective, sdp_dual=dual_value,
            pasted_lower=pasted, wall_time=time.time() - t0,
        )
    except Exception as exc:  # record-level isolation: partial reports still emitted
        return ExperimentRecord(
            n=n, seed=seed, error=f"{type(exc).__name__}: {exc}",
            wall_time=time.time() - t0,
        )


def run_experiment(config: ExperimentConfig) -> ExperimentReport:
    t0 = time.time()
    poly = config.poly.load()
    jobs = [(n, seed) for n in config.n_list for seed in config.seeds]
    if config.threads > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            records = list(pool.map(
                lambda job: _experiment_record(config, poly, job[0], job[1]), jobs
            ))
    else:
        records = [_experiment_record(config, poly, n, seed) for n, seed in jobs]
    per_radius: list[RadiusRecord] = []
    bracket = None
    if config.f0_list:
        bracket = estimate_s_star(
            poly, max(config.f0_list), tol=0.0,
            params=config.params.to_params(), negate=config.negate,
        )
        wanted = set(config.f0_list)
        per_radius = [rec for rec in bracket.per_radius if rec.f0 in wanted]
    aggregates = []
    for n in config.n_list:
        vals = [r.sdp_primal for r in records if r.n == n and r.sdp_primal is not None]
        aggregates.append(ExperimentAggregate(
            n=n,
            sdp_mean=float(np.mean(vals)) if vals else None,
            sdp_min=float(np.min(vals)) if vals else None,
            sdp_max=float(np.max(vals)) if vals else None,
            seeds=len(vals),
        ))
    return ExperimentReport(
        config=config,
        records=sorted(records, key=lambda r: (r.n, r.seed)),
        per_radius=per_radius,
        bracket=bracket,
        aggregates=aggregates,
        version=__version__,
        wall_time=time.time() - t0,
    )
