import json

import numpy as np
import pytest

from liftsdp.builtins import get_builtin
from liftsdp.errors import DimensionError
from liftsdp.experiments import (
    estimate_s_star,
    run_compare_spectra,
    run_experiment,
    run_spectrum,
)
from liftsdp.polynomials import make_polynomial, serialize_poly
from liftsdp.schemas import (
    CompareSpectraRequest,
    ExperimentConfig,
    PolySpec,
    SolverOptions,
    SpectrumRequest,
)
from liftsdp.sdp import SolverParams


def poly_spec(name):
    return PolySpec(builtin=name)


def test_bracket_single_constant_term_collapses(rng):
    # r = 1 polynomial with a single constant coefficient c: the value is c
    c = 1.75
    p = make_polynomial(0, 0, 1, {(): np.array([[c]])})
    spec = PolySpec(dsl=serialize_poly(p))
    bracket = estimate_s_star(spec.load(), f0_max=2, tol=1e-9)
    assert bracket.lower == pytest.approx(c, abs=1e-9)
    assert bracket.upper == pytest.approx(c, abs=1e-9)
    assert bracket.stopped_early


def test_bracket_sequences_monotone(p3):
    bracket = estimate_s_star(p3, f0_max=4, tol=0.0)
    primals = [rec.primal for rec in bracket.per_radius]
    duals = [rec.dual for rec in bracket.per_radius]
    assert all(b >= a - 1e-7 for a, b in zip(primals, primals[1:]))
    assert all(b >= a - 1e-7 for a, b in zip(duals, duals[1:]))
    assert bracket.lower == pytest.approx(max(primals), abs=1e-12)
    assert bracket.upper == pytest.approx(duals[-1], abs=1e-12)
    assert bracket.lower <= bracket.upper + 1e-6


def test_bracket_early_stop_diag(p3):
    bracket = estimate_s_star(p3, f0_max=9, tol=0.2)
    assert bracket.stopped_early
    assert bracket.convergence_diag <= 0.2
    assert bracket.per_radius[-1].f0 < 9


def test_spectrum_lift_vs_ball_and_csv(p3):
    req = SpectrumRequest(poly=poly_spec("p3"), source="ball", f0=3)
    resp = run_spectrum(req)
    assert resp.dim == 22
    assert resp.spectrum is not None
    assert resp.lambda_max == pytest.approx(2.4494897, abs=1e-6)


def test_compare_spectra_report(p3):
    req = CompareSpectraRequest(poly=poly_spec("p3"), n=200, seed=1, f0=4)
    resp = run_compare_spectra(req)
    assert resp.dim_lift == 200
    assert resp.hausdorff_distance >= resp.lambda_max_diff - 1e-12
    assert "truncation" in resp.caveat


def test_compare_spectra_dimension_guard():
    req = CompareSpectraRequest(poly=poly_spec("p3"), n=600, seed=1, f0=2,
                                dense_cutoff=100)
    with pytest.raises(DimensionError):
        run_compare_spectra(req)


def test_unsigned_mode_trivial_eigenvalue_outlier(p3):
    signed = run_spectrum(SpectrumRequest(
        poly=poly_spec("p3"), source="lift", n=256, seed=3, signed=True))
    unsigned = run_spectrum(SpectrumRequest(
        poly=poly_spec("p3"), source="lift", n=256, seed=3, signed=False))
    assert unsigned.lambda_max == pytest.approx(3.0, abs=1e-9)
    assert signed.lambda_max < 3.0 - 0.05


def small_config(**kw):
    base = dict(
        poly=poly_spec("p3").model_dump(),
        n_list=[64], seeds=[1, 2], f0_list=[0, 1, 2],
        negate=True,
        params=SolverOptions(restarts=2).model_dump(),
        include_dual_max_dim=0,
    )
    base.update(kw)
    return ExperimentConfig.model_validate(base)


def test_run_experiment_happy_path():
    report = run_experiment(small_config())
    assert len(report.records) == 2
    assert all(r.error is None for r in report.records)
    assert all(r.sdp_primal is not None and r.eig is not None for r in report.records)
    agg = report.aggregates[0]
    assert agg.seeds == 2
    assert agg.sdp_min <= agg.sdp_mean <= agg.sdp_max
    assert [rec.f0 for rec in report.per_radius] == [0, 1, 2]
    assert report.bracket is not None


def test_run_experiment_record_error_isolation():
    # odd n with d > 0 fails per record but the report still comes out
    config = small_config(n_list=[63, 64], f0_list=[])
    report = run_experiment(config)
    failed = [r for r in report.records if r.error]
    fine = [r for r in report.records if not r.error]
    assert len(failed) == 2 and len(fine) == 2
    assert "even n" in failed[0].error


def test_run_experiment_empty_seeds_rejected():
    with pytest.raises(ValueError):
        small_config(seeds=[])


def test_run_experiment_threads_match_serial():
    serial = run_experiment(small_config())
    threaded = run_experiment(small_config(threads=2))
    for a, b in zip(serial.records, threaded.records):
        assert a.sdp_primal == b.sdp_primal
        assert a.eig == b.eig


def test_report_deterministic_numeric_fields():
    def strip(report):
        data = report.model_dump()
        data.pop("wall_time")
        for rec in data["records"]:
            rec.pop("wall_time")
        return json.dumps(data, sort_keys=True)

    a = strip(run_experiment(small_config()))
    b = strip(run_experiment(small_config()))
    assert a == b


def test_report_validates_against_shipped_schema():
    import importlib.resources as resources

    import jsonschema

    report = run_experiment(small_config())
    schema = json.loads(
        resources.files("liftsdp").joinpath("data/report.schema.json").read_text()
    )
    jsonschema.validate(json.loads(report.model_dump_json()), schema)


def test_schema_file_in_sync():
    import importlib.resources as resources

    from liftsdp.schemas import ExperimentReport

    shipped = json.loads(
        resources.files("liftsdp").joinpath("data/report.schema.json").read_text()
    )
    assert shipped == ExperimentReport.model_json_schema()


def test_experiment_with_paste():
    config = small_config(n_list=[128], seeds=[5], paste_f0=1, f0_list=[])
    report = run_experiment(config)
    rec = report.records[0]
    assert rec.error is None
    assert rec.pasted_lower is not None
    assert rec.pasted_lower <= rec.sdp_primal + 1e-6


def test_k23_sdp_strictly_below_eigenvalue_bound():
    # the non-regular model separates the two bounds on every sampled lift
    from liftsdp.lifts import evaluate, sample_lift
    from liftsdp.sdp import sdp_primal, sdp_dual, SolverParams
    from liftsdp.spectral import lambda_max

    poly = get_builtin("k23")
    lift = sample_lift(0, 6, 600, seed=1)
    op = evaluate(poly, lift)
    eig = lambda_max(op)
    primal = sdp_primal(op)
    dual = sdp_dual(op, params=SolverParams(dual_iters=300, dual_polish=False),
                    primal_value=primal.objective)
    assert dual.value <= eig - 0.02
    assert primal.objective <= dual.value + 1e-6


def test_compare_spectra_p3_magnitude():
    req = CompareSpectraRequest(poly=poly_spec("p3"), n=400, seed=1, f0=7)
    resp = run_compare_spectra(req)
    assert resp.lambda_max_diff <= 0.15
