"""HTTP facade over the experiment pipeline.

Each route wraps one pipeline function with pydantic request/response models.
The same route table drives the in-process CLI client, so the two surfaces
cannot drift apart.  Solves run synchronously; heavy experiments are expected
to be driven by a single local client.
"""

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel

from . import __version__
from .builtins import builtin_names
from .errors import ConvergenceError, LiftSdpError
from .experiments import (
    run_bracket,
    run_compare_spectra,
    run_experiment,
    run_parse,
    run_part_sdp,
    run_paste,
    run_sample,
    run_sdp,
    run_spectrum,
)
from .schemas import (
    BracketRequest,
    BracketResponse,
    BuiltinsResponse,
    CompareSpectraRequest,
    CompareSpectraResponse,
    ExperimentConfig,
    ExperimentReport,
    HealthResponse,
    ParseRequest,
    ParseResponse,
    PartSdpRequest,
    PartSdpResponse,
    PasteRequest,
    PasteResponse,
    SampleRequest,
    SampleRequestResponse,
    SdpRequest,
    SdpResponse,
    SpectrumRequest,
    SpectrumResponse,
)

# path -> (request model, handler, response model)
ROUTES: dict[str, tuple[type[BaseModel], object, type[BaseModel]]] = {
    "/parse": (ParseRequest, run_parse, ParseResponse),
    "/sample": (SampleRequest, run_sample, SampleRequestResponse),
    "/spectrum": (SpectrumRequest, run_spectrum, SpectrumResponse),
    "/spectrum/compare": (CompareSpectraRequest, run_compare_spectra, CompareSpectraResponse),
    "/sdp": (SdpRequest, run_sdp, SdpResponse),
    "/partsdp": (PartSdpRequest, run_part_sdp, PartSdpResponse),
    "/paste": (PasteRequest, run_paste, PasteResponse),
    "/bracket": (BracketRequest, run_bracket, BracketResponse),
    "/experiment": (ExperimentConfig, run_experiment, ExperimentReport),
}


def create_app() -> FastAPI:
    app = FastAPI(title="liftsdp", version=__version__)

    @app.get("/health", response_model=HealthResponse)
    def health():
        return HealthResponse(status="ok", version=__version__)

    @app.get("/builtins", response_model=BuiltinsResponse)
    def builtins():
        return BuiltinsResponse(names=builtin_names())

    def _register(path, request_model, handler, response_model):
        @app.post(path, response_model=response_model, name=handler.__name__)
        def endpoint(req: request_model):  # type: ignore[valid-type]
            try:
                return handler(req)
            except ConvergenceError as exc:
                raise HTTPException(status_code=409, detail=str(exc)) from exc
            except LiftSdpError as exc:
                raise HTTPException(status_code=400, detail=str(exc)) from exc
            except ValueError as exc:
                raise HTTPException(status_code=400, detail=str(exc)) from exc

    for path, (request_model, handler, response_model) in ROUTES.items():
        _register(path, request_model, handler, response_model)
    return app


app = create_app()
