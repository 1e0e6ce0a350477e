"""SDP, eigenvalue and partitioned-SDP bounds for random matrix-polynomial lifts."""

__version__ = "0.1.0"

from .builtins import get_builtin
from .polynomials import MatrixPolynomial, make_polynomial, parse_poly, serialize_poly
from .lifts import LiftInstance, evaluate, find_bad_vertices, sample_lift
from .ball import BallTruncation, TruncatedAdjacency, build_truncated_adjacency, enumerate_ball
from .spectral import full_spectrum, hausdorff, lambda_max, lambda_min

__all__ = [
    "__version__",
    "get_builtin",
    "MatrixPolynomial",
    "make_polynomial",
    "parse_poly",
    "serialize_poly",
    "LiftInstance",
    "evaluate",
    "find_bad_vertices",
    "sample_lift",
    "BallTruncation",
    "TruncatedAdjacency",
    "build_truncated_adjacency",
    "enumerate_ball",
    "full_spectrum",
    "hausdorff",
    "lambda_max",
    "lambda_min",
]
