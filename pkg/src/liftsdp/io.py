"""Export helpers: coordinate text for matrices, CSV spectra, JSON reports."""

from __future__ import annotations

import io as _io
import json

import numpy as np
import scipy.io
import scipy.sparse as sp


def matrix_to_coordinate_text(matrix, comment: str = "") -> str:
    """MatrixMarket coordinate text for a sparse or dense matrix."""
    buf = _io.BytesIO()
    scipy.io.mmwrite(buf, sp.coo_matrix(matrix), comment=comment)
    return buf.getvalue().decode()


def coordinate_text_to_matrix(text: str) -> sp.csr_matrix:
    return sp.csr_matrix(scipy.io.mmread(_io.BytesIO(text.encode())))


def spectrum_to_csv(values) -> str:
    return "\n".join(repr(float(v)) for v in np.asarray(values).ravel()) + "\n"


def ball_export(ball, matrix=None) -> dict:
    """Ball vertices as letter strings plus, optionally, the truncated matrix."""
    out = {"radius": ball.radius, "size": ball.size, "labels": ball.labels()}
    if matrix is not None:
        out["matrix"] = matrix_to_coordinate_text(
            matrix, comment=f"ball radius {ball.radius}, {ball.size} vertices"
        )
    return out


def write_json(path, payload) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
