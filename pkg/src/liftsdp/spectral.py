"""Extreme and full eigenvalue computation, plus Hausdorff distance of spectra.

Large problems go through ARPACK (restarted Lanczos) with a deterministic
start vector; small ones fall back to dense LAPACK.  Every returned extreme
eigenvalue carries an explicitly computed residual ||Av - lambda v||.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import ConvergenceError, DimensionError, InputError

DENSE_FALLBACK_DIM = 128
DEFAULT_DENSE_CUTOFF = 4000


@dataclass(frozen=True)
class SpectrumSummary:
    lambda_max: float
    lambda_min: float
    residual: float
    iterations: int
    spectrum: np.ndarray | None = None


def _as_matrix(a):
    from .lifts import SparseHermitianOperator

    if isinstance(a, SparseHermitianOperator):
        return a.matrix
    from .ball import TruncatedAdjacency

    if isinstance(a, TruncatedAdjacency):
        return a.matrix
    return a


def _start_vector(dim: int, seed: int) -> np.ndarray:
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence((seed, 0x5EED))))
    v = rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def extreme_eigenpair(a, which: str = "LA", tol: float = 1e-9, seed: int = 0):
    """(eigenvalue, unit vector, residual) at the requested end of the spectrum."""
    a = _as_matrix(a)
    dim = a.shape[0]
    if dim <= DENSE_FALLBACK_DIM and not isinstance(a, spla.LinearOperator):
        dense = a.toarray() if sp.issparse(a) else np.asarray(a)
        vals, vecs = np.linalg.eigh(dense)
        idx = -1 if which == "LA" else 0
        lam, vec = float(vals[idx]), vecs[:, idx]
    else:
        v0 = _start_vector(dim, seed)
        try:
            vals, vecs = spla.eigsh(a, k=1, which=which, tol=tol, v0=v0, maxiter=max(5000, dim * 10))
        except spla.ArpackNoConvergence as exc:
            if len(exc.eigenvalues):
                lam = float(exc.eigenvalues[0])
                raise ConvergenceError(
                    f"eigensolver did not converge (best {lam:.6g})", best_value=lam
                ) from exc
            raise ConvergenceError("eigensolver did not converge") from exc
        lam, vec = float(vals[0]), vecs[:, 0]
    resid = float(np.linalg.norm(a @ vec - lam * vec))
    return lam, vec, resid


def lambda_max(a, tol: float = 1e-9, seed: int = 0) -> float:
    return extreme_eigenpair(a, "LA", tol, seed)[0]


def lambda_min(a, tol: float = 1e-9, seed: int = 0) -> float:
    return extreme_eigenpair(a, "SA", tol, seed)[0]


def spectrum_summary(a, tol: float = 1e-9, seed: int = 0,
                     dense_cutoff: int = DEFAULT_DENSE_CUTOFF) -> SpectrumSummary:
    a = _as_matrix(a)
    if a.shape[0] <= dense_cutoff:
        spec = full_spectrum(a, cutoff_dim=dense_cutoff)
        return SpectrumSummary(
            lambda_max=float(spec[-1]), lambda_min=float(spec[0]),
            residual=0.0, iterations=0, spectrum=spec,
        )
    hi, _, res_hi = extreme_eigenpair(a, "LA", tol, seed)
    lo, _, res_lo = extreme_eigenpair(a, "SA", tol, seed)
    return SpectrumSummary(
        lambda_max=hi, lambda_min=lo, residual=max(res_hi, res_lo), iterations=0,
    )


def full_spectrum(a, cutoff_dim: int = DEFAULT_DENSE_CUTOFF) -> np.ndarray:
    """All eigenvalues, ascending, via dense LAPACK."""
    a = _as_matrix(a)
    if a.shape[0] > cutoff_dim:
        raise DimensionError(
            f"dimension {a.shape[0]} exceeds dense cutoff {cutoff_dim}"
        )
    dense = a.toarray() if sp.issparse(a) else np.asarray(a)
    return np.linalg.eigvalsh(dense)


def hausdorff(s, t) -> float:
    """Hausdorff distance between two finite nonempty point sets on the line."""
    s = np.sort(np.asarray(s, dtype=float).ravel())
    t = np.sort(np.asarray(t, dtype=float).ravel())
    if len(s) == 0 or len(t) == 0:
        raise InputError("hausdorff needs nonempty spectra")

    def one_sided(a, b):
        pos = np.searchsorted(b, a)
        left = np.abs(a - b[np.clip(pos - 1, 0, len(b) - 1)])
        right = np.abs(a - b[np.clip(pos, 0, len(b) - 1)])
        return float(np.max(np.minimum(left, right)))

    return max(one_sided(s, t), one_sided(t, s))


def operator_norm_estimate(a, iters: int = 60, seed: int = 0) -> float:
    """Power-iteration estimate of the spectral norm (never overshoots it)."""
    a = _as_matrix(a)
    v = _start_vector(a.shape[0], seed)
    est = 0.0
    for _ in range(iters):
        w = a @ v
        nw = np.linalg.norm(w)
        if nw == 0:
            return 0.0
        est = nw
        v = w / nw
    return float(est)
