"""Dense log-barrier interior-point reference solver for small SDPs.

Solves  max <C, X>  s.t.  <E_g, X> = b_g,  X >= 0,  where each E_g is the
0/1 diagonal indicator of a group of coordinates and the groups partition
[N].  Covers both the row-constrained SDP (singleton groups, b = 1/N) and
the class-constrained one (color groups, b = 1/r).

Follows the central path maximize <C,X> + mu*logdet(X) with damped Newton
steps, shrinking mu geometrically.  Built as an independent cross-check for
the factored first-order solvers; dense, real-symmetric only, N up to a few
dozen.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, DimensionError, InputError

MAX_DIM = 64


@dataclass(frozen=True)
class IpmResult:
    value: float
    x: np.ndarray
    multipliers: np.ndarray
    mu_final: float
    newton_steps: int


def _chol_or_none(x):
    try:
        return np.linalg.cholesky(x)
    except np.linalg.LinAlgError:
        return None


def solve_diag_constrained_sdp(
    c: np.ndarray,
    groups: list[np.ndarray],
    targets: np.ndarray,
    mu_min_scale: float = 1e-10,
    max_newton: int = 4000,
) -> IpmResult:
    c = np.asarray(c)
    if np.iscomplexobj(c):
        if np.abs(c.imag).max(initial=0.0) > 1e-12:
            raise InputError("interior-point oracle handles real symmetric input only")
        c = c.real
    c = (c + c.T) / 2
    n = c.shape[0]
    if n > MAX_DIM:
        raise DimensionError(f"oracle limited to N <= {MAX_DIM}, got {n}")
    targets = np.asarray(targets, dtype=float)
    m = len(groups)
    covered = np.concatenate(groups)
    if sorted(covered.tolist()) != list(range(n)):
        raise InputError("groups must partition the coordinate set")
    group_of = np.empty(n, dtype=int)
    for g, idx in enumerate(groups):
        group_of[idx] = g

    # feasible strictly positive start: uniform within each group
    x = np.zeros((n, n))
    for g, idx in enumerate(groups):
        x[idx, idx] = targets[g] / len(idx)

    scale = max(1.0, float(np.abs(c).max()))
    mu = scale
    mu_min = mu_min_scale * scale
    nu = np.zeros(m)
    steps = 0

    def barrier_objective(xm, mu_val):
        sign, logdet = np.linalg.slogdet(xm)
        if sign <= 0:
            return -np.inf
        return float(np.sum(c * xm)) + mu_val * logdet

    while True:
        for _ in range(200):
            if steps >= max_newton:
                raise ConvergenceError(
                    "interior-point oracle exceeded its Newton budget",
                    best_value=float(np.sum(c * x)),
                )
            steps += 1
            xcx = x @ c @ x
            # m x m system; the mu*(2<E,X> - b) term steers <E, X+Delta> back to
            # b exactly, so floating drift in the group sums cannot compound
            mm = np.empty((m, m))
            sq = x * x
            for gi, idx_i in enumerate(groups):
                row = sq[idx_i, :].sum(axis=0)
                for gj, idx_j in enumerate(groups):
                    mm[gi, gj] = row[idx_j].sum()
            actual = np.array([x[idx, idx].sum() for idx in groups])
            rhs = np.array([xcx[idx, idx].sum() for idx in groups]) + mu * (2 * actual - targets)
            try:
                nu = np.linalg.solve(mm, rhs)
            except np.linalg.LinAlgError:
                nu = np.linalg.lstsq(mm, rhs, rcond=None)[0]
            shifted = c - np.diag(nu[group_of])
            delta = (x @ shifted @ x) / mu + x
            delta = (delta + delta.T) / 2
            # Newton decrement in the local metric
            xinv_delta = np.linalg.solve(x, delta)
            decrement = float(np.sum(xinv_delta * xinv_delta.T))
            if decrement <= 1e-18 * n:
                break
            base = barrier_objective(x, mu)
            t = 1.0
            for _ in range(60):
                cand = x + t * delta
                if _chol_or_none(cand) is not None and barrier_objective(cand, mu) > base:
                    x = (cand + cand.T) / 2
                    break
                t *= 0.5
            else:
                break
            if decrement <= 1e-14 * n:
                break
        if mu <= mu_min:
            break
        mu = max(mu * 0.15, mu_min if mu * 0.15 > mu_min else mu_min * 0.999)
    return IpmResult(
        value=float(np.sum(c * x)),
        x=x,
        multipliers=nu,
        mu_final=mu,
        newton_steps=steps,
    )


def sdp_value_oracle(a: np.ndarray) -> float:
    """Reference value of the row-normalized SDP max <rho, A>, rho_ii = 1/N."""
    a = np.asarray(a)
    n = a.shape[0]
    groups = [np.array([i]) for i in range(n)]
    return solve_diag_constrained_sdp(a, groups, np.full(n, 1.0 / n)).value


def part_sdp_value_oracle(a: np.ndarray, r: int) -> float:
    """Reference value of the class-trace SDP on an extension matrix."""
    a = np.asarray(a)
    n = a.shape[0]
    if n % r != 0:
        raise InputError("extension dimension must be divisible by r")
    groups = [np.arange(j, n, r) for j in range(r)]
    return solve_diag_constrained_sdp(a, groups, np.full(r, 1.0 / r)).value
