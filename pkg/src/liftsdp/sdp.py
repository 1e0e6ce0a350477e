"""First-order solvers for the row-normalized and class-trace SDP bounds.

Primal: low-rank factored ascent.  The variable is a Gram factor V with
rho = V V*, and feasibility (per-row squared norm 1/N, or per-class total
squared norm 1/r) is restored exactly after every gradient step by rescaling
each constraint group.  The factor width k satisfies k(k+1)/2 > #constraints
so that second-order critical points are generically global; random restarts
guard the rest.

Dual: subgradient descent on zeta -> lambda_max(A + shift(zeta)) over the
average-zero hyperplane, with Polyak steps when a primal value is available,
plus an optional smoothed (matrix softmax) quasi-Newton polish on the dense
path.  Every iterate is evaluated as a true maximum eigenvalue, so the
reported value is always a valid upper bound for the primal regardless of
convergence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog, minimize

from .errors import ConvergenceError, DimensionError, InputError, LiftSdpError
from .spectral import _as_matrix, extreme_eigenpair

BRUTE_FORCE_LIMIT = 24


@dataclass(frozen=True)
class SolverParams:
    tol: float = 1e-9
    max_iter: int = 20000
    restarts: int = 5
    rank: int | None = None
    seed: int = 0
    dual_iters: int = 2000
    dual_polish: bool = True
    dense_cutoff: int = 4000

    def replace(self, **kw) -> "SolverParams":
        return replace(self, **kw)


DEFAULT_PARAMS = SolverParams()


@dataclass(frozen=True)
class GramSolution:
    """Feasible Gram-factored solution rho = factor @ factor*."""

    factor: np.ndarray = field(repr=False)
    objective: float
    residuals: np.ndarray = field(repr=False)
    groups: tuple = field(repr=False)   # tuple of index arrays partitioning rows
    targets: np.ndarray = field(repr=False)
    meta: dict = field(default_factory=dict, repr=False)

    @property
    def n_rows(self) -> int:
        return self.factor.shape[0]

    @property
    def rank(self) -> int:
        return int(np.linalg.matrix_rank(self.factor, tol=1e-10))

    @property
    def k(self) -> int:
        return self.factor.shape[1]

    def gram(self) -> np.ndarray:
        return self.factor @ self.factor.conj().T

    def to_json_dict(self, include_factor: bool = False) -> dict:
        out = {
            "objective": self.objective,
            "max_residual": float(np.max(self.residuals)),
            "rows": self.n_rows,
            "factor_width": self.k,
            "meta": dict(self.meta),
        }
        if include_factor:
            out["factor_real"] = self.factor.real.tolist()
            if np.iscomplexobj(self.factor):
                out["factor_imag"] = self.factor.imag.tolist()
        return out


@dataclass(frozen=True)
class DualCertificate:
    """zeta with avg 0 and the exactly evaluated lambda_max of the shifted matrix."""

    zeta: np.ndarray = field(repr=False)
    value: float
    residual: float
    iterations: int
    meta: dict = field(default_factory=dict, repr=False)

    def to_json_dict(self) -> dict:
        return {
            "value": self.value,
            "zeta": self.zeta.tolist(),
            "eig_residual": self.residual,
            "iterations": self.iterations,
            "meta": dict(self.meta),
        }


@dataclass(frozen=True)
class ValueBracket:
    lower: float
    upper: float
    lower_note: str
    upper_note: str
    details: dict = field(default_factory=dict, repr=False)

    @property
    def gap(self) -> float:
        return self.upper - self.lower

    def to_json_dict(self) -> dict:
        return {
            "lower": self.lower,
            "upper": self.upper,
            "gap": self.gap,
            "lower_note": self.lower_note,
            "upper_note": self.upper_note,
            "details": self.details,
        }


# ---------------------------------------------------------------------------
# shared pieces
# ---------------------------------------------------------------------------


def _rng(seed, tag) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence((seed, tag))))


def _norm_upper_bound(a) -> float:
    """Cheap valid upper bound on the spectral norm of a Hermitian matrix."""
    if sp.issparse(a):
        return float(np.abs(a).sum(axis=1).max()) if a.nnz else 0.0
    a = np.asarray(a)
    return float(np.abs(a).sum(axis=1).max()) if a.size else 0.0

def _row_groups(n: int) -> tuple:
    return tuple(np.array([i]) for i in range(n))


def _color_groups(dim: int, r: int) -> tuple:
    return tuple(np.arange(j, dim, r) for j in range(r))


def _project_groups(v: np.ndarray, groups, targets) -> np.ndarray:
    """Rescale each row group to its exact target total squared norm."""
    out = v.copy()
    if len(groups) == out.shape[0]:
        # singleton fast path
        norms = np.sqrt(np.einsum("ij,ij->i", out.real, out.real)
                        + (np.einsum("ij,ij->i", out.imag, out.imag)
                           if np.iscomplexobj(out) else 0.0))
        dead = norms <= 0.0
        if np.any(dead):
            out[dead, 0] = 1.0
            norms = np.where(dead, 1.0, norms)
        out *= (np.sqrt(targets) / norms)[:, None]
        return out
    for idx, target in zip(groups, targets):
        norm2 = float(np.vdot(out[idx], out[idx]).real)
        if norm2 <= 0.0:
            out[idx[0], 0] = 1.0
            norm2 = 1.0
        out[idx] *= math.sqrt(target / norm2)
    return out


def group_sums(v: np.ndarray, groups) -> np.ndarray:
    return np.array([float(np.vdot(v[idx], v[idx]).real) for idx in groups])


def _objective(v: np.ndarray, av: np.ndarray) -> float:
    val = complex(np.vdot(v, av))
    if abs(val.imag) > 1e-9 * max(1.0, abs(val.real)):
        raise LiftSdpError(f"objective has imaginary residue {val.imag:.3g}")
    return float(val.real)


def _factored_ascent(a, n, k, groups, targets, params, restart) -> tuple:
    rng = _rng(params.seed, (0xA5CE57, restart))
    shape = (n, k)
    v = rng.standard_normal(shape)
    if np.iscomplexobj(a.data if sp.issparse(a) else a):
        v = v + 1j * rng.standard_normal(shape)
    v = _project_groups(v, groups, targets)
    av = a @ v
    obj = _objective(v, av)
    step = 1.0 / (_norm_upper_bound(a) + 1.0)
    stalled = 0
    it = 0
    for it in range(params.max_iter):
        grad = 2.0 * av
        accepted = False
        for _ in range(40):
            w = _project_groups(v + step * grad, groups, targets)
            aw = a @ w
            new_obj = _objective(w, aw)
            if new_obj > obj + 1e-15 * abs(obj):
                accepted = True
                break
            step *= 0.35
        if not accepted:
            break
        improve = new_obj - obj
        v, av, obj = w, aw, new_obj
        step *= 1.25
        if improve < params.tol * max(1.0, abs(obj)):
            stalled += 1
            if stalled >= 25:
                break
        else:
            stalled = 0
    return v, obj, it + 1, stalled >= 25 or it + 1 < params.max_iter


def _solve_primal(a, groups, targets, params, meta_extra=None) -> GramSolution:
    a = _as_matrix(a)
    n = a.shape[0]
    k = params.rank or min(n, max(3, _min_rank(len(groups))))
    best = None
    for restart in range(max(1, params.restarts)):
        v, obj, iters, converged = _factored_ascent(a, n, k, groups, targets, params, restart)
        if best is None or obj > best[1]:
            best = (v, obj, iters, converged)
    v, obj, iters, converged = best
    residuals = np.abs(group_sums(v, groups) - targets)
    meta = {"iterations": iters, "converged": bool(converged), "restarts": params.restarts}
    if meta_extra:
        meta.update(meta_extra)
    return GramSolution(
        factor=v, objective=obj, residuals=residuals,
        groups=tuple(groups), targets=np.asarray(targets, dtype=float), meta=meta,
    )


def _min_rank(m_constraints: int) -> int:
    # smallest k with k(k+1)/2 > m, the Burer-Monteiro escape threshold
    k = int(math.ceil((math.sqrt(8 * m_constraints + 1) - 1) / 2))
    while k * (k + 1) // 2 <= m_constraints:
        k += 1
    return k


def sdp_primal(a, params: SolverParams = DEFAULT_PARAMS) -> GramSolution:
    """Row-normalized SDP bound: max <rho, A> over PSD rho with rho_ii = 1/N."""
    a = _as_matrix(a)
    n = a.shape[0]
    k = params.rank or min(n, max(3, _min_rank(n)))
    groups = _row_groups(n)
    targets = np.full(n, 1.0 / n)
    return _solve_primal(a, groups, targets, params.replace(rank=k), {"bound": "sdp"})


def part_sdp_primal(ta, params: SolverParams = DEFAULT_PARAMS, r: int | None = None) -> GramSolution:
    """Class-trace SDP bound on an extension matrix with r interleaved colors."""
    from .ball import TruncatedAdjacency

    if isinstance(ta, TruncatedAdjacency):
        a, r = ta.matrix, ta.r
    else:
        a = _as_matrix(ta)
        if r is None:
            raise InputError("part_sdp_primal needs the number of colors r")
    dim = a.shape[0]
    if dim % r != 0:
        raise InputError("extension dimension must be divisible by r")
    k = params.rank or min(dim, max(r + 2, _min_rank(r)))
    groups = _color_groups(dim, r)
    targets = np.full(r, 1.0 / r)
    return _solve_primal(a, groups, targets, params.replace(rank=k), {"bound": "part_sdp", "r": r})


# ---------------------------------------------------------------------------
# duals
# ---------------------------------------------------------------------------


def _shift_matrix(a, class_of, zeta):
    shift = zeta[class_of]
    if sp.issparse(a):
        return a + sp.diags(shift)
    return a + np.diag(shift)


DUAL_DENSE_EVAL_DIM = 700


def _dual_minimize(a, class_of, m, params, primal_value=None) -> DualCertificate:
    a = _as_matrix(a)
    dim = a.shape[0]
    norm_bound = _norm_upper_bound(a)
    zeta = np.zeros(m)
    dense = None
    if dim <= DUAL_DENSE_EVAL_DIM:
        dense = a.toarray() if sp.issparse(a) else np.asarray(a)

    def exact(z):
        if dense is not None:
            w, u = np.linalg.eigh(dense + np.diag(z[class_of]))
            return float(w[-1]), u[:, -1], 0.0
        return extreme_eigenpair(_shift_matrix(a, class_of, z), "LA",
                                 tol=1e-9, seed=params.seed)

    val, vec, res = exact(zeta)
    best_val, best_zeta, best_res = val, zeta.copy(), res
    iters_used = 0
    since_best = 0
    gap_stop = max(10.0 * params.tol, 1e-7)
    for t in range(params.dual_iters):
        grad = np.bincount(class_of, weights=np.abs(vec) ** 2, minlength=m)
        grad -= grad.mean()
        gnorm2 = float(grad @ grad)
        if gnorm2 <= 1e-24:
            break
        if primal_value is not None and val > primal_value:
            gamma = (val - primal_value) / gnorm2
        else:
            gamma = norm_bound / (10.0 * math.sqrt(gnorm2) * (t + 1))
        zeta = zeta - gamma * grad
        zeta -= zeta.mean()
        val, vec, res = exact(zeta)
        iters_used = t + 1
        if val < best_val - 1e-12 * max(1.0, abs(best_val)):
            best_val, best_zeta, best_res = val, zeta.copy(), res
            since_best = 0
        else:
            since_best += 1
            if since_best >= 150:
                break
        if primal_value is not None and best_val - primal_value <= gap_stop:
            break

    polished = False
    if params.dual_polish and dim <= params.dense_cutoff:
        if dense is None:
            dense = a.toarray() if sp.issparse(a) else np.asarray(a)
        scale = max(1.0, norm_bound)

        def smoothed(zfull, mu):
            # matrix softmax: smooth uniform overestimate of lambda_max,
            # minimized along the mean-shift gauge direction
            w, u = np.linalg.eigh(dense + np.diag(zfull[class_of]))
            ew = np.exp((w - w[-1]) / mu)
            sw = ew.sum()
            fval = w[-1] + mu * math.log(sw)
            per_coord = (np.abs(u) ** 2) @ (ew / sw)
            g = np.bincount(class_of, weights=per_coord, minlength=m)
            return fval - zfull.mean(), g - 1.0 / m

        z = best_zeta.copy()
        for mu in [1e-2 * scale, 1e-4 * scale, 1e-6 * scale]:
            res_opt = minimize(
                smoothed, z, args=(mu,), jac=True, method="L-BFGS-B",
                options=dict(maxiter=60, maxfun=120, ftol=1e-16, gtol=1e-12),
            )
            z = res_opt.x
        z = z - z.mean()
        val, _, res = exact(z)
        if val < best_val:
            best_val, best_zeta, best_res = val, z, res
            polished = True

    return DualCertificate(
        zeta=best_zeta, value=best_val, residual=best_res, iterations=iters_used,
        meta={"polished": polished, "primal_target": primal_value},
    )


def sdp_dual(a, params: SolverParams = DEFAULT_PARAMS, primal_value=None) -> DualCertificate:
    """min over avg-zero zeta in R^N of lambda_max(A + diag(zeta))."""
    a = _as_matrix(a)
    n = a.shape[0]
    return _dual_minimize(a, np.arange(n), n, params, primal_value)


def part_sdp_dual(ta, params: SolverParams = DEFAULT_PARAMS, r: int | None = None,
                  primal_value=None) -> DualCertificate:
    """min over avg-zero zeta in R^r of lambda_max(A + Id (x) diag(zeta)).

    On a ball truncation this is exact for the finite matrix but only an
    estimate from below of the infinite-lift dual; callers should report the
    monotone sequence across radii rather than treat one value as certified.
    """
    from .ball import TruncatedAdjacency

    if isinstance(ta, TruncatedAdjacency):
        a, r = ta.matrix, ta.r
    else:
        a = _as_matrix(ta)
        if r is None:
            raise InputError("part_sdp_dual needs the number of colors r")
    dim = a.shape[0]
    class_of = np.arange(dim) % r
    return _dual_minimize(a, class_of, r, params, primal_value)


# ---------------------------------------------------------------------------
# exact small-scale optimum
# ---------------------------------------------------------------------------


def opt_bruteforce(a, limit: int = BRUTE_FORCE_LIMIT) -> float:
    """(1/N) max over x in {-1,1}^N of x^T A x, by exhaustive enumeration."""
    a = _as_matrix(a)
    if sp.issparse(a):
        a = a.toarray()
    a = np.asarray(a)
    n = a.shape[0]
    if n > limit:
        raise DimensionError(f"brute force limited to N <= {limit}, got {n}")
    a = np.real(a + a.conj().T) / 2  # x^T A x only sees the real symmetric part
    if n == 1:
        return float(a[0, 0])
    best = -np.inf
    total = 1 << (n - 1)  # fix x_0 = +1 by symmetry
    chunk = 1 << 14
    bits = np.arange(n - 1, dtype=np.int64)
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total), dtype=np.int64)
        x = np.ones((len(idx), n))
        x[:, 1:] = 1.0 - 2.0 * ((idx[:, None] >> bits[None, :]) & 1)
        vals = np.einsum("bi,ij,bj->b", x, a, x, optimize=True)
        best = max(best, float(vals.max()))
    return best / n


# ---------------------------------------------------------------------------
# feasibility repair and rank reduction
# ---------------------------------------------------------------------------


def repair_feasibility(sol: GramSolution, a, eta: float = 1e-3) -> GramSolution:
    """Restore exact group sums: scale down by the worst overshoot, then add
    mass on one designated coordinate per deficient group.  PSD and finite
    support are preserved; the objective moves by at most O(norm * eta) per
    group."""
    a = _as_matrix(a)
    sums = group_sums(sol.factor, sol.groups)
    resid = np.abs(sums - sol.targets)
    if np.max(resid) > eta:
        raise InputError(
            f"repair_feasibility: residual {np.max(resid):.3g} exceeds eta={eta:.3g}"
        )
    eps = max(0.0, float(np.max(sums / sol.targets)) - 1.0)
    v = sol.factor / math.sqrt(1.0 + eps)
    deltas = sol.targets - group_sums(v, sol.groups)
    extra_cols = []
    for idx, delta in zip(sol.groups, deltas):
        if delta > 0.0:
            col = np.zeros((v.shape[0], 1), dtype=v.dtype)
            col[idx.min(), 0] = math.sqrt(delta)
            extra_cols.append(col)
    if extra_cols:
        v = np.hstack([v] + extra_cols)
    v = _project_groups(v, sol.groups, sol.targets)
    av = a @ v
    objective = _objective(v, av)
    residuals = np.abs(group_sums(v, sol.groups) - sol.targets)
    meta = dict(sol.meta)
    meta.update({"repaired": True, "repair_eps": eps, "objective_before_repair": sol.objective})
    return GramSolution(
        factor=v, objective=objective, residuals=residuals,
        groups=sol.groups, targets=sol.targets, meta=meta,
    )


def reduce_rank(sol: GramSolution, a) -> GramSolution:
    """Reweight the eigendirections of rho by the vertex solution of a small
    LP, producing a feasible solution of rank at most #groups whose objective
    does not decrease."""
    a = _as_matrix(a)
    u, s, _ = np.linalg.svd(sol.factor, full_matrices=False)
    keep = s > max(1e-14, 1e-12 * (s[0] if len(s) else 0.0))
    u, s = u[:, keep], s[keep]
    weights = s ** 2
    nvec = u.shape[1]
    m = len(sol.groups)
    cvec = np.array([float(np.vdot(u[:, i], a @ u[:, i]).real) for i in range(nvec)])
    q = np.zeros((m, nvec))
    for g, idx in enumerate(sol.groups):
        q[g] = (np.abs(u[idx]) ** 2).sum(axis=0)
    res = linprog(-cvec, A_eq=q, b_eq=sol.targets, bounds=(0, None), method="highs-ds")
    if not res.success:
        res = linprog(-cvec, A_eq=q, b_eq=sol.targets, bounds=(0, None), method="highs")
    if not res.success:
        raise LiftSdpError(
            f"rank-reduction LP failed ({res.message}); upstream solution was infeasible"
        )
    lam = np.maximum(res.x, 0.0)
    support = lam > 1e-14 * max(1.0, lam.max())
    v = u[:, support] * np.sqrt(lam[support])
    v = _project_groups(v, sol.groups, sol.targets)
    av = a @ v
    objective = _objective(v, av)
    meta = dict(sol.meta)
    meta.update({
        "rank_reduced": True,
        "objective_before_lp": sol.objective,
        "lp_support": int(support.sum()),
    })
    return GramSolution(
        factor=v, objective=objective,
        residuals=np.abs(group_sums(v, sol.groups) - sol.targets),
        groups=sol.groups, targets=sol.targets, meta=meta,
    )
