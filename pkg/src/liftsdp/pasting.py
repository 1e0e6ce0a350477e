"""Pasting a ball-supported class-trace SDP solution into a finite lift.

For each base vertex i the map Phi_i sends ball vertex v to the lift vertex
reached by applying v's word at i, with the accumulated sign.  Conjugating
the ball solution rho by Phi_i and averaging over i gives a PSD matrix sigma
whose objective against the lift operator equals the ball objective up to
contributions from vertices lying on short cycles.  Zeroing the rows and
columns of those bad vertices and restoring their diagonal yields a feasible
row-normalized SDP solution sigma', a certified lower bound on the SDP value
of the lift.

sigma is never materialized; objectives, diagonals and matrix-vector
products are computed from per-word permutation tables, so the cost is
O(#terms * |F|^2 * n) time and O(|F| * n) memory.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse.linalg as spla

from .ball import BallTruncation, TruncatedAdjacency, build_truncated_adjacency, enumerate_ball
from .errors import InputError, LiftSdpError
from .lifts import (
    BadVertexSet,
    LiftInstance,
    SparseHermitianOperator,
    apply_word,
    evaluate,
    find_bad_vertices,
    sample_lift,
    word_action,
)
from .polynomials import MatrixPolynomial
from .sdp import (
    GramSolution,
    SolverParams,
    DEFAULT_PARAMS,
    part_sdp_primal,
    reduce_rank,
    repair_feasibility,
    sdp_primal,
)
from .spectral import _as_matrix

TABLE_CELL_CAP = 50_000_000  # |F| * n


@dataclass(frozen=True)
class PastingMap:
    base_vertex: int
    vertices: np.ndarray = field(repr=False)
    signs: np.ndarray = field(repr=False)
    distinct: bool = True


@dataclass(frozen=True)
class PastedSolution:
    n: int
    r: int
    objective: float
    trace: float
    diag_max_err: float
    feasible: bool
    bad_fraction: float
    min_eig: float | None = None
    meta: dict = field(default_factory=dict, repr=False)
    context: "_PasteContext" = field(default=None, repr=False, compare=False)


def build_phi(lift: LiftInstance, ball: BallTruncation, i: int) -> PastingMap:
    """Columns of Phi_i: (target vertex, sign) for every ball word."""
    vertices = np.empty(ball.size, dtype=np.int64)
    signs = np.empty(ball.size, dtype=np.int8)
    for idx, word in enumerate(ball.words):
        j, s = apply_word(lift, word, i)
        vertices[idx] = j
        signs[idx] = s
    distinct = len(np.unique(vertices)) == ball.size
    return PastingMap(base_vertex=i, vertices=vertices, signs=signs, distinct=distinct)


def _word_tables(lift: LiftInstance, ball: BallTruncation):
    """(perms, signs) arrays of shape (|F|, n): row u is the action of word u."""
    n = lift.n
    if ball.size * n > TABLE_CELL_CAP:
        raise LiftSdpError(
            f"pasting tables need {ball.size * n} cells, over the cap {TABLE_CELL_CAP}"
        )
    perms = np.empty((ball.size, n), dtype=np.int64)
    signs = np.empty((ball.size, n), dtype=np.int8)
    move_cache: dict = {}
    resolved = np.zeros(ball.size, dtype=bool)
    for idx, (parent, move) in enumerate(ball.derivations):
        if parent is None:
            perms[idx] = np.arange(n)
            signs[idx] = 1
            resolved[idx] = True
    for idx in range(ball.size):
        if resolved[idx]:
            continue
        chain = []
        cur = idx
        while not resolved[cur]:
            chain.append(cur)
            cur = ball.derivations[cur][0]
        for node in reversed(chain):
            parent, move = ball.derivations[node]
            if move not in move_cache:
                move_cache[move] = word_action(lift, move)
            mperm, msign = move_cache[move]
            perms[node] = mperm[perms[parent]]
            signs[node] = signs[parent] * msign[perms[parent]]
            resolved[node] = True
    return perms, signs


class _PasteContext:
    """Shared tables and partial sums for sigma and sigma'."""

    def __init__(self, lift, rho, ball, bad, operator):
        self.lift = lift
        self.rho = rho
        self.ball = ball
        self.bad = bad
        self.operator = operator
        self.n = lift.n
        self.r = operator.r
        self.size = ball.size
        self.perms, self.signs = _word_tables(lift, ball)
        self.signs_f = self.signs.astype(np.float64)
        self.good = ~bad.mask()
        dim = self.size * self.r
        v = rho.factor
        if v.shape[0] != dim:
            raise InputError("ball solution and ball truncation sizes disagree")
        self.rho_tilde = v @ v.conj().T
        self.rho4 = self.rho_tilde.reshape(self.size, self.r, self.size, self.r)
        self._cache: dict = {}

    def term_actions(self, poly):
        out = []
        for word in poly.term_words():
            perm, sign = word_action(self.lift, word)
            out.append((word, poly.terms[word], perm, sign.astype(np.float64)))
        return out

    def objectives(self, poly) -> tuple[float, float]:
        """(<sigma, A>, <Pi sigma Pi, A>), both exact averages over base vertices."""
        n, size = self.n, self.size
        goodf = self.good.astype(np.float64)
        goodv = goodf[self.perms]                  # good at v.i, per ball word
        sgn_goodv = self.signs_f * goodv
        total = 0.0 + 0.0j
        total_gg = 0.0 + 0.0j
        for word, coeff, wperm, wsign in self.term_actions(poly):
            t_w = np.einsum("uavb,ba->uv", self.rho4, coeff, optimize=True)
            for u in range(size):
                pu = self.perms[u]
                target = wperm[pu]
                swu = self.signs_f[u] * wsign[pu]
                swu_g = swu * goodf[pu]  # row good at v.i is handled by sgn_goodv
                for v in range(size):
                    if t_w[u, v] == 0:
                        continue
                    hits = np.nonzero(self.perms[v] == target)[0]
                    if len(hits) == 0:
                        continue
                    c = (swu[hits] * self.signs_f[v, hits]).sum() / n
                    total += c * t_w[u, v]
                    c_gg = (swu_g[hits] * sgn_goodv[v, hits]).sum() / n
                    total_gg += c_gg * t_w[u, v]
        return float(total.real), float(total_gg.real)

    def diagonal(self) -> np.ndarray:
        """Extension diagonal of sigma as an (n, r) array."""
        n, size, r = self.n, self.size, self.r
        diag = np.zeros((n, r))
        block_diags = np.einsum("uava->uva", self.rho4).real  # (u, v, a) entries rho[(u,a),(v,a)]
        for u in range(size):
            pu = self.perms[u]
            su = self.signs_f[u]
            for v in range(size):
                vals = block_diags[u, v]
                if not np.any(vals):
                    continue
                if u == v:
                    diag[pu] += vals[None, :] / n  # pu is a permutation: no duplicates
                else:
                    hits = np.nonzero(self.perms[v] == pu)[0]
                    if len(hits) == 0:
                        continue
                    weight = (su[hits] * self.signs_f[v, hits]) / n
                    np.add.at(diag, pu[hits], np.outer(weight, vals))
        return diag

    def bad_diagonal_term(self, poly) -> float:
        """<(1/nr) Pi_B, A> with the exact lift diagonal on bad vertices."""
        if len(self.bad.members) == 0:
            return 0.0
        badmask = self.bad.mask()
        total = 0.0
        for word, coeff, wperm, wsign in self.term_actions(poly):
            tr = float(np.trace(coeff).real)
            if tr == 0.0:
                continue
            fixed = (wperm == np.arange(self.n)) & badmask
            if np.any(fixed):
                total += tr * float(wsign[fixed].sum())
        return total / (self.n * self.r)

    def matvec(self, x: np.ndarray, fixed: bool) -> np.ndarray:
        """sigma @ x, or sigma' @ x when ``fixed``; x has length n*r."""
        n, r, size = self.n, self.r, self.size
        xm = x.reshape(n, r)
        if fixed:
            xm = xm * self.good[:, None]
        gathered = self.signs_f[:, :, None] * xm[self.perms, :]     # (|F|, n, r)
        ymat = gathered.transpose(0, 2, 1).reshape(size * r, n)
        zmat = self.rho_tilde @ ymat
        out = np.zeros((n, r), dtype=zmat.dtype)
        for u in range(size):
            zu = zmat[u * r:(u + 1) * r, :].T                       # (n, r)
            np.add.at(out, self.perms[u], self.signs_f[u][:, None] * zu)
        out /= n
        if fixed:
            out *= self.good[:, None]
            out[~self.good] = x.reshape(n, r)[~self.good] / (n * r)
        return out.reshape(-1)

    def min_eig(self, fixed: bool, steps: int = 120, seed: int = 0) -> float:
        """Smallest Ritz value of a fixed-budget Lanczos sweep.

        The spectrum of the pasted operator piles up near zero, so demanding
        solver-certified convergence there is hopeless; a reorthogonalized
        Krylov sweep still converges onto any genuinely negative direction
        immediately, which is what this check guards against.
        """
        dim = self.n * self.r
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence((seed, 0xF1DE))))
        q = rng.standard_normal(dim)
        q /= np.linalg.norm(q)
        steps = min(steps, dim)
        basis = np.empty((steps, dim))
        alphas = np.empty(steps)
        betas = np.empty(max(steps - 1, 0))
        for j in range(steps):
            basis[j] = q
            w = self.matvec(q, fixed)
            alphas[j] = q @ w
            w -= basis[: j + 1].T @ (basis[: j + 1] @ w)  # full reorthogonalization
            w -= basis[: j + 1].T @ (basis[: j + 1] @ w)
            if j + 1 == steps:
                break
            beta = np.linalg.norm(w)
            if beta < 1e-14:
                basis = basis[: j + 1]
                alphas = alphas[: j + 1]
                betas = betas[:j]
                break
            betas[j] = beta
            q = w / beta
        tri = np.diag(alphas) + np.diag(betas[: len(alphas) - 1], 1) + np.diag(betas[: len(alphas) - 1], -1)
        return float(np.linalg.eigvalsh(tri)[0])

    def trace_estimate(self) -> float:
        return float(np.trace(self.rho_tilde).real)


def build_sigma(
    lift: LiftInstance,
    rho: GramSolution,
    ball: BallTruncation,
    bad: BadVertexSet,
    operator: SparseHermitianOperator | None = None,
) -> PastedSolution:
    """Average of the pasted solutions over all base vertices (provisional)."""
    poly = ball.poly
    if operator is None:
        operator = evaluate(poly, lift)
    if np.max(rho.residuals) > 1e-6:
        raise InputError("ball solution is not feasible enough to paste")
    ctx = _PasteContext(lift, rho, ball, bad, operator)
    obj, obj_gg = ctx.objectives(poly)
    diag = ctx.diagonal()
    target = 1.0 / (lift.n * poly.r)
    good_err = float(np.abs(diag[ctx.good] - target).max()) if ctx.good.any() else 0.0
    ctx._cache = {
        "objective": obj,
        "objective_good_good": obj_gg,
        "diag": diag,
        "trace": float(diag.sum()),
    }
    return PastedSolution(
        n=lift.n, r=poly.r,
        objective=obj,
        trace=float(diag.sum()),
        diag_max_err=good_err,
        feasible=False,
        bad_fraction=bad.fraction,
        meta={"ball_objective": rho.objective, "f": bad.f},
        context=ctx,
    )


def fix_sigma(sigma: PastedSolution) -> PastedSolution:
    """Keep good-good entries, put 1/(nr) on the remaining diagonal; feasible."""
    ctx = sigma.context
    if ctx is None:
        raise InputError("fix_sigma needs the context produced by build_sigma")
    poly = ctx.ball.poly
    cache = ctx._cache
    obj_fixed = cache["objective_good_good"] + ctx.bad_diagonal_term(poly)
    n, r = sigma.n, sigma.r
    target = 1.0 / (n * r)
    diag = cache["diag"].copy()
    diag[~ctx.good] = target
    diag_err = float(np.abs(diag - target).max())
    drop = sigma.objective - obj_fixed
    good_share = cache["diag"][ctx.good].sum()
    lam = max(0.0, 1.0 - good_share / cache["trace"]) if cache["trace"] > 0 else 0.0
    norm_bound = poly.coefficient_norm_sum()
    return PastedSolution(
        n=n, r=r,
        objective=obj_fixed,
        trace=float(diag.sum()),
        diag_max_err=diag_err,
        feasible=diag_err <= 1e-10,
        bad_fraction=sigma.bad_fraction,
        meta={
            **sigma.meta,
            "objective_drop": drop,
            "gentle_lambda": lam,
            "gentle_bound": float(np.sqrt(8.0 * lam) * norm_bound),
        },
        context=ctx,
    )


def pulled_back_matrix(lift, operator, ball, i) -> np.ndarray:
    """Dense Phi_i^T A Phi_i, for direct comparison with the ball adjacency."""
    phi = build_phi(lift, ball, i)
    r = operator.r
    dim = ball.size * r
    cols = np.zeros((operator.dim, dim))
    for idx in range(ball.size):
        for a in range(r):
            cols[phi.vertices[idx] * r + a, idx * r + a] = phi.signs[idx]
    return cols.T @ (operator.matrix @ cols)


@dataclass(frozen=True)
class PasteReport:
    n: int
    seed: int
    f0: int
    f: int
    bad_fraction: float
    ball_size: int
    ball_objective: float
    sigma_objective: float
    sigma_prime_objective: float
    sigma_prime_diag_err: float
    sigma_min_eig: float | None
    sigma_prime_min_eig: float | None
    gentle_bound: float
    basic_sdp_objective: float | None
    wall_time: float

    def to_json_dict(self) -> dict:
        return {
            "n": self.n, "seed": self.seed, "f0": self.f0, "f": self.f,
            "bad_fraction": self.bad_fraction,
            "ball_size": self.ball_size,
            "ball_objective": self.ball_objective,
            "sigma_objective": self.sigma_objective,
            "sigma_prime_objective": self.sigma_prime_objective,
            "sigma_prime_diag_err": self.sigma_prime_diag_err,
            "sigma_min_eig": self.sigma_min_eig,
            "sigma_prime_min_eig": self.sigma_prime_min_eig,
            "gentle_bound": self.gentle_bound,
            "basic_sdp_objective": self.basic_sdp_objective,
            "wall_time": self.wall_time,
        }


def certify_lower_bound(
    poly: MatrixPolynomial,
    n: int,
    seed: int,
    f0: int,
    params: SolverParams = DEFAULT_PARAMS,
    negate: bool = False,
    include_basic_sdp: bool = False,
    psd_check: bool = True,
    psd_check_cap: int = 30_000,
) -> PasteReport:
    """Full pipeline: ball solution, rank reduction, lift, paste, fix."""
    t0 = time.time()
    ball = enumerate_ball(poly, f0)
    ta = build_truncated_adjacency(poly, ball, negate=negate)
    rho = part_sdp_primal(ta, params)
    rho = repair_feasibility(rho, ta, eta=1e-3)
    rho = reduce_rank(rho, ta)
    lift = sample_lift(poly.d, poly.e, n, seed)
    operator = evaluate(poly, lift)
    if negate:
        operator = SparseHermitianOperator(matrix=-operator.matrix, n=operator.n, r=operator.r)
    f = 2 * f0 + poly.degree()
    bad = find_bad_vertices(lift, f)
    sigma = build_sigma(lift, rho, ball, bad, operator)
    fixed = fix_sigma(sigma)
    min_eig = min_eig_fixed = None
    if psd_check and n * poly.r <= psd_check_cap:
        min_eig = sigma.context.min_eig(fixed=False, seed=params.seed)
        min_eig_fixed = sigma.context.min_eig(fixed=True, seed=params.seed)
    basic = None
    if include_basic_sdp:
        basic = sdp_primal(operator, params).objective
    return PasteReport(
        n=n, seed=seed, f0=f0, f=f,
        bad_fraction=bad.fraction,
        ball_size=ball.size,
        ball_objective=rho.objective,
        sigma_objective=sigma.objective,
        sigma_prime_objective=fixed.objective,
        sigma_prime_diag_err=fixed.diag_max_err,
        sigma_min_eig=min_eig,
        sigma_prime_min_eig=min_eig_fixed,
        gentle_bound=fixed.meta["gentle_bound"],
        basic_sdp_objective=basic,
        wall_time=time.time() - t0,
    )
