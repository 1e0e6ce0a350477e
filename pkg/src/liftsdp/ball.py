"""Truncations of the infinite lift to a ball around the identity vertex.

Vertices of the infinite lift are reduced words in the free product generated
by the Y and Z letters.  The ball of radius f0 collects every vertex whose
extension carries weight reachable within f0 applications of the polynomial's
terms, starting from the identity word at every coefficient coordinate.  For
polynomials whose terms are single letters this is exactly the set of all
reduced words of length at most f0; for longer terms it is the graph ball of
the evaluated operator, which is the object whose spectrum and partitioned
SDP value converge to the infinite ones.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import BallSizeError, InputError
from .polynomials import MatrixPolynomial
from .words import IDENTITY, Word, concat, word_key

DEFAULT_VERTEX_CAP = 200_000


@dataclass(frozen=True)
class BallTruncation:
    poly: MatrixPolynomial
    radius: int
    words: tuple = field(repr=False)      # canonical order, identity first
    index: dict = field(repr=False)       # Word -> position
    derivations: tuple = field(repr=False)  # (parent index, move word) per vertex

    @property
    def size(self) -> int:
        return len(self.words)

    def labels(self) -> list[str]:
        from .words import format_word

        return [format_word(w) for w in self.words]


@dataclass(frozen=True)
class TruncatedAdjacency:
    ball: BallTruncation
    matrix: sp.csr_matrix = field(repr=False)
    negated: bool = False

    @property
    def r(self) -> int:
        return self.ball.poly.r

    @property
    def dim(self) -> int:
        return self.ball.size * self.r

    def color_classes(self) -> list[np.ndarray]:
        r = self.r
        return [np.arange(j, self.dim, r) for j in range(r)]


def enumerate_ball(
    p: MatrixPolynomial, radius: int, max_vertices: int = DEFAULT_VERTEX_CAP
) -> BallTruncation:
    """All vertices reachable within ``radius`` term applications.

    Search runs over (word, coordinate) states so that only coordinates
    actually coupled by the coefficients spread weight; the vertex set is the
    union over coordinates.  Deterministic: states expand in canonical order.
    """
    if radius < 0:
        raise InputError("ball radius must be >= 0")
    moves = []  # (word, active input coords, output coords per input)
    for word in p.term_words():
        coeff = p.terms[word]
        outs = [np.nonzero(np.abs(coeff[:, c]) > 0)[0] for c in range(p.r)]
        moves.append((word, outs))
    reached: dict[Word, int] = {IDENTITY: 0}
    derivations: dict[Word, tuple] = {IDENTITY: (None, None)}
    seen_states = {(IDENTITY, c) for c in range(p.r)}
    frontier = sorted(seen_states, key=lambda s: (word_key(s[0]), s[1]))
    for _ in range(radius):
        nxt = []
        for word, coord in frontier:
            for move, outs in moves:
                if len(outs[coord]) == 0:
                    continue
                target = concat(move, word)
                if target not in reached:
                    if len(reached) >= max_vertices:
                        raise BallSizeError(
                            f"ball exceeds {max_vertices} vertices at radius {radius}"
                        )
                    reached[target] = len(reached)
                    derivations[target] = (word, move)
                for out in outs[coord]:
                    state = (target, int(out))
                    if state not in seen_states:
                        seen_states.add(state)
                        nxt.append(state)
        frontier = sorted(set(nxt), key=lambda s: (word_key(s[0]), s[1]))
    ordered = sorted(reached, key=word_key)
    index = {w: i for i, w in enumerate(ordered)}
    deriv = tuple(
        (None, None) if derivations[w][0] is None else (index[derivations[w][0]], derivations[w][1])
        for w in ordered
    )
    return BallTruncation(
        poly=p, radius=radius, words=tuple(ordered), index=index, derivations=deriv
    )


def build_truncated_adjacency(
    p: MatrixPolynomial, ball: BallTruncation, negate: bool = False
) -> TruncatedAdjacency:
    """Hermitian |F|r x |F|r matrix whose (v, u) block is the coefficient of
    the term moving u to v, restricted to the ball."""
    if p is not ball.poly and p != ball.poly:
        raise InputError("ball was enumerated for a different polynomial")
    r = p.r
    size = ball.size
    dtype = float if p.is_real() else complex
    rows, cols, vals = [], [], []
    for word in p.term_words():
        coeff = p.terms[word]
        alphas, betas = np.nonzero(np.abs(coeff) > 0)
        entries = coeff[alphas, betas]
        if dtype is float:
            entries = entries.real
        for u_idx, u in enumerate(ball.words):
            v = concat(word, u)
            v_idx = ball.index.get(v)
            if v_idx is None:
                continue
            rows.append(v_idx * r + alphas)
            cols.append(u_idx * r + betas)
            vals.append(entries)
    if rows:
        mat = sp.coo_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(size * r, size * r), dtype=dtype,
        ).tocsr()
    else:
        mat = sp.csr_matrix((size * r, size * r), dtype=dtype)
    mat = (mat + mat.conjugate().T) / 2
    mat.sum_duplicates()
    if negate:
        mat = -mat
    return TruncatedAdjacency(ball=ball, matrix=mat, negated=negate)
