"""Random signed n-lifts and their evaluation as sparse Hermitian operators.

A lift substitutes a signed matching matrix for each Y letter and a signed
permutation matrix for each Z letter.  All randomness is drawn from
counter-based Philox streams keyed by (seed, object index), so each matrix is
independently reproducible.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import InputError
from .polynomials import MatrixPolynomial
from .words import Kind, Word, is_reduced, all_letters

__all__ = [
    "SignedPermutation",
    "SignedMatching",
    "LiftInstance",
    "SparseHermitianOperator",
    "BadVertexSet",
    "sample_lift",
    "apply_word",
    "word_action",
    "evaluate",
    "find_bad_vertices",
]


def _rng(seed, tag) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence((seed, tag))))


@dataclass(frozen=True)
class SignedPermutation:
    """j = image[i] with sign sign[i]; acts as sum_i sign[i] |image[i]><i|."""

    image: np.ndarray
    sign: np.ndarray

    @property
    def n(self) -> int:
        return len(self.image)

    def inverse_image(self) -> np.ndarray:
        inv = np.empty_like(self.image)
        inv[self.image] = np.arange(self.n)
        return inv


@dataclass(frozen=True)
class SignedMatching:
    """Fixed-point-free involution with a shared sign per matched pair."""

    partner: np.ndarray
    sign: np.ndarray

    @property
    def n(self) -> int:
        return len(self.partner)


@dataclass(frozen=True)
class LiftInstance:
    d: int
    e: int
    n: int
    seed: int
    signed: bool
    matchings: tuple = field(repr=False)
    permutations: tuple = field(repr=False)

    @property
    def signature(self):
        return (self.d, self.e)

    def record(self) -> dict:
        """The lift is fully re-derivable from this record."""
        return {
            "format": "liftsdp/lift-v1",
            "d": self.d,
            "e": self.e,
            "n": self.n,
            "seed": self.seed,
            "signed": self.signed,
        }


@dataclass(frozen=True)
class SparseHermitianOperator:
    """Extension matrix of an evaluated polynomial: nr x nr, exactly Hermitian."""

    matrix: sp.csr_matrix = field(repr=False)
    n: int
    r: int

    @property
    def dim(self) -> int:
        return self.n * self.r

    def hermitian_defect(self) -> float:
        diff = self.matrix - self.matrix.conjugate().T
        return 0.0 if diff.nnz == 0 else float(np.abs(diff.data).max())


@dataclass(frozen=True)
class BadVertexSet:
    members: np.ndarray
    f: int
    n: int

    @property
    def fraction(self) -> float:
        return len(self.members) / self.n

    def mask(self) -> np.ndarray:
        out = np.zeros(self.n, dtype=bool)
        out[self.members] = True
        return out


def sample_lift(d: int, e: int, n: int, seed: int, signed: bool = True) -> LiftInstance:
    """Uniform signed matchings / permutations, deterministic given seed."""
    if n < 2:
        raise InputError("lift size must be at least 2")
    if d > 0 and n % 2 != 0:
        raise InputError("matchings need even n when d > 0")
    matchings = []
    for k in range(d):
        rng = _rng(seed, k)
        order = rng.permutation(n)
        partner = np.empty(n, dtype=np.int64)
        partner[order[0::2]] = order[1::2]
        partner[order[1::2]] = order[0::2]
        edge_sign = rng.choice(np.array([-1, 1], dtype=np.int8), size=n // 2)
        sign = np.empty(n, dtype=np.int8)
        sign[order[0::2]] = edge_sign
        sign[order[1::2]] = edge_sign
        if not signed:
            sign = np.ones(n, dtype=np.int8)
        matchings.append(SignedMatching(partner=partner, sign=sign))
    permutations = []
    for k in range(e):
        rng = _rng(seed, d + k)
        image = rng.permutation(n)
        sign = rng.choice(np.array([-1, 1], dtype=np.int8), size=n)
        if not signed:
            sign = np.ones(n, dtype=np.int8)
        permutations.append(SignedPermutation(image=image, sign=sign))
    return LiftInstance(
        d=d, e=e, n=n, seed=seed, signed=signed,
        matchings=tuple(matchings), permutations=tuple(permutations),
    )


def _letter_action(lift: LiftInstance, letter) -> tuple[np.ndarray, np.ndarray]:
    """(image, sign) arrays of the operator substituted for one letter."""
    if letter.kind == Kind.Y:
        m = lift.matchings[letter.index - 1]
        return m.partner, m.sign
    p = lift.permutations[letter.index - 1]
    if letter.kind == Kind.Z:
        return p.image, p.sign
    # Z*: P* |j> = sign[P^-1 j] |P^-1 j|
    inv = p.inverse_image()
    return inv, p.sign[inv]


def word_action(lift: LiftInstance, word: Word) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized action of L^w: maps |i> to sign[i] |image[i]>.

    Letters apply right to left, matching operator composition.
    """
    image = np.arange(lift.n)
    sign = np.ones(lift.n, dtype=np.int8)
    for letter in reversed(word):
        limg, lsgn = _letter_action(lift, letter)
        sign = sign * lsgn[image]
        image = limg[image]
    return image, sign


def apply_word(lift: LiftInstance, word: Word, i: int) -> tuple[int, int]:
    """Single-vertex action: L^w |i> = sign |j>; w must be reduced."""
    if not is_reduced(word):
        raise InputError("apply_word requires a reduced word")
    j, s = i, 1
    for letter in reversed(word):
        limg, lsgn = _letter_action(lift, letter)
        s *= int(lsgn[j])
        j = int(limg[j])
    return j, s


def evaluate(p: MatrixPolynomial, lift: LiftInstance) -> SparseHermitianOperator:
    """Extension of p evaluated at the lift, symmetrized to be exactly Hermitian."""
    if (p.d, p.e) != (lift.d, lift.e):
        raise InputError(
            f"signature mismatch: polynomial {(p.d, p.e)} vs lift {(lift.d, lift.e)}"
        )
    n, r = lift.n, p.r
    dtype = float if p.is_real() else complex
    rows, cols, vals = [], [], []
    for word in p.term_words():
        coeff = p.terms[word]
        image, sign = word_action(lift, word)
        alphas, betas = np.nonzero(np.abs(coeff) > 0)
        entries = coeff[alphas, betas]
        if dtype is float:
            entries = entries.real
        # scalar entry ((image[i], alpha), (i, beta)) += sign[i] * coeff[alpha, beta]
        rows.append((image[:, None] * r + alphas[None, :]).ravel())
        cols.append((np.arange(n)[:, None] * r + betas[None, :]).ravel())
        vals.append((sign[:, None] * entries[None, :]).ravel())
    if rows:
        mat = sp.coo_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(n * r, n * r), dtype=dtype,
        ).tocsr()
    else:
        mat = sp.csr_matrix((n * r, n * r), dtype=dtype)
    mat = (mat + mat.conjugate().T) / 2
    mat.sum_duplicates()
    return SparseHermitianOperator(matrix=mat, n=n, r=r)


def find_bad_vertices(lift: LiftInstance, f: int) -> BadVertexSet:
    """Vertices with a nontrivial return L^w |i> = +-|i> for some reduced word
    of length 1..f; found by depth-first sweep over all reduced words with
    vectorized permutation composition."""
    if f < 1:
        raise InputError("cycle length bound must be >= 1")
    n = lift.n
    letters = all_letters(lift.d, lift.e)
    actions = [_letter_action(lift, letter) for letter in letters]
    forbidden = []
    for letter in letters:
        adj = letter.adjoint()
        forbidden.append(next(i for i, l2 in enumerate(letters) if l2 == adj))
    ident = np.arange(n)
    bad = np.zeros(n, dtype=bool)
    stack = [(ident, -1, 0)]
    while stack:
        image, last, depth = stack.pop()
        if depth > 0:
            bad |= image == ident
        if depth == f:
            continue
        for idx in range(len(letters)):
            if last >= 0 and idx == forbidden[last]:
                continue
            stack.append((actions[idx][0][image], idx, depth + 1))
    members = np.nonzero(bad)[0]
    if len(members) > 0.5 * n:
        warnings.warn(
            f"{len(members)}/{n} vertices lie on short cycles; "
            "the lift is too small for this cycle bound",
            stacklevel=2,
        )
    return BadVertexSet(members=members, f=f, n=n)
