import numpy as np
import pytest

from liftsdp.ball import build_truncated_adjacency, enumerate_ball
from liftsdp.builtins import get_builtin, p_regular
from liftsdp.errors import BallSizeError
from liftsdp.polynomials import make_polynomial
from liftsdp.spectral import lambda_max
from liftsdp.words import IDENTITY, format_word


def test_radius_zero_is_identity_only(p3):
    ball = enumerate_ball(p3, 0)
    assert ball.words == (IDENTITY,)


def test_p3_radius_two_count(p3):
    ball = enumerate_ball(p3, 2)
    assert ball.size == 1 + 3 + 3 * 2
    assert ball.words[0] == IDENTITY


def test_single_z_radius_one_count():
    from liftsdp.words import Kind, Letter

    z1, z1s = Letter(Kind.Z, 1), Letter(Kind.ZSTAR, 1)
    p = make_polynomial(0, 1, 1, {(z1,): np.eye(1), (z1s,): np.eye(1)})
    ball = enumerate_ball(p, 1)
    assert [format_word(w) for w in ball.words] == ["1", "Z1", "Z1*"]


def test_reduced_word_count_formula_linear_polys():
    for d in (2, 3, 4):
        p = p_regular(d)
        for f0 in range(4):
            expected = 1 + sum(d * (d - 1) ** (k - 1) for k in range(1, f0 + 1))
            assert enumerate_ball(p, f0).size == expected


def test_ball_closed_under_derivation_ancestry(poly_p333):
    ball = enumerate_ball(poly_p333, 3)
    for idx, (parent, move) in enumerate(ball.derivations):
        if parent is not None:
            assert 0 <= parent < ball.size
            assert move in poly_p333.terms


def test_prefix_closure_for_linear_polynomials(p3):
    ball = enumerate_ball(p3, 4)
    index = ball.index
    for w in ball.words:
        for cut in range(len(w)):
            assert w[cut:] in index  # left-multiplication chains strip prefixes


def test_p3_ball_adjacency_matches_direct_tree(p3):
    # oracle: build the depth-3 rooted 3-regular tree explicitly by BFS
    depth = 3
    edges = []
    nxt = 1
    frontier = [(0, 0)]
    for level in range(depth):
        new = []
        for v, _ in frontier:
            for _ in range(3 if level == 0 else 2):
                edges.append((v, nxt))
                new.append((nxt, v))
                nxt += 1
        frontier = new
    oracle = np.zeros((nxt, nxt))
    for a, b in edges:
        oracle[a, b] = oracle[b, a] = 1.0

    ball = enumerate_ball(p3, depth)
    ta = build_truncated_adjacency(p3, ball)
    got = ta.matrix.toarray()
    assert got.shape == oracle.shape
    # same graph up to vertex order: compare degree profile and spectrum
    assert sorted(got.sum(axis=1)) == sorted(oracle.sum(axis=1))
    assert np.allclose(np.linalg.eigvalsh(got), np.linalg.eigvalsh(oracle), atol=1e-10)


def test_constant_term_adds_diagonal_blocks():
    c = np.array([[0.5, 0.0], [0.0, -0.5]])
    from liftsdp.words import Kind, Letter

    z1, z1s = Letter(Kind.Z, 1), Letter(Kind.ZSTAR, 1)
    p = make_polynomial(0, 1, 2, {(): c, (z1,): np.eye(2), (z1s,): np.eye(2)})
    ball = enumerate_ball(p, 1)
    ta = build_truncated_adjacency(p, ball)
    dense = ta.matrix.toarray()
    for u in range(ball.size):
        assert np.allclose(dense[2 * u:2 * u + 2, 2 * u:2 * u + 2], c)


def test_truncation_never_alters_retained_entries(p3):
    small = build_truncated_adjacency(p3, enumerate_ball(p3, 2))
    large = build_truncated_adjacency(p3, enumerate_ball(p3, 4))
    ball2 = small.ball
    ball4 = large.ball
    dense2, dense4 = small.matrix.toarray(), large.matrix.toarray()
    for u in ball2.words:
        for v in ball2.words:
            assert dense2[ball2.index[u], ball2.index[v]] == dense4[ball4.index[u], ball4.index[v]]


def test_lambda_max_monotone_in_radius(p3, poly_p333, poly_k23):
    for p, radii in ((p3, range(7)), (poly_p333, range(5)), (poly_k23, range(6))):
        values = []
        for f0 in radii:
            ta = build_truncated_adjacency(p, enumerate_ball(p, f0))
            values.append(lambda_max(ta) if ta.dim > 1 else float(ta.matrix.toarray()[0, 0]))
        assert all(b >= a - 1e-9 for a, b in zip(values, values[1:]))


def test_resource_cap(poly_p333):
    with pytest.raises(BallSizeError):
        enumerate_ball(poly_p333, 6, max_vertices=1000)


def radial_tree_lambda(depth):
    """Oracle: the depth-h 3-regular tree ball reduced to its radial chain.

    The positive top eigenvector is radial, so lambda_max equals the top
    eigenvalue of the (h+1)-level Jacobi matrix with couplings sqrt(3) at the
    root and sqrt(2) inside.
    """
    off = np.array([np.sqrt(3.0)] + [np.sqrt(2.0)] * (depth - 1))
    tri = np.diag(off, 1) + np.diag(off, -1)
    return np.linalg.eigvalsh(tri)[-1]


def test_p3_ball_lambda_matches_radial_oracle(p3):
    for depth in (4, 6, 8):
        ta = build_truncated_adjacency(p3, enumerate_ball(p3, depth))
        assert lambda_max(ta) == pytest.approx(radial_tree_lambda(depth), abs=1e-8)


def test_p3_ball_lambda_below_infinite_value(p3):
    # truncations approach 2*sqrt(2) from below; the depth-8 value is 2.7247
    ta = build_truncated_adjacency(p3, enumerate_ball(p3, 8))
    lam = lambda_max(ta)
    assert 2.70 < lam <= 2 * np.sqrt(2)
    assert lam == pytest.approx(2.724661, abs=1e-5)


def test_hermitian(poly_k23, poly_p333):
    for p in (poly_k23, poly_p333):
        ta = build_truncated_adjacency(p, enumerate_ball(p, 3))
        diff = ta.matrix - ta.matrix.conjugate().T
        assert diff.nnz == 0 or np.abs(diff.data).max() == 0.0
