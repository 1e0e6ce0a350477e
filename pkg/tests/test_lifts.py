import numpy as np
import pytest

from liftsdp.builtins import get_builtin
from liftsdp.errors import InputError
from liftsdp.lifts import (
    LiftInstance,
    SignedMatching,
    SignedPermutation,
    apply_word,
    evaluate,
    find_bad_vertices,
    sample_lift,
    word_action,
)
from liftsdp.polynomials import make_polynomial
from liftsdp.spectral import operator_norm_estimate
from liftsdp.words import Kind, Letter, parse_word, reduce_word

Y1, Y2, Y3 = (Letter(Kind.Y, k) for k in (1, 2, 3))
Z1, Z1s = Letter(Kind.Z, 1), Letter(Kind.ZSTAR, 1)


def test_matchings_are_fixed_point_free_involutions():
    lift = sample_lift(3, 0, 4, seed=0)
    for m in lift.matchings:
        assert np.all(m.partner[m.partner] == np.arange(4))
        assert np.all(m.partner != np.arange(4))
        assert np.all(m.sign == m.sign[m.partner])  # shared edge sign


def test_permutation_unitarity():
    lift = sample_lift(0, 1, 5, seed=0)
    p = lift.permutations[0]
    mat = np.zeros((5, 5))
    mat[p.image, np.arange(5)] = p.sign
    assert np.allclose(mat @ mat.T, np.eye(5))


def test_sampling_deterministic():
    a = sample_lift(2, 1, 10, seed=42)
    b = sample_lift(2, 1, 10, seed=42)
    for ma, mb in zip(a.matchings, b.matchings):
        assert np.array_equal(ma.partner, mb.partner)
        assert np.array_equal(ma.sign, mb.sign)
    for pa, pb in zip(a.permutations, b.permutations):
        assert np.array_equal(pa.image, pb.image)
        assert np.array_equal(pa.sign, pb.sign)


def test_odd_n_with_matchings_rejected():
    with pytest.raises(InputError):
        sample_lift(1, 0, 5, seed=0)


def test_apply_word_identity():
    lift = sample_lift(1, 0, 4, seed=1)
    assert apply_word(lift, (), 2) == (2, 1)


def test_apply_word_requires_reduced():
    lift = sample_lift(1, 0, 4, seed=1)
    with pytest.raises(InputError):
        apply_word(lift, (Y1, Y1), 0)
    assert apply_word(lift, reduce_word((Y1, Y1)), 0) == (0, 1)


def test_apply_word_three_cycle():
    # P = the 3-cycle 0 -> 1 -> 2 -> 0 with all signs +1; Z1 Z1 sends 0 to 2
    perm = SignedPermutation(image=np.array([1, 2, 0]), sign=np.ones(3, dtype=np.int8))
    lift = LiftInstance(d=0, e=1, n=3, seed=0, signed=True,
                        matchings=(), permutations=(perm,))
    assert apply_word(lift, (Z1, Z1), 0) == (2, 1)
    assert apply_word(lift, (Z1s,), 1) == (0, 1)


def test_word_action_homomorphism(rng):
    lift = sample_lift(2, 2, 12, seed=7)
    letters = [Y1, Y2, Z1, Z1s, Letter(Kind.Z, 2), Letter(Kind.ZSTAR, 2)]

    def random_word(max_len):
        return tuple(letters[rng.integers(len(letters))]
                     for _ in range(rng.integers(0, max_len)))

    for _ in range(40):
        u = random_word(4)
        v = random_word(4)
        uv = reduce_word(u + v)
        for i in range(12):
            jv, sv = apply_word(lift, reduce_word(v), i)
            ju, su = apply_word(lift, reduce_word(u), jv)
            j, s = apply_word(lift, uv, i)
            assert (j, s) == (ju, su * sv)


def test_evaluate_constant_term_block_diagonal():
    c = np.array([[1.0, 2.0], [2.0, -1.0]])
    p = make_polynomial(0, 0, 2, {(): c})
    lift = sample_lift(0, 0, 5, seed=0)
    op = evaluate(p, lift)
    dense = op.matrix.toarray()
    assert np.allclose(dense, np.kron(np.eye(5), c))


def test_evaluate_forced_two_vertex_lift():
    # all three matchings are the swap on {0,1} with signs (+, +, -)
    def swap(sign):
        return SignedMatching(partner=np.array([1, 0]),
                              sign=np.array([sign, sign], dtype=np.int8))

    lift = LiftInstance(d=3, e=0, n=2, seed=0, signed=True,
                        matchings=(swap(1), swap(1), swap(-1)), permutations=())
    op = evaluate(get_builtin("p3"), lift)
    assert np.allclose(op.matrix.toarray(), [[0.0, 1.0], [1.0, 0.0]])


def test_evaluate_signature_mismatch():
    with pytest.raises(InputError):
        evaluate(get_builtin("p3"), sample_lift(2, 0, 4, seed=0))


def test_evaluate_exactly_hermitian(poly_p333, poly_k23):
    for p in (poly_p333, poly_k23):
        lift = sample_lift(p.d, p.e, 30, seed=3)
        op = evaluate(p, lift)
        assert op.hermitian_defect() == 0.0


def test_p333_row_sums_bounded(poly_p333):
    lift = sample_lift(0, 9, 40, seed=5)
    op = evaluate(poly_p333, lift)
    row_sums = np.abs(op.matrix).sum(axis=1)
    assert row_sums.max() <= 6.0 + 1e-12


def test_operator_norm_bounded_by_coefficient_sum(p3, poly_k23):
    for p in (p3, poly_k23):
        lift = sample_lift(p.d, p.e, 64, seed=2)
        op = evaluate(p, lift)
        bound = p.coefficient_norm_sum()
        assert operator_norm_estimate(op.matrix) <= bound + 1e-6


def test_find_bad_vertices_two_vertex_lift():
    lift = sample_lift(3, 0, 2, seed=0)
    with pytest.warns(UserWarning):
        bad = find_bad_vertices(lift, 2)
    assert set(bad.members.tolist()) == {0, 1}


def test_find_bad_vertices_monotone_in_f():
    lift = sample_lift(3, 0, 200, seed=1)
    prev = set()
    for f in (2, 4, 6):
        members = set(find_bad_vertices(lift, f).members.tolist())
        assert prev <= members
        prev = members


def test_find_bad_vertices_tree_neighborhoods_empty():
    # at this size depth-2 neighborhoods are trees for most seeds; verify the
    # defining property directly instead of relying on luck: no member i has
    # a nontrivial return below the bound, and every non-member never returns
    lift = sample_lift(3, 0, 400, seed=9)
    bad = find_bad_vertices(lift, 3)
    mask = bad.mask()
    from liftsdp.words import enumerate_reduced_words

    for w in enumerate_reduced_words(3, 0, 3):
        if not w:
            continue
        image, _ = word_action(lift, w)
        returns = image == np.arange(400)
        assert not np.any(returns & ~mask)


def test_unsigned_mode_all_plus_one():
    lift = sample_lift(3, 0, 50, seed=4, signed=False)
    for m in lift.matchings:
        assert np.all(m.sign == 1)


def test_lift_record_rederives():
    lift = sample_lift(2, 1, 20, seed=11)
    rec = lift.record()
    again = sample_lift(rec["d"], rec["e"], rec["n"], rec["seed"], signed=rec["signed"])
    assert np.array_equal(lift.matchings[0].partner, again.matchings[0].partner)
    assert np.array_equal(lift.permutations[0].sign, again.permutations[0].sign)
