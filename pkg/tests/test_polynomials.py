import numpy as np
import pytest

from liftsdp.builtins import get_builtin
from liftsdp.errors import DslSyntaxError, InputError
from liftsdp.polynomials import (
    is_self_adjoint,
    make_polynomial,
    parse_poly,
    poly_adjoint,
    serialize_poly,
)
from liftsdp.words import Kind, Letter

Y1 = Letter(Kind.Y, 1)
Z1, Z1s = Letter(Kind.Z, 1), Letter(Kind.ZSTAR, 1)

P3_DSL = """
# three involution letters, scalar coefficients
signature d=3 e=0 r=1
term word="Y1" coeff=[[1]]
term word="Y2" coeff=[[1]]
term word="Y3" coeff=[[1]]
"""

BIPARTITE_DSL = """
signature d=0 e=3 r=2
term word="Z1" coeff=[[0,1],[0,0]]
term word="Z1*" coeff=[[0,0],[1,0]]
term word="Z2" coeff=[[0,1],[0,0]]
term word="Z2*" coeff=[[0,0],[1,0]]
term word="Z3" coeff=[[0,1],[0,0]]
term word="Z3*" coeff=[[0,0],[1,0]]
"""


def test_parse_p3():
    p = parse_poly(P3_DSL)
    assert (p.d, p.e, p.r) == (3, 0, 1)
    assert len(p.terms) == 3
    assert is_self_adjoint(p)
    assert p.degree() == 1


def test_parse_bipartite_example():
    p = parse_poly(BIPARTITE_DSL)
    assert p.r == 2
    assert len(p.terms) == 6
    assert is_self_adjoint(p)
    assert p == get_builtin("bipartite3")


def test_strict_mode_rejects_non_self_adjoint():
    with pytest.raises(InputError, match="self-adjoint"):
        parse_poly('signature d=0 e=1 r=1\nterm word="Z1" coeff=[[1]]')


def test_symmetrize_flag():
    p = parse_poly('signature d=0 e=1 r=1 symmetrize=true\nterm word="Z1" coeff=[[1]]')
    assert is_self_adjoint(p)
    assert np.allclose(p.terms[(Z1,)], [[0.5]])
    assert np.allclose(p.terms[(Z1s,)], [[0.5]])


def test_syntax_error_carries_position():
    with pytest.raises(DslSyntaxError) as err:
        parse_poly('signature d=1 e=0 r=1\nterm word="Y1" coeff=[[1,]]')
    assert err.value.line == 2


def test_out_of_signature_index():
    with pytest.raises(InputError, match="outside signature"):
        parse_poly('signature d=1 e=0 r=1\nterm word="Y2" coeff=[[1]]')


def test_coefficient_shape_mismatch():
    with pytest.raises(InputError, match="shape"):
        make_polynomial(1, 0, 2, {(Y1,): np.eye(3)})


def test_like_terms_merge_and_zero_drop():
    p = parse_poly(
        'signature d=2 e=0 r=1\n'
        'term word="Y1" coeff=[[0.5]]\n'
        'term word="Y1" coeff=[[0.5]]\n'
        'term word="Y2" coeff=[[1e-16]]\n'
        'term word="Y1 Y1" coeff=[[2]]\n'
    )
    # Y1 merged, Y2 dropped as zero, Y1 Y1 reduced to the empty word
    assert set(p.terms) == {(Y1,), ()}
    assert np.allclose(p.terms[(Y1,)], [[1.0]])


def test_hermitian_constant_term_unchanged_by_adjoint():
    c = np.array([[2.0, 1.0], [1.0, 3.0]])
    p = make_polynomial(0, 0, 2, {(): c})
    assert poly_adjoint(p) == p


def test_p333_self_adjoint_with_paired_terms():
    p = get_builtin("p333")
    assert poly_adjoint(p) == p
    assert len(p.terms) == 18
    # every off-diagonal coefficient pairs with its adjoint on the reversed word
    from liftsdp.words import word_adjoint

    for w, a in p.terms.items():
        assert np.array_equal(p.terms[word_adjoint(w)], a.conj().T)


def test_poly_adjoint_involution_random(rng):
    terms = {}
    words = [(Y1,), (Z1,), (Z1, Y1), ()]
    for w in words:
        terms[w] = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    p = make_polynomial(1, 1, 2, terms, symmetrize=True)
    assert poly_adjoint(poly_adjoint(p)) == p
    assert poly_adjoint(p) == p


def test_adjoint_preserves_term_count_of_self_adjoint(poly_k23, poly_p333):
    for p in (poly_k23, poly_p333):
        assert len(poly_adjoint(p).terms) == len(p.terms)


def test_serialize_round_trip_all_builtins():
    for name in ["p3", "p5", "p333", "k23", "bipartite3"]:
        p = get_builtin(name)
        again = parse_poly(serialize_poly(p))
        assert again == p


def test_serialize_round_trip_complex(rng):
    c = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    p = make_polynomial(0, 1, 2, {(Z1,): c}, symmetrize=True)
    assert parse_poly(serialize_poly(p)) == p


def test_unknown_builtin():
    with pytest.raises(InputError):
        get_builtin("q17")


def test_builtin_p_d_general():
    p7 = get_builtin("p7")
    assert p7.d == 7 and len(p7.terms) == 7
