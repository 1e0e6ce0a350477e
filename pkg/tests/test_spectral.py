import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from liftsdp.builtins import get_builtin
from liftsdp.errors import DimensionError, InputError
from liftsdp.lifts import evaluate, sample_lift
from liftsdp.spectral import (
    extreme_eigenpair,
    full_spectrum,
    hausdorff,
    lambda_max,
    lambda_min,
    spectrum_summary,
)
from conftest import random_hermitian


def test_lambda_max_diagonal():
    assert lambda_max(np.diag([1.0, 2.0, 3.0])) == pytest.approx(3.0, abs=1e-12)


def test_lambda_max_matches_dense_oracle(rng):
    for _ in range(5):
        a = random_hermitian(rng, 6)
        assert lambda_max(a) == pytest.approx(np.linalg.eigvalsh(a)[-1], abs=1e-10)


def test_lambda_max_sparse_large_path(rng):
    lift = sample_lift(3, 0, 600, seed=8)
    op = evaluate(get_builtin("p3"), lift)
    lam, vec, resid = extreme_eigenpair(op, "LA", tol=1e-10)
    assert resid <= 1e-7
    dense = np.linalg.eigvalsh(op.matrix.toarray())[-1]
    assert lam == pytest.approx(dense, abs=1e-8)


def test_lambda_min_is_negated_lambda_max(rng):
    a = random_hermitian(rng, 30)
    assert lambda_min(a) == pytest.approx(-lambda_max(-a), abs=1e-9)


def test_full_spectrum_two_by_two():
    spec = full_spectrum(np.array([[0.0, 1.0], [1.0, 0.0]]))
    assert np.allclose(spec, [-1.0, 1.0])


def test_full_spectrum_path_graph():
    # characteristic polynomial of the 3-path is t^3 - 2t
    a = np.array([[0.0, 1.0, 0.0], [1.0, 0.0, 1.0], [0.0, 1.0, 0.0]])
    assert np.allclose(full_spectrum(a), [-np.sqrt(2), 0.0, np.sqrt(2)], atol=1e-12)


def test_full_spectrum_lift_bounded(p3):
    lift = sample_lift(3, 0, 400, seed=2)
    spec = full_spectrum(evaluate(p3, lift).matrix)
    assert len(spec) == 400
    assert spec[0] >= -3.0 - 1e-9 and spec[-1] <= 3.0 + 1e-9


def test_full_spectrum_cutoff():
    with pytest.raises(DimensionError):
        full_spectrum(np.eye(10), cutoff_dim=5)


def test_hausdorff_identical_sets():
    assert hausdorff([1.0, 2.0, 3.0], [3.0, 2.0, 1.0]) == 0.0


def test_hausdorff_singletons():
    assert hausdorff([0.0], [1.0]) == 1.0


def test_hausdorff_empty_error():
    with pytest.raises(InputError):
        hausdorff([], [1.0])


def test_hausdorff_matches_brute_force(rng):
    for _ in range(20):
        s = rng.standard_normal(10)
        t = rng.standard_normal(rng.integers(1, 12))
        brute = max(
            max(min(abs(x - y) for y in t) for x in s),
            max(min(abs(x - y) for y in s) for x in t),
        )
        assert hausdorff(s, t) == pytest.approx(brute, abs=1e-12)


sets_st = st.lists(st.floats(-50, 50), min_size=1, max_size=12)


@given(sets_st, sets_st, sets_st)
@settings(max_examples=200, deadline=None)
def test_hausdorff_triangle_inequality(a, b, c):
    assert hausdorff(a, c) <= hausdorff(a, b) + hausdorff(b, c) + 1e-9


def test_unsigned_p3_has_trivial_eigenvalue_three(p3):
    # all-ones vector is an eigenvector at exactly the degree in unsigned mode
    lift = sample_lift(3, 0, 128, seed=6, signed=False)
    op = evaluate(p3, lift)
    ones = np.ones(128) / np.sqrt(128)
    assert np.allclose(op.matrix @ ones, 3.0 * ones)
    assert lambda_max(op) == pytest.approx(3.0, abs=1e-9)


def test_spectrum_summary_dense_and_sparse(rng):
    a = random_hermitian(rng, 40)
    dense = spectrum_summary(a)
    assert dense.spectrum is not None
    sparse = spectrum_summary(a, dense_cutoff=10)
    assert sparse.spectrum is None
    assert sparse.lambda_max == pytest.approx(dense.lambda_max, abs=1e-7)
    assert sparse.lambda_min == pytest.approx(dense.lambda_min, abs=1e-7)
