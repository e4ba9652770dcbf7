import math

import numpy as np
import pytest

from schottkyvoa._validation import DimensionError, DivergenceWarning
from schottkyvoa.mmt import (
    Multiset,
    enumerate_multisets,
    enumerate_weighted_multisets,
    mmt_identity_check,
    partial_permanent,
    partial_permanent_minors,
    permanent,
    permanent_naive,
    spectral_radius_estimate,
    submatrix,
)
from schottkyvoa.verify import mmt_instance, rel_err


def _cplx(rng, shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def test_permanent_2x2_expansion():
    a, b, c, d = 1.5, -2j, 0.3 + 1j, 4.0
    assert permanent([[a, b], [c, d]]) == pytest.approx(a * d + b * c, abs=1e-14)


def test_permanent_identity_and_empty():
    assert permanent(np.eye(4)) == pytest.approx(1.0)
    assert permanent(np.zeros((0, 0))) == 1.0


def test_permanent_ones_is_factorial():
    for n in range(1, 9):
        assert permanent(np.ones((n, n))) == pytest.approx(math.factorial(n), rel=1e-12)


@pytest.mark.parametrize("n", [2, 3, 5, 7])
def test_ryser_matches_naive(n, rng):
    M = _cplx(rng, (n, n))
    assert rel_err(permanent(M), permanent_naive(M)) <= 1e-12


def test_ryser_beyond_chunk_matches_expansion(rng):
    # n = 16 spans several Gray-code chunks; check against a first-row expansion
    n = 16
    M = _cplx(rng, (n, n)) / 3
    ref = sum(
        M[0, j] * permanent(np.delete(np.delete(M, 0, axis=0), j, axis=1)) for j in range(n)
    )
    assert rel_err(permanent(M), ref) <= 1e-10


def test_permanent_size_limits():
    with pytest.raises(ValueError):
        permanent_naive(np.ones((9, 9)))
    with pytest.raises(ValueError):
        permanent(np.ones((21, 21)))
    with pytest.raises(DimensionError):
        permanent(np.ones((2, 3)))


def test_partial_permanent_2x2_hand_expansion():
    A = np.array([[0.2, -1.1j], [0.7, 1.3 + 0.4j]])
    t1, t2 = 0.5 - 0.1j, -1.2
    p1, p2 = 2.0j, 0.9
    expected = (
        t1 * p1 * t2 * p2
        + A[0, 0] * t2 * p2
        + A[1, 1] * t1 * p1
        + A[0, 1] * t1 * p2
        + A[1, 0] * t2 * p1
        + A[0, 0] * A[1, 1]
        + A[0, 1] * A[1, 0]
    )
    assert partial_permanent(A, [t1, t2], [p1, p2]) == pytest.approx(expected, abs=1e-14)


def test_partial_permanent_degenerations(rng):
    M = _cplx(rng, (4, 4))
    theta, phi = _cplx(rng, 4), _cplx(rng, 4)
    assert rel_err(partial_permanent(M, np.zeros(4), np.zeros(4)), permanent(M)) <= 1e-13
    assert rel_err(partial_permanent(np.zeros((4, 4)), theta, phi), np.prod(theta * phi)) <= 1e-13


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_partial_permanent_dp_matches_minors(n, rng):
    M, theta, phi = _cplx(rng, (n, n)), _cplx(rng, n), _cplx(rng, n)
    assert rel_err(partial_permanent(M, theta, phi), partial_permanent_minors(M, theta, phi)) <= 1e-12


def test_enumerate_multisets_small_cases():
    assert [m.elements for m in enumerate_multisets(2, 1)] == [(), (0,), (1,)]
    assert [m.elements for m in enumerate_multisets(1, 3)] == [(), (0,), (0, 0), (0, 0, 0)]


def test_enumerate_multisets_stars_and_bars():
    assert sum(1 for _ in enumerate_multisets(3, 4)) == math.comb(3 + 4, 4)


def test_enumerate_multisets_graded_order():
    sizes = [m.size for m in enumerate_multisets(3, 3)]
    assert sizes == sorted(sizes)


def test_weighted_multisets_match_filtered_enumeration():
    weights = [1, 2, 2, 3]
    got = {m.elements for m in enumerate_weighted_multisets(weights, 5)}
    ref = {
        m.elements
        for m in enumerate_multisets(4, 5)
        if sum(weights[i] for i in m) <= 5
    }
    assert got == ref


def test_multiset_factorial_and_counts():
    m = Multiset.from_counts({0: 2, 3: 3})
    assert m.counts == {0: 2, 3: 3}
    assert m.factorial == 2 * 6
    with pytest.raises(ValueError):
        Multiset((-1,))


def test_submatrix_repetition():
    M = np.array([[1.0, 2.0], [3.0, 4.0]])
    assert submatrix(M, (), ()).shape == (0, 0)
    assert permanent(submatrix(M, (), ())) == 1.0
    np.testing.assert_array_equal(submatrix(M, (0, 0), (0, 0)), [[1, 1], [1, 1]])
    assert permanent(submatrix(M, (0, 1), (0, 1))) == pytest.approx(1 * 4 + 2 * 3)


def test_mmt_zero_matrix_is_exact():
    lhs, rhs = mmt_identity_check(np.zeros((3, 3)), "basic", 5)
    assert lhs == pytest.approx(1.0) and rhs == pytest.approx(1.0)


def test_mmt_scalar_geometric_series():
    a = 0.3 - 0.1j
    lhs, _ = mmt_identity_check([[a]], "basic", 12)
    assert lhs == pytest.approx(sum(a**k for k in range(13)), abs=1e-15)


@pytest.mark.parametrize("variant", ["basic", "submatrix", "pperm", "general"])
def test_mmt_truncation_error_decreases_geometrically(variant):
    # supplementary to the size-8 acceptance check: the identities hold,
    # and the residual is pure truncation that shrinks with the size
    rng = np.random.default_rng(7)
    A, kwargs = mmt_instance(rng, variant, norm=0.2)
    errs = [rel_err(*mmt_identity_check(A, variant, s, **kwargs)) for s in (4, 8, 12)]
    assert errs[1] < errs[0] and errs[2] < errs[1]
    assert errs[2] <= 1e-6


def test_mmt_warns_when_not_contracting():
    with pytest.warns(DivergenceWarning):
        mmt_identity_check([[1.5]], "basic", 3)


def test_spectral_radius_estimate():
    A = np.diag([0.1, -0.4, 0.2])
    assert spectral_radius_estimate(A, iterations=200) == pytest.approx(0.4, rel=1e-6)
