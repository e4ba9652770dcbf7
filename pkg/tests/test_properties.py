import json
import math

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from schottkyvoa.io import dumps, encode
from schottkyvoa.mmt import (
    enumerate_multisets,
    partial_permanent,
    partial_permanent_minors,
    permanent,
    permanent_naive,
)
from schottkyvoa.schottky import MoebiusMap, reduced_words
from schottkyvoa.forms import omega
from schottkyvoa.verify import sample_domain_points

finite = st.floats(-2, 2, allow_nan=False, allow_infinity=False)
small = st.complex_numbers(max_magnitude=2, allow_nan=False, allow_infinity=False)


def cmatrices(n_max=5):
    return st.integers(0, n_max).flatmap(lambda n: arrays(complex, (n, n), elements=small))


@given(cmatrices())
def test_ryser_matches_naive(M):
    assert abs(permanent(M) - permanent_naive(M)) <= 1e-9 * max(1.0, abs(permanent_naive(M)))


@given(cmatrices(6), st.randoms(use_true_random=False))
def test_permanent_invariant_under_row_and_column_permutation(M, rnd):
    n = M.shape[0]
    rows, cols = list(range(n)), list(range(n))
    rnd.shuffle(rows)
    rnd.shuffle(cols)
    ref = permanent(M)
    assert abs(permanent(M[np.ix_(rows, cols)]) - ref) <= 1e-9 * max(1.0, abs(ref))


@given(st.integers(1, 4).flatmap(
    lambda n: st.tuples(
        arrays(complex, (n, n), elements=small),
        arrays(complex, n, elements=small),
        arrays(complex, n, elements=small),
    )
))
def test_partial_permanent_dp_matches_minors(args):
    M, theta, phi = args
    ref = partial_permanent_minors(M, theta, phi)
    assert abs(partial_permanent(M, theta, phi) - ref) <= 1e-9 * max(1.0, abs(ref))


@given(st.integers(0, 5), st.integers(0, 5))
def test_multiset_count_is_stars_and_bars(n, s):
    assert sum(1 for _ in enumerate_multisets(n, s)) == math.comb(n + s, s)


@settings(max_examples=20)
@given(st.integers(1, 3), st.integers(1, 4))
def test_reduced_word_count(g, n):
    assert sum(1 for _ in reduced_words(g, n)) == 2 * g * (2 * g - 1) ** (n - 1)


def unimodular():
    def build(entries):
        a, b, c, d = entries
        return MoebiusMap(a, b, c, d)
    return st.tuples(small, small, small, small).filter(
        lambda e: abs(e[0] * e[3] - e[1] * e[2]) > 0.1
    ).map(build)


@given(unimodular(), unimodular(), small)
def test_moebius_composition_and_inverse(f, g, z):
    h = f @ g
    inner = g(z)
    if abs(g.c * z + g.d) < 1e-3 or abs(f.c * inner + f.d) < 1e-3:
        return
    assert abs(h(z) - f(inner)) <= 1e-8 * max(1.0, abs(f(inner)))
    assert (f @ f.inverse()).allclose(MoebiusMap.identity(), tol=1e-8 * max(1.0, np.abs(f.matrix).max() ** 2))


json_leaf = st.one_of(st.integers(-10**6, 10**6), finite, small, st.booleans(), st.none(), st.text(max_size=5))
json_tree = st.recursive(
    json_leaf,
    lambda kids: st.one_of(st.lists(kids, max_size=3), st.dictionaries(st.text(max_size=4), kids, max_size=3)),
    max_leaves=10,
)


@given(json_tree)
def test_dumps_is_deterministic_and_round_trips_encoding(obj):
    text = dumps(obj)
    assert text == dumps(obj)
    assert json.loads(text) == json.loads(json.dumps(encode(obj)))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_omega_symmetric_at_random_points(sys2, seed):
    x, y = sample_domain_points(sys2.surface, np.random.default_rng(seed), 2)
    a, b = omega(sys2, x, y), omega(sys2, y, x)
    assert abs(a - b) <= 1e-10 * abs(a)
