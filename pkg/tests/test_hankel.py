import itertools
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from kronecker_triples.hankel import (NEITHER, SequenceModel, SequenceSamples, single_root_residuals, binomial_identity,
                                      classify, generate, h_function, hankel_det, h_hankel_scan)
from kronecker_triples.scalars import GaussianRational as G


def test_geometric_two_by_two_vanishes():
    f = lambda i: 3 * Fraction(2) ** i
    for rows in itertools.combinations(range(-3, 4), 2):
        assert hankel_det(f, rows, 1) == 0


def test_examples():
    assert hankel_det(lambda i: 1 + 2 ** i, [0, 1, 2], 2) == 0
    assert hankel_det(lambda i: i * i, [0, 1], 1) == -1
    with pytest.raises(ValueError):
        hankel_det(lambda i: i, [1, 1], 1)


def test_classify_f1_example():
    m = SequenceModel("f1", (G(2),), (G(1), G(1)))
    got = classify(generate(m, 0, 6, 2))
    assert got.kind == "f1" and got.betas[0] == 2 and list(got.alphas) == [1, 1]


def test_classify_geometric_remark():
    beta = G(Fraction(-3, 2), 1)
    samples = generate(SequenceModel("f1", (beta,), (G(5), G(0), G(0))), 1, 8, 3)
    got = classify(samples)
    assert got.betas[0] == samples(2) / samples(1)
    assert list(got.alphas)[1:] == [0, 0][: len(got.alphas) - 1]


def test_classify_f2_permutation():
    m = SequenceModel("f2", (G(2), G(Fraction(-1, 3), 1)), (G(3), G(1, -2)))
    assert m.same_as(classify(generate(m, -2, 6, 2)))


def test_h_function(params):
    h = h_function(params, dps=30)
    assert abs(h(2) / h(1) - h(3) / h(2)) > 1e-3
    assert all(mpmath.isfinite(h(i)) for i in range(-100, 101))
    vals = [h(i) for i in range(-12, 13)]
    for k in (1, 2, 3):
        assert classify(SequenceSamples(-12, vals, k)) == NEITHER


def test_samples_need_enough_values():
    with pytest.raises(ValueError):
        SequenceSamples(0, (1, 2, 3), 2)


def test_single_root_residuals_vanish_for_f1():
    m = SequenceModel("f1", (G(3),), (G(1), G(-2), G(1)))
    s = generate(m, 0, 8, 3)
    assert all(r == 0 for r in single_root_residuals(s, G(3), 3))


def test_binomial_identity():
    assert all(v == 0 for _, _, v in binomial_identity(10))


def test_h_hankel_small_scan(params):
    reps = h_hankel_scan(params, k_max=2, index_range=10, threshold=0.0, random_tuples=50, dps=40)
    assert all(r.min_abs_det > 0 for r in reps)
    assert {r.kind for r in reps if r.k == 1} == {"consecutive", "exhaustive"}


gauss = st.builds(lambda a, b, c: G(Fraction(a, c), Fraction(b, c)),
                  st.integers(-5, 5), st.integers(-5, 5), st.integers(1, 3))
nonzero = gauss.filter(lambda z: z != 0)


@settings(max_examples=30, deadline=None)
@given(beta=nonzero, alphas=st.lists(nonzero, min_size=1, max_size=3))
def test_f1_round_trip(beta, alphas):
    m = SequenceModel("f1", (beta,), tuple(alphas))
    k = len(alphas)
    s = generate(m, -3, 2 * k + 4, k)
    for rows in itertools.combinations(range(-3, k + 1), k + 1):
        assert hankel_det(s, rows, k) == 0
    assert m.same_as(classify(s))


@settings(max_examples=30, deadline=None)
@given(betas=st.lists(nonzero, min_size=2, max_size=3, unique=True), data=st.data())
def test_f2_round_trip(betas, data):
    alphas = data.draw(st.lists(nonzero, min_size=len(betas), max_size=len(betas)))
    m = SequenceModel("f2", tuple(betas), tuple(alphas))
    k = len(betas)
    s = generate(m, -3, 2 * k + 4, k)
    for rows in itertools.combinations(range(-3, k + 1), k + 1):
        assert hankel_det(s, rows, k) == 0
    assert m.same_as(classify(s))
