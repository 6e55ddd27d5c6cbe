import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from subgap.extension import (gradient, lovasz_eval, multilinear_batch, multilinear_exact,
                              multilinear_sample, partial_derivative, sample_threshold_set,
                              second_partial, split_threshold_estimate, threshold_estimate)
from subgap.setfn import (cut_function, directed_cut_function, random_submodular, table_function,
                          threshold_function)

K2 = cut_function(2, [(0, 1)])


def naive_F(f, x):
    total = 0.0
    for bits in itertools.product([0, 1], repeat=f.n):
        p = np.prod([xi if b else 1 - xi for xi, b in zip(x, bits)])
        total += p * f(frozenset(i for i, b in enumerate(bits) if b))
    return total


def threshold_integral(f, x):
    """Integral over lambda in [0,1] of f({i : x_i > lambda}), piecewise constant."""
    cuts = sorted({0.0, 1.0, *map(float, x)})
    total = 0.0
    for lo, hi in zip(cuts, cuts[1:]):
        mid = (lo + hi) / 2
        total += (hi - lo) * f(frozenset(i for i, v in enumerate(x) if v > mid))
    return total


def test_multilinear_examples():
    assert multilinear_exact(K2, [0.5, 0.5]) == 0.5
    dc = directed_cut_function(4, [(0, 2), (1, 3)])
    assert multilinear_exact(dc, [0.5] * 4) == 0.5
    assert naive_F(dc, [0.5] * 4) == 0.5


def test_multilinear_at_vertices():
    rng = np.random.default_rng(0)
    f = random_submodular(5, rng)
    for mask in range(32):
        x = [(mask >> i) & 1 for i in range(5)]
        assert multilinear_exact(f, x) == pytest.approx(f.value_mask(mask), abs=1e-12)
        assert lovasz_eval(f, x) == pytest.approx(f.value_mask(mask), abs=1e-12)


@settings(max_examples=80, deadline=None)
@given(st.integers(1, 7), st.integers(0, 2 ** 31 - 1))
def test_multilinear_matches_naive_sum(n, seed):
    rng = np.random.default_rng(seed)
    f = random_submodular(n, rng)
    x = rng.random(n)
    assert multilinear_exact(f, x) == pytest.approx(naive_F(f, x), abs=1e-12)


def test_batch_matches_single():
    rng = np.random.default_rng(1)
    f = random_submodular(6, rng)
    X = rng.random((10, 6))
    assert np.allclose(multilinear_batch(f, X), [multilinear_exact(f, x) for x in X])


def test_sampled_estimate():
    est = multilinear_sample(K2, [0.5, 0.5], 100_000, seed=3)
    assert abs(est.mean - 0.5) <= 5 * est.stderr
    est = multilinear_sample(K2, [1, 0], 1000, seed=3)
    assert est.stderr == 0 and est.mean == 1.0
    const = table_function([2.5] * 8)
    assert multilinear_sample(const, [0.3, 0.6, 0.1], 500, seed=0).mean == 2.5


def test_sampled_is_reproducible():
    f = random_submodular(8, np.random.default_rng(2))
    x = np.full(8, 0.4)
    assert multilinear_sample(f, x, 5000, seed=9) == multilinear_sample(f, x, 5000, seed=9)


def test_partial_derivative_examples():
    assert partial_derivative(K2, [0.3, 0.5], 0) == 0.0
    assert partial_derivative(K2, [0.3, 0.0], 0) == 1.0


def test_monotone_gradient_nonnegative():
    rng = np.random.default_rng(4)
    for _ in range(20):
        f = random_submodular(6, rng, monotone=True)
        assert (gradient(f, rng.random(6)) >= -1e-12).all()


def test_second_partials_nonpositive_for_submodular():
    rng = np.random.default_rng(5)
    for _ in range(20):
        f = random_submodular(5, rng)
        x = rng.random(5)
        for i, j in itertools.combinations(range(5), 2):
            assert second_partial(f, x, i, j) <= 1e-12


def test_sampled_derivative_close():
    f = random_submodular(6, np.random.default_rng(6))
    x = np.full(6, 0.5)
    exact = partial_derivative(f, x, 2)
    approx = partial_derivative(f, x, 2, exact=False, samples=40_000, seed=1)
    assert approx == pytest.approx(exact, abs=0.05 * max(1.0, f.M))


def test_lovasz_examples():
    assert lovasz_eval(K2, [0.5, 0.5]) == 0.0
    assert lovasz_eval(threshold_function(2, 1), [0.25, 0.75]) == 0.75


@settings(max_examples=80, deadline=None)
@given(st.integers(1, 7), st.integers(0, 2 ** 31 - 1))
def test_lovasz_matches_threshold_integral(n, seed):
    rng = np.random.default_rng(seed)
    f = random_submodular(n, rng)
    x = np.round(rng.random(n), 2)
    assert lovasz_eval(f, x) == pytest.approx(threshold_integral(f, x), abs=1e-12)
    assert multilinear_exact(f, x) >= lovasz_eval(f, x) - 1e-12


def test_threshold_sets():
    assert sample_threshold_set([1, 1, 0], seed=4) == {0, 1}
    f = random_submodular(5, np.random.default_rng(7))
    x = np.random.default_rng(8).random(5)
    est = threshold_estimate(f, x, 50_000, seed=1)
    assert abs(est.mean - lovasz_eval(f, x)) <= 5 * est.stderr + 1e-12


def test_split_thresholds_dominate_lovasz():
    rng = np.random.default_rng(9)
    for _ in range(5):
        f = random_submodular(6, rng)
        x = rng.random(6)
        est = split_threshold_estimate(f, x, ([0, 1, 2], [3, 4, 5]), 40_000, seed=2)
        assert est.mean >= lovasz_eval(f, x) - 5 * est.stderr
