import itertools
import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from subgap.errors import ConstructionError, SizeError
from subgap.setfn import (build_family, check_monotone, check_submodular, check_submodular_pairs,
                          coverage_function, cut_function, directed_cut_function, random_submodular,
                          sum_functions, table_function, threshold_function)


def pairwise_oracle(f):
    """Independent definition check: f(S|T) + f(S&T) <= f(S) + f(T) for all pairs."""
    n = f.n
    for S in range(1 << n):
        for T in range(1 << n):
            if f.value_mask(S | T) + f.value_mask(S & T) > f.value_mask(S) + f.value_mask(T) + 1e-12:
                return False
    return True


def test_dircut_optimal_set_of_base_instance():
    k = 4
    f = directed_cut_function(2 * k, [(i, k + i) for i in range(k)])
    S = {0} | {k + i for i in range(1, k)}
    assert f(S) == 1.0


def test_k2_empty_cut():
    assert cut_function(2, [(0, 1)])(set()) == 0.0


def test_coverage_union():
    f = coverage_function([{1, 2}, {2, 3}])
    assert f({0, 1}) == 3.0
    assert f.M == 3.0


def test_submodular_witness_matches_spec_example():
    w = check_submodular(table_function([0, 0, 0, 1]))
    assert w.sets == (frozenset(), frozenset({1}))
    assert w.element == 0
    assert (w.lhs, w.rhs) == (1.0, 0.0)


def test_witness_reproduces_violation():
    f = table_function([0, 0, 0, 1])
    w = check_submodular(f)
    S, T = w.sets
    j = w.element
    assert f(T | {j}) - f(T) == w.lhs
    assert f(S | {j}) - f(S) == w.rhs


def test_threshold_and_cut_pass():
    assert check_submodular(threshold_function(3, 1)) is None
    assert check_submodular(cut_function(5, [(0, 1), (1, 2), (2, 4), (0, 3)])) is None


def test_monotone_examples():
    assert check_monotone(threshold_function(4, 1)) is None
    w = check_monotone(cut_function(2, [(0, 1)]))
    assert w.sets == (frozenset({0}), frozenset({0, 1}))
    assert check_monotone(table_function([0.0] * 8)) is None


def test_negative_table_rejected():
    with pytest.raises(ConstructionError):
        table_function([0, -1, 0, 0])


def test_table_cap():
    with pytest.raises(SizeError):
        build_family({"n": 25, "kind": "explicit-table", "payload": {"table": []}})


def test_check_size_cap():
    f = cut_function(21, [(0, 1)])
    with pytest.raises(SizeError):
        check_submodular(f)


def test_explicit_table_bound_is_scanned_max():
    vals = np.random.default_rng(3).random(16)
    assert table_function(vals).M == vals.max()


def test_rational_table_entries():
    f = table_function(["0", "1/3", "1/2", "2/3"])
    assert f({0, 1}) == pytest.approx(2 / 3)
    assert str(f.payload["exact"][1]) == "1/3"


def test_json_roundtrip():
    rng = np.random.default_rng(0)
    for f in (cut_function(4, [(0, 1), (2, 3)], [0.5, 2.0]),
              directed_cut_function(3, [(0, 1), (1, 2)]),
              coverage_function([{0}, {0, 1}, {2}], {0: 2.0, 1: 1.0, 2: 0.5}),
              threshold_function(4, 2)):
        g = build_family(json.dumps(f.to_json()))
        assert np.allclose(f.table(), g.table())


def test_value_matches_table_for_every_kind():
    rng = np.random.default_rng(1)
    for _ in range(20):
        f = random_submodular(6, rng)
        tab = f.table()
        for S in itertools.product([0, 1], repeat=6):
            mask = sum(b << i for i, b in enumerate(S))
            if mask % 7 == 0:
                assert f.value_mask(mask) == pytest.approx(tab[mask])


@pytest.mark.parametrize("n", range(1, 11))
def test_bundled_families_submodular_and_nonnegative(n):
    rng = np.random.default_rng(n)
    for f in (random_submodular(n, rng), random_submodular(n, rng, monotone=True),
              threshold_function(n, max(1, n // 2))):
        assert check_submodular(f, tol=1e-12) is None
        assert (f.table() >= 0).all()
        assert f.table().max() <= f.M + 1e-12


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 6), st.integers(0, 2 ** 31 - 1))
def test_marginal_check_agrees_with_pair_definition(n, seed):
    rng = np.random.default_rng(seed)
    if rng.random() < 0.5:
        f = random_submodular(n, rng)
    else:
        f = table_function(rng.integers(0, 4, 1 << n).astype(float))
    tol = 1e-12
    assert (check_submodular(f, tol=tol) is None) == pairwise_oracle(f)
    assert (check_submodular(f, tol=tol) is None) == (check_submodular_pairs(f, tol=tol) is None)


def test_sum_preserves_submodularity():
    rng = np.random.default_rng(5)
    f = sum_functions(cut_function(4, [(0, 1)]), coverage_function([{0}, {1}, {0, 1}, set()]))
    assert check_submodular(f) is None
    assert f({0, 2}) == 1.0 + 2.0
