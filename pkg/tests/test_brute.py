import itertools

import numpy as np
import pytest

from subgap.brute import bipartite_tightness, brute_opt, feasible_masks, value_bound_check
from subgap.errors import SizeError
from subgap.matroid import free_matroid, partition_matroid, random_matroid, uniform_matroid
from subgap.setfn import cut_function, directed_cut_function, random_submodular, table_function


def test_k2_unconstrained():
    r = brute_opt(cut_function(2, [(0, 1)]))
    assert r.best_value == 1.0 and r.best_set == {0}


def test_base_instance_k2():
    f = directed_cut_function(4, [(0, 2), (1, 3)])
    m = partition_matroid([[0, 1], [2, 3]], [1, 1], n=4)
    r = brute_opt(f, "bases", m)
    assert r.best_value == 1.0 and r.best_set == {0, 3}


def test_zero_function_takes_first_feasible():
    r = brute_opt(table_function([0.0] * 8), "bases", uniform_matroid(3, 2))
    assert r.best_value == 0 and r.best_set == {0, 1}


def test_feasible_masks_match_enumeration():
    rng = np.random.default_rng(0)
    for _ in range(10):
        n = int(rng.integers(2, 8))
        m = random_matroid(n, rng)
        ind = {int(s) for s in feasible_masks(n, "independence", m)}
        want = {sum(1 << e for e in S) for k in range(n + 1)
                for S in itertools.combinations(range(n), k) if m.is_independent(S)}
        assert ind == want


def test_family_feasibility():
    f = cut_function(4, [(0, 1), (1, 2), (2, 3), (3, 0)])
    r = brute_opt(f, [{0, 1}, {1, 2}, {0, 2}])
    assert r.best_value == 4.0 and r.best_set == {0, 2}


def test_size_cap():
    with pytest.raises(SizeError):
        feasible_masks(21, "all")


def test_value_bounds_on_random_instances():
    rng = np.random.default_rng(1)
    for _ in range(40):
        n = int(rng.integers(1, 9))
        f, m = random_submodular(n, rng), random_matroid(n, rng)
        assert value_bound_check(f, m, "independence") is None
        assert value_bound_check(f, m, "bases") is None


def test_single_element_free():
    f = table_function([0.0, 3.0])
    assert brute_opt(f, "independence", free_matroid(1)).best_value == f.M


@pytest.mark.parametrize("n", [4, 6, 8])
def test_bipartite_tightness(n):
    f, m = bipartite_tightness(n)
    assert brute_opt(f, "bases", m).best_value == 1.0
    assert f.M == n * n / 4
    assert f(set(range(n // 2))) == n * n / 4
    assert value_bound_check(f, m, "bases") is None
