import warnings
from fractions import Fraction

import numpy as np
import pytest

from subgap.brute import brute_opt
from subgap.errors import InfeasibleError
from subgap.extension import multilinear_exact
from subgap.localsearch import (GOLDEN_T, SearchConfig, find_base_start, greedy_base,
                                local_search_bases, local_search_independence)
from subgap.matroid import (free_matroid, in_polytope, partition_matroid, random_matroid,
                            random_nu2_matroid, uniform_matroid)
from subgap.setfn import coverage_function, cut_function, directed_cut_function, random_submodular

half = Fraction(1, 2)
K2 = cut_function(2, [(0, 1)])


def base_instance(k):
    f = directed_cut_function(2 * k, [(i, k + i) for i in range(k)])
    m = partition_matroid([range(k), range(k, 2 * k)], [1, k - 1], n=2 * k)
    return f, m


def test_k2_hand_trace():
    with pytest.warns(UserWarning):
        sol = local_search_independence(K2, free_matroid(2), SearchConfig(t=half))
    assert sol.x in ((half, 0), (0, half))
    assert sol.value == 0.5
    assert sol.converged


def test_no_warning_at_golden_bound():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        local_search_independence(K2, free_matroid(2), SearchConfig(t=Fraction(3, 8)))
    assert Fraction(3, 8) < GOLDEN_T


def test_coverage_on_uniform():
    rng = np.random.default_rng(5)
    t = Fraction(3, 8)
    for _ in range(5):
        sets = [set(rng.choice(10, size=int(rng.integers(1, 5)), replace=False).tolist()) for _ in range(6)]
        f = coverage_function(sets)
        m = uniform_matroid(6, 2)
        sol = local_search_independence(f, m, SearchConfig(t=t, slack=0.0))
        opt = brute_opt(f, "independence", m).best_value
        assert sol.value >= float(t - t * t / 2) * opt - 1e-9
        assert in_polytope(m, sol.x, t)


def test_independence_solution_is_feasible_and_rounds():
    rng = np.random.default_rng(6)
    for _ in range(10):
        n = int(rng.integers(3, 8))
        f, m = random_submodular(n, rng), random_matroid(n, rng)
        sol = local_search_independence(f, m, SearchConfig(t=Fraction(1, 3), slack=0.0))
        assert in_polytope(m, sol.x, Fraction(1, 3))
        assert m.is_independent(sol.rounded)
        assert sol.value == pytest.approx(multilinear_exact(f, [float(v) for v in sol.x]))


def test_base_start_examples():
    _, m = base_instance(2)
    x, bases = find_base_start(m, half)
    assert x == (half,) * 4 and len(bases) == 2
    x, bases = find_base_start(uniform_matroid(4, 2), half)
    assert x == (half,) * 4
    x, _ = find_base_start(partition_matroid([[0, 1], [2]], [1, 1], n=3), 1)
    assert all(v in (0, 1) for v in x) and sum(x) == 2


def test_base_start_infeasible_names_nu():
    with pytest.raises(InfeasibleError) as exc:
        find_base_start(free_matroid(3), half)
    assert exc.value.nu == 1


def test_base_instance_k2():
    f, m = base_instance(2)
    sol = local_search_bases(f, m, SearchConfig(t=half))
    assert sol.value >= 0.25
    assert multilinear_exact(f, [0.5] * 4) == 0.5
    assert in_polytope(m, sol.x, half, base_mode=True)
    assert sol.rounded in {frozenset(b) for b in ({0, 3}, {1, 2}, {0, 2}, {1, 3})}


def test_nu2_bases():
    rng = np.random.default_rng(7)
    for _ in range(10):
        n = 2 * int(rng.integers(2, 5))
        f, m = random_submodular(n, rng), random_nu2_matroid(n, rng)
        sol = local_search_bases(f, m, SearchConfig(t=half, slack=0.0))
        assert sol.value >= 0.25 * brute_opt(f, "bases", m).best_value - 1e-9
        assert len(sol.rounded) == m.full_rank and m.is_independent(sol.rounded)


def test_greedy_base_is_base():
    rng = np.random.default_rng(8)
    for _ in range(10):
        n = int(rng.integers(2, 8))
        m = random_matroid(n, rng)
        B = greedy_base(random_submodular(n, rng), m)
        assert m.is_independent(B) and len(B) == m.full_rank


def test_step_cap_returns_unconverged():
    f = random_submodular(6, np.random.default_rng(9), monotone=True)
    with pytest.warns(RuntimeWarning):
        sol = local_search_independence(f, uniform_matroid(6, 3),
                                        SearchConfig(t=Fraction(1, 4), max_steps=1))
    assert not sol.converged and sol.steps == 1


def test_sampled_evaluator_near_exact():
    f = random_submodular(6, np.random.default_rng(10))
    m = uniform_matroid(6, 3)
    exact = local_search_independence(f, m, SearchConfig(t=Fraction(1, 3)))
    sampled = local_search_independence(f, m, SearchConfig(t=Fraction(1, 3), evaluator="sampled",
                                                           samples=20_000, seed=1))
    assert sampled.value >= 0.9 * exact.value - 0.05 * f.M


def test_rejects_bad_t():
    with pytest.raises(ValueError):
        SearchConfig(t=0)
    with pytest.raises(ValueError):
        SearchConfig(t=half, q=3)
