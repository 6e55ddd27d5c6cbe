from fractions import Fraction

import numpy as np
import pytest

from subgap.errors import ConstructionError, SizeError
from subgap.matroid import (as_explicit, enumerate_bases, explicit_matroid, fractional_base_packing,
                            free_matroid, in_polytope, matroid_from_json, packing_lp_float,
                            partition_matroid, random_matroid, strip_loops_and_coloops,
                            uniform_matroid)
from subgap.setfn import check_monotone, check_submodular, table_function

half = Fraction(1, 2)


def base_instance(k):
    return partition_matroid([range(k), range(k, 2 * k)], [1, k - 1], n=2 * k)


def test_rank_examples():
    assert uniform_matroid(4, 2).rank({0, 1, 2}) == 2
    assert base_instance(2).rank({0, 1}) == 1
    assert free_matroid(5).rank({0, 3, 4}) == 3


def test_rank_table_matches_greedy_rank():
    rng = np.random.default_rng(0)
    for _ in range(20):
        m = random_matroid(int(rng.integers(2, 9)), rng)
        rt = m.rank_table()
        for mask in range(1 << m.n):
            assert rt[mask] == m.rank_mask(mask)


def test_rank_is_monotone_submodular():
    rng = np.random.default_rng(1)
    for _ in range(10):
        m = random_matroid(int(rng.integers(2, 9)), rng)
        f = table_function(m.rank_table().astype(float))
        assert check_submodular(f) is None
        assert check_monotone(f) is None


def test_enumerate_bases_counts():
    assert len(enumerate_bases(uniform_matroid(4, 2))) == 6
    assert len(enumerate_bases(base_instance(2))) == 4
    assert enumerate_bases(free_matroid(3)) == [frozenset({0, 1, 2})]


def test_enumerate_cap():
    with pytest.raises(SizeError):
        enumerate_bases(uniform_matroid(17, 3))


def test_explicit_exchange_validation():
    explicit_matroid(4, [{0, 1}, {0, 2}, {1, 2}])
    with pytest.raises(ConstructionError):
        explicit_matroid(4, [{0, 1}, {2, 3}])
    with pytest.raises(ConstructionError):
        explicit_matroid(3, [])


@pytest.mark.parametrize("m, nu", [
    (uniform_matroid(4, 2), Fraction(2)),
    (uniform_matroid(7, 3), Fraction(7, 3)),
    (base_instance(3), Fraction(3, 2)),
    (free_matroid(3), Fraction(1)),
])
def test_packing_values(m, nu):
    cert = fractional_base_packing(m)
    assert cert.nu == nu
    assert cert.validate(m)


def test_packing_analytic_matches_lp():
    rng = np.random.default_rng(2)
    for _ in range(25):
        m = random_matroid(int(rng.integers(2, 11)), rng, kind="partition")
        a = fractional_base_packing(m)
        b = fractional_base_packing(m, method="lp")
        assert a.nu == b.nu
        assert a.validate(m) and b.validate(m)
        assert float(a.nu) == pytest.approx(packing_lp_float(m))


def test_packing_full_partition_at_twelve():
    m = partition_matroid([range(6), range(6, 12)], [2, 3], n=12)
    assert fractional_base_packing(m, method="lp").nu == fractional_base_packing(m).nu == 2


def test_packing_explicit_lp():
    m = explicit_matroid(4, [{0, 1}, {0, 2}, {1, 2}, {0, 3}, {1, 3}, {2, 3}])
    cert = fractional_base_packing(m)
    assert cert.nu == 2 and cert.validate(m)


def test_packing_certificate_json():
    out = fractional_base_packing(base_instance(3)).to_json()
    assert out["nu"] == "3/2"
    assert all("/" in w["weight"] for w in out["weights"])


def test_membership_examples():
    assert in_polytope(uniform_matroid(4, 2), [half] * 4, half, base_mode=True)
    assert not in_polytope(free_matroid(2), [0.6, 0.0], 0.5)
    assert in_polytope(base_instance(2), [half] * 4, half, base_mode=True)
    assert not in_polytope(uniform_matroid(3, 1), [half, half, half], 1)
    assert in_polytope(uniform_matroid(3, 1), [half, half, 0], 1)


def test_bt_nonempty_iff_nu_at_least_inverse_t():
    from subgap.localsearch import find_base_start
    from subgap.errors import InfeasibleError

    for m in (uniform_matroid(4, 2), uniform_matroid(6, 2), base_instance(3), free_matroid(3),
              partition_matroid([range(3), range(3, 5)], [1, 1], n=5)):
        nu = fractional_base_packing(m).nu
        for t in (Fraction(1, 4), Fraction(1, 3), Fraction(1, 2), Fraction(2, 3), Fraction(1)):
            if nu >= 1 / t:
                x, _ = find_base_start(m, t)
                assert in_polytope(m, x, t, base_mode=True)
            else:
                with pytest.raises(InfeasibleError):
                    find_base_start(m, t)


def test_strip_loops_and_coloops():
    m = partition_matroid([[0, 1], [2], [3, 4]], [1, 1, 2], n=6)
    red, loops, coloops = strip_loops_and_coloops(m)
    assert loops == {5}
    assert coloops == {2, 3, 4}
    assert red.full_rank == 1
    assert enumerate_bases(red) == [frozenset({0}), frozenset({1})]


def test_explicit_view_and_dual():
    m = base_instance(3)
    e = as_explicit(m)
    assert enumerate_bases(e) == enumerate_bases(m)
    d = m.dual()
    assert {frozenset(range(6)) - b for b in enumerate_bases(m)} == set(enumerate_bases(d))


def test_json():
    m = matroid_from_json({"kind": "partition", "parts": [[0, 1], [2, 3]], "caps": [1, 1]})
    assert len(enumerate_bases(m)) == 4
    assert matroid_from_json(m.to_json()).rank({0, 1, 2}) == 2
