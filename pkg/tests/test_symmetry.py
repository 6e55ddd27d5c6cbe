import itertools
import time
from fractions import Fraction

import numpy as np
import pytest

from subgap.errors import ConstructionError, NotInvariantError, SizeError
from subgap.extension import gradient, multilinear_exact
from subgap.matroid import uniform_matroid
from subgap.setfn import cut_function, random_submodular
from subgap.symmetry import (PermGroup, SymmetricInstance, bundled, cardinality, check_invariance,
                             check_strong_symmetry, cyclic_group, cyclic_pairs, d_distance,
                             dircut_bases, family, independence, instance_from_json, k2cut,
                             symmetric_group, symmetrize, symmetrize_batch, symmetry_gap)


def test_group_closure():
    g = PermGroup(4, symmetric_group(4))
    assert len(g) == 24
    elems = set(g.elements)
    assert tuple(range(4)) in elems
    for a, b in itertools.product(g.elements[:6], repeat=2):
        assert tuple(a[b[i]] for i in range(4)) in elems
    for a in g.elements:
        inv = [0] * 4
        for i, v in enumerate(a):
            inv[v] = i
        assert tuple(inv) in elems
    assert len(cyclic_group(5)) == 5


def test_group_cap():
    with pytest.raises(SizeError):
        PermGroup(8, symmetric_group(8))


def test_bad_generator():
    with pytest.raises(ConstructionError):
        PermGroup(3, [[0, 0, 1]])


def test_symmetrize_examples():
    swap = PermGroup(2, [[1, 0]])
    assert symmetrize([1, 0], swap) == (Fraction(1, 2), Fraction(1, 2))
    assert symmetrize([0.3, 0.3], swap) == (0.3, 0.3)
    k = 3
    inst = dircut_bases(k)
    x = [1, 0, 0, 0, 1, 1]
    assert symmetrize(x, inst.group) == (Fraction(1, 3),) * 3 + (Fraction(2, 3),) * 3


def test_symmetrize_is_projection():
    g = PermGroup(5, symmetric_group(3, 0, 5) + symmetric_group(2, 3, 5))
    X = np.random.default_rng(0).random((20, 5))
    once = symmetrize_batch(X, g)
    assert np.allclose(symmetrize_batch(once, g), once)
    assert np.allclose(once.sum(axis=1), X.sum(axis=1))


def test_d_distance():
    swap = PermGroup(2, [[1, 0]])
    assert d_distance([1, 0], swap) == 0.5
    assert d_distance([0.4, 0.4], swap) == 0


def test_strong_symmetry_examples():
    assert check_strong_symmetry(cardinality(3)) is None
    w = check_strong_symmetry(cyclic_pairs())
    assert w.sets == (frozenset({0, 1}), frozenset({0, 2}))
    trivial = SymmetricInstance("t", cut_function(4, [(0, 1)]),
                                family(4, [{0, 1}, {1, 2}]), PermGroup(4, []))
    assert check_strong_symmetry(trivial) is None


def test_invariance_witness():
    f = cut_function(3, [(0, 1)])
    assert check_invariance(f, PermGroup(3, [[1, 0, 2]])) is None
    assert check_invariance(f, PermGroup(3, [[0, 2, 1]])) is not None


@pytest.mark.parametrize("name, gamma", [
    ("k2cut", 0.5), ("cardinality:2", 0.75), ("cardinality:3", 19 / 27),
    ("dircut-bases:2", 0.5), ("dircut-bases:3", 1 / 3),
])
def test_bundled_gaps(name, gamma):
    t0 = time.perf_counter()
    res = symmetry_gap(bundled(name))
    assert time.perf_counter() - t0 < 1.0
    assert res.gamma == pytest.approx(gamma, abs=1e-12)
    assert res.opt_bar_search == pytest.approx(res.opt_bar, abs=1e-9)


def test_gap_numeric_search_without_closed_form():
    inst = cardinality(4)
    inst.gap_data = None
    res = symmetry_gap(inst)
    assert res.opt_bar == pytest.approx(1 - 0.75 ** 4, abs=1e-9)
    assert res.opt == 1.0


def test_gap_k2_triple():
    res = symmetry_gap(k2cut())
    assert (res.opt, res.opt_bar, res.gamma) == (1.0, 0.5, 0.5)


def test_gap_rejects_non_invariant():
    inst = SymmetricInstance("bad", cut_function(3, [(0, 1)]), independence(uniform_matroid(3, 3)),
                             PermGroup(3, [[0, 2, 1]]))
    with pytest.raises(NotInvariantError):
        symmetry_gap(inst)


def test_bundled_unknown():
    with pytest.raises(ConstructionError):
        bundled("petersen")


def test_instance_from_json():
    inst = instance_from_json({
        "function": {"n": 2, "kind": "cut", "payload": {"edges": [[0, 1]]}},
        "feasibility": {"mode": "independence", "matroid": {"kind": "free", "n": 2}},
        "group": {"generators": [[1, 0]]},
    })
    assert symmetry_gap(inst).gamma == pytest.approx(0.5)


@pytest.mark.parametrize("name", ["k2cut", "cardinality:3", "dircut-bases:2", "dircut-bases:3"])
def test_gradient_symmetry(name):
    inst = bundled(name)
    rng = np.random.default_rng(1)
    h = 1e-6
    for _ in range(5):
        x = rng.uniform(0.1, 0.9, inst.n)
        G = lambda y: multilinear_exact(inst.f, symmetrize_batch(y, inst.group)[0])
        fd = np.array([(G(x + h * e) - G(x - h * e)) / (2 * h) for e in np.eye(inst.n)])
        xbar = symmetrize_batch(x, inst.group)[0]
        assert np.allclose(fd, gradient(inst.f, xbar), atol=1e-6)


def test_symmetric_point_value_of_base_instance():
    inst = dircut_bases(2)
    assert multilinear_exact(inst.f, [0.5] * 4) == 0.5
    assert check_invariance(random_submodular(3, np.random.default_rng(0)), PermGroup(3, [])) is None
