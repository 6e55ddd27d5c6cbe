"""Permutation groups, symmetrization, strong symmetry and symmetry gaps.

A permutation is an index array ``p`` mapping element ``e`` to ``p[e]``;
composition is ``(p * q)[e] = p[q[e]]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Optional, Sequence

import numpy as np

from ._bits import bit_matrix, from_mask, lex_subsets, mask_range, to_mask
from .errors import ConstructionError, SizeError
from .extension import multilinear_batch, multilinear_exact
from .matroid import (Matroid, free_matroid, in_polytope, partition_matroid, uniform_matroid)
from .setfn import (SetFunction, Witness, cut_function, directed_cut_function, permute_masks,
                    threshold_function)

GROUP_CAP = 10_000
STRONG_CAP = 12


class PermGroup:
    """Finite permutation group, enumerated as the closure of its generators."""

    def __init__(self, n: int, generators: Sequence[Sequence[int]] = ()):
        self.n = n
        gens = []
        for g in generators:
            g = tuple(int(v) for v in g)
            if sorted(g) != list(range(n)):
                raise ConstructionError(f"{list(g)} is not a permutation of range({n})")
            gens.append(g)
        self.generators = tuple(gens)
        ident = tuple(range(n))
        seen = {ident}
        frontier = [ident]
        while frontier:
            nxt = []
            for p in frontier:
                for g in self.generators:
                    c = tuple(g[p[e]] for e in range(n))
                    if c not in seen:
                        seen.add(c)
                        nxt.append(c)
                        if len(seen) > GROUP_CAP:
                            raise SizeError(f"group closure exceeds {GROUP_CAP} elements; "
                                            "supply the orbit structure directly")
            frontier = nxt
        self.elements = tuple(sorted(seen))

    def __len__(self):
        return len(self.elements)

    def __repr__(self):
        return f"PermGroup(n={self.n}, order={len(self)})"

    @cached_property
    def array(self) -> np.ndarray:
        out = np.array(self.elements, dtype=np.int64).reshape(len(self.elements), self.n)
        out.setflags(write=False)
        return out

    @cached_property
    def counts(self) -> np.ndarray:
        """C[a, b] = #{sigma : sigma(a) = b}; symmetrization is x-bar = C x / |G|."""
        C = np.zeros((self.n, self.n), dtype=np.int64)
        for p in self.elements:
            C[np.arange(self.n), p] += 1
        C.setflags(write=False)
        return C

    @cached_property
    def orbits(self) -> tuple:
        out, seen = [], set()
        for e in range(self.n):
            if e in seen:
                continue
            orb = frozenset(int(p[e]) for p in self.elements)
            seen |= orb
            out.append(tuple(sorted(orb)))
        return tuple(out)

    @property
    def is_transitive(self) -> bool:
        return len(self.orbits) == 1

    def to_json(self) -> dict:
        return {"n": self.n, "generators": [list(g) for g in self.generators]}


def symmetric_group(n: int, offset: int = 0, total: Optional[int] = None) -> list:
    """Generators (a transposition and an n-cycle) of S_n acting on offset..offset+n-1."""
    total = total or n + offset
    base = list(range(total))
    gens = []
    if n >= 2:
        t = base.copy()
        t[offset], t[offset + 1] = offset + 1, offset
        gens.append(t)
    if n >= 3:
        c = base.copy()
        for i in range(n):
            c[offset + i] = offset + (i + 1) % n
        gens.append(c)
    return gens


def cyclic_group(n: int) -> PermGroup:
    return PermGroup(n, [[(i + 1) % n for i in range(n)]])


def symmetrize(x, g: PermGroup):
    """x-bar = average of sigma(x) over the group; exact for rational input."""
    if len(x) != g.n:
        raise ConstructionError("point and group sizes differ")
    if all(isinstance(v, (int, Fraction)) for v in x):
        size = len(g)
        xs = [Fraction(v) for v in x]
        return tuple(sum((int(c) * xs[b] for b, c in enumerate(row) if c), Fraction(0)) / size
                     for row in g.counts)
    return tuple(float(v) for v in g.counts @ np.asarray(x, dtype=float) / len(g))


def symmetrize_batch(X, g: PermGroup) -> np.ndarray:
    return np.atleast_2d(np.asarray(X, dtype=float)) @ (g.counts.T / len(g))


def d_distance(x, g: PermGroup) -> float:
    """D(x) = ||x - x-bar||^2."""
    xv = np.asarray(x, dtype=float)
    return float(np.sum((xv - symmetrize_batch(xv, g)[0]) ** 2))


# -- feasibility -----------------------------------------------------------------

@dataclass(frozen=True)
class Feasibility:
    """Independent sets or bases of a matroid, or an explicit family of sets."""

    n: int
    mode: str
    matroid: Optional[Matroid] = None
    family: Optional[tuple] = None

    def masks(self) -> np.ndarray:
        if self.mode == "family":
            return np.array(self.family, dtype=np.int64)
        from .brute import feasible_masks
        return feasible_masks(self.n, self.mode, self.matroid)

    @cached_property
    def _mask_set(self) -> frozenset:
        return frozenset(int(m) for m in self.masks())

    def contains(self, S) -> bool:
        return to_mask(S) in self._mask_set

    def contains_point(self, x) -> bool:
        """Membership in P(F), the convex hull of feasible indicators."""
        if self.mode != "family":
            return in_polytope(self.matroid, x, 1, base_mode=self.mode == "bases")
        from scipy.optimize import linprog

        V = bit_matrix(self.n)[self.masks()].astype(float).T
        A = np.vstack([V, np.ones((1, V.shape[1]))])
        b = np.concatenate([np.asarray(x, dtype=float), [1.0]])
        res = linprog(np.zeros(V.shape[1]), A_eq=A, b_eq=b, bounds=(0, None), method="highs")
        return res.status == 0

    def to_json(self) -> dict:
        if self.mode == "family":
            return {"mode": "family", "sets": [sorted(from_mask(m)) for m in self.family]}
        return {"mode": self.mode, "matroid": self.matroid.to_json()}


def independence(m: Matroid) -> Feasibility:
    return Feasibility(m.n, "independence", matroid=m)


def bases_of(m: Matroid) -> Feasibility:
    return Feasibility(m.n, "bases", matroid=m)


def family(n: int, sets) -> Feasibility:
    return Feasibility(n, "family", family=tuple(sorted({to_mask(s) for s in sets})))


@dataclass
class SymmetricInstance:
    name: str
    f: SetFunction
    feasibility: Feasibility
    group: PermGroup
    gap_data: Optional[tuple] = None  # exact (OPT, OPT_bar) when known in closed form

    @property
    def n(self) -> int:
        return self.f.n


# -- checks ------------------------------------------------------------------------

def check_invariance(f: SetFunction, g: PermGroup, tol: float = 1e-12) -> Optional[Witness]:
    """f(sigma(S)) = f(S) for every generator sigma and every S."""
    tab = f.table()
    for gen in g.generators:
        image = permute_masks(f.n, gen)
        bad = np.flatnonzero(np.abs(tab[image] - tab) > tol)
        if bad.size:
            S = int(bad[0])
            return Witness(sets=(from_mask(S), from_mask(int(image[S]))),
                           lhs=float(tab[S]), rhs=float(tab[image[S]]), note="f(S) != f(sigma(S))")
    return None


def check_family_invariance(feas: Feasibility, g: PermGroup) -> Optional[Witness]:
    masks = mask_range(feas.n)
    ok = np.zeros(1 << feas.n, dtype=bool)
    ok[feas.masks()] = True
    for gen in g.generators:
        image = permute_masks(feas.n, gen)
        bad = np.flatnonzero(ok != ok[image])
        if bad.size:
            S = int(masks[bad[0]])
            return Witness(sets=(from_mask(S), from_mask(int(image[S]))), lhs=float(ok[S]),
                           rhs=float(ok[image[S]]), note="feasibility not invariant")
    return None


def check_strong_symmetry(inst: SymmetricInstance) -> Optional[Witness]:
    """None iff f is invariant and feasibility depends only on the symmetrized indicator.

    Subsets are scanned in lexicographic order and bucketed by their
    symmetrized indicator; the witness pairs the first member of a bucket
    with the first later member whose feasibility differs.
    """
    n = inst.n
    if n > STRONG_CAP:
        raise SizeError(f"strong-symmetry scan needs n <= {STRONG_CAP} (got {n})")
    w = check_invariance(inst.f, inst.group)
    if w is not None:
        return w
    ok = np.zeros(1 << n, dtype=bool)
    ok[inst.feasibility.masks()] = True
    C = inst.group.counts
    buckets = {}
    for S in lex_subsets(n):
        mask = to_mask(S)
        key = tuple(C[:, list(S)].sum(axis=1)) if S else (0,) * n
        first = buckets.setdefault(key, mask)
        if ok[first] != ok[mask]:
            return Witness(sets=(from_mask(first), from_mask(mask)), lhs=float(ok[first]),
                           rhs=float(ok[mask]), note="same symmetrized indicator, different feasibility")
    return None


# -- symmetry gap ------------------------------------------------------------------

@dataclass
class GapResult:
    opt: float
    opt_bar: float
    gamma: float
    method: str
    opt_set: frozenset
    opt_bar_point: tuple
    opt_bar_search: float
    opt_exact: Optional[Fraction] = None
    opt_bar_exact: Optional[Fraction] = None

    def to_json(self) -> dict:
        out = {"opt": self.opt, "opt_bar": self.opt_bar, "gamma": self.gamma,
               "method": self.method, "opt_set": sorted(self.opt_set),
               "opt_bar_point": [float(v) for v in self.opt_bar_point],
               "opt_bar_search": self.opt_bar_search}
        if self.opt_bar_exact is not None:
            out["gamma_exact"] = str(self.opt_bar_exact / self.opt_exact)
        return out


def _golden(g, lo: float, hi: float, tol: float = 1e-10) -> float:
    phi = (np.sqrt(5) - 1) / 2
    a, b = lo, hi
    c, d = b - phi * (b - a), a + phi * (b - a)
    gc, gd = g(c), g(d)
    while b - a > tol:
        if gc >= gd:
            b, d, gd = d, c, gc
            c = b - phi * (b - a)
            gc = g(c)
        else:
            a, c, gc = c, d, gd
            d = a + phi * (b - a)
            gd = g(d)
    return (a + b) / 2


def maximize_over_hull(f: SetFunction, V: np.ndarray, grid: int = 65, rounds: int = 200,
                       tol: float = 1e-13):
    """Local maximization of F over conv(V) by pairwise mass transfer between vertices.

    Each move shifts weight from vertex b to vertex a along the line
    x + s (V_a - V_b); the step is chosen by a dense grid followed by golden
    section refinement.  Several starts (best vertices and the centroid)
    are tried.  Returns (value, point).
    """
    m = V.shape[0]
    vals = multilinear_batch(f, V)
    if m == 1:
        return float(vals[0]), V[0]
    starts = [np.eye(m)[i] for i in np.argsort(-vals)[:3]] + [np.full(m, 1.0 / m)]
    best = (-np.inf, None)
    for lam in starts:
        x = lam @ V
        cur = multilinear_exact(f, x)
        for _ in range(rounds):
            gained = False
            for a in range(m):
                for b in range(m):
                    if a == b or lam[b] <= 0:
                        continue
                    d = V[a] - V[b]
                    ss = np.linspace(0.0, lam[b], grid)
                    gv = multilinear_batch(f, x[None, :] + ss[:, None] * d[None, :])
                    k = int(np.argmax(gv))
                    lo, hi = ss[max(k - 1, 0)], ss[min(k + 1, grid - 1)]
                    s = _golden(lambda s_: multilinear_exact(f, x + s_ * d), lo, hi)
                    val = multilinear_exact(f, x + s * d)
                    if gv[k] > val:
                        s, val = ss[k], gv[k]
                    if val > cur + tol:
                        lam[a] += s
                        lam[b] -= s
                        x = lam @ V
                        cur = val
                        gained = True
            if not gained:
                break
        if cur > best[0]:
            best = (cur, x)
    return float(best[0]), best[1]


def symmetric_vertices(inst: SymmetricInstance) -> np.ndarray:
    """Distinct symmetrized indicators of feasible sets (vertices of the symmetrized polytope)."""
    feas = inst.feasibility.masks()
    V = bit_matrix(inst.n)[feas].astype(float) @ (inst.group.counts.T / len(inst.group))
    return np.unique(np.round(V, 12), axis=0)


def symmetry_gap(inst: SymmetricInstance, grid: int = 65) -> GapResult:
    """(OPT, OPT_bar, gamma).

    OPT is the discrete maximum over feasible sets (the relaxation is tight
    for matroid constraints).  OPT_bar is searched numerically over the
    symmetrized polytope; closed forms replace it for bundled instances.
    """
    from .brute import brute_opt

    if inst.n > STRONG_CAP:
        raise SizeError(f"generic gap computation needs n <= {STRONG_CAP}")
    w = check_invariance(inst.f, inst.group)
    if w is not None:
        from .errors import NotInvariantError
        raise NotInvariantError("objective is not invariant under the group", witness=w)
    best = brute_opt(inst.f, [from_mask(int(m)) for m in inst.feasibility.masks()])
    search, point = maximize_over_hull(inst.f, symmetric_vertices(inst), grid=grid)
    if inst.gap_data is not None:
        opt_q, bar_q = (Fraction(v) for v in inst.gap_data)
        return GapResult(float(opt_q), float(bar_q), float(bar_q / opt_q), "exact", best.best_set,
                         tuple(point), search, opt_q, bar_q)
    opt = best.best_value
    gamma = search / opt if opt > 0 else float("nan")
    return GapResult(opt, search, gamma, "grid", best.best_set, tuple(point), search)


# -- bundled instances -------------------------------------------------------------

def k2cut() -> SymmetricInstance:
    return SymmetricInstance("k2cut", cut_function(2, [(0, 1)]), independence(free_matroid(2)),
                             PermGroup(2, [[1, 0]]), (Fraction(1), Fraction(1, 2)))


def cardinality(k: int) -> SymmetricInstance:
    """f(S) = min(|S|, 1) subject to |S| <= 1 on k elements, under S_k."""
    if k < 1:
        raise ConstructionError("cardinality instance needs k >= 1")
    bar = 1 - (1 - Fraction(1, k)) ** k
    return SymmetricInstance(f"cardinality:{k}", threshold_function(k, 1),
                             independence(uniform_matroid(k, 1)),
                             PermGroup(k, symmetric_group(k)), (Fraction(1), bar))


def dircut_bases(k: int) -> SymmetricInstance:
    """Arcs a_i -> b_i (a_i = i, b_i = k + i); bases take one a and k-1 b's; S_k acts diagonally."""
    if k < 2:
        raise ConstructionError("dircut-bases needs k >= 2")
    f = directed_cut_function(2 * k, [(i, k + i) for i in range(k)])
    m = partition_matroid([range(k), range(k, 2 * k)], [1, k - 1], n=2 * k)
    gens = []
    for g in symmetric_group(k):
        gens.append(list(g) + [k + v for v in g])
    return SymmetricInstance(f"dircut-bases:{k}", f, bases_of(m), PermGroup(2 * k, gens),
                             (Fraction(1), Fraction(1, k)))


def cyclic_pairs() -> SymmetricInstance:
    """Cut of the 4-cycle over the adjacent pairs; invariant under rotation but not strongly symmetric."""
    f = cut_function(4, [(0, 1), (1, 2), (2, 3), (3, 0)])
    return SymmetricInstance("cyclic-pairs", f, family(4, [{0, 1}, {1, 2}, {2, 3}, {3, 0}]),
                             cyclic_group(4))


BUNDLED = ("k2cut", "cardinality:k", "dircut-bases:k", "cyclic-pairs")


def bundled(name: str) -> SymmetricInstance:
    base, _, arg = name.partition(":")
    try:
        if base == "k2cut" and not arg:
            return k2cut()
        if base == "cardinality":
            return cardinality(int(arg))
        if base == "dircut-bases":
            return dircut_bases(int(arg))
        if base == "cyclic-pairs" and not arg:
            return cyclic_pairs()
    except ValueError as exc:
        raise ConstructionError(f"bad instance parameter in {name!r}") from exc
    raise ConstructionError(f"unknown bundled instance {name!r}; choose from {', '.join(BUNDLED)}")


def instance_from_json(d: dict) -> SymmetricInstance:
    from .matroid import matroid_from_json
    from .setfn import build_family

    f = build_family(d["function"])
    fd = d["feasibility"]
    mode = fd.get("mode", "independence")
    if mode == "family":
        feas = family(f.n, fd["sets"])
    else:
        m = matroid_from_json(fd["matroid"])
        feas = bases_of(m) if mode == "bases" else independence(m)
    g = PermGroup(f.n, d["group"]["generators"])
    return SymmetricInstance(d.get("name", "user"), f, feas, g)
