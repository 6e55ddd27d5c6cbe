"""Matroid oracles, base enumeration, fractional base packing and polytope membership."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from math import lcm
from typing import Optional, Sequence

import numpy as np

from ._bits import bit_matrix, from_mask, mask_range, popcounts, to_mask
from .errors import ConstructionError, SizeError

ENUM_CAP = 16
FLOAT_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class Matroid:
    n: int
    kind: str
    k: Optional[int] = None
    parts: Optional[tuple] = None
    caps: Optional[tuple] = None
    bases: Optional[tuple] = None  # explicit kind: base masks
    deleted: int = 0  # elements removed from the ground set (behave as loops)

    def __repr__(self):
        extra = {"uniform": f", k={self.k}", "partition": f", caps={self.caps}",
                 "explicit": f", bases={len(self.bases or ())}"}.get(self.kind, "")
        return f"Matroid({self.kind}, n={self.n}{extra})"

    @property
    def live(self) -> int:
        return ((1 << self.n) - 1) & ~self.deleted

    # -- independence and rank ---------------------------------------------

    def is_independent(self, S) -> bool:
        mask = to_mask(S)
        if mask & self.deleted:
            return False
        return self.rank_mask(mask) == bin(mask).count("1")

    def rank_mask(self, mask: int) -> int:
        mask &= self.live
        if self.kind == "free":
            return bin(mask).count("1")
        if self.kind == "uniform":
            return min(bin(mask).count("1"), self.k)
        if self.kind == "partition":
            return sum(min(bin(mask & p).count("1"), c) for p, c in zip(self.parts, self.caps))
        return max(bin(mask & b).count("1") for b in self.bases)

    def rank(self, S) -> int:
        return self.rank_mask(to_mask(S))

    @property
    def full_rank(self) -> int:
        return self.rank_mask(self.live)

    def rank_table(self) -> np.ndarray:
        """Rank of every mask, as an int64 array of length 2^n."""
        return self._rank_table

    @cached_property
    def _rank_table(self) -> np.ndarray:
        if self.n > 24:
            raise SizeError(f"rank table needs n <= 24 (got {self.n})")
        masks = mask_range(self.n) & self.live
        pc = popcounts(self.n)
        if self.kind == "free":
            out = pc[masks]
        elif self.kind == "uniform":
            out = np.minimum(pc[masks], self.k)
        elif self.kind == "partition":
            out = np.zeros(1 << self.n, dtype=np.int64)
            for p, c in zip(self.parts, self.caps):
                out += np.minimum(pc[masks & p], c)
        else:
            out = np.zeros(1 << self.n, dtype=np.int64)
            for b in self.bases:
                np.maximum(out, pc[masks & b], out=out)
        out = np.asarray(out, dtype=np.int64)
        out.setflags(write=False)
        return out

    # -- derived matroids ---------------------------------------------------

    def restrict(self, keep) -> "Matroid":
        """Restriction to ``keep``; other elements are deleted but indices are preserved."""
        drop = self.live & ~to_mask(keep)
        return self._with(deleted=self.deleted | drop)

    def _with(self, **kw) -> "Matroid":
        d = dict(n=self.n, kind=self.kind, k=self.k, parts=self.parts, caps=self.caps,
                 bases=self.bases, deleted=self.deleted)
        d.update(kw)
        if d["kind"] == "explicit" and d["bases"] is not None:
            d["bases"] = tuple(sorted({b & ~d["deleted"] for b in d["bases"]}))
            r = max(bin(b).count("1") for b in d["bases"])
            d["bases"] = tuple(b for b in d["bases"] if bin(b).count("1") == r)
        return Matroid(**d)

    def dual(self) -> "Matroid":
        n_live = bin(self.live).count("1")
        if self.kind == "free":
            return uniform_matroid(self.n, 0)._with(deleted=self.deleted)
        if self.kind == "uniform":
            return self._with(k=n_live - self.k)
        if self.kind == "partition":
            caps = tuple(bin(p).count("1") - c for p, c in zip(self.parts, self.caps))
            return self._with(caps=caps)
        return self._with(bases=tuple(self.live & ~b for b in self.bases))

    def loops(self) -> frozenset:
        return frozenset(e for e in from_mask(self.live) if self.rank_mask(1 << e) == 0)

    def coloops(self) -> frozenset:
        r = self.full_rank
        return frozenset(e for e in from_mask(self.live) if self.rank_mask(self.live & ~(1 << e)) < r)

    def to_json(self) -> dict:
        out = {"kind": self.kind, "n": self.n}
        if self.kind == "uniform":
            out["k"] = self.k
        elif self.kind == "partition":
            out["parts"] = [sorted(from_mask(p)) for p in self.parts]
            out["caps"] = list(self.caps)
        elif self.kind == "explicit":
            out["bases"] = [sorted(from_mask(b)) for b in self.bases]
        if self.deleted:
            out["deleted"] = sorted(from_mask(self.deleted))
        return out


def free_matroid(n: int) -> Matroid:
    return Matroid(n, "free")


def uniform_matroid(n: int, k: int) -> Matroid:
    if not 0 <= k <= n:
        raise ConstructionError(f"uniform matroid needs 0 <= k <= n (k={k}, n={n})")
    return Matroid(n, "uniform", k=k)


def partition_matroid(parts: Sequence, caps: Sequence[int], n: Optional[int] = None) -> Matroid:
    """Parts must be disjoint; elements outside every part are loops."""
    masks = tuple(to_mask(p) for p in parts)
    if len(masks) != len(caps):
        raise ConstructionError("one capacity per part required")
    seen = 0
    for m in masks:
        if m & seen:
            raise ConstructionError("partition parts must be disjoint")
        seen |= m
    if any(c < 0 for c in caps):
        raise ConstructionError("capacities must be nonnegative")
    n = n if n is not None else seen.bit_length()
    caps = tuple(min(int(c), bin(m).count("1")) for m, c in zip(masks, caps))
    return Matroid(n, "partition", parts=masks, caps=caps, deleted=((1 << n) - 1) & ~seen)


def explicit_matroid(n: int, bases) -> Matroid:
    """Matroid given by its bases; the basis exchange axiom is verified (n <= 16)."""
    if n > ENUM_CAP:
        raise SizeError(f"explicit matroids are capped at n = {ENUM_CAP}")
    masks = tuple(sorted({to_mask(b) for b in bases}))
    if not masks:
        raise ConstructionError("a matroid needs at least one base")
    if any(m >> n for m in masks):
        raise ConstructionError("base mentions an element outside the ground set")
    sizes = {bin(m).count("1") for m in masks}
    if len(sizes) != 1:
        raise ConstructionError(f"bases have differing sizes {sorted(sizes)}")
    bset = set(masks)
    for b1 in masks:
        for b2 in masks:
            for x in from_mask(b1 & ~b2):
                if not any((b1 & ~(1 << x)) | (1 << y) in bset for y in from_mask(b2 & ~b1)):
                    raise ConstructionError(
                        f"basis exchange fails: B1={sorted(from_mask(b1))}, "
                        f"B2={sorted(from_mask(b2))}, x={x}")
    return Matroid(n, "explicit", bases=masks)


def as_explicit(m: Matroid) -> Matroid:
    return Matroid(m.n, "explicit", bases=tuple(base_masks(m)), deleted=m.deleted)


def matroid_from_json(d: dict) -> Matroid:
    kind = d.get("kind")
    if kind == "free":
        m = free_matroid(int(d["n"]))
    elif kind == "uniform":
        m = uniform_matroid(int(d["n"]), int(d["k"]))
    elif kind == "partition":
        m = partition_matroid(d["parts"], d["caps"], d.get("n"))
    elif kind == "explicit":
        m = explicit_matroid(int(d["n"]), d["bases"])
    else:
        raise ConstructionError(f"unknown matroid kind {kind!r}")
    if d.get("deleted"):
        m = m._with(deleted=m.deleted | to_mask(d["deleted"]))
    return m


def strip_loops_and_coloops(m: Matroid):
    """Delete loops and contract coloops.

    Returns ``(reduced, loops, coloops)``.  The reduced matroid keeps the
    original indices with both groups marked deleted; for every independent
    set I of the reduced matroid, I together with the coloops is independent
    in ``m``.
    """
    # deleted elements have rank 0 in the full ground set, so they count as loops
    loops = m.loops() | frozenset(from_mask(m.deleted))
    coloops = m.coloops()
    gone = m.deleted | to_mask(loops) | to_mask(coloops)
    if m.kind == "free":
        red = uniform_matroid(m.n, 0)._with(deleted=gone)
    elif m.kind == "uniform":
        red = m._with(deleted=gone, k=m.k - len(coloops))
    elif m.kind == "partition":
        keep = [(p & ~gone, c) for p, c in zip(m.parts, m.caps) if p & ~gone]
        red = Matroid(m.n, "partition", parts=tuple(p for p, _ in keep),
                      caps=tuple(c for _, c in keep), deleted=gone)
    else:
        cm = to_mask(coloops)
        red = Matroid(m.n, "explicit", bases=tuple(sorted({b & ~cm for b in m.bases})), deleted=gone)
    return red, loops, coloops


# -- enumeration --------------------------------------------------------------

def base_masks(m: Matroid) -> list:
    if m.kind == "explicit":
        return list(m.bases)
    if m.n > ENUM_CAP:
        raise SizeError(f"base enumeration needs n <= {ENUM_CAP} (got {m.n})")
    rt = m.rank_table()
    r = m.full_rank
    masks = mask_range(m.n)
    sel = (popcounts(m.n) == r) & (rt == r) & ((masks & m.deleted) == 0)
    return [int(b) for b in masks[sel]]


def enumerate_bases(m: Matroid) -> list:
    """All bases as frozensets, in increasing mask order."""
    if m.n > ENUM_CAP:
        raise SizeError(f"base enumeration needs n <= {ENUM_CAP} (got {m.n})")
    return [from_mask(b) for b in base_masks(m)]


def independent_masks(m: Matroid) -> np.ndarray:
    rt = m.rank_table()
    masks = mask_range(m.n)
    return masks[(rt == popcounts(m.n)) & ((masks & m.deleted) == 0)]


# -- polytope membership -------------------------------------------------------

def _is_exact(x) -> bool:
    return all(isinstance(v, (int, Fraction)) and not isinstance(v, bool) for v in x)


def in_polytope(m: Matroid, x, t=1, base_mode: bool = False) -> bool:
    """Membership in P_t(M) (or B_t(M) with ``base_mode``) by exhaustive subset scan.

    Rational coordinates are decided exactly; floats use a 1e-12 tolerance.
    """
    if len(x) != m.n:
        raise ConstructionError(f"point has {len(x)} coordinates, matroid has {m.n}")
    if m.n > ENUM_CAP:
        raise SizeError(f"membership scan needs n <= {ENUM_CAP} (got {m.n})")
    rt = m.rank_table()
    bits = bit_matrix(m.n)
    if _is_exact(x) and isinstance(t, (int, Fraction)):
        fx = [Fraction(v) for v in x]
        t = Fraction(t)
        if any(v < 0 or v > t for v in fx):
            return False
        L = lcm(*(v.denominator for v in fx))
        ints = [int(v * L) for v in fx]
        if L * max(1, m.n) < 2 ** 62:
            sums = bits.astype(np.int64) @ np.array(ints, dtype=np.int64)
        else:
            sums = bits.astype(object) @ np.array(ints, dtype=object)
        if np.any(sums > rt * L):
            return False
        return not base_mode or sums[-1] == m.full_rank * L
    xv = np.asarray(x, dtype=float)
    t = float(t)
    if np.any(xv < -FLOAT_TOL) or np.any(xv > t + FLOAT_TOL):
        return False
    sums = bits.astype(float) @ xv
    if np.any(sums > rt + FLOAT_TOL):
        return False
    return not base_mode or abs(sums[-1] - m.full_rank) <= FLOAT_TOL * max(1, m.n)


def min_slack(m: Matroid, x) -> float:
    """min over S of r(S) - x(S); negative means x lies outside P(M)."""
    sums = bit_matrix(m.n).astype(float) @ np.asarray(x, dtype=float)
    return float(np.min(m.rank_table() - sums))


# -- fractional base packing ---------------------------------------------------

@dataclass
class PackingCertificate:
    nu: Fraction
    weights: dict = field(default_factory=dict)  # frozenset base -> Fraction

    def validate(self, m: Matroid) -> bool:
        if sum(self.weights.values(), Fraction(0)) != self.nu:
            return False
        bases = set(base_masks(m)) if m.n <= ENUM_CAP else None
        load = [Fraction(0)] * m.n
        for b, w in self.weights.items():
            if w < 0:
                return False
            if bases is not None and to_mask(b) not in bases:
                return False
            for j in b:
                load[j] += w
        return all(v <= 1 for v in load)

    def to_json(self) -> dict:
        return {
            "nu": _frac_str(self.nu),
            "weights": [{"base": sorted(b), "weight": _frac_str(w)}
                        for b, w in sorted(self.weights.items(), key=lambda kv: sorted(kv[0]))],
        }


def _frac_str(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


def fractional_base_packing(m: Matroid, method: str = "auto") -> PackingCertificate:
    """Max sum of base weights with every element loaded at most 1, exactly.

    Free, uniform and partition matroids are solved in closed form with a
    wrap-around schedule as certificate; other matroids (or ``method="lp"``)
    go through an exact simplex over the enumerated bases.
    """
    if m.full_rank == 0:
        raise ConstructionError("rank-0 matroid: the only base is empty and the packing is unbounded")
    if method == "lp" or m.kind == "explicit":
        return _packing_lp(m)
    if m.kind == "free":
        return PackingCertificate(Fraction(1), {from_mask(m.live): Fraction(1)})
    if m.kind == "uniform":
        parts, caps = (m.live,), (m.k,)
    else:
        parts = tuple(p & m.live for p in m.parts)
        caps = tuple(min(c, bin(p).count("1")) for p, c in zip(parts, m.caps))
    return _packing_partition(parts, caps)


def _packing_partition(parts, caps) -> PackingCertificate:
    active = [(sorted(from_mask(p)), c) for p, c in zip(parts, caps) if c > 0]
    nu = min(Fraction(len(p), c) for p, c in active)
    # Each part runs c "machines" over time [0, nu); element k of the part occupies
    # linear positions [k, k+1).  Since nu >= 1 the c running elements are distinct.
    cuts = {Fraction(0), nu}
    for p, c in active:
        for mach in range(c):
            off = mach * nu
            k = -(-off.numerator // off.denominator)
            while k - off < nu:
                if k - off > 0:
                    cuts.add(k - off)
                k += 1
    cuts = sorted(cuts)
    weights = {}
    for lo, hi in zip(cuts, cuts[1:]):
        mid = (lo + hi) / 2
        base = set()
        for p, c in active:
            for mach in range(c):
                base.add(p[int(mach * nu + mid)])
        key = frozenset(base)
        weights[key] = weights.get(key, Fraction(0)) + (hi - lo)
    return PackingCertificate(nu, weights)


def _packing_lp(m: Matroid) -> PackingCertificate:
    bases = base_masks(m)
    nu, alpha = simplex_max_packing(m.n, bases)
    weights = {from_mask(b): a for b, a in zip(bases, alpha) if a != 0}
    return PackingCertificate(nu, weights)


def simplex_max_packing(n: int, cols: Sequence[int]):
    """Exact simplex (Bland's rule) for max 1.a subject to A a <= 1, a >= 0.

    Column c of A is the indicator of mask ``cols[c]``.  Returns (value, a).
    """
    ncol = len(cols)
    width = ncol + n + 1
    rows = []
    for j in range(n):
        row = [Fraction(1 if (c >> j) & 1 else 0) for c in cols]
        row += [Fraction(1 if s == j else 0) for s in range(n)]
        row.append(Fraction(1))
        rows.append(row)
    obj = [Fraction(-1)] * ncol + [Fraction(0)] * (n + 1)
    basis = [ncol + j for j in range(n)]
    while True:
        enter = next((c for c in range(width - 1) if obj[c] < 0), None)
        if enter is None:
            break
        best = None
        for r in range(n):
            a = rows[r][enter]
            if a > 0:
                ratio = rows[r][-1] / a
                if best is None or ratio < best[0] or (ratio == best[0] and basis[r] < basis[best[1]]):
                    best = (ratio, r)
        if best is None:
            raise ConstructionError("packing LP unbounded (a column with no elements)")
        r = best[1]
        piv = rows[r][enter]
        rows[r] = [v / piv for v in rows[r]]
        for rr in range(n):
            if rr != r and rows[rr][enter] != 0:
                f = rows[rr][enter]
                rows[rr] = [a - f * b for a, b in zip(rows[rr], rows[r])]
        f = obj[enter]
        obj = [a - f * b for a, b in zip(obj, rows[r])]
        basis[r] = enter
    alpha = [Fraction(0)] * ncol
    for r, b in enumerate(basis):
        if b < ncol:
            alpha[b] = rows[r][-1]
    return obj[-1], alpha


def packing_lp_float(m: Matroid) -> float:
    """Floating-point packing value via scipy, used as an independent cross-check."""
    from scipy.optimize import linprog

    bases = base_masks(m)
    A = np.array([[(b >> j) & 1 for b in bases] for j in range(m.n)], dtype=float)
    res = linprog(-np.ones(len(bases)), A_ub=A, b_ub=np.ones(m.n), bounds=(0, None), method="highs")
    return float(-res.fun)


# -- random instances ---------------------------------------------------------

def random_matroid(n: int, rng, kind: Optional[str] = None) -> Matroid:
    """A random loop-free uniform or partition matroid on n elements."""
    kind = kind or ("uniform" if rng.random() < 0.5 else "partition")
    if kind == "uniform":
        return uniform_matroid(n, int(rng.integers(1, max(n, 2))))
    perm = rng.permutation(n)
    cuts = sorted(rng.choice(np.arange(1, n), size=min(int(rng.integers(1, 4)) - 1, n - 1),
                             replace=False).tolist()) if n > 1 else []
    parts = [p.tolist() for p in np.split(perm, cuts)]
    caps = [int(rng.integers(1, max(len(p), 2))) for p in parts]
    return partition_matroid(parts, caps, n=n)


def random_nu2_matroid(n: int, rng) -> Matroid:
    """A random uniform or partition matroid with packing number exactly 2 (n even)."""
    if n % 2:
        raise ConstructionError("packing number 2 needs an even ground set here")
    if rng.random() < 0.5:
        return uniform_matroid(n, n // 2)
    perm = rng.permutation(n)
    sizes = []
    left = n
    while left:
        s = 2 * int(rng.integers(1, left // 2 + 1))
        sizes.append(s)
        left -= s
    parts = np.split(perm, np.cumsum(sizes)[:-1])
    return partition_matroid([p.tolist() for p in parts], [len(p) // 2 for p in parts], n=n)
