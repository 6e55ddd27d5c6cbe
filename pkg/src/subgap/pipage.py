"""Randomized pipage rounding in exact rational arithmetic.

``pipage_round`` rounds a point of the base polytope to a base; ``adjust``
moves a point of the independence polytope into the base polytope of a
restriction; ``round_matroid`` chains the two.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from typing import Optional

import numpy as np

from ._bits import bit_matrix, from_mask, mask_range
from .errors import ContractError
from .matroid import ENUM_CAP, Matroid, in_polytope
from .errors import SizeError


@dataclass
class Branch:
    """One randomized choice: ``p * low + (1 - p) * high == point``."""

    point: tuple
    low: tuple
    high: tuple
    p: Fraction
    took_low: bool


@dataclass
class RoundingOutcome:
    set: frozenset
    seed: Optional[int]
    matroid: Matroid
    intermediate_values: list = field(default_factory=list)
    branches: list = field(default_factory=list)


def _frac(y) -> list:
    return [Fraction(v) for v in y]


def _subset_sums(m: Matroid, y):
    """(sums, scale): sums[S] = scale * y(S) as integers."""
    L = lcm(*(v.denominator for v in y))
    ints = [int(v * L) for v in y]
    bits = bit_matrix(m.n)
    if L * max(1, m.n) < 2 ** 62:
        return bits.astype(np.int64) @ np.array(ints, dtype=np.int64), L
    return bits.astype(object) @ np.array(ints, dtype=object), L


def _lex_min(masks) -> int:
    return min((int(a) for a in masks), key=lambda a: sorted(from_mask(a)))


def hit_constraint(m: Matroid, y, i: int, j: int):
    """Move y along e_i - e_j until a constraint becomes tight.

    Returns ``(y', A)`` where A is the tight set (lexicographically smallest
    minimizer) or ``{j}`` when y_j runs out first or is already zero.
    """
    if m.n > ENUM_CAP:
        raise SizeError(f"tight-set scan needs n <= {ENUM_CAP}")
    if i == j:
        raise ValueError("hit_constraint needs i != j")
    y = _frac(y)
    sums, L = _subset_sums(m, y)
    masks = mask_range(m.n)
    sel = ((masks >> i) & 1 == 1) & ((masks >> j) & 1 == 0) & ((masks & m.deleted) == 0)
    slack = m.rank_table()[sel] * L - sums[sel]
    best = slack.min()
    delta = Fraction(int(best), L)
    A = from_mask(_lex_min(masks[sel][slack == best]))
    if y[j] < delta or y[j] == 0:
        delta, A = y[j], frozenset([j])
    y[i] += delta
    y[j] -= delta
    return tuple(y), A


def _fractional(y, T) -> list:
    return [k for k in sorted(T) if y[k].denominator != 1]


def pipage_round(m: Matroid, y, seed: Optional[int] = None, f=None, check: bool = True) -> RoundingOutcome:
    """Round y in B(M) to a random base with E[y_out] = y at every step."""
    y = _frac(y)
    if check and not in_polytope(m, y, 1, base_mode=True):
        raise ContractError("pipage_round needs a point of the base polytope")
    rng = np.random.default_rng(seed)
    out = RoundingOutcome(set=frozenset(), seed=seed, matroid=m)
    if f is not None:
        out.intermediate_values.append(_F(f, y))
    live = from_mask(m.live)
    while any(v.denominator != 1 for v in y):
        T = set(live)
        while True:
            frac = _fractional(y, T)
            if not frac:
                break
            if len(frac) == 1:
                raise ContractError(f"tight set holds a single fractional coordinate {frac[0]}")
            i, j = frac[0], frac[1]
            yp, Ap = hit_constraint(m, y, i, j)
            ym, Am = hit_constraint(m, y, j, i)
            dp, dm = yp[i] - y[i], y[i] - ym[i]
            if dp + dm == 0:
                y, T = list(yp), T & set(Ap)
                continue
            p = dp / (dp + dm)
            low = rng.random() < p
            out.branches.append(Branch(tuple(y), tuple(ym), tuple(yp), p, bool(low)))
            if low:
                y, T = list(ym), T & set(Am)
            else:
                y, T = list(yp), T & set(Ap)
            if f is not None:
                out.intermediate_values.append(_F(f, y))
    out.set = frozenset(k for k, v in enumerate(y) if v == 1)
    return out


def _F(f, y) -> float:
    from .extension import multilinear_exact
    return multilinear_exact(f, [float(v) for v in y])


def increase_room(m: Matroid, x, i: int) -> Fraction:
    """max{d : x + d e_i in P(M)} = min over A containing i of r(A) - x(A)."""
    sums, L = _subset_sums(m, x)
    masks = mask_range(m.n)
    sel = ((masks >> i) & 1 == 1) & ((masks & m.deleted) == 0)
    return Fraction(int((m.rank_table()[sel] * L - sums[sel]).min()), L)


def adjust(m: Matroid, x, seed: Optional[int] = None, rng=None, f=None, record=None):
    """Push fractional coordinates up to their cap or to zero until x lies in B(M').

    Zeroed coordinates are deleted from the matroid (indices preserved).
    Returns ``(m', y)``; ``record`` (a list) receives every Branch.
    """
    x = _frac(x)
    if not in_polytope(m, x, 1):
        raise ContractError("adjust needs a point of the independence polytope")
    rng = rng if rng is not None else np.random.default_rng(seed)
    for k in from_mask(m.deleted):
        x[k] = Fraction(0)
    iterations = 0
    while not in_polytope(m, x, 1, base_mode=True):
        iterations += 1
        if iterations > 4 * m.n * m.n + 4:
            raise ContractError("adjust failed to terminate")
        for i in sorted(from_mask(m.live)):
            room = increase_room(m, x, i)
            if room > 0:
                xmax = x[i] + room
                p = x[i] / xmax
                up = list(x)
                up[i] = xmax
                down = list(x)
                down[i] = Fraction(0)
                go_up = rng.random() < p
                if record is not None:
                    record.append(Branch(tuple(x), tuple(up), tuple(down), p, bool(go_up)))
                x = up if go_up else down
                break
        zeros = [k for k in sorted(from_mask(m.live)) if x[k] == 0]
        if zeros:
            m = m.restrict(from_mask(m.live & ~(1 << zeros[0])))
    return m, tuple(x)


def round_matroid(m: Matroid, x, seed: Optional[int] = None, f=None) -> RoundingOutcome:
    """Extended pipage rounding: an independent set S with E[f(S)] >= F(x)."""
    rng = np.random.default_rng(seed)
    record = []
    m2, y = adjust(m, x, rng=rng, record=record)
    sub_seed = int(rng.integers(2 ** 63))
    out = pipage_round(m2, y, seed=sub_seed, f=f, check=False)
    out.branches = record + out.branches
    out.seed = seed
    return out
