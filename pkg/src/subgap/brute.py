"""Exhaustive reference optima and the minimum-value bounds for matroid problems."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ._bits import from_mask, mask_range, popcounts, to_mask
from .errors import SizeError
from .matroid import Matroid, strip_loops_and_coloops
from .setfn import SetFunction, Witness

BRUTE_CAP = 20


@dataclass(frozen=True)
class BruteResult:
    best_set: frozenset
    best_value: float
    evaluations: int


def _lex_first(masks: np.ndarray) -> int:
    return min((int(m) for m in masks), key=lambda m: sorted(from_mask(m)))


def feasible_masks(n: int, feasibility, m: Optional[Matroid] = None) -> np.ndarray:
    """Masks of the feasible family.

    ``feasibility`` is ``"independence"``, ``"bases"``, ``"all"``, a Matroid
    (independence), or an explicit iterable of subsets.
    """
    if n > BRUTE_CAP:
        raise SizeError(f"brute force needs n <= {BRUTE_CAP} (got {n})")
    masks = mask_range(n)
    if isinstance(feasibility, Matroid):
        m, feasibility = feasibility, "independence"
    if feasibility == "all":
        return masks
    if feasibility in ("independence", "bases"):
        rt = m.rank_table()
        ok = (rt == popcounts(n)) & ((masks & m.deleted) == 0)
        if feasibility == "bases":
            ok &= rt == m.full_rank
        return masks[ok]
    fam = sorted({to_mask(S) for S in feasibility})
    return np.array(fam, dtype=np.int64)


def brute_opt(f: SetFunction, feasibility="all", m: Optional[Matroid] = None) -> BruteResult:
    """max f over the feasible family; ties go to the lexicographically first set."""
    cand = feasible_masks(f.n, feasibility, m)
    if cand.size == 0:
        raise ValueError("empty feasible family")
    vals = f.table()[cand]
    best = vals.max()
    winner = _lex_first(cand[vals == best])
    return BruteResult(from_mask(winner), float(best), int(cand.size))


def value_bound_check(f: SetFunction, m: Matroid, mode: str = "independence") -> Optional[Witness]:
    """Check OPT >= M/n (independence) or OPT >= M/n^2 (bases) after the reductions.

    Loops are deleted in both modes; in base mode coloops are contracted, so
    the function seen by the bound is S -> f(S | coloops) on the remaining
    elements.  Returns ``None`` on success, else a Witness holding the optimum
    set and the maximizer of f.
    """
    if f.n > BRUTE_CAP:
        raise SizeError(f"brute force needs n <= {BRUTE_CAP} (got {f.n})")
    red, loops, coloops = strip_loops_and_coloops(m)
    cmask = to_mask(coloops) if mode == "bases" else 0
    if mode == "independence":
        red = m.restrict(from_mask(m.live & ~to_mask(loops)))
    live = red.live
    n_eff = bin(live).count("1")
    if n_eff == 0:
        return None
    tab = f.table()
    masks = mask_range(f.n)
    sub = masks[(masks & ~live) == 0]
    big = tab[sub | cmask]
    M = float(big.max())
    opt = brute_opt(f, mode, m)
    bound = M / n_eff if mode == "independence" else M / n_eff ** 2
    if opt.best_value >= bound - 1e-12 * max(1.0, M):
        return None
    arg = int(sub[int(np.argmax(big))]) | cmask
    return Witness(sets=(opt.best_set, from_mask(arg)), lhs=bound, rhs=opt.best_value,
                   note=f"OPT below M/{'n' if mode == 'independence' else 'n^2'}")


def bipartite_tightness(n: int):
    """Instance showing the M/n^2 base bound is tight up to a constant.

    Complete bipartite digraph X1 -> X2 with |X1| = |X2| = n/2 and the
    directed cut function; bases take one element of X1 and n/2 - 1 of X2.
    Every base has value 1 while f(X1) = n^2/4.
    """
    from .matroid import partition_matroid
    from .setfn import directed_cut_function

    if n < 4 or n % 2:
        raise ValueError(f"n must be even and at least 4 (got {n})")
    h = n // 2
    f = directed_cut_function(n, [(i, h + j) for i in range(h) for j in range(h)])
    m = partition_matroid([range(h), range(h, n)], [1, h - 1], n=n)
    return f, m
