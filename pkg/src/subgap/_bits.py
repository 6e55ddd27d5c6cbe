"""Bitmask helpers. Subset S of {0..n-1} <-> integer mask with bit i = element i."""

from __future__ import annotations

from functools import lru_cache
from typing import Iterable

import numpy as np


def to_mask(S) -> int:
    if isinstance(S, (int, np.integer)):
        return int(S)
    m = 0
    for i in S:
        m |= 1 << int(i)
    return m


def from_mask(mask: int) -> frozenset:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return frozenset(out)


def popcount(mask: int) -> int:
    return bin(mask).count("1")


@lru_cache(maxsize=32)
def mask_range(n: int) -> np.ndarray:
    return np.arange(1 << n, dtype=np.int64)


@lru_cache(maxsize=32)
def bit_matrix(n: int) -> np.ndarray:
    """Boolean (2^n, n) matrix; row m holds the indicator of mask m."""
    masks = mask_range(n)
    out = ((masks[:, None] >> np.arange(n, dtype=np.int64)[None, :]) & 1).astype(bool)
    out.setflags(write=False)
    return out


@lru_cache(maxsize=32)
def popcounts(n: int) -> np.ndarray:
    out = bit_matrix(n).sum(axis=1).astype(np.int64)
    out.setflags(write=False)
    return out


def lex_subsets(n: int) -> Iterable[tuple]:
    """All subsets of range(n) as sorted tuples, in lexicographic tuple order."""
    def rec(prefix, start):
        yield prefix
        for i in range(start, n):
            yield from rec(prefix + (i,), i + 1)
    return rec((), 0)


def lex_key(S) -> tuple:
    return tuple(sorted(S))
