"""Value oracles for nonnegative set functions and brute-force structural checks.

Subsets are passed either as iterables of element indices or as integer
bitmasks (bit ``i`` set iff element ``i`` is in the set).  Every function
knows an upper bound ``M`` on its values; for the bundled kinds that bound is
exact whenever the ground set is small enough to scan.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np

from ._bits import bit_matrix, from_mask, mask_range, popcounts, to_mask
from .errors import ConstructionError, SizeError

KINDS = ("cut", "directed-cut", "coverage", "min-card-threshold", "explicit-table", "composed")

TABLE_CAP = 24
CHECK_CAP = 20


@dataclass(frozen=True)
class GroundSet:
    n: int
    labels: Optional[tuple] = None

    def __post_init__(self):
        if self.n < 1:
            raise ConstructionError("ground set needs at least one element")
        if self.labels is not None and len(self.labels) != self.n:
            raise ConstructionError("labels must match the element count")


@dataclass(frozen=True)
class Witness:
    """Counterexample to a structural property.

    ``sets`` holds the subsets involved (for submodularity: ``(S, T)`` with the
    extra element in ``element``); ``lhs > rhs`` is the violated inequality.
    """

    sets: tuple
    lhs: float
    rhs: float
    element: Optional[int] = None
    note: str = ""

    def to_dict(self) -> dict:
        return {
            "sets": [sorted(s) for s in self.sets],
            "element": self.element,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "note": self.note,
        }


class SetFunction:
    """A value oracle f: 2^X -> R_+ with a known bound M >= max f."""

    def __init__(self, ground, kind: str, payload: dict, M: Optional[float] = None,
                 oracle: Optional[Callable] = None, table_fn: Optional[Callable] = None):
        if isinstance(ground, int):
            ground = GroundSet(ground)
        if kind not in KINDS:
            raise ConstructionError(f"unknown set function kind {kind!r}")
        self.ground = ground
        self.kind = kind
        self.payload = payload
        self._oracle = oracle
        self._table_fn = table_fn
        self._table = None
        self._M = M
        self._validate()

    @property
    def n(self) -> int:
        return self.ground.n

    def __repr__(self):
        return f"SetFunction(kind={self.kind!r}, n={self.n})"

    def _validate(self):
        p = self.payload
        if self.kind in ("cut", "directed-cut"):
            key = "edges" if self.kind == "cut" else "arcs"
            for (u, v), w in zip(p[key], p["weights"]):
                if not (0 <= u < self.n and 0 <= v < self.n) or u == v:
                    raise ConstructionError(f"bad {key[:-1]} ({u}, {v})")
                if w < 0:
                    raise ConstructionError("edge weights must be nonnegative")
        elif self.kind == "coverage":
            if len(p["sets"]) != self.n:
                raise ConstructionError("coverage needs one item set per element")
            if any(w < 0 for w in p["weights"].values()):
                raise ConstructionError("item weights must be nonnegative")
        elif self.kind == "min-card-threshold":
            if p["r"] < 0:
                raise ConstructionError("threshold must be nonnegative")
        elif self.kind == "explicit-table":
            if self.n > TABLE_CAP:
                raise SizeError(f"explicit tables are capped at n = {TABLE_CAP}")
            tab = np.asarray(p["table"], dtype=float)
            if tab.shape != (1 << self.n,):
                raise ConstructionError(f"table needs 2^{self.n} entries, got {tab.shape[0]}")
            if (tab < 0).any():
                m = int(np.flatnonzero(tab < 0)[0])
                raise ConstructionError(f"negative table entry f({sorted(from_mask(m))}) = {tab[m]}")
            self._table = tab
            self._table.setflags(write=False)
        elif self.kind == "composed":
            if self._oracle is None and self._table_fn is None:
                raise ConstructionError("composed functions need an oracle")

    # -- evaluation -----------------------------------------------------------

    def value_mask(self, mask: int) -> float:
        if self._table is not None:
            return float(self._table[mask])
        p = self.payload
        k = self.kind
        if k == "cut":
            return float(sum(w for (u, v), w in zip(p["edges"], p["weights"])
                             if ((mask >> u) & 1) != ((mask >> v) & 1)))
        if k == "directed-cut":
            return float(sum(w for (a, b), w in zip(p["arcs"], p["weights"])
                             if (mask >> a) & 1 and not (mask >> b) & 1))
        if k == "coverage":
            covered = set()
            for i, items in enumerate(p["sets"]):
                if (mask >> i) & 1:
                    covered.update(items)
            return float(sum(p["weights"].get(it, 1.0) for it in covered))
        if k == "min-card-threshold":
            return float(min(bin(mask).count("1"), p["r"]))
        if self._oracle is not None:
            return float(self._oracle(from_mask(mask)))
        return float(self.table()[mask])

    def value(self, S) -> float:
        return self.value_mask(to_mask(S))

    __call__ = value

    def table(self) -> np.ndarray:
        """All 2^n values in mask order (cached)."""
        if self._table is not None:
            return self._table
        if self.n > TABLE_CAP:
            raise SizeError(f"cannot tabulate a function on {self.n} > {TABLE_CAP} elements")
        tab = self._build_table()
        tab.setflags(write=False)
        self._table = tab
        return tab

    def _build_table(self) -> np.ndarray:
        n, p, k = self.n, self.payload, self.kind
        masks = mask_range(n)
        if k == "cut":
            tab = np.zeros(1 << n)
            for (u, v), w in zip(p["edges"], p["weights"]):
                tab += w * (((masks >> u) ^ (masks >> v)) & 1)
            return tab
        if k == "directed-cut":
            tab = np.zeros(1 << n)
            for (a, b), w in zip(p["arcs"], p["weights"]):
                tab += w * (((masks >> a) & 1) & (1 - ((masks >> b) & 1)))
            return tab
        if k == "coverage":
            owners = {}
            for i, items in enumerate(p["sets"]):
                for it in items:
                    owners[it] = owners.get(it, 0) | (1 << i)
            tab = np.zeros(1 << n)
            for it, own in owners.items():
                tab += p["weights"].get(it, 1.0) * ((masks & own) != 0)
            return tab
        if k == "min-card-threshold":
            return np.minimum(popcounts(n), p["r"]).astype(float)
        if self._table_fn is not None:
            return np.asarray(self._table_fn(), dtype=float).copy()
        return np.array([float(self._oracle(from_mask(int(m)))) for m in masks])

    @property
    def M(self) -> float:
        """Upper bound on all values; exact whenever the table can be scanned."""
        if self._M is None:
            self._M = self._compute_M()
        return self._M

    def _compute_M(self) -> float:
        p, k = self.payload, self.kind
        if k == "min-card-threshold":
            return float(min(self.n, p["r"]))
        if k == "coverage":
            return self.value_mask((1 << self.n) - 1)
        if self.n <= TABLE_CAP:
            return float(self.table().max())
        if k in ("cut", "directed-cut"):
            return float(sum(p["weights"]))
        raise SizeError("no value bound available; pass M explicitly")

    # -- serialization -------------------------------------------------------

    def to_json(self) -> dict:
        p, k = self.payload, self.kind
        if k == "cut":
            payload = {"edges": [list(e) for e in p["edges"]], "weights": list(p["weights"])}
        elif k == "directed-cut":
            payload = {"arcs": [list(a) for a in p["arcs"]], "weights": list(p["weights"])}
        elif k == "coverage":
            payload = {"sets": [sorted(s) for s in p["sets"]],
                       "weights": {str(it): w for it, w in p["weights"].items()}}
        elif k == "min-card-threshold":
            payload = {"r": p["r"]}
        else:
            payload = {"table": [float(v) for v in self.table()]}
            k = "explicit-table"
        return {"n": self.n, "kind": k, "payload": payload}


# -- constructors -------------------------------------------------------------

def _weights(items, weights):
    if weights is None:
        return tuple(1.0 for _ in items)
    if len(weights) != len(items):
        raise ConstructionError("one weight per edge required")
    return tuple(float(w) for w in weights)


def cut_function(n: int, edges, weights=None) -> SetFunction:
    edges = tuple((int(u), int(v)) for u, v in edges)
    return SetFunction(n, "cut", {"edges": edges, "weights": _weights(edges, weights)})


def directed_cut_function(n: int, arcs, weights=None) -> SetFunction:
    arcs = tuple((int(a), int(b)) for a, b in arcs)
    return SetFunction(n, "directed-cut", {"arcs": arcs, "weights": _weights(arcs, weights)})


def coverage_function(sets, weights=None) -> SetFunction:
    sets = tuple(frozenset(s) for s in sets)
    w = {} if weights is None else {k: float(v) for k, v in weights.items()}
    return SetFunction(len(sets), "coverage", {"sets": sets, "weights": w})


def threshold_function(n: int, r: int) -> SetFunction:
    """f(S) = min(|S|, r)."""
    return SetFunction(n, "min-card-threshold", {"r": int(r)})


def table_function(values, n: Optional[int] = None) -> SetFunction:
    exact = None
    vals = list(values)
    if any(isinstance(v, str) or isinstance(v, Fraction) for v in vals):
        exact = tuple(Fraction(v) for v in vals)
        vals = [float(v) for v in exact]
    if n is None:
        n = max(len(vals).bit_length() - 1, 0)
    if n > TABLE_CAP:
        raise SizeError(f"explicit tables are capped at n = {TABLE_CAP}")
    payload = {"table": vals}
    if exact is not None:
        payload["exact"] = exact
    return SetFunction(n, "explicit-table", payload)


def composed_function(n: int, oracle=None, M=None, table_fn=None, **payload) -> SetFunction:
    return SetFunction(n, "composed", dict(payload), M=M, oracle=oracle, table_fn=table_fn)


def sum_functions(*fs: SetFunction) -> SetFunction:
    """Pointwise sum of functions on a common ground set (submodularity is preserved)."""
    n = fs[0].n
    if any(f.n != n for f in fs):
        raise ConstructionError("summands must share a ground set")
    parts = tuple(fs)
    return composed_function(
        n,
        oracle=lambda S: sum(f.value(S) for f in parts),
        table_fn=lambda: sum(f.table() for f in parts),
        parts=parts,
    )


def build_family(spec) -> SetFunction:
    """Build an oracle from a descriptor ``{"n", "kind", "payload"}`` (dict or JSON string)."""
    if isinstance(spec, str):
        spec = json.loads(spec)
    try:
        n = int(spec["n"])
        kind = spec["kind"]
        p = spec.get("payload", {})
    except (KeyError, TypeError) as exc:
        raise ConstructionError(f"malformed instance descriptor: {exc}") from exc
    if kind == "cut":
        return cut_function(n, p["edges"], p.get("weights"))
    if kind == "directed-cut":
        return directed_cut_function(n, p["arcs"], p.get("weights"))
    if kind == "coverage":
        f = coverage_function(p["sets"], {_item(k): v for k, v in p.get("weights", {}).items()})
        if f.n != n:
            raise ConstructionError("coverage set count must equal n")
        return f
    if kind in ("min-card-threshold", "threshold"):
        return threshold_function(n, p["r"])
    if kind == "explicit-table":
        if n > TABLE_CAP:
            raise SizeError(f"explicit tables are capped at n = {TABLE_CAP}")
        return table_function(p["table"], n)
    raise ConstructionError(f"cannot build kind {kind!r} from a descriptor")


def _item(k):
    try:
        return int(k)
    except (TypeError, ValueError):
        return k


# -- structural checks -------------------------------------------------------

def _checkable_table(f: SetFunction, cap: int) -> np.ndarray:
    if f.n > cap:
        raise SizeError(f"exhaustive check needs n <= {cap} (got {f.n}); "
                        "use a sampled spot-check instead")
    return f.table()


def check_submodular(f: SetFunction, tol: float = 0.0) -> Optional[Witness]:
    """Exhaustive diminishing-returns check; ``None`` means submodular.

    Scans f(T+j) - f(T) <= f(S+j) - f(S) for T = S+i, ordered by (S, j, i)
    ascending; this adjacent form is equivalent to the full S subset T form.
    The first violation is returned as a Witness with ``sets=(S, T)``.
    """
    tab = _checkable_table(f, CHECK_CAP)
    n = f.n
    masks = mask_range(n)
    best = None
    for j in range(n):
        bj = 1 << j
        for i in range(n):
            if i == j:
                continue
            bi = 1 << i
            free = masks[(masks & (bi | bj)) == 0]
            lhs = tab[free | bi | bj] - tab[free | bi]
            rhs = tab[free | bj] - tab[free]
            bad = np.flatnonzero(lhs > rhs + tol)
            if bad.size:
                k = bad[0]
                cand = (int(free[k]), j, i, float(lhs[k]), float(rhs[k]))
                if best is None or cand[:3] < best[:3]:
                    best = cand
    if best is None:
        return None
    S, j, i, lhs, rhs = best
    return Witness(sets=(from_mask(S), from_mask(S | (1 << i))), element=j, lhs=lhs, rhs=rhs,
                   note="f(T+j) - f(T) > f(S+j) - f(S)")


def check_submodular_pairs(f: SetFunction, tol: float = 0.0) -> Optional[Witness]:
    """Pair-form check f(S|T) + f(S&T) <= f(S) + f(T) over all pairs (n <= 12)."""
    tab = _checkable_table(f, 12)
    masks = mask_range(f.n)
    lhs = tab[masks[:, None] | masks[None, :]] + tab[masks[:, None] & masks[None, :]]
    rhs = tab[:, None] + tab[None, :]
    bad = np.argwhere(lhs > rhs + tol)
    if not bad.size:
        return None
    S, T = (int(v) for v in bad[0])
    return Witness(sets=(from_mask(S), from_mask(T)), lhs=float(lhs[S, T]), rhs=float(rhs[S, T]),
                   note="f(S|T) + f(S&T) > f(S) + f(T)")


def check_monotone(f: SetFunction, tol: float = 0.0) -> Optional[Witness]:
    """``None`` iff every single-element marginal is nonnegative."""
    tab = _checkable_table(f, CHECK_CAP)
    masks = mask_range(f.n)
    best = None
    for j in range(f.n):
        bj = 1 << j
        free = masks[(masks & bj) == 0]
        bad = np.flatnonzero(tab[free | bj] < tab[free] - tol)
        if bad.size:
            cand = (int(free[bad[0]]), j)
            if best is None or cand < best:
                best = cand
    if best is None:
        return None
    S, j = best
    T = S | (1 << j)
    return Witness(sets=(from_mask(S), from_mask(T)), element=j,
                   lhs=float(tab[S]), rhs=float(tab[T]), note="f(S) > f(T) with S subset of T")


def check_nonnegative(f: SetFunction) -> Optional[Witness]:
    tab = _checkable_table(f, TABLE_CAP)
    bad = np.flatnonzero(tab < 0)
    if not bad.size:
        return None
    m = int(bad[0])
    return Witness(sets=(from_mask(m),), lhs=0.0, rhs=float(tab[m]), note="f(S) < 0")


def is_invariant(f: SetFunction, perm: Sequence[int], tol: float = 0.0) -> bool:
    """True iff f(sigma(S)) = f(S) for every S, sigma given as an index array."""
    tab = f.table()
    image = permute_masks(f.n, perm)
    return bool(np.all(np.abs(tab[image] - tab) <= tol))


def permute_masks(n: int, perm: Sequence[int]) -> np.ndarray:
    """Image mask of every mask under the element map i -> perm[i]."""
    bits = bit_matrix(n)
    weights = np.array([1 << int(p) for p in perm], dtype=np.int64)
    return (bits * weights[None, :]).sum(axis=1)


# -- random instances --------------------------------------------------------

def random_cut(n: int, rng, density: float = 0.5, weighted: bool = True) -> SetFunction:
    edges = [(u, v) for u in range(n) for v in range(u + 1, n) if rng.random() < density]
    if not edges and n > 1:
        edges = [(0, 1)]
    w = rng.uniform(0.1, 1.0, len(edges)) if weighted else None
    return cut_function(n, edges, w)


def random_directed_cut(n: int, rng, density: float = 0.3, weighted: bool = True) -> SetFunction:
    arcs = [(a, b) for a in range(n) for b in range(n) if a != b and rng.random() < density]
    if not arcs and n > 1:
        arcs = [(0, 1)]
    w = rng.uniform(0.1, 1.0, len(arcs)) if weighted else None
    return directed_cut_function(n, arcs, w)


def random_coverage(n: int, rng, items: Optional[int] = None, weighted: bool = True) -> SetFunction:
    items = items or 2 * n
    sets = [set(np.flatnonzero(rng.random(items) < 0.3).tolist()) for _ in range(n)]
    w = {it: float(x) for it, x in enumerate(rng.uniform(0.1, 1.0, items))} if weighted else None
    return coverage_function(sets, w)


def random_submodular(n: int, rng, monotone: bool = False) -> SetFunction:
    """A random nonnegative submodular function: a mixture of cut, directed-cut and coverage parts."""
    if monotone:
        return random_coverage(n, rng)
    choice = int(rng.integers(4))
    if choice == 0:
        return random_cut(n, rng)
    if choice == 1:
        return random_directed_cut(n, rng)
    if choice == 2:
        return sum_functions(random_cut(n, rng, 0.3), random_coverage(n, rng))
    return sum_functions(random_directed_cut(n, rng, 0.3), random_coverage(n, rng, items=n))


def load_instance(path) -> SetFunction:
    with open(path) as fh:
        return build_family(json.load(fh))
