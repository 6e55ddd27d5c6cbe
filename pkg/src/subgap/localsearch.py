"""Fractional local search over P_t(M) and B_t(M), followed by pipage rounding.

The iterate is stored as integer numerators ``k`` with x = k / q, so every
step of size 1/q is exact and polytope feasibility is an integer test on the
slack table q * r(S) - k(S).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from ._bits import bit_matrix, from_mask
from .errors import InfeasibleError, SizeError
from .extension import EXACT_CAP, default_samples, multilinear_batch, multilinear_sample
from .matroid import ENUM_CAP, Matroid, base_masks, fractional_base_packing, in_polytope
from .pipage import pipage_round, round_matroid
from .setfn import SetFunction

GOLDEN_T = (3 - math.sqrt(5)) / 2


@dataclass
class SearchConfig:
    t: Fraction = Fraction(1, 2)
    q: Optional[int] = None  # denominator; defaults to that of t in lowest terms
    slack: Optional[float] = None  # per-step improvement threshold; None = delta * OPT_est / n^2
    evaluator: str = "exact"  # "exact" | "sampled"
    samples: Optional[int] = None
    seed: int = 0
    max_steps: Optional[int] = None
    steepest: bool = False
    debug: bool = False

    def __post_init__(self):
        self.t = Fraction(self.t)
        if not 0 < self.t <= 1:
            raise ValueError("t must lie in (0, 1]")
        if self.q is None:
            self.q = self.t.denominator
        if (self.t * self.q).denominator != 1:
            raise ValueError(f"t = {self.t} is not a multiple of 1/{self.q}")

    @property
    def r(self) -> int:
        return int(self.t * self.q)

    @property
    def delta(self) -> Fraction:
        return Fraction(1, self.q)


@dataclass
class FractionalSolution:
    x: tuple
    value: float
    trace: list
    rounded: frozenset
    rounded_value: float
    converged: bool
    steps: int
    slack: float
    opt_estimate: float

    def to_json(self) -> dict:
        return {
            "x": [f"{v.numerator}/{v.denominator}" for v in self.x],
            "value": self.value,
            "rounded": sorted(self.rounded),
            "rounded_value": self.rounded_value,
            "converged": self.converged,
            "steps": self.steps,
            "slack": self.slack,
            "opt_estimate": self.opt_estimate,
        }


class _Evaluator:
    def __init__(self, f: SetFunction, cfg: SearchConfig):
        self.f = f
        self.sampled = cfg.evaluator == "sampled" or f.n > EXACT_CAP
        self.samples = cfg.samples or default_samples(f.n)
        self.seed = cfg.seed
        self.calls = 0

    def __call__(self, X) -> tuple:
        """(values, stderrs) for each row."""
        X = np.atleast_2d(X)
        self.calls += X.shape[0]
        if not self.sampled:
            return multilinear_batch(self.f, X), np.zeros(X.shape[0])
        est = [multilinear_sample(self.f, row, self.samples, self.seed) for row in X]
        return np.array([e.mean for e in est]), np.array([e.stderr for e in est])


def _slack_table(m: Matroid, k: np.ndarray, q: int) -> np.ndarray:
    return q * m.rank_table() - bit_matrix(m.n).astype(np.int64) @ k


def _moves(m: Matroid, k: np.ndarray, cfg: SearchConfig, bases_only: bool) -> list:
    """Feasible moves in scan order: +e_j, -e_i, then e_j - e_i by (i, j)."""
    n, r = m.n, cfg.r
    s = _slack_table(m, k, cfg.q)
    bits = bit_matrix(n)
    live = [e for e in range(n) if not (m.deleted >> e) & 1]
    moves = []
    if not bases_only:
        for j in live:
            if k[j] < r and s[bits[:, j]].min() >= 1:
                moves.append(("+", None, j))
        for i in live:
            if k[i] >= 1:
                moves.append(("-", i, None))
    for i in live:
        if k[i] < 1:
            continue
        for j in live:
            if j == i or k[j] >= r:
                continue
            sel = bits[:, j] & ~bits[:, i]
            if s[sel].min() >= 1:
                moves.append(("swap", i, j))
    return moves


def _apply(k: np.ndarray, move) -> np.ndarray:
    kind, i, j = move
    out = k.copy()
    if i is not None:
        out[i] -= 1
    if j is not None:
        out[j] += 1
    return out


def _search(f, m, cfg: SearchConfig, k0: np.ndarray, bases_only: bool, opt_est: float):
    n = f.n
    ev = _Evaluator(f, cfg)
    slack = cfg.slack if cfg.slack is not None else float(cfg.delta) * opt_est / n ** 2
    noise = 1e-12 * max(1.0, f.M)
    if cfg.max_steps is not None:
        max_steps = cfg.max_steps
    elif slack > 0:
        max_steps = int(math.ceil(f.M / slack)) + 1
    else:
        max_steps = 10 ** 6
    k = k0.copy()
    cur, cur_se = ev(k / cfg.q)
    cur, cur_se = float(cur[0]), float(cur_se[0])
    trace = []
    converged = False
    steps = 0
    while steps < max_steps:
        moves = _moves(m, k, cfg, bases_only)
        if not moves:
            converged = True
            break
        cands = np.array([_apply(k, mv) for mv in moves])
        vals, ses = ev(cands / cfg.q)
        need = cur + slack + noise + 5.0 * np.sqrt(ses ** 2 + cur_se ** 2)
        good = np.flatnonzero(vals > need)
        if not good.size:
            converged = True
            break
        pick = int(good[np.argmax(vals[good])]) if cfg.steepest else int(good[0])
        kind, i, j = moves[pick]
        trace.append({"step": steps, "direction": kind, "i": i, "j": j,
                      "gain": float(vals[pick] - cur), "value": float(vals[pick])})
        k = cands[pick]
        cur, cur_se = float(vals[pick]), float(ses[pick])
        steps += 1
        if cfg.debug:
            x = [Fraction(int(v), cfg.q) for v in k]
            assert in_polytope(m, x, cfg.t, base_mode=bases_only)
    x = tuple(Fraction(int(v), cfg.q) for v in k)
    if not converged:
        warnings.warn(f"local search hit max_steps={max_steps} before converging", RuntimeWarning)
    return x, cur, trace, converged, steps, slack


def _check_size(f: SetFunction, m: Matroid):
    if f.n != m.n:
        raise ValueError(f"function has {f.n} elements, matroid has {m.n}")
    if m.n > ENUM_CAP:
        raise SizeError(f"polytope moves use subset scans; n <= {ENUM_CAP} required")


def local_search_independence(f: SetFunction, m: Matroid, cfg: Optional[SearchConfig] = None,
                              round_seed: Optional[int] = None) -> FractionalSolution:
    """Fractional local search in P_t(M) from the origin, then extended pipage rounding."""
    cfg = cfg or SearchConfig()
    _check_size(f, m)
    if float(cfg.t) > GOLDEN_T + 1e-15:
        warnings.warn(f"t = {cfg.t} exceeds (3 - sqrt 5)/2; no approximation guarantee applies",
                      UserWarning)
    singles = [f.value_mask(1 << i) for i in range(f.n) if m.rank_mask(1 << i) == 1]
    opt_est = f.n * max(singles + [f.value_mask(0)])
    x, val, trace, conv, steps, slack = _search(f, m, cfg, np.zeros(f.n, dtype=np.int64),
                                                False, opt_est)
    rounded = round_matroid(m, x, seed=cfg.seed if round_seed is None else round_seed).set
    return FractionalSolution(x, val, trace, rounded, f.value(rounded), conv, steps, slack, opt_est)


def greedy_base(f: SetFunction, m: Matroid) -> frozenset:
    """Greedy by marginal value among elements that keep the set independent."""
    cur = 0
    r = m.full_rank
    while bin(cur).count("1") < r:
        best = None
        for e in range(m.n):
            bit = 1 << e
            if cur & bit or (m.deleted & bit) or m.rank_mask(cur | bit) != bin(cur).count("1") + 1:
                continue
            gain = f.value_mask(cur | bit) - f.value_mask(cur)
            if best is None or gain > best[0]:
                best = (gain, e)
        cur |= 1 << best[1]
    return from_mask(cur)


def find_base_start(m: Matroid, t) -> tuple:
    """A point of B_t(M) as (1/q) times a sum of q bases, each element used at most r times.

    Such a multiset exists iff nu >= 1/t; the bases are chosen by a small
    integer program over the enumerated bases.  Returns ``(x, bases)``.
    """
    from scipy.optimize import Bounds, LinearConstraint, milp

    t = Fraction(t)
    q, r = t.denominator, t.numerator
    cert = fractional_base_packing(m)
    if cert.nu < 1 / t:
        raise InfeasibleError(
            f"B_t(M) is empty for t = {t}: packing number nu = {cert.nu} < 1/t = {1 / t}",
            nu=cert.nu)
    bases = base_masks(m)
    A = np.array([[(b >> j) & 1 for b in bases] for j in range(m.n)], dtype=float)
    cons = [LinearConstraint(A, -np.inf, r), LinearConstraint(np.ones((1, len(bases))), q, q)]
    res = milp(np.zeros(len(bases)), constraints=cons, integrality=np.ones(len(bases)),
               bounds=Bounds(0, q))
    if res.x is None:
        raise InfeasibleError(f"no {q} bases fit within multiplicity {r}", nu=cert.nu)
    counts = np.rint(res.x).astype(int)
    chosen = [from_mask(b) for b, c in zip(bases, counts) for _ in range(c)]
    x = [Fraction(0)] * m.n
    for B in chosen:
        for e in B:
            x[e] += Fraction(1, q)
    return tuple(x), chosen


def local_search_bases(f: SetFunction, m: Matroid, cfg: Optional[SearchConfig] = None,
                       round_seed: Optional[int] = None) -> FractionalSolution:
    """Swap-only fractional local search in B_t(M), then pipage rounding to a base."""
    cfg = cfg or SearchConfig()
    _check_size(f, m)
    x0, _ = find_base_start(m, cfg.t)
    k0 = np.array([int(v * cfg.q) for v in x0], dtype=np.int64)
    opt_est = f.value(greedy_base(f, m))
    x, val, trace, conv, steps, slack = _search(f, m, cfg, k0, True, opt_est)
    rounded = pipage_round(m, x, seed=cfg.seed if round_seed is None else round_seed).set
    return FractionalSolution(x, val, trace, rounded, f.value(rounded), conv, steps, slack, opt_est)
