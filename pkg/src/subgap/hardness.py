"""Symmetry-gap hardness instances: the smoothed pair (F-hat, G-hat), refinements and experiments.

With realistic parameters the breakpoint ``delta`` of phi is astronomically
small (for eps = 0.01 on K2, log delta is about -1.3e12), so phi and the
comparisons against delta are carried out in log space.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from ._bits import bit_matrix, from_mask
from .errors import ConstructionError, SizeError
from .extension import gradient, multilinear_batch
from .setfn import SetFunction, composed_function
from .symmetry import (PermGroup, SymmetricInstance, check_strong_symmetry, symmetrize_batch,
                       symmetry_gap)

ALPHA_MAX = math.nextafter(0.125, 0.0)
PAIR_CAP = 10
BRUTE_CAP = 20
PROBES = (0.005, 0.01, 0.02, 0.03)


class PhiFunction:
    """phi(t) = phi0(t / scale) with scale = beta / (e^{1/(2 alpha^2)} + 1).

    phi0 is 1 on [0, 1], 1 - alpha (u-1)^2 on [1, u2] and
    (1+alpha)^{-1-alpha} (u-1)^{-2 alpha} beyond, where u2 = 1 + (1+alpha)^{-1/2}.
    """

    def __init__(self, alpha: float, beta: float):
        if alpha <= 0 or beta <= 0:
            raise ConstructionError("phi needs alpha > 0 and beta > 0")
        self.alpha = min(float(alpha), ALPHA_MAX)
        self.beta = float(beta)
        e = 1.0 / (2.0 * self.alpha ** 2)
        self.log_scale = math.log(self.beta) - (e + math.log1p(math.exp(-e)))
        self.u2 = 1.0 + (1.0 + self.alpha) ** -0.5
        self.log_u2 = math.log(self.u2)

    @property
    def scale(self) -> float:
        return math.exp(self.log_scale)

    @property
    def delta(self) -> float:
        return self.scale

    @property
    def log_delta(self) -> float:
        return self.log_scale

    @property
    def delta2(self) -> float:
        return self.scale * self.u2

    def _logu(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore"):
            return np.log(t) - self.log_scale

    def _parts(self, t):
        """Region index (right-limits at breakpoints), log u, log(u-1), u/(u-1)."""
        v = self._logu(t)
        region = np.where(v < 0, 1, np.where(v < self.log_u2, 2, 3))
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            em = np.expm1(-v)  # 1/u - 1
            log_um1 = v + np.log1p(-np.exp(-v))
            ratio = -1.0 / em  # u / (u - 1)
        return region, v, log_um1, ratio

    def _u(self, v):
        with np.errstate(over="ignore"):
            return np.exp(np.minimum(v, self.log_u2 + 1.0))

    def log_value(self, t) -> np.ndarray:
        region, v, log_um1, _ = self._parts(t)
        a = self.alpha
        u = self._u(v)
        with np.errstate(invalid="ignore", divide="ignore"):
            r2 = np.log1p(-a * (u - 1.0) ** 2)
            r3 = -(1 + a) * math.log1p(a) - 2 * a * log_um1
        return np.where(region == 1, 0.0, np.where(region == 2, r2, r3))

    def value(self, t) -> np.ndarray:
        region, v, log_um1, _ = self._parts(t)
        a = self.alpha
        u = self._u(v)
        with np.errstate(invalid="ignore", over="ignore"):
            r2 = 1.0 - a * (u - 1.0) ** 2
            r3 = np.exp(-(1 + a) * math.log1p(a) - 2 * a * log_um1)
        out = np.where(region == 1, 1.0, np.where(region == 2, r2, r3))
        return out if out.ndim else float(out)

    def t_dphi(self, t) -> np.ndarray:
        """t * phi'(t), which does not depend on the scale."""
        region, v, log_um1, ratio = self._parts(t)
        a = self.alpha
        u = self._u(v)
        with np.errstate(invalid="ignore", over="ignore"):
            r2 = -2 * a * u * (u - 1.0)
            r3 = -2 * a * ratio * np.exp(self.log_value(t))
        out = np.where(region == 1, 0.0, np.where(region == 2, r2, r3))
        return out if out.ndim else float(out)

    def t2_d2phi(self, t) -> np.ndarray:
        """t^2 * phi''(t), right-limit at the breakpoints."""
        region, v, log_um1, ratio = self._parts(t)
        a = self.alpha
        u = self._u(v)
        with np.errstate(invalid="ignore", over="ignore"):
            r2 = -2 * a * u * u
            r3 = 2 * a * (1 + 2 * a) * ratio ** 2 * np.exp(self.log_value(t))
        out = np.where(region == 1, 0.0, np.where(region == 2, r2, r3))
        return out if out.ndim else float(out)

    def derivative(self, t, order: int = 1):
        """phi' or phi'' in absolute terms (may overflow to inf when scale underflows)."""
        t = np.asarray(t, dtype=float)
        if order == 1:
            base = self.t_dphi(t)
        else:
            base = self.t2_d2phi(t)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            v = self._logu(t)
            out = np.where(base == 0, 0.0, base * np.exp(-order * (v + self.log_scale)))
        return out if out.ndim else float(out)


def phi_eval(phi: PhiFunction, t, order: int = 0):
    if order == 0:
        return phi.value(t)
    if order in (1, 2):
        return phi.derivative(t, order)
    raise ValueError("order must be 0, 1 or 2")


def j_function(X) -> np.ndarray:
    """J(x) = |X|^2 + 3|X| sum(x) - sum(x)^2."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    k = X.shape[1]
    s = X.sum(axis=1)
    return k * k + 3 * k * s - s * s


class SmoothedPair:
    """The continuous pair (F-hat, G-hat) built from a strongly symmetric instance."""

    def __init__(self, inst: SymmetricInstance, epsilon: Optional[float] = None,
                 M: Optional[float] = None):
        if inst.n > PAIR_CAP:
            raise SizeError(f"smoothed pairs evaluate F exactly; |X| <= {PAIR_CAP} required")
        self.inst = inst
        self.f = inst.f
        self.group = inst.group
        self.M = float(M if M is not None else inst.f.M)
        if self.M <= 0:
            raise ConstructionError("the value bound M must be positive")
        self.epsilon = float(epsilon if epsilon is not None else 0.01 * self.M)
        k = inst.n
        self.beta = self.epsilon / (16 * self.M * k)
        self.alpha = min(self.epsilon / (2000 * self.M * k ** 3), ALPHA_MAX)
        self.phi = PhiFunction(self.alpha, self.beta)
        self.j_coef = 256 * self.M * k * self.alpha

    @property
    def k(self) -> int:
        return self.inst.n

    @property
    def delta(self) -> float:
        return self.phi.delta

    @property
    def log_delta(self) -> float:
        return self.phi.log_delta

    def constants(self) -> dict:
        return {"epsilon": self.epsilon, "M": self.M, "alpha": self.alpha, "beta": self.beta,
                "delta": self.delta, "log_delta": self.log_delta, "j_coef": self.j_coef}

    def components(self, X) -> dict:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        Xbar = symmetrize_batch(X, self.group)
        F = multilinear_batch(self.f, X)
        G = multilinear_batch(self.f, Xbar)
        D = np.sum((X - Xbar) ** 2, axis=1)
        phiD = np.asarray(self.phi.value(D), dtype=float)
        J = j_function(X)
        Ft = (1.0 - phiD) * F + phiD * G
        return {"F": F, "G": G, "D": D, "H": F - G, "J": J, "phi": phiD, "Ftilde": Ft,
                "Fhat": Ft + self.j_coef * J, "Ghat": G + self.j_coef * J}

    def evaluate(self, X, which: str = "Fhat") -> np.ndarray:
        key = {"F̂": "Fhat", "Ĝ": "Ghat", "F̃": "Ftilde"}.get(which, which)
        return self.components(X)[key]

    def within_delta(self, D) -> np.ndarray:
        """D <= delta, decided in log space."""
        with np.errstate(divide="ignore"):
            return np.log(np.asarray(D, dtype=float)) <= self.log_delta

    def h_gradient(self, x) -> np.ndarray:
        """grad H(x) = grad F(x) - A^T grad F(x-bar), A the averaging map."""
        A = self.group.counts / len(self.group)
        xbar = symmetrize_batch(x, self.group)[0]
        return gradient(self.f, x) - A.T @ gradient(self.f, xbar)


def smoothed_eval(pair: SmoothedPair, x, which: str = "Fhat") -> float:
    return float(pair.evaluate(x, which)[0])


def d_gradient(x, g: PermGroup) -> np.ndarray:
    xv = np.asarray(x, dtype=float)
    return 2.0 * (xv - symmetrize_batch(xv, g)[0])


# -- refinement ------------------------------------------------------------------------

class RefinedPair:
    """Discrete oracles f-hat, g-hat on N x X; element (i, j) has index i * |X| + j."""

    def __init__(self, pair: SmoothedPair, n: int, sigma_idx: np.ndarray, mode: str, seed):
        self.pair = pair
        self.n = n
        self.k = pair.k
        self.mode = mode
        self.seed = seed
        self._sigma = pair.group.array[sigma_idx]  # (n, k)
        self._feas_cache = {}
        self.queries = 0

    @property
    def size(self) -> int:
        return self.n * self.k

    @property
    def sigma(self) -> np.ndarray:
        if self.mode != "planted":
            raise PermissionError("sigma is hidden in blind mode")
        return self._sigma

    def _rows(self, S) -> np.ndarray:
        """Boolean (m, n, k) membership array from masks, sets or boolean rows."""
        if isinstance(S, np.ndarray) and S.dtype == bool:
            return S.reshape(-1, self.n, self.k)
        if isinstance(S, np.ndarray) and S.ndim == 1 and S.dtype.kind in "iu":
            bits = ((S[:, None] >> np.arange(self.size)) & 1).astype(bool)
            return bits.reshape(-1, self.n, self.k)
        row = np.zeros(self.size, dtype=bool)
        members = from_mask(S) if isinstance(S, int) else S
        for e in members:
            row[e if isinstance(e, (int, np.integer)) else e[0] * self.k + e[1]] = True
        return row.reshape(1, self.n, self.k)

    def xi(self, S) -> np.ndarray:
        """xi_j(S) = (1/n) |{i : (i, sigma_i(j)) in S}|."""
        rows = self._rows(S)
        picked = rows[:, np.arange(self.n)[:, None], self._sigma]
        return picked.mean(axis=1)

    def cluster_fractions(self, S) -> np.ndarray:
        return self._rows(S).mean(axis=1)

    def f_hat(self, S) -> np.ndarray:
        rows = self._rows(S)
        self.queries += rows.shape[0]
        return self.pair.evaluate(self.xi(rows), "Fhat")

    def g_hat(self, S) -> np.ndarray:
        """G-hat(xi) depends on xi only through its symmetrization, which equals that
        of the unshuffled cluster fractions; those are used so the value ignores sigma."""
        rows = self._rows(S)
        self.queries += rows.shape[0]
        return self.pair.evaluate(self.cluster_fractions(rows), "Ghat")

    def oracle(self, which: str):
        return self.f_hat if which == "f" else self.g_hat

    def feasible(self, S) -> np.ndarray:
        """Membership in the refined family: cluster fractions lie in P(F)."""
        counts = self._rows(S).sum(axis=1)
        out = np.empty(counts.shape[0], dtype=bool)
        for r, c in enumerate(map(tuple, counts)):
            if c not in self._feas_cache:
                x = [Fraction(int(v), self.n) for v in c]
                self._feas_cache[c] = self.pair.inst.feasibility.contains_point(x)
            out[r] = self._feas_cache[c]
        return out

    def as_set_function(self, which: str) -> SetFunction:
        if self.size > 24:
            raise SizeError("refined oracles are tabulated only up to 24 elements")
        fn = self.f_hat if which == "f" else self.g_hat
        bound = self.pair.M + self.pair.epsilon + 3 * self.k ** 2 * self.pair.j_coef
        table = lambda: fn(bit_matrix(self.size))
        return composed_function(self.size, oracle=lambda S: float(fn(S)[0]), M=bound, table_fn=table)


def draw_sigma(group: PermGroup, n: int, seed) -> np.ndarray:
    """Index of sigma_i in the group closure; cluster i uses the generator keyed by (seed, i)."""
    key = list(seed) if isinstance(seed, (tuple, list)) else [int(seed)]
    return np.array([np.random.default_rng(key + [i]).integers(len(group)) for i in range(n)],
                    dtype=np.int64)


def refine(pair: SmoothedPair, n: int, seed=0, mode: str = "blind") -> RefinedPair:
    if n < 1:
        raise ConstructionError("refinement size must be >= 1")
    if mode not in ("blind", "planted"):
        raise ValueError("mode must be 'blind' or 'planted'")
    w = check_strong_symmetry(pair.inst)
    if w is not None:
        raise ConstructionError(
            f"instance {pair.inst.name!r} is not strongly symmetric (witness {w.to_dict()}); "
            "refined feasibility would leak the hidden permutations")
    return RefinedPair(pair, n, draw_sigma(pair.group, n, seed), mode, seed)


# -- gap report -----------------------------------------------------------------------

@dataclass
class GapReport:
    max_f: float
    max_g: float
    ratio: float
    argmax_f: frozenset
    argmax_g: frozenset
    feasible_sets: int

    def to_json(self) -> dict:
        return {"max_f_hat": self.max_f, "max_g_hat": self.max_g, "ratio": self.ratio,
                "argmax_f_hat": sorted(self.argmax_f), "argmax_g_hat": sorted(self.argmax_g),
                "feasible_sets": self.feasible_sets}


def gap_report(refined: RefinedPair) -> GapReport:
    """Brute-force maxima of f-hat and g-hat over the refined family."""
    N = refined.size
    if N > BRUTE_CAP:
        raise SizeError(f"gap_report brute force needs n*|X| <= {BRUTE_CAP} (got {N})")
    rows = bit_matrix(N)
    ok = refined.feasible(rows)
    idx = np.flatnonzero(ok)
    fv = refined.f_hat(rows[idx])
    gv = refined.g_hat(rows[idx])
    bf, bg = int(idx[np.argmax(fv)]), int(idx[np.argmax(gv)])
    return GapReport(float(fv.max()), float(gv.max()), float(gv.max() / fv.max()),
                     from_mask(bf), from_mask(bg), int(idx.size))


# -- distinguishing experiment ---------------------------------------------------------

STRATEGIES = ("random", "greedy", "local-search", "symmetric")


def _queries(strategy: str, refined: RefinedPair, oracle, budget: int, rng) -> tuple:
    """Run a query policy; returns (boolean rows of all queries, observed values)."""
    N, n, k = refined.size, refined.n, refined.k
    if strategy == "random":
        Q = rng.random((budget, N)) < 0.5
        return Q, oracle(Q)
    if strategy == "symmetric":
        full = rng.random((budget, n)) < 0.5
        Q = np.repeat(full, k, axis=1)
        return Q, oracle(Q)
    rows, vals = [], []
    if strategy == "greedy":
        cur = np.zeros(N, dtype=bool)
        cur_val = float(oracle(cur[None, :])[0])
        rows.append(cur.copy())
        vals.append(cur_val)
        while len(rows) < budget:
            cand = rng.choice(np.flatnonzero(~cur), size=min(16, int((~cur).sum()), budget - len(rows)),
                              replace=False) if (~cur).any() else np.array([], dtype=int)
            if cand.size == 0:
                break
            trial = np.repeat(cur[None, :], cand.size, axis=0)
            trial[np.arange(cand.size), cand] = True
            tv = oracle(trial)
            rows.extend(trial)
            vals.extend(tv)
            b = int(np.argmax(tv))
            if tv[b] <= cur_val:
                break
            cur, cur_val = trial[b], float(tv[b])
        return np.array(rows), np.array(vals)
    if strategy == "local-search":
        cur = rng.random(N) < 0.5
        cur_val = float(oracle(cur[None, :])[0])
        rows.append(cur.copy())
        vals.append(cur_val)
        while len(rows) < budget:
            e = int(rng.integers(N))
            nxt = cur.copy()
            nxt[e] = ~nxt[e]
            v = float(oracle(nxt[None, :])[0])
            rows.append(nxt)
            vals.append(v)
            if v > cur_val:
                cur, cur_val = nxt, v
        return np.array(rows), np.array(vals)
    raise ValueError(f"unknown strategy {strategy!r}; choose from {', '.join(STRATEGIES)}")


def concentration_bound(n: int, k: int, delta: float) -> float:
    """Per-query bound 2|X| exp(-2 n delta / |X|) on Pr[D(xi(Q)) > delta]."""
    return 2 * k * math.exp(-2 * n * delta / k)


@dataclass
class ExperimentReport:
    n: int
    trials: int
    budget: int
    strategy: str
    delta: float
    log_delta: float
    thresholds: list
    exceed_query_fraction: list
    exceed_trial_fraction: list
    bound_per_query: list
    bound_per_trial: list
    success_rate: float
    regime: str
    trial_log: list = field(default_factory=list)

    def to_json(self, with_trials: bool = False) -> dict:
        out = {k: v for k, v in self.__dict__.items() if k != "trial_log"}
        if with_trials:
            out["trial_log"] = self.trial_log
        return out


def distinguish_experiment(pair: SmoothedPair, strategy: str = "random", query_budget: int = 1000,
                           trials: int = 100, n: int = 200, seed: int = 0,
                           probes: Sequence[float] = PROBES, jobs: int = 1,
                           gap: Optional[tuple] = None) -> ExperimentReport:
    """Face each trial with f-hat (even trials) or g-hat (odd trials) and log how far queries stray.

    The policy guesses f-hat iff its best observed value exceeds the midpoint
    of OPT and OPT-bar.  Exceed fractions are reported at the construction's
    delta and at the probe thresholds, next to the closed-form bound.
    """
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}; choose from {', '.join(STRATEGIES)}")
    if gap is None:
        res = symmetry_gap(pair.inst)
        gap = (res.opt, res.opt_bar)
    threshold = 0.5 * (gap[0] + gap[1])
    thresholds = [pair.delta] + [float(p) for p in probes]
    log_thr = [pair.log_delta] + [math.log(p) for p in probes]

    def run(t: int) -> dict:
        refined = refine(pair, n, seed=(seed, t), mode="planted")
        which = "f" if t % 2 == 0 else "g"
        rng = np.random.default_rng([seed, t, 1])
        Q, vals = _queries(strategy, refined, refined.oracle(which), query_budget, rng)
        Dq = pair.components(refined.xi(Q))["D"]
        with np.errstate(divide="ignore"):
            logD = np.log(Dq)
        exceed = [int(np.sum(logD > lt)) for lt in log_thr]
        guess = "f" if float(np.max(vals)) > threshold else "g"
        return {"trial": t, "oracle": which, "guess": guess, "queries": int(Q.shape[0]),
                "max_D": float(Dq.max()), "exceed_counts": exceed}

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as ex:
            log = list(ex.map(run, range(trials)))
    else:
        log = [run(t) for t in range(trials)]
    total_q = sum(r["queries"] for r in log)
    k = pair.k
    per_query = [concentration_bound(n, k, d) for d in thresholds]
    return ExperimentReport(
        n=n, trials=trials, budget=query_budget, strategy=strategy,
        delta=pair.delta, log_delta=pair.log_delta, thresholds=thresholds,
        exceed_query_fraction=[sum(r["exceed_counts"][i] for r in log) / total_q
                               for i in range(len(thresholds))],
        exceed_trial_fraction=[sum(r["exceed_counts"][i] > 0 for r in log) / trials
                               for i in range(len(thresholds))],
        bound_per_query=per_query,
        bound_per_trial=[min(1.0, b * query_budget) for b in per_query],
        success_rate=sum(r["guess"] == r["oracle"] for r in log) / trials,
        regime="concentrated" if per_query[0] < 1 else "no-concentration at delta",
        trial_log=log,
    )
