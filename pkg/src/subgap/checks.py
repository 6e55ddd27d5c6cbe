"""Randomized property suites run by ``subgap check``."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from .brute import brute_opt
from .extension import lovasz_eval, multilinear_batch, multilinear_exact, partial_derivative
from .hardness import PhiFunction, SmoothedPair, refine
from .localsearch import SearchConfig, local_search_bases, local_search_independence
from .matroid import base_masks, random_matroid, random_nu2_matroid
from .pipage import pipage_round, round_matroid
from .setfn import check_submodular, random_submodular
from .symmetry import dircut_bases, k2cut, symmetrize_batch

SUITES = ("extensions", "pipage", "localsearch", "hardness")


@dataclass
class PropertyResult:
    name: str
    passed: int
    total: int
    counterexample: Optional[dict] = None

    @property
    def ok(self) -> bool:
        return self.passed == self.total

    def line(self) -> str:
        return f"{self.name}: {self.passed}/{self.total} {'pass' if self.ok else 'FAIL'}"

    def to_json(self) -> dict:
        return {"name": self.name, "passed": self.passed, "total": self.total, "ok": self.ok,
                "counterexample": self.counterexample}


def _tally(name: str, trials: int, body: Callable) -> PropertyResult:
    passed, cx = 0, None
    for t in range(trials):
        good, info = body(t)
        if good:
            passed += 1
        elif cx is None:
            cx = info
    return PropertyResult(name, passed, trials, cx)


def extensions_suite(seed: int = 0, trials: int = 1000) -> list:
    rng = np.random.default_rng([seed, 11])

    def f_ge_lovasz(t):
        n = int(rng.integers(2, 9))
        f = random_submodular(n, rng)
        x = rng.random(n)
        F, L = multilinear_exact(f, x), lovasz_eval(f, x)
        return F >= L - 1e-12, {"n": n, "x": x.tolist(), "F": F, "lovasz": L}

    def vertices(t):
        n = int(rng.integers(2, 7))
        f = random_submodular(n, rng)
        S = rng.random(n) < 0.5
        want = f.value(np.flatnonzero(S).tolist())
        got = (multilinear_exact(f, S.astype(float)), lovasz_eval(f, S.astype(float)))
        return abs(got[0] - want) < 1e-12 and abs(got[1] - want) < 1e-12, {"set": S.tolist()}

    def derivative(t):
        n = int(rng.integers(2, 7))
        f = random_submodular(n, rng)
        x = rng.uniform(0.05, 0.95, n)
        i = int(rng.integers(n))
        h = 1e-4
        xp, xm = x.copy(), x.copy()
        xp[i] += h
        xm[i] -= h
        fd = (multilinear_exact(f, xp) - multilinear_exact(f, xm)) / (2 * h)
        d = partial_derivative(f, x, i)
        return abs(fd - d) <= 1e-6, {"fd": fd, "exact": d}

    def convex_swap(t):
        n = int(rng.integers(2, 7))
        f = random_submodular(n, rng)
        i, j = rng.choice(n, 2, replace=False)
        x = rng.random(n)
        lo, hi = -min(x[j], 1 - x[i]), min(x[i], 1 - x[j])
        lam = np.linspace(lo, hi, 41)
        v = np.zeros(n)
        v[j], v[i] = 1.0, -1.0
        g = multilinear_batch(f, x[None, :] + lam[:, None] * v[None, :])
        second = g[2:] - 2 * g[1:-1] + g[:-2]
        return bool(second.min() >= -1e-9), {"min_second_difference": float(second.min())}

    return [
        _tally("F ≥ Lovász", trials, f_ge_lovasz),
        _tally("extensions agree at vertices", trials // 5, vertices),
        _tally("partial derivative matches finite differences", trials // 5, derivative),
        _tally("F convex along e_j - e_i", trials // 10, convex_swap),
    ]


def pipage_suite(seed: int = 0, instances: int = 30, rounds: int = 1000) -> list:
    rng = np.random.default_rng([seed, 12])

    def martingale(t):
        n = int(rng.integers(2, 7))
        m = random_matroid(n, rng)
        q = int(rng.integers(2, 6))
        k = np.zeros(n, dtype=int)
        # a random point of P(M) on the 1/q grid, built from q independent sets
        for _ in range(q):
            ind = []
            for e in rng.permutation(n):
                if m.is_independent(ind + [int(e)]) and rng.random() < 0.7:
                    ind.append(int(e))
            k[ind] += 1
        x = [Fraction(int(v), q) for v in k]
        out = round_matroid(m, x, seed=int(rng.integers(2 ** 31)))
        for b in out.branches:
            lhs = [b.p * lo + (1 - b.p) * hi for lo, hi in zip(b.low, b.high)]
            if lhs != list(b.point):
                return False, {"point": [str(v) for v in b.point], "p": str(b.p)}
        return m.is_independent(out.set), {"set": sorted(out.set)}

    def mean_value(t):
        n = int(rng.integers(2, 7))
        m = random_matroid(n, rng)
        f = random_submodular(n, rng)
        bases = base_masks(m)
        picks = rng.choice(len(bases), size=min(3, len(bases)))
        y = [Fraction(0)] * n
        for b in picks:
            for e in range(n):
                if (int(bases[b]) >> e) & 1:
                    y[e] += Fraction(1, len(picks))
        vals = np.array([f.value(pipage_round(m, y, seed=s).set) for s in range(rounds)])
        F = multilinear_exact(f, [float(v) for v in y])
        se = vals.std(ddof=1) / math.sqrt(rounds)
        return vals.mean() >= F - 3 * se - 1e-12, {"mean": float(vals.mean()), "F": F, "stderr": se}

    return [_tally("pipage martingale identity", instances, martingale),
            _tally("pipage mean f(rounded) >= F(y) - 3 stderr", instances // 3, mean_value)]


def localsearch_suite(seed: int = 0, instances: int = 15) -> list:
    rng = np.random.default_rng([seed, 13])
    t_ind = Fraction(3, 8)

    def independence(t):
        n = int(rng.integers(3, 8))
        f, m = random_submodular(n, rng), random_matroid(n, rng)
        sol = local_search_independence(f, m, SearchConfig(t=t_ind, slack=0.0))
        opt = brute_opt(f, "independence", m).best_value
        bound = float(t_ind - t_ind ** 2 / 2) * opt
        return sol.value >= bound - 1e-9, {"value": sol.value, "opt": opt}

    def bases(t):
        n = 2 * int(rng.integers(2, 5))
        f, m = random_submodular(n, rng), random_nu2_matroid(n, rng)
        sol = local_search_bases(f, m, SearchConfig(t=Fraction(1, 2), slack=0.0))
        opt = brute_opt(f, "bases", m).best_value
        return sol.value >= 0.25 * opt - 1e-9, {"value": sol.value, "opt": opt}

    return [_tally("independence value >= (t - t^2/2) OPT", instances, independence),
            _tally("base value >= (1-t)/2 OPT", instances, bases)]


def hardness_suite(seed: int = 0, points: int = 300) -> list:
    rng = np.random.default_rng([seed, 14])
    out = []

    def phi_bounds(t):
        alpha = float(rng.uniform(0.01, 0.12))
        phi = PhiFunction(alpha, float(rng.uniform(0.1, 10.0)))
        u = np.exp(rng.uniform(-2, 40, 2000))
        u = u[(np.abs(u - 1) > 1e-9) & (np.abs(u - phi.u2) > 1e-9)]
        tt = u * phi.scale
        a = np.abs(phi.t_dphi(tt)).max()
        b = np.abs(phi.t2_d2phi(tt)).max()
        c = phi.log_value(phi.beta) < -1 / alpha
        return a <= 4 * alpha and b <= 10 * alpha and bool(c), {"alpha": alpha, "tphi1": a, "t2phi2": b}

    out.append(_tally("phi derivative bounds", 20, phi_bounds))
    for name, inst in (("K2", k2cut()), ("dircut-bases:2", dircut_bases(2))):
        pair = SmoothedPair(inst, 0.01)

        def close(t):
            x = rng.random(inst.n)
            c = pair.components(x)
            return abs(c["Fhat"][0] - c["F"][0]) <= pair.epsilon, {"x": x.tolist()}

        def equal_near(t):
            x = symmetrize_batch(rng.random(inst.n), inst.group)[0]
            x = symmetrize_batch(x, inst.group)[0]
            c = pair.components(x)
            if not pair.within_delta(c["D"])[0]:
                return True, None
            return c["Fhat"][0] == c["Ghat"][0], {"x": x.tolist()}

        out.append(_tally(f"{name}: |F-hat - F| <= eps", points, close))
        out.append(_tally(f"{name}: F-hat = G-hat within delta", points, equal_near))

        def refined_submodular(t):
            r = refine(pair, 2 + t, seed=seed + t)
            wf = check_submodular(r.as_set_function("f"))
            wg = check_submodular(r.as_set_function("g"))
            return wf is None and wg is None, {"n": 2 + t}

        out.append(_tally(f"{name}: refined oracles submodular", 2, refined_submodular))
    return out


def run_suite(name: str, seed: int = 0) -> list:
    if name == "all":
        return [r for s in SUITES for r in run_suite(s, seed)]
    if name == "extensions":
        return extensions_suite(seed)
    if name == "pipage":
        return pipage_suite(seed)
    if name == "localsearch":
        return localsearch_suite(seed)
    if name == "hardness":
        return hardness_suite(seed)
    raise ValueError(f"unknown suite {name!r}; choose from {', '.join(SUITES + ('all',))}")
