# Fractional local search followed by pipage rounding

from collections import Counter
from fractions import Fraction

import numpy as np

from subgap.brute import brute_opt
from subgap.extension import multilinear_exact
from subgap.localsearch import SearchConfig, local_search_bases, local_search_independence
from subgap.matroid import fractional_base_packing, random_nu2_matroid, uniform_matroid
from subgap.pipage import pipage_round
from subgap.setfn import random_submodular

rng = np.random.default_rng(7)

# Independent sets of a uniform matroid, searching inside the box [0, 3/8].

f = random_submodular(8, rng)
m = uniform_matroid(8, 3)
sol = local_search_independence(f, m, SearchConfig(t=Fraction(3, 8)))
opt = brute_opt(f, "independence", m).best_value
print("fractional", round(sol.value, 4), "rounded", round(sol.rounded_value, 4), "opt", round(opt, 4))
print("guarantee", float(Fraction(3, 8) - Fraction(9, 128)))

# Bases of a matroid with packing number 2: the search starts from half of two
# disjoint bases and only swaps mass between coordinates.

m2 = random_nu2_matroid(8, rng)
print("nu =", fractional_base_packing(m2).nu)
sol = local_search_bases(f, m2, SearchConfig(t=Fraction(1, 2)))
print([str(v) for v in sol.x])
print("value", round(sol.value, 4), "opt", round(brute_opt(f, "bases", m2).best_value, 4))

# Pipage rounding keeps the expected point fixed, so averaging many rounds
# recovers the fractional point and at least its multilinear value.

y = sol.x
runs = [pipage_round(m2, y, seed=s).set for s in range(2000)]
freq = Counter(e for S in runs for e in S)
print([round(freq[e] / 2000, 3) for e in range(8)])
print("mean f", round(np.mean([f(S) for S in runs]), 4), "F(y)",
      round(multilinear_exact(f, [float(v) for v in y]), 4))
