# Symmetry gaps of the bundled instances
#
# Each instance pairs a submodular function with a feasible family and a
# permutation group.  OPT is the best feasible set; OPT_bar is the best value
# of the multilinear extension over symmetric fractional points.

import numpy as np

from subgap.extension import multilinear_exact
from subgap.symmetry import bundled, check_strong_symmetry, symmetrize, symmetry_gap

# The cut of a single edge: either endpoint alone cuts it, but the only
# symmetric points are (c, c), and F(c, c) = 2c(1 - c) peaks at 1/2.

res = symmetry_gap(bundled("k2cut"))
print("k2cut", res.opt, res.opt_bar, res.gamma)

# min(|S|, 1) with at most one element: the symmetric point puts 1/k on
# every element, so OPT_bar = 1 - (1 - 1/k)^k.

for k in (2, 3, 4, 5):
    res = symmetry_gap(bundled(f"cardinality:{k}"))
    print(f"cardinality:{k}", round(res.gamma, 6), round(1 - (1 - 1 / k) ** k, 6))

# Directed cut over bases that take one tail and k-1 heads.  Symmetrizing the
# optimal base spreads it evenly, and the value drops to 1/k.

inst = bundled("dircut-bases:3")
best = [1, 0, 0, 0, 1, 1]
print(symmetrize(best, inst.group))
print(multilinear_exact(inst.f, np.array(symmetrize(best, inst.group), dtype=float)))
print(symmetry_gap(inst).gamma)

# Rotating a 4-cycle preserves the family of adjacent pairs, but {0, 1} and
# {0, 2} have the same symmetrized indicator while only one is feasible.

print(check_strong_symmetry(bundled("cyclic-pairs")).to_dict())
