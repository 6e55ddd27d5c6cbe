# Two oracles that look the same almost everywhere

import numpy as np

from subgap.hardness import SmoothedPair, distinguish_experiment, gap_report, refine
from subgap.symmetry import k2cut

pair = SmoothedPair(k2cut(), 0.01)
print(pair.constants())

# Far from the symmetric line the pair follows F; on it both equal G.

for x in ([0.9, 0.1], [0.5, 0.5], [0.3, 0.3]):
    c = pair.components(np.array(x))
    print(x, round(c["Fhat"][0], 5), round(c["Ghat"][0], 5))

# Blowing each element up into n copies gives discrete oracles.  Their maxima
# keep the gap between the best set and the best symmetric solution.

print(gap_report(refine(pair, 5, seed=0)).to_json())

# Random queries to a large refinement land close to the symmetric line, so a
# policy that looks at values cannot tell f-hat from g-hat.

rep = distinguish_experiment(pair, "random", 1000, 20, n=200, seed=0, gap=(1.0, 0.5))
for thr, e, b in zip(rep.thresholds, rep.exceed_query_fraction, rep.bound_per_query):
    print(f"D > {thr:.3g}: {e:.4f} (bound {b:.4f})")
print("success rate", rep.success_rate)
