"""Nonmonotone submodular maximization over matroids, and symmetry-gap hardness instances."""

__version__ = "0.1.0"

from .errors import (ConstructionError, ContractError, InfeasibleError, NotInvariantError,
                     SizeError, SubgapError)
from .setfn import (GroundSet, SetFunction, Witness, build_family, check_monotone,
                    check_submodular, coverage_function, cut_function, directed_cut_function,
                    table_function, threshold_function)
from .matroid import (Matroid, PackingCertificate, enumerate_bases, explicit_matroid,
                      fractional_base_packing, free_matroid, in_polytope, partition_matroid,
                      strip_loops_and_coloops, uniform_matroid)
from .extension import (Estimate, lovasz_eval, multilinear_exact, multilinear_sample,
                        partial_derivative, second_partial)
from .pipage import adjust, hit_constraint, pipage_round, round_matroid
from .localsearch import (FractionalSolution, SearchConfig, find_base_start, local_search_bases,
                          local_search_independence)
from .brute import BruteResult, bipartite_tightness, brute_opt, value_bound_check
from .symmetry import (PermGroup, SymmetricInstance, bundled, check_strong_symmetry, symmetrize,
                       symmetry_gap)
from .hardness import (PhiFunction, RefinedPair, SmoothedPair, distinguish_experiment,
                       gap_report, phi_eval, refine, smoothed_eval)
