"""boundlab: desk-scale numerical verification of covering, concentration,
pigeonholing, and orbit-construction bounds."""

__version__ = "0.1.0"

from .core import (FiniteGroup, GridTorus, IndicatorSet, RandomStream,
                   estimate_measure, measure, sample_uniform, translate_set)
from .dyadic import (BohrSet, ScaleLadder, bohr_build, bohr_doubling_check,
                     condensation_test, pigeonhole_scale,
                     pigeonhole_weighted_scale, regular_radius)
from .translations import (CoverResult, exhaustive_mean_union,
                           expected_union_exact, greedy_cover,
                           random_cover_search, union_measure)
from .chaining import (ChainDecomposition, FiniteMetricSpace,
                       GaussianProcessSpec, build_chain, chebyshev_bound,
                       covering_number, dudley_bound, empirical_sup,
                       empirical_tail, hoeffding_bound)
from .harmonic import (CharacterSystem, CircleMeasure, CyclicSystem, PlaneGrid,
                       ergodic_average, fkw_correlation, fkw_frequency_split,
                       fkw_scan, lambda_p_estimate, lambda_p_random_trial,
                       maximal_function, variational_sum)
from .similarity import (Ladder, OrbitFamily, SimilarityConfig, build_B1,
                         build_construction, coverage_probability, cube_set,
                         inf_sup_experiment, orbit_entropy, separation)
