"""twistlab: finite-dimensional experiments with interpolation centralizers.

Sequence spaces and their norms live in :mod:`twistlab.spaces`, balanced
factorizations and induced centralizers in :mod:`twistlab.factorization`,
closed-form centralizers in :mod:`twistlab.centralizers`, Rochberg tuples and
analytic witnesses in :mod:`twistlab.derived`, and indicator functions and
certified inequality sweeps in :mod:`twistlab.indicators`.
"""

from .errors import BracketError, ConfigurationError, InputError, SizeError, TwistlabError
from .sparse import SparseVector, disjoint, parse_vector, total
from .orlicz import OrliczFunction, exp_alpha, luxemburg_sum, orlicz_gauge, power, twist_r
from .spaces import (Lp, Orlicz, PConcavified, PConvexified, SpaceSpec, Tsirelson, WeightedLp,
                     dual_norm_lower, norm, norm_batch, space_from_json, tsirelson_norm)
from .factorization import (CalderonSpace, Couple, Factorization, couple_from_json, factorize,
                            induced_centralizer, interpolation_norm)
from .centralizers import (NOT_FOUND, CentralizerSpec, ComplexPower, Interpolated, KaltonPeck,
                           OrliczHilbert, PConvexForm, Phi1, PhiR, PhiSpec, Scaled, apply,
                           boundedness_gap, centralizer_from_json, equivalence_gap,
                           exactness_check, expansiveness_threshold, quasilinearity_defect,
                           rho_lower)
from .derived import (AnalyticWitness, RochbergTuple, TwistedPair, derived_coherence,
                      finite_difference_tuple, kernel_derivative_check, rochberg_embed,
                      rochberg_project, taylor_tuple, twisted_quasinorm, witness_boundary_norm)
from .indicators import (a_indicator, core_estimate_residual, lambda_indicator,
                         logconvexity_check, m_indicator, nonequivalence_ratio_test,
                         singularity_report)

__version__ = "0.1.0"
