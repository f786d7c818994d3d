"""Finite-window verification of dichotomy and growth properties of linear
discrete-time systems, with Lyapunov-type norm sequences, summation
criteria, and machine-readable certificates."""

from .catalog import (DICHOTOMIC_EXAMPLES, EXAMPLES, SystemBundle,
                      make_example, perturbed_random_pair,
                      polynomial_diagonal_pair, shear_dichotomy_pair,
                      shear_growth_pair, uniform_exponential_pair)
from .conditions import (ConditionEstimate, GainTables, TrendDiagnostic,
                         check_candidate, compute_gain_tables, condition_trend,
                         cross_candidate, divergence_diagnostic,
                         estimate_core_conditions, estimate_hd1, estimate_hd2,
                         estimate_hg1, estimate_hg2, estimate_kd1,
                         estimate_kd2, estimate_kg1, estimate_kg2)
from .errors import (BelowOneError, BoundViolatedError,
                     DegenerateSubspaceError, EvolutionOverflowError,
                     HFamilyViolationError, HkdichoError,
                     LowerBoundViolationError, MalformedCandidateError,
                     NonMonotoneError, RankMismatchError,
                     SingularRestrictionError, SpecParseError,
                     SpecValidationError, WindowTooSmallError)
from .evolution import (EvolutionCache, LinearSystem, build_evolution,
                        cocycle_residual, verify_cocycle)
from .linops import (GainEstimate, matrix_gain, operator_norm,
                     restricted_gain, sample_unit_vectors, subspace_basis,
                     vector_norm, vector_norms)
from .lyapnorms import (NormSequence, base_norm_sequence, build_dichotomy_norm,
                        build_growth_norm, check_compatibility, check_hd3_kd3,
                        check_hd4_kd4, estimate_hd5_kd5,
                        truncation_tail_nonincreasing)
from .pipeline import (CONDITION_IDS, AnalysisConfig, Certificate,
                       bundle_description, run_analysis)
from .projectors import (ProjectorSequence, SkewEvolution,
                         build_skew_evolution, check_invariance,
                         check_projectors, check_skew_identities,
                         check_strong_invariance)
from .rates import GrowthRate, make_rate, validate_growth_rate
from .report import (certificate_json, summary_lines, write_certificate,
                     write_condition_csvs)
from .series import (BarbashinReport, DatkoReport, TildeRate, barbashin_sums,
                     datko_sums, derive_tilde_rate)
from .specfile import example_spec_dict, parse_spec, write_spec

__version__ = "0.1.0"
