from .operators import (DenseMap, GramMap, LaplacianMap, LinearMap, ScaledMap, SparseMap,
                        build_gram, check_cosine_law, operator_norm_estimate)
from .matrix_io import load_matrix, load_vector, save_vector
from .prox import (BoxIndicator, L1Norm, LinearFunction, NonnegativeIndicator, PointIndicator,
                   ProxFunction, QuadraticFunction, SeparableSum, StronglyConvexified, ZeroFunction,
                   check_prox_inequality, make_prox_function)
from .oracle import (KKTSolution, certify, check_three_point_identity, reference_solution,
                     solve_least_squares, solve_penalized, solve_qp_kkt)
from .problem import ConstrainedProblem, SmoothTerm
from .solvers import (accel_schedule, accel_schedule_next, default_step_sizes, resolve_step_sizes,
                      run, step_accelerated, step_accelerated_pdhg, step_condat_vu, step_pdhg,
                      step_pdhg_gram, step_primal, step_primal_dualspace, step_primal_smooth,
                      step_tseng, tseng_theta, validate_step_sizes)
from .diagnostics import (accelerated_lyapunov_check, audit_theorem1, audit_theorem2,
                          compare_stepsize_ratios, dual_lower_estimate, epsilon_check, fsk_bound,
                          lyapunov_check, penalty_path_gap, penalty_value, rate_fit,
                          theorem1_bounds, theorem2_bounds)
from .distributed import (ConsensusProblem, CountingMap, communications_to_accuracy,
                          consensus_dual_norms, consensus_gap, consensus_reference, laplacian,
                          load_graph, run_consensus, run_consensus_pdhg_baseline)
from .catalog_loader import CatalogLoader
from .family_resolver import FamilyResolver
from .manifest_loader import ManifestLoader, parse_manifest
from .trace_io import read_audit, read_json, read_trace, write_audit, write_json, write_trace

__all__ = [
    'LinearMap', 'DenseMap', 'SparseMap', 'LaplacianMap', 'GramMap', 'ScaledMap',
    'build_gram', 'operator_norm_estimate', 'check_cosine_law',
    'load_matrix', 'load_vector', 'save_vector',
    'ProxFunction', 'ZeroFunction', 'LinearFunction', 'QuadraticFunction', 'L1Norm',
    'BoxIndicator', 'NonnegativeIndicator', 'PointIndicator', 'SeparableSum',
    'StronglyConvexified', 'make_prox_function', 'check_prox_inequality',
    'KKTSolution', 'solve_least_squares', 'solve_qp_kkt', 'solve_penalized',
    'reference_solution', 'certify', 'check_three_point_identity',
    'ConstrainedProblem', 'SmoothTerm',
    'step_pdhg', 'step_primal', 'step_primal_dualspace', 'step_primal_smooth', 'step_condat_vu',
    'step_pdhg_gram', 'accel_schedule_next', 'accel_schedule', 'step_accelerated',
    'step_accelerated_pdhg', 'tseng_theta', 'step_tseng', 'default_step_sizes',
    'resolve_step_sizes', 'validate_step_sizes', 'run',
    'penalty_value', 'epsilon_check', 'theorem1_bounds', 'theorem2_bounds', 'fsk_bound',
    'dual_lower_estimate', 'rate_fit', 'lyapunov_check', 'accelerated_lyapunov_check',
    'audit_theorem1', 'audit_theorem2', 'penalty_path_gap', 'compare_stepsize_ratios',
    'CountingMap', 'laplacian', 'load_graph', 'ConsensusProblem', 'consensus_gap',
    'run_consensus', 'run_consensus_pdhg_baseline', 'communications_to_accuracy',
    'consensus_reference', 'consensus_dual_norms',
    'CatalogLoader', 'FamilyResolver', 'ManifestLoader', 'parse_manifest',
    'write_trace', 'read_trace', 'write_audit', 'read_audit', 'write_json', 'read_json'
]
