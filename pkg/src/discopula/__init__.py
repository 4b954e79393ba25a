"""Discrete copulas of finite-support distributions.

The copula array of a d-dimensional probability array is its minimum-KL
projection onto the class of arrays with discrete-uniform margins; it is
a margin-free representation of the dependence structure.  This package
computes the projection by iterative proportional fitting, parameterises
the uniform-margin arrays of a given support, provides the large-sample
sandwich covariances of the empirical copula array, and builds on them
for concordance inference and a quasi-independence test.
"""

from .arrays import (
    COMPUTED_ZERO_TOL,
    Violation,
    check_probability_array,
    flatten_index,
    independence_array,
    margin,
    margins,
    quasi_uniform_array,
    support_of,
    unflatten_index,
    unvec,
    validate_probability_array,
    vec,
)
from .asymptotics import (
    CovarianceEstimate,
    cells_jacobian,
    coords_jacobian,
    multinomial_covariance,
    plugin_covariance,
    sandwich_covariance,
)
from .basis import (
    BasisBundle,
    ConstraintMatrix,
    basis_from_columns,
    canonical_basis,
    constraint_matrix,
    coords_of_copula,
    copula_from_coords,
    dependence_basis,
    is_admissible,
    load_basis_matrix,
    null_space_basis,
    save_basis_matrix,
)
from .errors import (
    ConditioningError,
    ContractError,
    DegenerateTestError,
    DiscopulaError,
    MaxSweepsExceeded,
    NoFeasibleProjection,
    NotInAffineSpan,
)
from .estimator import EmpiricalCopula
from .inference import (
    QuasiIndependenceResult,
    YuleEstimate,
    chi_square_upper_tail,
    normal_quantile,
    quasi_independence_test,
    yule_coefficient,
    yule_inference,
    yule_kappa,
)
from .linalg import finite_difference_jacobian, null_space, solve_spd
from .projection import (
    FeasibilityCheck,
    IpfConfig,
    IpfOutcome,
    copula_array,
    factorization_residual,
    i_divergence,
    ipf_project,
    min_entry_certificate,
    quasi_independence_array,
    smoothed_empirical,
    uniform_margins_feasible,
    uniform_targets,
)
from .simulate import CltReport, SimScenario, clt_study, replicate_rngs, sample_counts
from .tables import TableDocument, emit_table, parse_table

__version__ = "0.1.0"

__all__ = [
    "BasisBundle",
    "CltReport",
    "COMPUTED_ZERO_TOL",
    "ConditioningError",
    "ConstraintMatrix",
    "ContractError",
    "CovarianceEstimate",
    "DegenerateTestError",
    "DiscopulaError",
    "EmpiricalCopula",
    "FeasibilityCheck",
    "IpfConfig",
    "IpfOutcome",
    "MaxSweepsExceeded",
    "NoFeasibleProjection",
    "NotInAffineSpan",
    "QuasiIndependenceResult",
    "SimScenario",
    "TableDocument",
    "Violation",
    "YuleEstimate",
    "basis_from_columns",
    "canonical_basis",
    "cells_jacobian",
    "check_probability_array",
    "chi_square_upper_tail",
    "clt_study",
    "constraint_matrix",
    "coords_jacobian",
    "coords_of_copula",
    "copula_array",
    "copula_from_coords",
    "dependence_basis",
    "emit_table",
    "factorization_residual",
    "finite_difference_jacobian",
    "flatten_index",
    "i_divergence",
    "independence_array",
    "ipf_project",
    "is_admissible",
    "load_basis_matrix",
    "margin",
    "margins",
    "min_entry_certificate",
    "multinomial_covariance",
    "normal_quantile",
    "null_space",
    "null_space_basis",
    "parse_table",
    "plugin_covariance",
    "quasi_independence_array",
    "quasi_independence_test",
    "quasi_uniform_array",
    "replicate_rngs",
    "sample_counts",
    "sandwich_covariance",
    "save_basis_matrix",
    "smoothed_empirical",
    "solve_spd",
    "support_of",
    "unflatten_index",
    "unvec",
    "uniform_margins_feasible",
    "uniform_targets",
    "validate_probability_array",
    "vec",
    "yule_coefficient",
    "yule_inference",
    "yule_kappa",
]
