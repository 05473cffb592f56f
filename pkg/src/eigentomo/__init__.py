"""Residual stress fields invisible to partial strain measurements.

The package constructs divergence-free stress fields on the cube [0, 2pi]^3
whose boundary tractions and selected strain components vanish identically,
so no measurement of those components can distinguish them from zero.  It
also provides the constructive converses: recovering the diagonal stress
components from the shears and vice versa, reducing polynomial eigenstrains
to diagonal form, and certifying in exact arithmetic when an isotropic
(scalar) eigenstrain representation is impossible.
"""

from .fields import (
    COMPONENTS,
    FACES,
    PERIOD,
    ElasticConstants,
    Grid3,
    SymTensorField3,
    VectorField3,
    divergence_fd,
    hooke_strain_from_stress,
    hooke_stress_from_strain,
    max_traction,
    traction_on_boundary,
)
from .imagefit import BinaryTarget, FitResult, combined_generator, fit_target, slice_design_matrix
from .nullspace import (
    ConstraintSystem,
    CosinePotential,
    NullGenerator,
    analytic_divergence,
    assemble_constraints,
    coeffs_from_generator,
    eval_strain,
    eval_stress,
    null_basis,
    potential_from_scalar,
    separable_null_basis,
)
from .polynomial import Poly, random_polynomial
from .poorly import (
    PoorlyParamSPW,
    PoorlyParamU,
    convert_u_to_spw,
    equilibrium_residuals,
    is_poorly,
    lie_bracket,
    principal_symbol_det,
    tau_from_spw,
    tau_from_u,
)
from .recovery import (
    DiscreteOperator,
    RankDeficiencyError,
    RecoveryConsistencyError,
    RecoveryProblem,
    ShearRecoveryResult,
    assemble_shear_recovery,
    recover_diagonal_from_shear,
    solve_shear_recovery,
)
from .reduction import (
    IsotropicCertificate,
    PolyEigenstrain,
    ReductionResult,
    diagonalize,
    homogeneous_u,
    isotropic_certificate,
    sym_gradient,
)

__version__ = "0.1.0"

__all__ = [
    "BinaryTarget",
    "COMPONENTS",
    "ConstraintSystem",
    "CosinePotential",
    "DiscreteOperator",
    "ElasticConstants",
    "FACES",
    "FitResult",
    "Grid3",
    "IsotropicCertificate",
    "NullGenerator",
    "PERIOD",
    "Poly",
    "PolyEigenstrain",
    "PoorlyParamSPW",
    "PoorlyParamU",
    "RankDeficiencyError",
    "RecoveryConsistencyError",
    "RecoveryProblem",
    "ReductionResult",
    "ShearRecoveryResult",
    "SymTensorField3",
    "VectorField3",
    "analytic_divergence",
    "assemble_constraints",
    "assemble_shear_recovery",
    "coeffs_from_generator",
    "combined_generator",
    "convert_u_to_spw",
    "diagonalize",
    "divergence_fd",
    "equilibrium_residuals",
    "eval_strain",
    "eval_stress",
    "fit_target",
    "homogeneous_u",
    "hooke_strain_from_stress",
    "hooke_stress_from_strain",
    "isotropic_certificate",
    "is_poorly",
    "lie_bracket",
    "max_traction",
    "null_basis",
    "potential_from_scalar",
    "principal_symbol_det",
    "random_polynomial",
    "recover_diagonal_from_shear",
    "separable_null_basis",
    "slice_design_matrix",
    "solve_shear_recovery",
    "sym_gradient",
    "tau_from_spw",
    "tau_from_u",
    "traction_on_boundary",
]
