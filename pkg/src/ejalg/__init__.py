"""Euclidean Jordan algebra toolkit with a commutation verification harness."""

from .algebra import (
    AlgebraError,
    AlgebraSpec,
    Element,
    JordanFrame,
    SpectralDecomposition,
    canonical_frame,
    combine,
    direct_product,
    eigenvalue_map,
    frobenius_inner,
    inner,
    jordan_product,
    lyapunov_map,
    multiplicity_blocks,
    norm,
    operator_commutes,
    parse_algebra,
    random_element,
    real_vector,
    reconstruct,
    spectral_decompose,
    spin_factor,
    strong_operator_commutes,
    sym_from_matrix,
    sym_matrix,
    sym_to_matrix,
    tensor_map,
    unit,
    zero,
)
from .liegroup import (
    Automorphism,
    DerivationBasis,
    commutator_derivation,
    commutes_via_derivations,
    derivation_basis,
    exp_derivation,
    orbit_tangent,
    project_perp_derivations,
    random_automorphism,
    random_derivation,
)
from .specfun import (
    SpectralFunction,
    SymmetricFunction,
    builtin_function,
    check_strict_schur,
    condition_number,
    is_subgradient,
    kappa_function,
    majorizes,
    monotone_pairing_check,
    schatten,
    spectral_subgradient,
    spectral_value,
    sumsq,
)
from .optimize import (
    CommutationReport,
    FeasibleSet,
    Objective,
    OptResult,
    SolverParams,
    kappa_shift,
    linear_plus_spectral,
    multistart,
    orbit,
    orbit_descent,
    permutation_oracle,
    project_sorted_box,
    shifted_spectral,
    spectral_box,
    spectralbox_descent,
)
from .verify import (
    SuiteConfig,
    SuiteReport,
    Tolerances,
    commuting_witness,
    demo_kappa,
    kappa_clipping_oracle,
    midpoint_witness_record,
    project_simplex,
    run_suite,
    suite_names,
    verify_appendix,
    verify_max_principle,
    verify_min_principle,
    verify_normal_cone,
    verify_shifted_principle,
    verify_smooth_principle,
)

__version__ = "0.1.0"
