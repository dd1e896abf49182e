"""Simple binary matroids on the points of F_2^n: pattern instances,
critical numbers, hereditary local properties and their censuses, Ramsey-type
flat colorings, and a desk-scale higher-order Fourier toolkit.
"""

from .errors import BudgetExceeded
from .gf2 import (
    GF2Vector,
    LinearInjections,
    LinearMap,
    Subspace,
    count_linear_injections,
    count_subspaces,
    enumerate_linear_injections,
    enumerate_points,
    enumerate_subspaces,
    gaussian_binomial,
    random_invertible_map,
    random_linear_injection,
    rank,
    rooted_subspace_packing,
    rref,
)
from .matroid import (
    Matroid,
    Pattern,
    RealFunction,
    bose_burton,
    builtin_pattern,
    canonical_form,
    count_instances,
    critical_number,
    density,
    density_in_function,
    evaluations,
    ext_membership,
    extensions,
    find_instance,
    is_isomorphic,
    is_k_affine,
    load_json_dict,
    load_table,
    restrict,
    sample_extension,
    sample_matroid,
    vanishing_pattern,
)
from .hereditary import (
    CensusRow,
    FreeExtensionReport,
    LocalProperty,
    RamseyResult,
    census,
    contains,
    core_membership,
    core_membership_refute,
    count_critical_at_most,
    count_free_extensions,
    count_members,
    forb,
    isomorphism_class_census,
    property_critical_number,
    ramsey_dimension,
    typical_structure_fraction,
    verify_ramsey_result,
)
from .fourier import (
    DegreeCheck,
    FactorCountReport,
    NonclassicalPolynomial,
    PolynomialFactor,
    TorusValue,
    best_factor_search,
    binary_entropy,
    conditional_expectation,
    count_factors,
    count_structured,
    derivative,
    enumerate_structured,
    eval_polynomial,
    factor_partition,
    function_entropy,
    gowers_norm,
    is_structured,
    polynomial_from_text,
    polynomial_to_text,
    verify_degree,
)

__version__ = "0.1.0"
