"""Permutation- and sign-invariant convexification toolkit.

Majorization oracles and transport certificates, the K-sparse gauge hull
with separating hyperplanes, singular-value matrix hulls, convex envelopes
of coordinate products over symmetric boxes, extended-formulation row
emitters, and seven conic relaxations of sparse PCA with an exact
enumeration oracle.
"""

from .envelope import (
    Box,
    FacetCut,
    UnsupportedCaseError,
    facet_from_point,
    greedy_corner,
    holefree_faces,
    mccormick_relax,
    monomial_hull_membership,
    multilinear_envelope,
    schur_envelope_value,
)
from .ksupport import (
    SparsityCertificate,
    c_norm,
    k_support_norm,
    membership,
    separating_hyperplane,
    sparsity_certificate,
    sparsity_min_norm,
)
from .linalg import SortedProfile, singular_values, sorted_profile, sym_eigen
from .majorization import (
    BirkhoffDecomposition,
    DegeneracyError,
    birkhoff,
    in_permutahedron,
    majorizes,
    transport_matrix,
    weakly_majorizes,
)
from .matrixhull import (
    eig_hull_membership,
    hiriart_membership,
    sv_hull_membership,
)
from .model import (
    CapabilityError,
    ComparatorNetwork,
    ConicModel,
    bitonic_network,
    emit_majorization,
    emit_sorting_majorization,
    emit_weak_majorization,
    export_lp,
    export_sdpa,
    parse_lp,
)
from .solvers import SolveReport, SolverError, solve_conic, solve_lp
from .spca import (
    DataError,
    GapReport,
    SpcaInstance,
    build_relaxation,
    exact_lift,
    exact_spca,
    gap_report,
    load_pitprops,
    pitprops_instance,
    random_instance,
    relaxation_kind,
    solve_relaxation,
)
from .transport import (
    dual_certificate_block,
    dual_certificate_diag,
    h_closed_block,
    h_closed_diag,
    h_primal,
    transport_model,
)

__version__ = "0.1.0"

__all__ = [
    "Box",
    "BirkhoffDecomposition",
    "CapabilityError",
    "ComparatorNetwork",
    "ConicModel",
    "DataError",
    "DegeneracyError",
    "FacetCut",
    "GapReport",
    "SolveReport",
    "SolverError",
    "SortedProfile",
    "SparsityCertificate",
    "SpcaInstance",
    "UnsupportedCaseError",
    "birkhoff",
    "bitonic_network",
    "build_relaxation",
    "c_norm",
    "dual_certificate_block",
    "dual_certificate_diag",
    "eig_hull_membership",
    "emit_majorization",
    "emit_sorting_majorization",
    "emit_weak_majorization",
    "exact_lift",
    "exact_spca",
    "export_lp",
    "export_sdpa",
    "facet_from_point",
    "gap_report",
    "greedy_corner",
    "h_closed_block",
    "h_closed_diag",
    "h_primal",
    "hiriart_membership",
    "holefree_faces",
    "in_permutahedron",
    "k_support_norm",
    "load_pitprops",
    "majorizes",
    "mccormick_relax",
    "membership",
    "monomial_hull_membership",
    "multilinear_envelope",
    "parse_lp",
    "pitprops_instance",
    "random_instance",
    "relaxation_kind",
    "schur_envelope_value",
    "separating_hyperplane",
    "singular_values",
    "solve_conic",
    "solve_lp",
    "solve_relaxation",
    "sorted_profile",
    "sparsity_certificate",
    "sparsity_min_norm",
    "sv_hull_membership",
    "sym_eigen",
    "transport_matrix",
    "transport_model",
    "weakly_majorizes",
]
