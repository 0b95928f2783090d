"""Numerics for weighted theta-incomplete polynomials.

Index sets and polynomials, domains with weights, meshes and quadrature,
orthonormal bases with their Bergman functions, and estimates of the
weighted extremal function V_{K,Q,theta} with the checks that go with it.
"""

from .index_core import Theta, dim, enumerate_index_set
from .poly_core import MultiPolynomial, evaluate, multiply, split_incomplete, sup_norm_on_mesh
from .geometry_measure import (
    NotAdmissibleError,
    WeightSpec,
    admissibility_check,
    build_mesh,
    build_quadrature,
    parse_domain,
    parse_weight,
    truncation_radius,
)
from .ortho_bergman import (
    OrthoBasis,
    RankDeficiencyError,
    ResolutionError,
    bergman_diag,
    bm_constant,
    build_basis,
    gaussian_exact_basis,
)
from .extremal import (
    approx_V_bergman,
    approx_V_sup_basis,
    closed_form_V_circle,
    closed_form_V_gaussian,
    closed_form_V_interval,
    gaussian_mass_report,
    hull_membership,
    l1_density_report,
    monotonicity_report,
    phi_lp,
    uniform_convergence_report,
    weighted_supnorm_equivalence,
)
from .simplex import InfeasibleError, UnboundedError

__version__ = "0.1.0"
