"""Numerical toolkit for the geometry of cost-convex functions."""

from .costs import (
    CATALOG_TABLE,
    Cost,
    CostSpec,
    DerivativeBlock,
    Polynomial,
    check_A1_A2,
    derivatives,
    fd_oracle,
    make_cost,
)
from .convexity import (
    DiscreteCPotential,
    SubdiffSet,
    c_star_transform,
    c_subdifferential,
    c_transform_eval,
    connectivity_check,
    contact_set,
    csis_check,
    subdifferential,
    two_mountain_potential,
)
from .curvature import A3Report, c_sectional_curvature, scan_a3
from .errors import MtwkitError
from .geometry import Manifold, Point, TangentVector, euclidean, sphere
from .mountains import (
    CSegment,
    MountainField,
    build_c_segment,
    dasm_check,
    expansion_rate,
    front_ode_track,
    front_sample,
    lemma62_check,
    monotonicity_check,
    positivity_check,
)
from .report import VerificationReport, dump_csv, dump_report
from .transport import (
    DomainSpec,
    c_exp,
    c_exp_inverse,
    cstar_exp,
    cstar_exp_inverse,
    symmetry_residual,
)

__version__ = "0.1.0"

__all__ = [
    "A3Report",
    "CATALOG_TABLE",
    "CSegment",
    "Cost",
    "CostSpec",
    "DerivativeBlock",
    "DiscreteCPotential",
    "DomainSpec",
    "Manifold",
    "MountainField",
    "MtwkitError",
    "Point",
    "Polynomial",
    "SubdiffSet",
    "TangentVector",
    "VerificationReport",
    "build_c_segment",
    "c_exp",
    "c_exp_inverse",
    "c_sectional_curvature",
    "c_star_transform",
    "c_subdifferential",
    "c_transform_eval",
    "check_A1_A2",
    "connectivity_check",
    "contact_set",
    "csis_check",
    "cstar_exp",
    "cstar_exp_inverse",
    "dasm_check",
    "derivatives",
    "dump_csv",
    "dump_report",
    "euclidean",
    "expansion_rate",
    "fd_oracle",
    "front_ode_track",
    "front_sample",
    "lemma62_check",
    "make_cost",
    "monotonicity_check",
    "positivity_check",
    "scan_a3",
    "sphere",
    "subdifferential",
    "symmetry_residual",
    "two_mountain_potential",
]
