"""Numerical laboratory for strongly pseudoconvex complex Finsler metrics:
connection and curvature tensors at sample points of the slit tangent bundle,
metric classification, and pointwise identity verification against an
independent finite-difference oracle."""

__version__ = "0.1.0"

from .points import Point
from .expressions import (MetricExpr, metric_from_dict, metric_from_json,
                          metric_to_dict, metric_to_json)
from .jets import (OrderBound, active_backend, eval_jet, eval_jet_batch,
                   eval_scalar_jet)
from .catalog import (HermitianData, build_catalog_metric, build_hermitian,
                      build_randers, build_szabo, conformal_scale, rho_named)
from .oracle import fd_oracle, oracle_agreement, oracle_table
from .geometry import (Frame, canonical_coeffs, chern_finsler_coeffs,
                       frame_data, fundamental_tensor, horizontal_derivative,
                       nonlinear_connection, rund_coeffs, torsion_form_coeffs,
                       torsions)
from .curvature import (CurvatureBundle, canonical_curvature, chern_curvature,
                        complexified_curvature, curvature_bundle,
                        flag_and_sectional, ricci_and_scalars, rund_curvature,
                        torsion_square)
from .analysis import (DefectVector, IdentityReport, classify, identity_names,
                       kahler_equivalence_witness, verify_all,
                       verify_conformal, verify_identity)
from .sampling import SampleConfig, sample_points
from .tensors import Tensor

__all__ = [
    "__version__",
    "Point",
    "Tensor",
    "MetricExpr",
    "metric_from_dict",
    "metric_from_json",
    "metric_to_dict",
    "metric_to_json",
    "OrderBound",
    "active_backend",
    "eval_jet",
    "eval_jet_batch",
    "eval_scalar_jet",
    "HermitianData",
    "build_catalog_metric",
    "build_hermitian",
    "build_randers",
    "build_szabo",
    "conformal_scale",
    "rho_named",
    "fd_oracle",
    "oracle_agreement",
    "oracle_table",
    "Frame",
    "frame_data",
    "fundamental_tensor",
    "nonlinear_connection",
    "horizontal_derivative",
    "chern_finsler_coeffs",
    "canonical_coeffs",
    "rund_coeffs",
    "torsions",
    "torsion_form_coeffs",
    "CurvatureBundle",
    "curvature_bundle",
    "chern_curvature",
    "rund_curvature",
    "canonical_curvature",
    "complexified_curvature",
    "torsion_square",
    "ricci_and_scalars",
    "flag_and_sectional",
    "DefectVector",
    "IdentityReport",
    "classify",
    "identity_names",
    "verify_identity",
    "verify_all",
    "verify_conformal",
    "kahler_equivalence_witness",
    "SampleConfig",
    "sample_points",
]
