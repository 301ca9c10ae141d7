"""Numerical real and complex Finsler geometry engine."""

__version__ = "0.1.0"

from .jets import CJet, Jet, JetSpace, lift, wirtinger
from .geometry import (ComplexTangent, MetricDef, RealTangent, SamplePlan,
                       apply_J, realify_metric, to_complex, to_real)
from .metrics import build_map, build_profile, check_metric, instantiate
from .cartan import CartanData, cartan, flag_curvature, radial_flag_bounds
from .chern import (ChernFinslerData, chern_finsler,
                    holomorphic_sectional_curvature, scale_invariance_check)
from .kahler import KahlerReport, classify, un_invariant_kahler_check, \
    weakly_kahler_pde_residual
from .geodesic import (GeodesicPath, PoleDistance, distance, exp_map,
                       hessian_rho, index_form, integrate_geodesic,
                       jacobi_field, legendre_gradient)
from .levi import LeviField, LeviSample, gradient_identity, \
    levi_identity_residual, levi_rho2
from .schwarz import (SchwarzCertificate, certify_schwarz, curvature_bounds,
                      gaussian_curvature, pullback, pullback_density)
from .report import VerificationReport

__all__ = [
    "CJet", "Jet", "JetSpace", "lift", "wirtinger",
    "ComplexTangent", "MetricDef", "RealTangent", "SamplePlan", "apply_J",
    "realify_metric", "to_complex", "to_real",
    "build_map", "build_profile", "check_metric", "instantiate",
    "CartanData", "cartan", "flag_curvature", "radial_flag_bounds",
    "ChernFinslerData", "chern_finsler", "holomorphic_sectional_curvature",
    "scale_invariance_check",
    "KahlerReport", "classify", "un_invariant_kahler_check",
    "weakly_kahler_pde_residual",
    "GeodesicPath", "PoleDistance", "distance", "exp_map", "hessian_rho",
    "index_form", "integrate_geodesic", "jacobi_field", "legendre_gradient",
    "LeviField", "LeviSample", "gradient_identity", "levi_identity_residual",
    "levi_rho2",
    "SchwarzCertificate", "certify_schwarz", "curvature_bounds",
    "gaussian_curvature", "pullback", "pullback_density",
    "VerificationReport",
]
