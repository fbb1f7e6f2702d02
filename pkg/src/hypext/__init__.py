"""Hyperbolic extensions of metrics with a center and their spherical cut limits."""
from .kernels import BACKEND
from .hyptrig import DomainError, lambda_of, lambda_prime_of, r_of, t_of, beta_of
from .spheres import SamplingSpec, SphereForm, c2_distance, make_atlas, round_metric
from .radial import make_family
from .extension import extension_cut, extension_normalized_cut, join_to_sphereform, pullback_oracle_cut
from .limits import ConvergenceReport, beta1_threshold, boundary_checks, cauchy_scan, convergence_scan

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "ConvergenceReport",
    "DomainError",
    "SamplingSpec",
    "SphereForm",
    "beta1_threshold",
    "beta_of",
    "boundary_checks",
    "c2_distance",
    "cauchy_scan",
    "convergence_scan",
    "extension_cut",
    "extension_normalized_cut",
    "join_to_sphereform",
    "lambda_of",
    "lambda_prime_of",
    "make_atlas",
    "make_family",
    "pullback_oracle_cut",
    "r_of",
    "round_metric",
    "t_of",
]
