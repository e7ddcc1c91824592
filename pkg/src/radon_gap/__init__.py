"""Gaussian-kernel machines: RKHS norms, Radon-domain total variation and the gap between them."""

from .bounds import certify_preconditions, rtv2_lower_bound
from .hermite import cd_constant, delta_peak, delta_zero, hermite_eval, hermite_roots, rho_constant, tail_sum
from .kernel import CoefficientSequence, KernelMachine, SpecError, metric_from_matrix, rkhs_norm_sq
from .radon import rtv2, rtv2_single_center, sphere_rule

__version__ = "0.1.0"

__all__ = [
    "CoefficientSequence",
    "KernelMachine",
    "SpecError",
    "cd_constant",
    "certify_preconditions",
    "delta_peak",
    "delta_zero",
    "hermite_eval",
    "hermite_roots",
    "metric_from_matrix",
    "rho_constant",
    "rkhs_norm_sq",
    "rtv2",
    "rtv2_lower_bound",
    "rtv2_single_center",
    "sphere_rule",
    "tail_sum",
]
