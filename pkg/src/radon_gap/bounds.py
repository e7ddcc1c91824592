"""Certified lower bound on RTV^2 for separated harmonic-type machines."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

from .geometry import cone_volume
from .hermite import delta_peak, delta_zero, rho_constant, tail_sum
from .kernel import CoefficientSequence, MahalanobisMetric, l1_norm

__all__ = [
    "ETA_MIN",
    "Certification",
    "DivergenceBoundInputs",
    "InnerLowerBound",
    "certify_preconditions",
    "theta_bound",
    "inner_lower_bound",
    "rtv2_lower_bound",
    "check_preconditions",
]

log = logging.getLogger(__name__)

ETA_MIN = math.sqrt(3) / 2


@dataclass(frozen=True)
class Certification:
    rho: float
    delta_prime: float
    delta_zero: float
    delta: float
    eps: float


@dataclass(frozen=True, eq=False)
class DivergenceBoundInputs:
    metric: MahalanobisMetric
    d: int
    eta: float
    rho: float
    delta: float
    coeffs: CoefficientSequence
    eps: float | None = None


@dataclass(frozen=True)
class InnerLowerBound:
    value: float
    certified: bool
    theta_factor: float


def certify_preconditions(d: int, eps: float, eta: float) -> Certification:
    """rho, delta', delta_0 and the separation delta = 3 max(eps, delta_0, delta')."""
    if d % 2 == 0:
        raise ValueError("paper formula requires odd dimension")
    if not 0 < eps <= 0.5:
        raise ValueError(f"eps must lie in (0, 1/2], got {eps!r}")
    if not ETA_MIN <= eta <= 1:
        raise ValueError(f"eta must lie in [sqrt(3)/2, 1], got {eta!r}")
    rho = rho_constant(d, eps)
    dp = delta_peak(d)
    d0 = delta_zero(d, rho)
    return Certification(rho=rho, delta_prime=dp, delta_zero=d0, delta=3 * max(eps, d0, dp), eps=eps)


def _theta_factor(d: int, delta: float) -> float:
    # tail from j = 1: every pair with |i - j| >= 1 contributes
    return 2.0 * tail_sum(d, delta, start=1).upper


def theta_bound(coeffs, d: int, delta: float) -> float:
    """Bound on the total cross-talk 2 (sum_j |He_{d+1}(j delta)| e^{-(j delta)^2/2}) ||a||_1."""
    return _theta_factor(d, delta) * l1_norm(coeffs)


def inner_lower_bound(coeffs, d: int, rho: float, delta: float) -> InnerLowerBound:
    """(rho - theta) ||a||_1, certified when the j >= 1 tail is below rho/4."""
    factor = _theta_factor(d, delta)
    l1 = l1_norm(coeffs)
    certified = factor / 2 < rho / 4
    value = (rho - factor) * l1
    if certified:
        assert value >= 0.5 * rho * l1
    return InnerLowerBound(value=value, certified=certified, theta_factor=factor)


def check_preconditions(inputs: DivergenceBoundInputs) -> list[str]:
    """Names of the violated hypotheses; empty when the bound is certified."""
    problems = []
    d = inputs.d
    if d % 2 == 0:
        return ["d must be odd"]
    if d != inputs.metric.dim:
        problems.append(f"metric dimension {inputs.metric.dim} != d = {d}")
    if not ETA_MIN <= inputs.eta <= 1:
        problems.append("eta >= sqrt(3)/2")
    if not inputs.rho > 0:
        return problems + ["rho > 0"]
    if inputs.eps is not None:
        if not 0 < inputs.eps <= 0.5:
            problems.append("eps in (0, 1/2]")
        elif inputs.rho > rho_constant(d, inputs.eps) * (1 + 1e-12):
            problems.append("rho <= rho(d, eps)")
    floor = 3 * max(inputs.eps or 0.0, delta_zero(d, inputs.rho), delta_peak(d))
    if inputs.delta < floor * (1 - 1e-12):
        problems.append(f"delta >= 3 max(eps, delta_0, delta') = {floor!r}")
    if not _theta_factor(d, inputs.delta) / 2 < inputs.rho / 4:
        problems.append("tail from j = 1 below rho/4")
    return problems


def rtv2_lower_bound(inputs: DivergenceBoundInputs, n: int) -> float:
    """Lower bound on RTV^2 of the n-term partial machine, default normalization.

    (1 / (|det L| sqrt(2 pi))) lambda_min^{(d+1)/2} vol(cap) (rho / 2) sum_{i<=n} |a_i|
    """
    if int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    if n > len(inputs.coeffs):
        raise ValueError(f"only {len(inputs.coeffs)} coefficients, asked for n = {n}")
    problems = check_preconditions(inputs)
    if problems:
        raise ValueError("preconditions violated: " + "; ".join(problems))
    metric = inputs.metric
    if metric.lambda_min < 1:
        log.warning(
            "lambda_min(M_eff) = %.3g < 1: projected separations shrink by up to sqrt(lambda_min)",
            metric.lambda_min,
        )
    prefactor = (
        metric.lambda_min ** ((inputs.d + 1) / 2)
        * cone_volume(inputs.d, inputs.eta)
        / (abs(metric.det_L) * math.sqrt(2 * math.pi))
    )
    return prefactor * 0.5 * inputs.rho * l1_norm(inputs.coeffs.prefix(n))
