"""Separated center sets, spherical cones and cap volumes."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import betainc, beta as beta_fn, gamma

__all__ = [
    "ConeSpec",
    "SeparatedSetReport",
    "sphere_measure",
    "witness_direction",
    "collinear_centers",
    "min_cone_projection",
    "is_beta_delta_separated",
    "is_eta_separated",
    "cone_volume",
]


def _unit(v, what: str = "vector") -> np.ndarray:
    v = np.asarray(v, dtype=float).reshape(-1)
    if abs(np.linalg.norm(v) - 1.0) > 1e-12:
        raise ValueError(f"{what} must have unit norm, got norm {np.linalg.norm(v)!r}")
    return v


@dataclass(frozen=True, eq=False)
class ConeSpec:
    """Cap {b in S^{d-1} : b . axis >= eta}."""

    axis: np.ndarray
    eta: float

    def __post_init__(self):
        object.__setattr__(self, "axis", _unit(self.axis, "cone axis"))
        if not 0 < self.eta <= 1:
            raise ValueError(f"eta must lie in (0, 1], got {self.eta!r}")

    @property
    def dim(self) -> int:
        return len(self.axis)


@dataclass(frozen=True)
class SeparatedSetReport:
    n: int
    min_axis_margin: float
    min_cone_margin: float | None
    passes_beta_delta: bool
    passes_beta_delta_eta: bool | None

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "min_axis_margin": self.min_axis_margin,
            "min_cone_margin": self.min_cone_margin,
            "passes_beta_delta": self.passes_beta_delta,
            "passes_beta_delta_eta": self.passes_beta_delta_eta,
        }


def sphere_measure(d: int) -> float:
    """Surface measure of S^{d-1}; counting measure (2) for d = 1."""
    return float(2.0 * math.pi ** (d / 2) / gamma(d / 2))


def _perpendicular(beta: np.ndarray) -> np.ndarray:
    # canonical vector with the largest residual orthogonal to beta; lowest index on ties
    d = len(beta)
    residual_sq = 1.0 - beta**2
    k = int(np.argmax(residual_sq >= residual_sq.max() - 1e-15))
    u = np.zeros(d)
    u[k] = 1.0
    u -= beta[k] * beta
    return u / np.linalg.norm(u)


def witness_direction(beta, eta0: float) -> np.ndarray:
    """Unit vector b' with b' . beta = eta0, tilted towards a fixed perpendicular.

    In one dimension the only unit vector with a positive inner product is
    beta itself, so beta is returned whatever eta0 is.
    """
    beta = _unit(beta, "beta")
    if not 0 <= eta0 <= 1:
        raise ValueError(f"eta0 must lie in [0, 1], got {eta0!r}")
    if len(beta) == 1:
        return beta.copy()
    return eta0 * beta + math.sqrt((1.0 - eta0) * (1.0 + eta0)) * _perpendicular(beta)


def collinear_centers(beta, delta: float, eta0: float, n: int) -> np.ndarray:
    """x_i = (i - 1) delta b' for i = 1..n along the witness direction."""
    if not delta > 0:
        raise ValueError(f"delta must be positive, got {delta!r}")
    if int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    b = witness_direction(beta, eta0)
    return np.arange(int(n), dtype=float)[:, None] * delta * b[None, :]


def min_cone_projection(diff, cone: ConeSpec):
    """Smallest |b . diff| over unit b in the cone.

    With diff = p axis + w (w orthogonal to the axis) the attainable values
    form the interval spanned by eta p -+ sqrt(1 - eta^2) |w| and p, so the
    minimum of the absolute value is max(0, eta |p| - sqrt(1 - eta^2) |w|).
    ``diff`` may be a stack of vectors (last axis).
    """
    diff = np.asarray(diff, dtype=float)
    p = diff @ cone.axis
    if cone.dim == 1:
        out = np.abs(p)
    else:
        w = np.sqrt(np.maximum(np.sum(diff * diff, axis=-1) - p * p, 0.0))
        s = math.sqrt(max(0.0, 1.0 - cone.eta**2))
        out = np.maximum(0.0, cone.eta * np.abs(p) - s * w)
    return out if np.ndim(out) else float(out)


# projections carry a few ulps of rounding; a margin within this relative
# distance of delta counts as meeting it (zero margins never do)
_ROUNDING = 8 * np.finfo(float).eps


def _meets(margin: float, delta: float) -> bool:
    return margin >= delta * (1.0 - _ROUNDING)


def _pairs(n: int):
    return np.triu_indices(n, k=1)


def is_beta_delta_separated(centers, beta, delta: float) -> SeparatedSetReport:
    """Check |beta . (x_i - x_j)| >= delta for every pair, up to rounding."""
    beta = _unit(beta, "beta")
    if not delta > 0:
        raise ValueError(f"delta must be positive, got {delta!r}")
    centers = np.atleast_2d(np.asarray(centers, dtype=float))
    n = len(centers)
    proj = np.sort(centers @ beta)
    margin = float(np.min(np.diff(proj))) if n > 1 else math.inf
    return SeparatedSetReport(n, margin, None, _meets(margin, delta), None)


def is_eta_separated(centers, cone: ConeSpec, delta: float) -> SeparatedSetReport:
    """Check the separation along every direction of the cone."""
    axis_report = is_beta_delta_separated(centers, cone.axis, delta)
    centers = np.atleast_2d(np.asarray(centers, dtype=float))
    n = len(centers)
    if n > 1:
        i, j = _pairs(n)
        cone_margin = float(np.min(min_cone_projection(centers[i] - centers[j], cone)))
    else:
        cone_margin = math.inf
    return SeparatedSetReport(
        n=n,
        min_axis_margin=axis_report.min_axis_margin,
        min_cone_margin=cone_margin,
        passes_beta_delta=axis_report.passes_beta_delta,
        passes_beta_delta_eta=_meets(cone_margin, delta),
    )


def cone_volume(d: int, eta: float) -> float:
    """Surface measure of the cap {b in S^{d-1} : b . axis >= eta}."""
    if int(d) != d or d < 1:
        raise ValueError(f"dimension must be a positive integer, got {d!r}")
    if not 0 <= eta <= 1:
        raise ValueError(f"eta must lie in [0, 1], got {eta!r}")
    if d == 1:
        # only the axis itself when eta > 0; eta = 0 also excludes -axis
        return 1.0
    if eta == 1:
        return 0.0
    # int_eta^1 (1 - t^2)^{(d-3)/2} dt as a regularized incomplete beta;
    # the complementary form avoids 1 - eta^2 rounding to 1 for small eta
    a = (d - 1) / 2
    half = 0.5 * beta_fn(0.5, a)
    if eta * eta < 0.5:
        integral = half * (1.0 - betainc(0.5, a, eta * eta))
    else:
        integral = half * betainc(a, 0.5, (1.0 - eta) * (1.0 + eta))
    return float(sphere_measure(d - 1) * integral)
