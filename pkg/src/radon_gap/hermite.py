"""Probabilist's Hermite polynomials and the constants built on them.

Everything here works with the weighted functions ``He_n(y) exp(-y^2/2)``.
Integrals of their absolute values are evaluated exactly (to rounding)
through the antiderivative identity

    d/dy [He_n(y) exp(-y^2/2)] = -He_{n+1}(y) exp(-y^2/2),

splitting the range at the roots of the integrand.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigvalsh_tridiagonal

__all__ = [
    "PiecewiseIntegralResult",
    "TailSum",
    "hermite_eval",
    "weighted_hermite",
    "hermite_roots",
    "hermite_coefficients",
    "majorant_constant",
    "abs_weighted_integral",
    "cd_constant",
    "cd_constant_general",
    "rho_constant",
    "delta_peak",
    "gaussian_poly_tail",
    "tail_sum",
    "delta_zero",
    "delta_zero_bracket",
]


@dataclass(frozen=True)
class PiecewiseIntegralResult:
    value: float
    breakpoints: list[float] = field(default_factory=list)
    method: str = "exact-antiderivative"

    def __float__(self) -> float:
        return self.value


@dataclass(frozen=True)
class TailSum:
    """Partial sum of a Hermite tail with a certified bound on what was cut."""

    value: float
    remainder_bound: float
    n_terms: int

    @property
    def upper(self) -> float:
        return self.value + self.remainder_bound


def _check_order(n: int) -> int:
    if int(n) != n or n < 0:
        raise ValueError(f"Hermite order must be a non-negative integer, got {n!r}")
    return int(n)


def _check_odd_dimension(d: int) -> int:
    if int(d) != d or d < 1:
        raise ValueError(f"dimension must be a positive integer, got {d!r}")
    if d % 2 == 0:
        raise ValueError("paper formula requires odd dimension")
    return int(d)


def hermite_eval(n, y):
    """He_n(y) by the three-term recurrence; ``y`` may be an array."""
    n = _check_order(n)
    y = np.asarray(y, dtype=float)
    prev = np.ones_like(y)
    if n == 0:
        return prev if prev.ndim else float(prev)
    cur = y.copy()
    for k in range(1, n):
        prev, cur = cur, y * cur - k * prev
    return cur if cur.ndim else float(cur)


def weighted_hermite(n, y):
    """He_n(y) * exp(-y^2/2), returning 0 where the product underflows."""
    y = np.asarray(y, dtype=float)
    with np.errstate(over="ignore", invalid="ignore"):
        out = np.asarray(hermite_eval(n, y)) * np.exp(-0.5 * y * y)
    out = np.where(np.isfinite(out), out, 0.0)
    return out if out.ndim else float(out)


def hermite_roots(n: int) -> np.ndarray:
    """Roots of He_n as eigenvalues of the symmetric Jacobi matrix."""
    n = _check_order(n)
    if n == 0:
        raise ValueError("constant polynomial has no roots")
    if n == 1:
        return np.zeros(1)
    off = np.sqrt(np.arange(1, n, dtype=float))
    r = eigvalsh_tridiagonal(np.zeros(n), off)
    r = np.sort(r)
    # exact antisymmetry; the middle root of an odd-degree polynomial is 0
    r = 0.5 * (r - r[::-1])
    if n % 2:
        r[n // 2] = 0.0
    return r


def hermite_coefficients(n: int) -> np.ndarray:
    """Monomial coefficients of He_n, lowest degree first."""
    n = _check_order(n)
    prev = np.zeros(n + 1)
    prev[0] = 1.0
    if n == 0:
        return prev
    cur = np.zeros(n + 1)
    cur[1] = 1.0
    for k in range(1, n):
        nxt = np.zeros(n + 1)
        nxt[1:] = cur[:-1]
        nxt -= k * prev
        prev, cur = cur, nxt
    return cur


def majorant_constant(n: int) -> float:
    """C with |He_n(y)| <= C (1 + |y|)^n for every real y.

    Uses the sum of absolute monomial coefficients, which is a valid
    constant because |y|^k <= (1 + |y|)^n for k <= n.
    """
    return float(np.sum(np.abs(hermite_coefficients(n))))


def _antiderivative(n: int, y):
    # F' = He_n e^{-y^2/2} for n >= 1; F(+-inf) = 0
    y = np.asarray(y, dtype=float)
    out = -np.asarray(weighted_hermite(n - 1, np.where(np.isinf(y), 0.0, y)))
    return np.where(np.isinf(y), 0.0, out)


def abs_weighted_integral(n: int, a: float = -math.inf, b: float = math.inf) -> PiecewiseIntegralResult:
    """Exact integral of |He_n(y) exp(-y^2/2)| over [a, b] for n >= 1."""
    n = _check_order(n)
    if n == 0:
        raise ValueError("no polynomial antiderivative for n = 0")
    if not a <= b:
        raise ValueError(f"reversed interval [{a}, {b}]")
    if a == b:
        return PiecewiseIntegralResult(value=0.0)
    roots = [float(r) for r in hermite_roots(n) if a < r < b]
    pts = np.array([a, *roots, b], dtype=float)
    F = _antiderivative(n, pts)
    value = math.fsum(np.abs(np.diff(F)))
    return PiecewiseIntegralResult(value=value, breakpoints=roots)


def cd_constant_general(n: int) -> PiecewiseIntegralResult:
    """Integral over the real line of |He_{n+1}(u) exp(-u^2/2)|, any n >= 0."""
    n = _check_order(n)
    return abs_weighted_integral(n + 1)


def cd_constant(d: int) -> PiecewiseIntegralResult:
    """C_d, the single-center inner-integral constant, for odd d."""
    d = _check_odd_dimension(d)
    return cd_constant_general(d)


def rho_constant(d: int, eps: float) -> float:
    """Mass of |He_{d+1}(y) exp(-y^2/2)| on [-eps, eps]."""
    d = _check_odd_dimension(d)
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps!r}")
    return abs_weighted_integral(d + 1, -eps, eps).value


def delta_peak(d: int) -> float:
    """Largest root of He_{d+2}.

    Beyond it He_{d+1}(y) exp(-y^2/2) is strictly decreasing on the right
    and, by parity, strictly increasing on the left.
    """
    d = _check_odd_dimension(d)
    return float(hermite_roots(d + 2)[-1])


def gaussian_poly_tail(m: int, r: float) -> float:
    """Upper bound on the integral of (1+y)^m exp(-y^2/2) over [r, inf).

    The log-derivative m/(1+y) - y is decreasing, so past r the integrand
    is dominated by an exponential with rate kappa = r - m/(1+r).
    """
    kappa = r - m / (1.0 + r)
    if kappa <= 0:
        return math.inf
    return (1.0 + r) ** m * math.exp(-0.5 * r * r) / kappa


def tail_sum(d: int, delta: float, truncation_tol: float = 1e-18, start: int = 2) -> TailSum:
    """Sum over j >= start of |He_{d+1}(j delta)| exp(-(j delta)^2 / 2).

    Terms are added until the polynomial-Gaussian majorant certifies the
    rest is below ``truncation_tol``.
    """
    d = _check_odd_dimension(d)
    if not delta > 0:
        raise ValueError(f"delta must be positive, got {delta!r}")
    m = d + 1
    C = majorant_constant(m)
    terms: list[float] = []
    j = start
    while True:
        y = j * delta
        terms.append(abs(float(weighted_hermite(m, y))))
        y_next = y + delta
        kappa = y_next - m / (1.0 + y_next)
        if kappa > 0:
            first = C * (1.0 + y_next) ** m * math.exp(-0.5 * y_next * y_next)
            remainder = first / -math.expm1(-kappa * delta)
            if remainder < truncation_tol:
                return TailSum(math.fsum(terms), remainder, len(terms))
        j += 1


def delta_zero_bracket(d: int, rho: float, bisection_steps: int = 40) -> tuple[float, float]:
    """Bracket (lo, hi) around the smallest delta whose certified tail is below rho/4.

    The search starts at max(delta_peak(d), 1), where the tail is monotone,
    doubles until the condition holds and then bisects.  ``hi`` always
    satisfies the condition; when the start already does, lo == hi.
    """
    d = _check_odd_dimension(d)
    if not rho > 0:
        raise ValueError(f"rho must be positive, got {rho!r}")

    def ok(delta: float) -> bool:
        return tail_sum(d, delta).upper < rho / 4

    start = max(delta_peak(d), 1.0)
    if ok(start):
        return start, start
    lo, hi = start, 2 * start
    while not ok(hi):
        lo, hi = hi, 2 * hi
    for _ in range(bisection_steps):
        mid = 0.5 * (lo + hi)
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return lo, hi


def delta_zero(d: int, rho: float) -> float:
    return delta_zero_bracket(d, rho)[1]
