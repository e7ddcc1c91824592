"""Mahalanobis-Gaussian kernels, Gram matrices and RKHS norms."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.spatial.distance import cdist

__all__ = [
    "SpecError",
    "MahalanobisMetric",
    "KernelMachine",
    "CoefficientSequence",
    "metric_from_matrix",
    "kernel_eval",
    "gram_matrix",
    "rkhs_norm_sq",
    "rkhs_norm_sq_prefix",
    "l1_norm",
    "harmonic_number",
    "harmonic_norm_bound",
    "machine_from_spec",
    "read_machine_spec",
]


class SpecError(ValueError):
    """A machine or config document that does not have the required shape."""


@dataclass(frozen=True, eq=False)
class MahalanobisMetric:
    """SPD metric with the kernel scale folded in.

    ``M_eff = M / sigma**2`` and ``L`` is its upper Cholesky factor, so
    ``M_eff = L.T @ L``.  ``det_L``, ``lambda_min`` and ``lambda_max``
    describe ``M_eff`` (they coincide with ``M``'s when sigma is 1).
    """

    dim: int
    M: np.ndarray
    sigma: float
    M_eff: np.ndarray
    L: np.ndarray
    det_L: float
    lambda_min: float
    lambda_max: float

    def is_isotropic(self, rtol: float = 1e-12) -> bool:
        return self.lambda_max - self.lambda_min <= rtol * self.lambda_max


def metric_from_matrix(M=None, sigma: float = 1.0, dim: int | None = None) -> MahalanobisMetric:
    if M is None:
        if dim is None:
            raise ValueError("need either M or dim")
        M = np.eye(dim)
    M = np.array(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"M must be square, got shape {M.shape}")
    if not (sigma > 0 and math.isfinite(sigma)):
        raise ValueError(f"sigma must be positive, got {sigma!r}")
    scale = max(1.0, float(np.max(np.abs(M))))
    if np.max(np.abs(M - M.T)) > 1e-12 * scale:
        raise ValueError("M is asymmetric")
    M = 0.5 * (M + M.T)
    M_eff = M / sigma**2
    eig = np.linalg.eigvalsh(M_eff)
    if eig[0] <= 0:
        raise ValueError("M is not positive definite")
    try:
        L = np.linalg.cholesky(M_eff).T
    except np.linalg.LinAlgError:
        raise ValueError("M is not positive definite") from None
    return MahalanobisMetric(
        dim=M.shape[0],
        M=M,
        sigma=float(sigma),
        M_eff=M_eff,
        L=L,
        det_L=float(np.prod(np.diag(L))),
        lambda_min=float(eig[0]),
        lambda_max=float(eig[-1]),
    )


@dataclass(frozen=True, eq=False)
class KernelMachine:
    """f = sum_i coeffs[i] * k_M(centers[i], .)"""

    metric: MahalanobisMetric
    centers: np.ndarray
    coeffs: np.ndarray

    def __post_init__(self):
        centers = np.atleast_2d(np.asarray(self.centers, dtype=float))
        coeffs = np.atleast_1d(np.asarray(self.coeffs, dtype=float))
        if coeffs.ndim != 1 or len(coeffs) < 1:
            raise ValueError("need at least one coefficient")
        if centers.shape != (len(coeffs), self.metric.dim):
            raise ValueError(
                f"centers shape {centers.shape} does not match "
                f"{len(coeffs)} coefficients in dimension {self.metric.dim}"
            )
        object.__setattr__(self, "centers", centers)
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def dim(self) -> int:
        return self.metric.dim

    def __len__(self) -> int:
        return len(self.coeffs)

    def prefix(self, n: int) -> KernelMachine:
        """The partial machine built from the first n terms."""
        if not 1 <= n <= len(self):
            raise ValueError(f"prefix length {n} out of range 1..{len(self)}")
        return KernelMachine(self.metric, self.centers[:n], self.coeffs[:n])

    def scaled(self, c: float) -> KernelMachine:
        return KernelMachine(self.metric, self.centers, c * self.coeffs)

    def __call__(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        K = np.exp(-0.5 * cdist(x @ self.metric.L.T, self.centers @ self.metric.L.T, "sqeuclidean"))
        return K @ self.coeffs


class CoefficientSequence:
    """Coefficient rule for a sequence of partial machines."""

    def __init__(self, values, rule: str = "explicit"):
        self.values = np.asarray(values, dtype=float)
        self.rule = rule

    @classmethod
    def harmonic(cls, n: int) -> CoefficientSequence:
        if n < 1:
            raise ValueError("harmonic sequence needs n >= 1")
        return cls(1.0 / np.arange(1, n + 1), rule="harmonic")

    @classmethod
    def explicit(cls, values) -> CoefficientSequence:
        return cls(values, rule="explicit")

    def __len__(self) -> int:
        return len(self.values)

    def prefix(self, n: int) -> np.ndarray:
        return self.values[:n]

    def __repr__(self) -> str:
        return f"CoefficientSequence(rule={self.rule!r}, n={len(self)})"


def _vec(x, dim: int) -> np.ndarray:
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape != (dim,):
        raise ValueError(f"expected a vector of dimension {dim}, got shape {x.shape}")
    return x


def kernel_eval(metric: MahalanobisMetric, x, y) -> float:
    diff = metric.L @ (_vec(x, metric.dim) - _vec(y, metric.dim))
    return math.exp(-0.5 * float(diff @ diff))


def gram_matrix(metric: MahalanobisMetric, centers) -> np.ndarray:
    centers = np.atleast_2d(np.asarray(centers, dtype=float))
    if centers.shape[1] != metric.dim:
        raise ValueError(f"centers have dimension {centers.shape[1]}, metric has {metric.dim}")
    Z = centers @ metric.L.T
    return np.exp(-0.5 * cdist(Z, Z, "sqeuclidean"))


def rkhs_norm_sq(machine: KernelMachine) -> float:
    a = machine.coeffs
    return float(a @ gram_matrix(machine.metric, machine.centers) @ a)


def rkhs_norm_sq_prefix(machine: KernelMachine) -> np.ndarray:
    """Squared RKHS norms of every partial machine f_1, ..., f_n."""
    a = machine.coeffs
    W = gram_matrix(machine.metric, machine.centers) * np.outer(a, a)
    # row i contributes its diagonal plus twice its strictly-lower part
    increments = np.diag(W) + 2.0 * np.tril(W, -1).sum(axis=1)
    return np.cumsum(increments)


def l1_norm(coeffs) -> float:
    if isinstance(coeffs, (CoefficientSequence, KernelMachine)):
        coeffs = coeffs.values if isinstance(coeffs, CoefficientSequence) else coeffs.coeffs
    return math.fsum(abs(float(c)) for c in np.ravel(coeffs))


def harmonic_number(n: int) -> float:
    return math.fsum(1.0 / k for k in range(1, n + 1))


def harmonic_norm_bound(n: int | None, delta: float, sigma: float = 1.0) -> float:
    """Upper bound on the squared RKHS norm of the harmonic machine.

    Valid for any centers with kernel distance ||x_i - x_j|| >= |i-j| delta.
    Diagonal part: sum_{i<=n} 1/i^2 (pi^2/6 when ``n`` is None).  Off-diagonal
    part: 2 sum_k exp(-(k delta)^2 / (2 sigma^2)) H_k / k over all k >= 1,
    including a certified bound on the truncated tail.
    """
    if not delta > 0:
        raise ValueError(f"delta must be positive, got {delta!r}")
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma!r}")
    if n is None:
        diag = math.pi**2 / 6
    else:
        diag = math.fsum(1.0 / (i * i) for i in range(1, n + 1))

    c = delta * delta / (2.0 * sigma * sigma)
    terms = []
    H = 0.0
    k = 1
    while True:
        H += 1.0 / k
        t = math.exp(-c * k * k) * H / k
        terms.append(t)
        acc = math.fsum(terms)
        nxt = math.exp(-c * (k + 1) ** 2)
        if nxt * (H + 1.0 / (k + 1)) / (k + 1) < 1e-16 * acc or nxt == 0.0:
            # beyond k: H_j / j <= 1 and ratios of Gaussian factors <= exp(-c(2k+3))
            ratio = math.exp(-c * (2 * k + 3))
            remainder = nxt / (1.0 - ratio) if ratio < 1 else math.inf
            return diag + 2.0 * (acc + remainder)
        k += 1


def machine_from_spec(doc: dict) -> KernelMachine:
    """Build a machine from the machine-spec mapping.

    Fields: ``dimension``, ``sigma``, ``M`` (optional, nested or flat
    row-major, default identity), ``centers``, ``alphas``.
    """
    if not isinstance(doc, dict):
        raise SpecError("machine spec must be a JSON object")
    for key in ("dimension", "centers", "alphas"):
        if key not in doc:
            raise SpecError(f"field '{key}': missing")
    d = doc["dimension"]
    if not isinstance(d, int) or isinstance(d, bool) or d < 1:
        raise SpecError(f"field 'dimension': expected a positive integer, got {d!r}")
    sigma = doc.get("sigma", 1.0)
    if not isinstance(sigma, (int, float)) or isinstance(sigma, bool):
        raise SpecError(f"field 'sigma': expected a number, got {sigma!r}")

    M = doc.get("M")
    if M is not None:
        try:
            M = np.array(M, dtype=float)
        except (TypeError, ValueError):
            raise SpecError("field 'M': not a numeric array") from None
        if M.shape == (d * d,):
            M = M.reshape(d, d)
        if M.shape != (d, d):
            raise SpecError(f"field 'M': expected {d}x{d} (or {d * d} row-major values), got shape {M.shape}")

    centers = doc["centers"]
    if not isinstance(centers, list) or not centers:
        raise SpecError("field 'centers': expected a non-empty array of arrays")
    for i, c in enumerate(centers):
        if not isinstance(c, list) or len(c) != d:
            raise SpecError(f"field 'centers[{i}]': expected {d} numbers")
    alphas = doc["alphas"]
    if not isinstance(alphas, list) or len(alphas) != len(centers):
        raise SpecError(f"field 'alphas': expected {len(centers)} numbers to match 'centers'")
    try:
        C = np.array(centers, dtype=float)
        a = np.array(alphas, dtype=float)
    except (TypeError, ValueError):
        raise SpecError("fields 'centers'/'alphas': non-numeric entries") from None

    metric = metric_from_matrix(M, float(sigma), dim=d)
    return KernelMachine(metric, C, a)


def read_machine_spec(path) -> KernelMachine:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise SpecError(f"{path}: {exc.strerror}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return machine_from_spec(doc)
