"""Gap experiment: bounded RKHS norm, unbounded l1 norm, diverging RTV^2."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .bounds import ETA_MIN, DivergenceBoundInputs, certify_preconditions, rtv2_lower_bound
from .geometry import collinear_centers
from .kernel import (
    CoefficientSequence,
    KernelMachine,
    SpecError,
    harmonic_norm_bound,
    l1_norm,
    metric_from_matrix,
    rkhs_norm_sq,
)
from .radon import NORMALIZATIONS, rtv2, sphere_rule

__all__ = [
    "CSV_HEADER",
    "GapExperimentConfig",
    "GapExperimentRow",
    "PRESETS",
    "preset",
    "build_machine",
    "run_gap_experiment",
    "emit_csv",
]

CSV_HEADER = ("n", "l1_norm", "rkhs_norm_sq", "rkhs_upper_bound", "rtv2_value", "rtv2_error", "rtv2_lower_bound")


@dataclass
class GapExperimentConfig:
    d: int = 1
    eps: float = 0.5
    eta: float = ETA_MIN
    eta0: float = ETA_MIN
    n_list: list[int] = field(default_factory=lambda: [1, 2, 4, 8, 16, 32, 64])
    M: list | None = None
    sigma: float = 1.0
    inner_tol: float = 1e-8
    resolution: int = 16
    seed: int = 0
    normalization: str = "paper"
    coeffs: list[float] | None = None
    threads: int | None = None

    def __post_init__(self):
        self.n_list = [int(n) for n in self.n_list]
        if not self.n_list or any(n < 1 for n in self.n_list):
            raise SpecError("field 'n_list': expected positive integers")
        if any(b <= a for a, b in zip(self.n_list, self.n_list[1:])):
            raise SpecError("field 'n_list': must be strictly increasing")
        if self.d % 2 == 0:
            raise ValueError("paper formula requires odd dimension")
        if not 0 < self.eps <= 0.5:
            raise SpecError(f"field 'eps': must lie in (0, 1/2], got {self.eps!r}")
        if not ETA_MIN <= self.eta <= self.eta0 <= 1:
            raise SpecError("fields 'eta'/'eta0': need sqrt(3)/2 <= eta <= eta0 <= 1")
        if self.normalization not in NORMALIZATIONS:
            raise SpecError(f"field 'normalization': one of {NORMALIZATIONS}")
        if self.coeffs is not None and len(self.coeffs) < self.n_list[-1]:
            raise SpecError(f"field 'coeffs': need at least {self.n_list[-1]} values")

    @classmethod
    def from_dict(cls, doc: dict) -> GapExperimentConfig:
        if not isinstance(doc, dict):
            raise SpecError("config must be a JSON object")
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(doc) - known)
        if unknown:
            raise SpecError(f"unknown config field(s): {', '.join(unknown)}")
        try:
            return cls(**doc)
        except TypeError as exc:
            raise SpecError(str(exc)) from None

    @classmethod
    def from_json(cls, path) -> GapExperimentConfig:
        path = Path(path)
        try:
            doc = json.loads(path.read_text())
        except OSError as exc:
            raise SpecError(f"{path}: {exc.strerror}") from None
        except json.JSONDecodeError as exc:
            raise SpecError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
        return cls.from_dict(doc)

    def to_dict(self) -> dict:
        return asdict(self)


PRESETS = {
    "d1": {},
    "d3": {"d": 3, "n_list": [1, 2, 4, 8, 16], "resolution": 16},
}


def preset(name: str) -> GapExperimentConfig:
    try:
        return GapExperimentConfig(**PRESETS[name])
    except KeyError:
        raise SpecError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None


@dataclass(frozen=True)
class GapExperimentRow:
    n: int
    l1_norm: float
    rkhs_norm_sq: float
    rkhs_upper_bound: float
    rtv2_value: float
    rtv2_error: float
    rtv2_lower_bound: float


def build_machine(config: GapExperimentConfig):
    """Largest machine of the experiment plus its certification data."""
    cert = certify_preconditions(config.d, config.eps, config.eta)
    metric = metric_from_matrix(config.M, config.sigma, dim=config.d)
    beta = np.zeros(config.d)
    beta[0] = 1.0
    n_max = config.n_list[-1]
    centers = collinear_centers(beta, cert.delta, config.eta0, n_max)
    if config.coeffs is None:
        seq = CoefficientSequence.harmonic(n_max)
    else:
        seq = CoefficientSequence.explicit(config.coeffs[:n_max])
    return KernelMachine(metric, centers, seq.values), seq, cert


def run_gap_experiment(config: GapExperimentConfig) -> list[GapExperimentRow]:
    machine, seq, cert = build_machine(config)
    metric = machine.metric
    inputs = DivergenceBoundInputs(
        metric=metric, d=config.d, eta=config.eta, rho=cert.rho, delta=cert.delta, coeffs=seq, eps=config.eps
    )
    rule = sphere_rule(config.d, config.resolution, config.seed)
    # kernel distance between consecutive centers is at least delta sqrt(lambda_min(M_eff))
    kernel_sep = cert.delta * math.sqrt(metric.lambda_min)
    rows = []
    for n in config.n_list:
        f = machine.prefix(n)
        est = rtv2(f, rule, config.inner_tol, config.normalization, config.threads)
        bound = rtv2_lower_bound(inputs, n)
        if config.normalization == "unit-amplitude":
            bound *= (2 * math.pi) ** (config.d / 2)
        upper = harmonic_norm_bound(n, kernel_sep, 1.0) if seq.rule == "harmonic" else math.nan
        rows.append(
            GapExperimentRow(
                n=n,
                l1_norm=l1_norm(f.coeffs),
                rkhs_norm_sq=rkhs_norm_sq(f),
                rkhs_upper_bound=upper,
                rtv2_value=est.value,
                rtv2_error=est.quadrature_error,
                rtv2_lower_bound=bound,
            )
        )
    return rows


def emit_csv(rows, path) -> None:
    """Write rows with round-trip float formatting and a trailing newline."""
    path = Path(path)
    try:
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CSV_HEADER)
            for row in rows:
                writer.writerow([row.n] + [repr(float(getattr(row, k))) for k in CSV_HEADER[1:]])
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write {path}: {exc.strerror}") from None
