"""Command-line front end: ``radon-gap <subcommand> ...``.

Exit codes: 0 success, 1 domain error, 2 usage or input-format error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import bounds, experiments, geometry, hermite, kernel, radon
from .kernel import SpecError

EXIT_DOMAIN = 1
EXIT_USAGE = 2


def fmt(x) -> str:
    """Round-trip decimal; integral values without a trailing '.0'."""
    x = float(x)
    if x.is_integer() and abs(x) < 2**53:
        return str(int(x))
    return repr(x)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    return obj


def _emit(result: dict, fmt_name: str, plain_key: str | None = None) -> None:
    if fmt_name == "plain" and plain_key is not None:
        print(fmt(result[plain_key]))
    else:
        print(json.dumps(_jsonable(result)))


def _vector(text: str) -> np.ndarray:
    try:
        return np.array([float(t) for t in text.split(",")])
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _threads(args) -> int:
    return args.threads if args.threads is not None else radon.default_threads()


def cmd_hermite(args) -> None:
    if args.eval is not None:
        n, y = args.eval
        value = hermite.hermite_eval(int(n), y)
    elif args.roots is not None:
        roots = hermite.hermite_roots(args.roots)
        if args.format == "json":
            print(json.dumps([float(r) for r in roots]))
        else:
            print(", ".join(fmt(r) for r in roots))
        return
    elif args.cd is not None:
        value = hermite.cd_constant(args.cd).value
    elif args.rho is not None:
        d, eps = args.rho
        value = hermite.rho_constant(int(d), eps)
    elif args.delta_peak is not None:
        value = hermite.delta_peak(args.delta_peak)
    else:
        d, rho = args.delta_zero
        value = hermite.delta_zero(int(d), rho)
    print(json.dumps(value) if args.format == "json" else fmt(value))


def _harmonic_machine(args) -> kernel.KernelMachine:
    beta = np.zeros(args.dimension)
    beta[0] = 1.0
    centers = geometry.collinear_centers(beta, args.delta, 1.0, args.harmonic)
    metric = kernel.metric_from_matrix(None, args.sigma, dim=args.dimension)
    return kernel.KernelMachine(metric, centers, kernel.CoefficientSequence.harmonic(args.harmonic).values)


def _load_machine(args) -> kernel.KernelMachine:
    if getattr(args, "harmonic", None) is not None:
        return _harmonic_machine(args)
    if args.machine is None:
        raise SpecError("need a machine spec file or --harmonic N")
    return kernel.read_machine_spec(args.machine)


def cmd_rkhs(args) -> None:
    machine = _load_machine(args)
    K = kernel.gram_matrix(machine.metric, machine.centers)
    result = {
        "rkhs_norm_sq": kernel.rkhs_norm_sq(machine),
        "l1_norm": kernel.l1_norm(machine.coeffs),
        "gram_min_eig": float(np.linalg.eigvalsh(K)[0]),
    }
    _emit(result, args.format, "rkhs_norm_sq")


def cmd_rtv2(args) -> None:
    machine = _load_machine(args)
    rule = radon.sphere_rule(machine.dim, args.resolution, args.seed)
    est = radon.rtv2(machine, rule, args.tol, args.normalization, _threads(args))
    result = {"value": est.value, "error": est.quadrature_error, "n_nodes": est.n_nodes}
    _emit(result, args.format, "value")


def cmd_gap(args) -> None:
    if args.config is not None:
        config = experiments.GapExperimentConfig.from_json(args.config)
    else:
        config = experiments.preset(args.preset)
    if args.threads is not None:
        config.threads = args.threads
    rows = experiments.run_gap_experiment(config)
    experiments.emit_csv(rows, args.out)
    first, last = rows[0], rows[-1]
    print(
        f"wrote {len(rows)} rows to {args.out}: d={config.d} n={first.n}..{last.n} "
        f"l1 {fmt(first.l1_norm)} -> {fmt(last.l1_norm)}, "
        f"rkhs_norm_sq {fmt(last.rkhs_norm_sq)} <= {fmt(last.rkhs_upper_bound)}, "
        f"rtv2 {fmt(first.rtv2_value)} -> {fmt(last.rtv2_value)} (lower bound {fmt(last.rtv2_lower_bound)})"
    )


def cmd_check_set(args) -> None:
    machine = kernel.read_machine_spec(args.machine)
    d = machine.dim
    beta = args.beta if args.beta is not None else np.eye(d)[0]
    if beta.shape != (d,):
        raise SpecError(f"--beta: expected {d} components")
    beta = beta / np.linalg.norm(beta)
    if args.eta is None:
        report = geometry.is_beta_delta_separated(machine.centers, beta, args.delta)
    else:
        report = geometry.is_eta_separated(machine.centers, geometry.ConeSpec(beta, args.eta), args.delta)
    _emit(report.as_dict(), "json")


def cmd_bound(args) -> None:
    cert = bounds.certify_preconditions(args.d, args.eps, args.eta)
    metric = kernel.metric_from_matrix(None, args.sigma, dim=args.d)
    seq = kernel.CoefficientSequence.harmonic(args.n)
    inputs = bounds.DivergenceBoundInputs(metric, args.d, args.eta, cert.rho, cert.delta, seq, args.eps)
    result = {
        "rho": cert.rho,
        "delta_prime": cert.delta_prime,
        "delta_zero": cert.delta_zero,
        "delta": cert.delta,
        "l1_norm": kernel.l1_norm(seq.values),
        "lower_bound": bounds.rtv2_lower_bound(inputs, args.n),
    }
    _emit(result, args.format, "lower_bound")


def _add_machine_source(p: argparse.ArgumentParser) -> None:
    p.add_argument("machine", nargs="?", help="machine-spec JSON file")
    p.add_argument("--harmonic", type=int, metavar="N", help="harmonic machine on N collinear centers instead")
    p.add_argument("--dimension", type=int, default=1, help="dimension for --harmonic (default 1)")
    p.add_argument("--delta", type=float, default=1.0, help="center spacing for --harmonic (default 1)")
    p.add_argument("--sigma", type=float, default=1.0, help="kernel scale for --harmonic (default 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="radon-gap", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("hermite", help="Hermite polynomials and derived constants")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--eval", nargs=2, type=float, metavar=("N", "Y"), help="He_N(Y)")
    g.add_argument("--roots", type=int, metavar="N", help="roots of He_N")
    g.add_argument("--cd", type=int, metavar="D", help="C_D")
    g.add_argument("--rho", nargs=2, type=float, metavar=("D", "EPS"), help="mass on [-EPS, EPS]")
    g.add_argument("--delta-peak", type=int, metavar="D", help="largest root of He_{D+2}")
    g.add_argument("--delta-zero", nargs=2, type=float, metavar=("D", "RHO"), help="tail-sum threshold")
    p.add_argument("--format", choices=("plain", "json"), default="plain")
    p.set_defaults(func=cmd_hermite)

    p = sub.add_parser("rkhs", help="RKHS norm of a kernel machine")
    _add_machine_source(p)
    p.add_argument("--format", choices=("json", "plain"), default="json")
    p.set_defaults(func=cmd_rkhs)

    p = sub.add_parser("rtv2", help="RTV^2 of a kernel machine")
    _add_machine_source(p)
    p.add_argument("--tol", type=float, default=1e-8, help="inner-integral tolerance")
    p.add_argument("--resolution", type=int, default=16, help="sphere rule resolution")
    p.add_argument("--seed", type=int, default=0, help="Monte Carlo seed (d >= 5)")
    p.add_argument("--normalization", choices=radon.NORMALIZATIONS, default="paper")
    p.add_argument("--threads", type=int, help="worker threads (default $RADON_GAP_THREADS or 1)")
    p.add_argument("--format", choices=("json", "plain"), default="json")
    p.set_defaults(func=cmd_rtv2)

    p = sub.add_parser("gap", help="run the bounded-RKHS / diverging-RTV^2 experiment")
    p.add_argument("config", nargs="?", help="experiment config JSON (overrides --preset)")
    p.add_argument("--preset", choices=sorted(experiments.PRESETS), default="d1")
    p.add_argument("--out", required=True, help="CSV output path")
    p.add_argument("--threads", type=int, help="worker threads (default $RADON_GAP_THREADS or 1)")
    p.set_defaults(func=cmd_gap)

    p = sub.add_parser("check-set", help="separation report for the centers of a machine spec")
    p.add_argument("machine", help="machine-spec JSON file (centers are used)")
    p.add_argument("--beta", type=_vector, help="axis direction, comma-separated (default e_1)")
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--eta", type=float, help="also check every direction of the cone with this eta")
    p.set_defaults(func=cmd_check_set)

    p = sub.add_parser("bound", help="certified RTV^2 lower bound for the harmonic machine")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--eps", type=float, default=0.5)
    p.add_argument("--eta", type=float, default=bounds.ETA_MIN)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--format", choices=("json", "plain"), default="json")
    p.set_defaults(func=cmd_bound)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except SpecError as exc:
        print(f"radon-gap {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, OSError) as exc:
        print(f"radon-gap {args.command}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    return 0


if __name__ == "__main__":
    sys.exit(main())
