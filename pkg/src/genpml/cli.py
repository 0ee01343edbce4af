"""Command-line interface.

Subcommands:
  fit           fit one exponent to a CSV dataset, JSON report to --out/stdout
  cv            choose the exponent by k-fold cross-validation, then refit
  simulate      draw a synthetic dataset to CSV
  sweep         replication study over one DGP knob (or the exponent itself)
  phase         map (alpha, tau) cells to their rmse-minimizing exponent
  moment-check  population moments evaluated at average fitted parameters
  bias-check    Monte Carlo bias against the first-order approximation
  asymptotics   pseudo-true parameter, bias and sandwich variance at a kappa

Exit codes: 0 success; 1 usage (bad flags or values); 2 runtime failure
(unreadable or malformed files, non-convergence, numerical breakdown).

Grids are written start:stop:step inclusive ("-1:1:0.25") or as comma lists
("0,0.5,1"). Values starting with a dash need the equals form: --grid=-1:1:0.25.
"""

from __future__ import annotations

import argparse
import sys

from .asymptotics import (
    PopulationContext,
    asymptotic_variance,
    bias_approximation,
    efficient_kappa,
    pseudo_true,
)
from .core import EstimatorSpec
from .dgp import CENSOR_FAMILIES, CensorSpec, DgpConfig, generate
from .exceptions import DataValidationError, GenPMLError
from .experiments import (
    ReplicationPlan,
    run_bias_check,
    run_moment_check,
    run_phase_grid,
    run_sweep,
    write_bias_csv,
    write_moment_csv,
    write_phase_csv,
    write_sweep_csv,
)
from .io import (
    cv_to_dict,
    dump_json,
    fit_to_dict,
    load_csv,
    transform_design,
    write_dataset_csv,
)
from .selection import cross_validate
from .solver import bootstrap_se, fit

DEFAULT_KAPPA_SET = "-1,-0.5,0,0.5,1"


class UsageError(Exception):
    """Bad flag value discovered after argparse; maps to exit code 1."""


class _Parser(argparse.ArgumentParser):
    # usage problems exit 1; argparse's default of 2 is reserved for runtime
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _usage(builder, *args, **kwargs):
    """Build a config object, reporting validation failures as usage errors."""
    try:
        return builder(*args, **kwargs)
    except (DataValidationError, ValueError) as exc:
        raise UsageError(str(exc)) from exc


def parse_floats(text: str) -> tuple:
    return tuple(float(p.strip()) for p in text.split(","))


def parse_grid(text: str) -> list:
    """Parse "start:stop:step" (inclusive) or a comma list of values."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"grid must be start:stop:step, got {text!r}")
        start, stop, step = (float(p) for p in parts)
        if step <= 0:
            raise ValueError(f"grid step must be positive, got {step}")
        if stop < start:
            raise ValueError(f"grid stop {stop} is below start {start}")
        values = []
        i = 0
        while True:
            v = start + i * step
            if v > stop + 1e-9 * max(1.0, abs(stop)):
                break
            values.append(round(v, 10))
            i += 1
        return values
    return [float(p.strip()) for p in text.split(",")]


def _emit_json(doc: dict, out) -> None:
    if out is None:
        sys.stdout.write(dump_json(doc))
    else:
        dump_json(doc, out)


def _censor_from_args(args) -> CensorSpec:
    family = args.censor
    if family == "none":
        return CensorSpec(family="none")
    if family == "threshold":
        return CensorSpec(family="threshold", threshold_c=args.threshold_c)
    return CensorSpec(family=family, tau=args.tau, beta=args.beta)


def _add_censor_flags(p: argparse.ArgumentParser, default_family: str) -> None:
    p.add_argument("--censor", choices=CENSOR_FAMILIES, default=default_family,
                   help="censoring mechanism (default: %(default)s)")
    p.add_argument("--tau", type=float, default=1.0,
                   help="censoring scale (default: %(default)s)")
    p.add_argument("--beta", type=float, default=1.0,
                   help="censoring decay exponent (default: %(default)s)")
    p.add_argument("--threshold-c", type=float, default=1.0,
                   help="cutoff for the threshold mechanism (default: %(default)s)")


def _add_fit_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", required=True, help="dataset CSV path")
    p.add_argument("--outcome", default="y",
                   help="outcome column name (default: %(default)s)")
    p.add_argument("--c", type=float, default=0.0,
                   help="shift inside the moment weight (default: %(default)s)")
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--max-iter", type=int, default=200)
    p.add_argument("--add-intercept", action="store_true",
                   help="prepend an all-ones column")
    p.add_argument("--standardize", action="store_true",
                   help="scale columns to zero mean, unit sd before fitting")
    p.add_argument("--bootstrap", type=int, default=0, metavar="B",
                   help="replace sandwich std errors with B bootstrap resamples")


def _cmd_fit(args) -> int:
    spec = _usage(EstimatorSpec, kappa=args.kappa, c=args.c, tol=args.tol,
                  max_iter=args.max_iter)
    data = load_csv(args.input, args.outcome)
    record = None
    if args.add_intercept or args.standardize:
        data, record = transform_design(data, args.add_intercept,
                                        args.standardize)
    result = fit(data, spec)
    se = None
    if args.bootstrap:
        se = bootstrap_se(data, spec, args.bootstrap, seed=args.seed)
    doc = fit_to_dict(result, spec, n=data.n, seed=args.seed, std_errors=se,
                      transform=record)
    _emit_json(doc, args.out)
    if not result.converged:
        print(f"error: fit did not converge (moment norm "
              f"{result.moment_norm:.3e}); report written anyway",
              file=sys.stderr)
        return 2
    return 0


def _cmd_cv(args) -> int:
    grid = _usage(parse_grid, args.grid)
    if args.k < 2:
        raise UsageError(f"--k must be at least 2, got {args.k}")
    data = load_csv(args.input, args.outcome)
    record = None
    if args.add_intercept or args.standardize:
        data, record = transform_design(data, args.add_intercept,
                                        args.standardize)
    cv = cross_validate(data, grid, k=args.k, seed=args.seed, c=args.c,
                        tol=args.tol, max_iter=args.max_iter)
    spec = EstimatorSpec(kappa=cv.selected_kappa, c=args.c, tol=args.tol,
                         max_iter=args.max_iter)
    result = fit(data, spec)
    se = None
    if args.bootstrap:
        se = bootstrap_se(data, spec, args.bootstrap, seed=args.seed)
    doc = {
        "cv": cv_to_dict(cv),
        "fit": fit_to_dict(result, spec, n=data.n, seed=args.seed,
                           std_errors=se, transform=record),
    }
    _emit_json(doc, args.out)
    if not result.converged:
        print(f"error: refit at kappa={cv.selected_kappa} did not converge; "
              "report written anyway", file=sys.stderr)
        return 2
    return 0


def _cmd_simulate(args) -> int:
    censor = _usage(_censor_from_args, args)
    theta0 = _usage(parse_floats, args.theta0)
    cfg = _usage(DgpConfig, theta0=theta0, alpha=args.alpha, censor=censor,
                 n=args.n, seed=args.seed)
    sample = generate(cfg)
    write_dataset_csv(sample.dataset, args.out)
    return 0


def _cmd_sweep(args) -> int:
    censor = _usage(_censor_from_args, args)
    theta0 = _usage(parse_floats, args.theta0)
    values = _usage(parse_grid, args.values)
    if args.kappas is None:
        kappas = () if args.axis == "kappa" else parse_grid(DEFAULT_KAPPA_SET)
    else:
        kappas = _usage(parse_grid, args.kappas)
    plan = _usage(
        ReplicationPlan,
        dgp=DgpConfig(theta0=theta0, alpha=args.alpha, censor=censor,
                      n=args.n, seed=0),
        sweep_axis=args.axis, sweep_values=tuple(values),
        kappa_set=tuple(kappas), reps=args.reps, n=args.n,
        base_seed=args.seed,
    )
    result = run_sweep(plan, tol=args.tol, max_iter=args.max_iter)
    write_sweep_csv(result, args.out)
    return 0


def _cmd_phase(args) -> int:
    alphas = _usage(parse_grid, args.alphas)
    taus = _usage(parse_grid, args.taus)
    grid = _usage(parse_grid, args.grid)
    theta0 = _usage(parse_floats, args.theta0)
    result = run_phase_grid(alphas, taus, grid, reps=args.reps, n=args.n,
                            base_seed=args.seed, beta=args.beta,
                            family=args.family, theta0=theta0,
                            tol=args.tol, max_iter=args.max_iter)
    write_phase_csv(result, args.out)
    return 0


def _cmd_moment_check(args) -> int:
    kappas = _usage(parse_grid, args.kappas)
    betas = _usage(parse_grid, args.betas)
    theta0 = _usage(parse_floats, args.theta0)
    rows = run_moment_check(
        kappa_set=kappas, beta_values=betas, reps=args.reps, n=args.n,
        alpha=args.alpha, tau=args.tau, base_seed=args.seed,
        n_draws=args.draws, gamma_substitute=args.gamma_substitute,
        include_uncensored=args.include_uncensored, theta0=theta0,
        tol=args.tol, max_iter=args.max_iter,
    )
    write_moment_csv(rows, args.out)
    return 0


def _cmd_bias_check(args) -> int:
    kappas = _usage(parse_grid, args.kappas)
    betas = _usage(parse_grid, args.betas)
    theta0 = _usage(parse_floats, args.theta0)
    rows = run_bias_check(
        kappa_set=kappas, beta_values=betas, reps=args.reps, n=args.n,
        alpha=args.alpha, tau=args.tau, base_seed=args.seed,
        n_draws=args.draws, include_uncensored=args.include_uncensored,
        theta0=theta0, tol=args.tol, max_iter=args.max_iter,
    )
    write_bias_csv(rows, args.out)
    return 0


def _cmd_asymptotics(args) -> int:
    censor = _usage(_censor_from_args, args)
    theta0 = _usage(parse_floats, args.theta0)
    if not -1.0 <= args.kappa <= 1.0:
        raise UsageError(f"--kappa must lie in [-1, 1], got {args.kappa}")
    ctx = PopulationContext.standard(theta0=theta0, alpha=args.alpha,
                                     censor=censor, n_draws=args.draws,
                                     seed=args.seed)
    theta_tilde = pseudo_true(args.kappa, ctx)
    bias = bias_approximation(args.kappa, ctx)
    variance = asymptotic_variance(args.kappa, ctx)
    doc = {
        "kappa": float(args.kappa),
        "alpha": float(args.alpha),
        "censor": {
            "family": censor.family,
            "tau": float(censor.tau),
            "beta": float(censor.beta),
            "threshold_c": float(censor.threshold_c),
        },
        "theta0": [float(v) for v in theta0],
        "n_draws": int(args.draws),
        "seed": int(args.seed),
        "pseudo_true": [float(v) for v in theta_tilde],
        "bias_approximation": [float(v) for v in bias],
        "asymptotic_variance": [[float(v) for v in row] for row in variance],
        "efficient_kappa": (efficient_kappa(args.alpha)
                            if args.alpha >= 0 else None),
    }
    _emit_json(doc, args.out)
    return 0


def _build_parser() -> _Parser:
    parser = _Parser(prog="genpml",
                     description="Pseudo-maximum-likelihood estimation for "
                                 "sparse non-negative outcomes")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="fit one exponent to a CSV dataset")
    _add_fit_flags(p)
    p.add_argument("--kappa", type=float, default=0.0,
                   help="moment weight exponent in [-1, 1] (default: %(default)s)")
    p.add_argument("--seed", type=int, default=0,
                   help="seed for bootstrap resampling (default: %(default)s)")
    p.add_argument("--out", default=None, help="JSON path (default: stdout)")
    p.set_defaults(handler=_cmd_fit)

    p = sub.add_parser("cv", help="select the exponent by cross-validation")
    _add_fit_flags(p)
    p.add_argument("--grid", default="-1:1:0.05",
                   help="kappa grid (default: %(default)s)")
    p.add_argument("--k", type=int, default=5,
                   help="number of folds (default: %(default)s)")
    p.add_argument("--seed", type=int, default=0,
                   help="seed for the fold split (default: %(default)s)")
    p.add_argument("--out", default=None, help="JSON path (default: stdout)")
    p.set_defaults(handler=_cmd_cv)

    p = sub.add_parser("simulate", help="draw a synthetic dataset to CSV")
    p.add_argument("--n", type=int, required=True, help="sample size")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--alpha", type=float, default=1.0,
                   help="variance power (default: %(default)s)")
    p.add_argument("--theta0", default="1,1",
                   help="true coefficients, comma-separated (default: %(default)s)")
    _add_censor_flags(p, default_family="none")
    p.add_argument("--out", required=True, help="CSV path")
    p.set_defaults(handler=_cmd_simulate)

    p = sub.add_parser("sweep", help="replication study over one DGP knob")
    p.add_argument("--axis", choices=("alpha", "tau", "beta", "kappa"),
                   required=True)
    p.add_argument("--values", required=True,
                   help="cell values, comma list or start:stop:step")
    p.add_argument("--kappas", default=None,
                   help=f"fitted exponents (default: {DEFAULT_KAPPA_SET}; "
                        "must be omitted for --axis kappa)")
    p.add_argument("--reps", type=int, default=200)
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--theta0", default="1,1")
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--max-iter", type=int, default=200)
    _add_censor_flags(p, default_family="logistic_power")
    p.add_argument("--out", required=True, help="CSV path")
    p.set_defaults(handler=_cmd_sweep)

    p = sub.add_parser("phase",
                       help="rmse-minimizing exponent over an (alpha, tau) grid")
    p.add_argument("--alphas", required=True)
    p.add_argument("--taus", required=True)
    p.add_argument("--grid", default="-1:1:0.25",
                   help="kappa grid (default: %(default)s)")
    p.add_argument("--beta", type=float, default=2.0)
    p.add_argument("--family", choices=("logistic_power", "double_exponential"),
                   default="logistic_power")
    p.add_argument("--reps", type=int, default=200)
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--theta0", default="1,1")
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--max-iter", type=int, default=200)
    p.add_argument("--out", required=True, help="CSV path")
    p.set_defaults(handler=_cmd_phase)

    p = sub.add_parser("moment-check",
                       help="population moments at average fitted parameters")
    p.add_argument("--kappas", default="0,1,-1")
    p.add_argument("--betas", default="0.25,1,5,9")
    p.add_argument("--reps", type=int, default=1000)
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--tau", type=float, default=1.0)
    p.add_argument("--draws", type=int, default=100_000,
                   help="covariate draws for population averages")
    p.add_argument("--no-gamma-substitute", dest="gamma_substitute",
                   action="store_false",
                   help="fit kappa=-1 exactly instead of -0.95")
    p.add_argument("--no-uncensored", dest="include_uncensored",
                   action="store_false",
                   help="skip the censoring-free reference cell")
    p.add_argument("--theta0", default="1,1")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--max-iter", type=int, default=200)
    p.add_argument("--out", required=True, help="CSV path")
    p.set_defaults(handler=_cmd_moment_check)

    p = sub.add_parser("bias-check",
                       help="Monte Carlo bias vs the first-order approximation")
    p.add_argument("--kappas", default="0,1")
    p.add_argument("--betas", default="1,2,5")
    p.add_argument("--reps", type=int, default=500)
    p.add_argument("--n", type=int, default=3000)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--tau", type=float, default=1.0)
    p.add_argument("--draws", type=int, default=100_000)
    p.add_argument("--no-uncensored", dest="include_uncensored",
                   action="store_false")
    p.add_argument("--theta0", default="1,1")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--max-iter", type=int, default=200)
    p.add_argument("--out", required=True, help="CSV path")
    p.set_defaults(handler=_cmd_bias_check)

    p = sub.add_parser("asymptotics",
                       help="pseudo-true parameter, bias and variance at a kappa")
    p.add_argument("--kappa", type=float, required=True)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--theta0", default="1,1")
    p.add_argument("--draws", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    _add_censor_flags(p, default_family="logistic_power")
    p.add_argument("--out", default=None, help="JSON path (default: stdout)")
    p.set_defaults(handler=_cmd_asymptotics)

    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (GenPMLError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
