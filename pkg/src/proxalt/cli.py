"""Command-line front end.

Subcommands: ``run`` (and its alias ``compare``), ``verify``, ``klsim``,
``gammamax``.  Exit codes: 0 success, 1 usage error, 2 runtime error,
3 verification failure.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import diagnostics, klrates
from .experiments import (LassoSpec, gen_lasso, load_ionosphere,
                          quadratic_problem, rng_from_seed, write_trace)
from .objective import CompositeProblem, HalfNorm, L1, Logistic
from .schedules import parse_schedule
from .solvers import SolverConfig, gamma_max_search, run

_METHOD_ALIASES = {
    "vanilla": "vanilla",
    "pg": "vanilla",
    "inertial": "inertial",
    "fista": "inertial",
    "altinertia": "alt_inertia",
    "alt_inertia": "alt_inertia",
    "altextra": "alt_extrapolation",
    "alt_extrapolation": "alt_extrapolation",
    "mfista": "mfista",
}

USAGE_ERROR, RUNTIME_ERROR, VERIFY_FAILURE = 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage problems exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        self.exit(USAGE_ERROR, f"{self.prog}: error: {message}\n")


def _add_problem_flags(sub):
    group = sub.add_mutually_exclusive_group()
    group.add_argument("--lasso", metavar="MxN",
                       help="synthetic l1 least squares, e.g. 130x80")
    group.add_argument("--ionosphere", metavar="PATH",
                       help="ionosphere-format CSV (searched under $PROXALT_DATA too)")
    group.add_argument("--quadratic", action="store_true",
                       help="builtin identity quadratic")
    sub.add_argument("--dim", type=int, default=20,
                     help="dimension of the builtin quadratic (default 20)")
    sub.add_argument("--lambda1", default=None,
                     help="l1 weight, a float or 'auto' (lasso default: auto; "
                          "ionosphere default: 0.1)")
    sub.add_argument("--lambda-half", type=float, default=None,
                     help="use the sqrt penalty with this weight instead of l1")
    sub.add_argument("--add-intercept", action="store_true",
                     help="append an all-ones column to the ionosphere features")
    sub.add_argument("--seed", type=int, default=0)


def _resolve_dataset_path(path_text: str) -> Path:
    path = Path(path_text)
    if path.exists():
        return path
    data_dir = os.environ.get("PROXALT_DATA")
    if data_dir and not path.is_absolute():
        candidate = Path(data_dir) / path
        if candidate.exists():
            return candidate
    return path  # let the loader raise with the original name


def _build_problem(args) -> CompositeProblem:
    if args.quadratic:
        return quadratic_problem(args.dim)
    if args.lasso:
        try:
            m_text, _, n_text = args.lasso.lower().partition("x")
            m, n = int(m_text), int(n_text)
        except ValueError:
            raise ValueError(f"--lasso expects MxN, got {args.lasso!r}") from None
        lam1 = args.lambda1 if args.lambda1 is not None else "auto"
        if lam1 != "auto":
            lam1 = float(lam1)
        if args.lambda_half is not None:
            # same data, sqrt penalty; skip the support-matching solve
            spec = LassoSpec(m=m, n=n, lambda1=1.0, seed=args.seed)
            problem, _ = gen_lasso(spec)
            return CompositeProblem(problem.f, HalfNorm(args.lambda_half))
        problem, _ = gen_lasso(LassoSpec(m=m, n=n, lambda1=lam1, seed=args.seed))
        return problem
    if args.ionosphere:
        record = load_ionosphere(_resolve_dataset_path(args.ionosphere),
                                 add_intercept=args.add_intercept)
        if args.lambda_half is not None:
            reg = HalfNorm(args.lambda_half)
        else:
            lam1 = float(args.lambda1) if args.lambda1 is not None else 0.1
            reg = L1(lam1)
        return CompositeProblem(Logistic(record.A, record.y), reg)
    raise ValueError("pick a problem: --lasso MxN, --ionosphere PATH, or --quadratic")


def _resolve_gamma(text: str, problem: CompositeProblem, probe_iters: int) -> float:
    text = text.strip()
    if text in ("1/L", "1/Lu", "1/lu", "1/l"):
        return 1.0 / problem.lipschitz
    if text.lower().startswith("gmax/"):
        nu = float(text[5:])
        return gamma_max_search(problem, probe_iters) / nu
    gamma = float(text)
    if gamma <= 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    return gamma


def _parse_methods(text: str) -> list[str]:
    methods = []
    for name in text.split(","):
        name = name.strip().lower()
        if name not in _METHOD_ALIASES:
            raise ValueError(f"unknown method {name!r}; known: "
                             + ", ".join(sorted(set(_METHOD_ALIASES))))
        methods.append(_METHOD_ALIASES[name])
    return methods


def _toml_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, float)):
        return repr(value)
    return '"' + str(value).replace("\\", "\\\\").replace('"', '\\"') + '"'


def _write_config_echo(path: Path, mapping: dict) -> None:
    with open(path, "w") as fh:
        for key, value in mapping.items():
            if value is None:
                continue
            fh.write(f"{key} = {_toml_value(value)}\n")


def _apply_config_file(parser: argparse.ArgumentParser, argv: list[str]) -> None:
    if "--config" not in argv:
        return
    cfg_path = argv[argv.index("--config") + 1]
    with open(cfg_path, "rb") as fh:
        data = tomllib.load(fh)
    defaults = {k.replace("-", "_"): v for k, v in data.items()}
    # defaults must land on the subparsers: they re-apply their own when
    # parsing, which would override anything set on the top-level parser
    for sub in parser._proxalt_subparsers.values():
        sub.set_defaults(**defaults)


def cmd_run(args) -> int:
    problem = _build_problem(args)
    gamma = _resolve_gamma(args.gamma, problem, args.probe_iters)
    schedule = parse_schedule(args.schedule, raw_ratio=args.raw_section5_alpha)
    methods = _parse_methods(args.methods)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    # one shared starting point for every method
    x0 = rng_from_seed(args.seed).standard_normal(problem.dim)

    traces = {}
    for method in methods:
        cfg = SolverConfig(gamma=gamma, method=method, schedule=schedule,
                           max_prox_evals=args.budget, stop_residual=args.tol,
                           seed=args.seed)
        traces[method] = run(problem, cfg, x0)
        write_trace(traces[method], out_dir / f"trace_{method}.csv")

    _, f_star = problem.reference_optimum()
    with open(out_dir / "summary.csv", "w") as fh:
        fh.write("method,decade,prox_evals\n")
        for method, trace in traces.items():
            errors = trace.functional_errors(f_star)
            evals = trace.prox_evals
            for decade in range(0, 13):
                hit = np.nonzero(errors <= 10.0 ** (-decade))[0]
                first = str(int(evals[hit[0]])) if hit.size else ""
                fh.write(f"{method},1e-{decade:02d},{first}\n")
            fh.write(f"{method},total,{int(evals[-1])}\n")

    _write_config_echo(out_dir / "config.echo.toml", {
        "problem": ("quadratic" if args.quadratic else
                    f"lasso:{args.lasso}" if args.lasso else
                    f"ionosphere:{args.ionosphere}"),
        "lambda1": args.lambda1,
        "lambda_half": args.lambda_half,
        "methods": args.methods,
        "schedule": args.schedule,
        "gamma": args.gamma,
        "gamma_value": gamma,
        "budget": args.budget,
        "tol": args.tol,
        "seed": args.seed,
        "raw_section5_alpha": args.raw_section5_alpha,
        "out": str(out_dir),
    })
    print(f"wrote {len(traces)} trace file(s) and summary.csv to {out_dir}")
    return 0


def cmd_verify(args) -> int:
    families = diagnostics.suite_problem_families()
    if args.families != "all":
        wanted = [f.strip() for f in args.families.split(",")]
        unknown = set(wanted) - set(families)
        if unknown:
            raise ValueError(f"unknown families {sorted(unknown)}; "
                             f"known: {sorted(families)}")
        families = {k: families[k] for k in wanted}
    tol_scale = -abs(args.corrupt_tolerance) if args.corrupt_tolerance else 1e-9
    reports = diagnostics.default_suite(
        seeds=range(args.seeds), n_samples=args.samples,
        families=families, tol_scale=tol_scale,
    )
    lines = [diagnostics.report_csv_header()]
    lines += [diagnostics.report_csv_row(r) for r in reports]
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    violations = sum(r.violations for r in reports)
    gated = sum(not r.hypothesis_met for r in reports)
    print(f"{len(reports)} checks, {violations} violation(s), {gated} gated",
          file=sys.stderr)
    return VERIFY_FAILURE if violations else 0


def cmd_klsim(args) -> int:
    kind = {"a": "constant", "b": "power", "c": "harmonic"}[args.regime]
    seq_params = klrates.CoefficientSequence(kind, args.coef, args.d)
    rec = klrates.KLRecurrence(r0=args.r0, theta=args.theta, C=args.C,
                               a_seq=seq_params)
    values = klrates.simulate_recurrence(rec, args.K)

    if args.theta == 1.0:
        env = klrates.envelope(args.regime, 1.0,
                               termination_index=klrates.finite_termination_bound(rec))
    elif args.regime == "c" and args.theta >= 0.5:
        _, c_dprime = klrates.estimate_liminf_constants(seq_params, args.K, args.C)
        env = klrates.envelope("c", args.theta, C=args.C, C_dprime=c_dprime)
    else:
        env = klrates.envelope(args.regime, args.theta, a=args.coef, d=args.d,
                               C=args.C)
    report = klrates.check_envelope(values, env)

    bounds = _envelope_curve(values, env, args)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write("k,r_k,bound_k\n")
            for k, (r, b) in enumerate(zip(values, bounds)):
                fh.write(f"{k},{r!r},{b!r}\n")
    print(f"envelope: {env.description}")
    print(f"fit kind={report.kind} fitted={report.fitted:.6g} "
          f"expected={report.expected:.6g} pass={report.passed} ({report.detail})")
    return 0


def _envelope_curve(values: np.ndarray, env, args) -> np.ndarray:
    k = np.arange(values.size, dtype=float)
    anchor = values.size // 2
    with np.errstate(divide="ignore", invalid="ignore"):
        if env.kind == "finite":
            return values.copy()
        if env.kind == "geometric":
            return values[0] * env.expected**k
        if env.kind == "power":
            return values[anchor] * (k / anchor) ** env.expected
        if env.kind == "log_power":
            return values[anchor] * (np.log(k) / np.log(anchor)) ** env.expected
        # stretched exponential, anchored at the midpoint
        coef = np.log(values[0] / values[anchor]) / anchor**env.expected
        return values[0] * np.exp(-coef * k**env.expected)


def cmd_gammamax(args) -> int:
    problem = _build_problem(args)
    gmax = gamma_max_search(problem, args.probe_iters)
    upper = 1.0 / problem.lipschitz
    print(f"1/L        = {upper!r}")
    print(f"gamma_max  = {gmax!r}  ({gmax * problem.lipschitz:.3g} / L)")
    for nu in (8.0, 3.0, 1.5):
        print(f"gamma_max/{nu:<3g} = {gmax / nu!r}")
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="proxalt",
                     description="Proximal gradient methods with alternated "
                                 "inertia: runs, verification, rate simulation.")
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)
    parser._proxalt_subparsers = {}

    for name, brief in (("run", "run solvers and write trace CSVs"),
                        ("compare", "alias of run")):
        p = sub.add_parser(name, help=brief)
        parser._proxalt_subparsers[name] = p
        _add_problem_flags(p)
        p.add_argument("--methods", default="vanilla",
                       help="comma list: vanilla,fista,altinertia,altextra,mfista")
        p.add_argument("--schedule", default="power:3,0.8",
                       help="fixed:A | nesterov | linear:A | power:A,D "
                            "(altextra and mfista draw their t-sequence from "
                            "it when possible, else use the square-root one)")
        p.add_argument("--gamma", default="1/L",
                       help="1/L | 1/Lu | gmax/NU | positive float")
        p.add_argument("--budget", type=int, default=1000)
        p.add_argument("--tol", type=float, default=0.0,
                       help="stop when the fixed-point residual reaches this")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--probe-iters", type=int, default=1000,
                       help="probe length for gmax/NU step policies")
        p.add_argument("--raw-section5-alpha", action="store_true",
                       help="use the literal clamped ratio t_{k+1}/(t_k - 1) "
                            "for comparison purposes")
        p.add_argument("--config", help="flat TOML file of defaults "
                                        "(explicit flags win)")
        p.set_defaults(func=cmd_run)

    p = sub.add_parser("verify", help="run the inequality check suite")
    parser._proxalt_subparsers["verify"] = p
    p.add_argument("--families", default="all",
                   help="comma list of family names, or 'all'")
    p.add_argument("--seeds", type=int, default=10,
                   help="number of seeds (0..N-1)")
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--out", help="write the report CSV here instead of stdout")
    p.add_argument("--corrupt-tolerance", type=float, default=None,
                   help=argparse.SUPPRESS)  # harness self-test hook
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("klsim", help="simulate the worst-case rate recurrence")
    parser._proxalt_subparsers["klsim"] = p
    p.add_argument("--theta", type=float, required=True)
    p.add_argument("--C", type=float, default=1.0)
    p.add_argument("--r0", type=float, default=1.0)
    p.add_argument("--regime", choices=("a", "b", "c"), required=True)
    p.add_argument("--coef", type=float, default=0.1,
                   help="coefficient scale: a_k = coef, coef/k^d, or coef/k")
    p.add_argument("--d", type=float, default=0.5,
                   help="decay exponent for regime b")
    p.add_argument("--K", type=int, default=100_000)
    p.add_argument("--out", help="CSV of (k, r_k, bound_k)")
    p.set_defaults(func=cmd_klsim)

    p = sub.add_parser("gammamax", help="largest admissible plain step size")
    parser._proxalt_subparsers["gammamax"] = p
    _add_problem_flags(p)
    p.add_argument("--probe-iters", type=int, default=1000)
    p.set_defaults(func=cmd_gammamax)

    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _apply_config_file(parser, argv)
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else USAGE_ERROR
    except (OSError, tomllib.TOMLDecodeError, IndexError) as exc:
        print(f"proxalt: error: bad --config: {exc}", file=sys.stderr)
        return USAGE_ERROR
    try:
        return args.func(args)
    except (ValueError, KeyError) as exc:
        print(f"proxalt: error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except Exception as exc:  # runtime failures: divergence, I/O, ...
        print(f"proxalt: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return RUNTIME_ERROR


if __name__ == "__main__":
    sys.exit(main())
