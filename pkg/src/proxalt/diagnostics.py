"""Property checks for the descent, contraction, and monotonicity guarantees.

Each check samples random points (or walks a solver trace) and counts
violations of one inequality at an explicit tolerance.  The inequalities are
universally quantified, so sampling approximates them: points are standard
normal scaled by radii {0.1, 1, 10} to probe several magnitude regimes, and
tolerances scale as ``1e-9 * (1 + magnitude)`` so badly scaled problems do not
trip absolute slack.

Checks whose hypotheses a configuration does not meet (e.g. the contraction
inequality outside ``gamma < 2/L``) are gated: they report
``hypothesis_met=False`` with no samples instead of failing.

Every check is deterministic under a fixed seed (PCG64 generator).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .objective import CompositeProblem
from .proxstep import prox_gradient_step
from .solvers import SolverTrace

__all__ = [
    "CheckReport",
    "check_contraction",
    "check_descent_lemma",
    "check_subgrad_bound",
    "check_alternated_descent",
    "check_fejer",
    "check_extrapolation_rate",
    "check_strong_convexity_resilience",
    "suite_problem_families",
    "default_suite",
    "report_csv_header",
    "report_csv_row",
]

_RADII = (0.1, 1.0, 10.0)


@dataclass(frozen=True)
class CheckReport:
    """Outcome of one property check.

    ``worst_slack`` is the smallest margin ``rhs - lhs`` seen (negative means
    the raw inequality reversed; a violation is counted only when it reverses
    beyond the tolerance).  Reports are deterministic given the seed.
    """

    check_name: str
    samples: int
    violations: int
    worst_slack: float
    seed: int
    hypothesis_met: bool = True
    detail: str = ""


def report_csv_header() -> str:
    return "check_name,samples,violations,worst_slack,seed,hypothesis_met,detail"


def report_csv_row(report: CheckReport) -> str:
    return ",".join([
        report.check_name,
        repr(report.samples),
        repr(report.violations),
        repr(report.worst_slack),
        repr(report.seed),
        "1" if report.hypothesis_met else "0",
        report.detail.replace(",", ";"),
    ])


def _gated(name: str, seed: int, why: str) -> CheckReport:
    return CheckReport(name, 0, 0, math.inf, seed,
                       hypothesis_met=False, detail=f"hypothesis unmet: {why}")


def _sample_points(rng: np.random.Generator, n_samples: int, dim: int) -> np.ndarray:
    radii = np.array(_RADII)[np.arange(n_samples) % len(_RADII)]
    return rng.standard_normal((n_samples, dim)) * radii[:, None]


def _summarize(name: str, margins: np.ndarray, tol: np.ndarray,
               seed: int, detail: str = "") -> CheckReport:
    violations = int(np.sum(margins + tol < 0.0))
    return CheckReport(name, margins.size, violations,
                       float(np.min(margins)), seed, detail=detail)


def check_contraction(problem: CompositeProblem, gamma: float,
                      n_samples: int = 10_000, seed: int = 0,
                      tol_scale: float = 1e-9) -> CheckReport:
    """Averagedness of the prox-gradient map on random pairs.

    With ``nu = 2 / (1 + 2 min(1, 1/(gamma L)))``:

    ``||Tx - Ty||^2 + (1-nu)/nu ||(x - Tx) - (y - Ty)||^2 <= ||x - y||^2``.

    Requires a convex regularizer and ``gamma in (0, 2/L)``.
    """
    name = "contraction"
    L = problem.lipschitz
    if not problem.g.convex:
        return _gated(name, seed, "regularizer is not convex")
    if not 0.0 < gamma < 2.0 / L:
        return _gated(name, seed, f"gamma = {gamma:.3g} outside (0, 2/L)")
    rng = np.random.Generator(np.random.PCG64(seed))
    x = _sample_points(rng, n_samples, problem.dim)
    y = _sample_points(rng, n_samples, problem.dim)
    tx = prox_gradient_step(problem, x, gamma).output
    ty = prox_gradient_step(problem, y, gamma).output
    nu = 2.0 / (1.0 + 2.0 * min(1.0, 1.0 / (gamma * L)))
    lhs = (np.sum((tx - ty) ** 2, axis=-1)
           + (1.0 - nu) / nu * np.sum(((x - tx) - (y - ty)) ** 2, axis=-1))
    rhs = np.sum((x - y) ** 2, axis=-1)
    tol = tol_scale * (1.0 + rhs)
    return _summarize(name, rhs - lhs, tol, seed, detail=f"nu={nu:.6g}")


def check_descent_lemma(problem: CompositeProblem, gamma: float,
                        n_samples: int = 10_000, seed: int = 0,
                        nonconvex: bool = False,
                        tol_scale: float = 1e-9) -> CheckReport:
    """Two-point functional descent of one prox-gradient application.

    Convex form:

    ``F(Tx) + (1-gL)/(2g) ||Tx - x||^2 + 1/(2g) ||Tx - y||^2
        <= F(y) + 1/(2g) ||x - y||^2``.

    With ``nonconvex=True`` the ``||Tx - y||^2`` term is dropped, which is the
    form that survives without convexity of the regularizer.
    """
    name = "descent_nonconvex" if nonconvex else "descent"
    if gamma <= 0:
        return _gated(name, seed, "gamma must be positive")
    if not nonconvex and not problem.g.convex:
        return _gated(name, seed, "convex form needs a convex regularizer")
    L = problem.lipschitz
    rng = np.random.Generator(np.random.PCG64(seed))
    x = _sample_points(rng, n_samples, problem.dim)
    y = _sample_points(rng, n_samples, problem.dim)
    tx = prox_gradient_step(problem, x, gamma).output
    xy_sq = np.sum((x - y) ** 2, axis=-1)
    f_y = problem.value(y)
    lhs = (problem.value(tx)
           + (1.0 - gamma * L) / (2.0 * gamma) * np.sum((tx - x) ** 2, axis=-1))
    if not nonconvex:
        lhs = lhs + np.sum((tx - y) ** 2, axis=-1) / (2.0 * gamma)
    rhs = f_y + xy_sq / (2.0 * gamma)
    tol = tol_scale * (1.0 + np.abs(f_y) + xy_sq / (2.0 * gamma))
    return _summarize(name, rhs - lhs, tol, seed)


def check_subgrad_bound(problem: CompositeProblem, gamma: float,
                        n_samples: int = 10_000, seed: int = 0,
                        tol_scale: float = 1e-9) -> CheckReport:
    """Subdifferential distance bound at the prox output.

    ``dist(0, dF(Tx)) <= (L gamma + 1)/gamma * ||x - Tx||``.
    """
    name = "subgrad_bound"
    if gamma <= 0:
        return _gated(name, seed, "gamma must be positive")
    if not problem.g.convex:
        return _gated(name, seed, "regularizer is not convex")
    L = problem.lipschitz
    rng = np.random.Generator(np.random.PCG64(seed))
    x = _sample_points(rng, n_samples, problem.dim)
    result = prox_gradient_step(problem, x, gamma)
    lhs = problem.dist_subgradient(result.output)
    rhs = (L * gamma + 1.0) / gamma * result.residual
    tol = tol_scale * (1.0 + rhs)
    return _summarize(name, rhs - lhs, tol, seed)


def _pair_quantities(trace: SolverTrace):
    recs = trace.records
    alphas = trace.alpha_values
    n_pairs = min(len(alphas), (len(recs) - 1) // 2)
    return recs, alphas, n_pairs


def check_alternated_descent(problem: CompositeProblem, trace: SolverTrace,
                             nonconvex: bool = False,
                             tol_scale: float = 1e-9) -> CheckReport:
    """Pairwise descent of an alternated-inertia run, both displayed forms.

    For each pair with inertia ``alpha`` (``coef = 2 - alpha - gamma L``
    convex, ``1 - alpha - gamma L`` without convexity):

    ``F(y_{k+2}) <= F(y_k) - coef/(2 gamma) [ ||y_{k+2} - x_{k+1}||^2
                                             + ||y_{k+1} - x_k||^2 ]``
    ``F(y_{k+2}) <= F(y_k) - coef gamma / (2 (1 + gamma L)^2)
                                     * dist(0, dF(y_{k+2}))^2``.
    """
    name = "alternated_descent" + ("_nonconvex" if nonconvex else "")
    if trace.method != "alt_inertia" or trace.alpha_values is None:
        raise ValueError("needs a trace produced by the alternated-inertia solver")
    gamma = trace.gamma
    L = problem.lipschitz
    recs, alphas, n_pairs = _pair_quantities(trace)
    if n_pairs == 0:
        return CheckReport(name, 0, 0, math.inf, -1, detail="trace too short")
    margins, tols = [], []
    base = 1.0 if nonconvex else 2.0
    for l in range(n_pairs):
        f_k = recs[2 * l].F
        r1 = recs[2 * l + 1].residual
        rec2 = recs[2 * l + 2]
        coef = base - alphas[l] - gamma * L
        slack = tol_scale * max(1.0, abs(f_k))
        rhs1 = f_k - coef / (2.0 * gamma) * (r1**2 + rec2.residual**2)
        rhs2 = f_k - coef * gamma / (2.0 * (1.0 + gamma * L) ** 2) * rec2.dist_exact**2
        margins.extend([rhs1 - rec2.F, rhs2 - rec2.F])
        tols.extend([slack, slack])
    return _summarize(name, np.array(margins), np.array(tols), -1,
                      detail=f"{n_pairs} pairs")


def check_fejer(problem: CompositeProblem, trace: SolverTrace,
                x_star: np.ndarray, tol: float = 1e-10) -> CheckReport:
    """Distance monotonicity of the even subsequence toward an optimum.

    Asserted only under its hypotheses: ``gamma in (0, 2/L)`` and every
    applied inertia at most ``min(1, 1/(gamma L)) - 1/2``; otherwise the
    check is gated.  Requires a trace recorded with points.
    """
    name = "fejer"
    if trace.method != "alt_inertia" or trace.points is None:
        raise ValueError("needs an alternated-inertia trace recorded with points")
    gamma = trace.gamma
    L = problem.lipschitz
    if not 0.0 < gamma < 2.0 / L:
        return _gated(name, -1, "gamma outside (0, 2/L)")
    cap = min(1.0, 1.0 / (gamma * L)) - 0.5
    alphas = trace.alpha_values or []
    if any(a > cap + 1e-12 for a in alphas):
        return _gated(name, -1, f"inertia exceeds the admissible cap {cap:.3g}")
    x_star = np.asarray(x_star, dtype=float)
    evens = [p for r, p in zip(trace.records, trace.points) if r.prox_evals % 2 == 0]
    dists = np.array([np.linalg.norm(p - x_star) for p in evens])
    margins = dists[:-1] - dists[1:]
    tols = np.full(margins.size, tol)
    return _summarize(name, margins, tols, -1, detail=f"{len(evens)} even points")


def check_extrapolation_rate(trace: SolverTrace, x_star: np.ndarray,
                             f_star: float, tol: float = 1e-12) -> CheckReport:
    """Worst-case rate and summability of an alternated-extrapolation run.

    For odd prox counts ``k >= 3`` (the first odd index is a warm-up guard):

    ``F(y_k) - F* <= ||x_0 - x*||^2 / (2 gamma t_{k//2}^2)``,

    and the weighted residual sums stay bounded:

    ``(1/(2 gamma)) sum_l t_l^2 ||T(y_{2l}) - y_{2l}||^2
        <= ||x_0 - x*||^2 / (2 gamma)``.
    """
    name = "extrapolation_rate"
    if trace.method != "alt_extrapolation" or trace.t_values is None:
        raise ValueError("needs an alternated-extrapolation trace")
    gamma = trace.gamma
    x0 = trace.initial_point
    dist0_sq = float(np.sum((x0 - np.asarray(x_star, dtype=float)) ** 2))
    margins, tols = [], []
    for rec in trace.records:
        k = rec.prox_evals
        if k < 3 or k % 2 == 0:
            continue
        t_l = trace.t_values[k // 2]
        bound = dist0_sq / (2.0 * gamma * t_l * t_l)
        margins.append(bound - (rec.F - f_star))
        tols.append(tol)
    # odd-indexed residuals are ||T(y_{2l}) - y_{2l}||; weight by t_l^2
    weighted = 0.0
    for rec in trace.records:
        k = rec.prox_evals
        if k % 2 == 1:
            weighted += trace.t_values[k // 2] ** 2 * rec.residual**2
            margins.append((dist0_sq - weighted) / (2.0 * gamma))
            tols.append(1e-9 * (1.0 + dist0_sq / (2.0 * gamma)))
    return _summarize(name, np.array(margins), np.array(tols), -1,
                      detail="rate bounds plus partial-sum bounds")


def check_strong_convexity_resilience(trace: SolverTrace, f_star: float,
                                      r2_min: float = 0.99,
                                      window: tuple[float, float] = (1e-12, math.inf),
                                      ) -> CheckReport:
    """Is the tail better explained by geometric than by power-law decay?

    Fits ``log r`` against ``k`` (geometric) and against ``log k`` (power) on
    the tail half of the in-window records; passes when the geometric fit has
    ``R^2 >= r2_min`` and a smaller residual than the power-law fit.
    """
    name = "strong_convexity_resilience"
    r = trace.functional_errors(f_star)
    k = trace.prox_evals.astype(float)
    mask = (r > window[0]) & (r < window[1]) & (k > 0)
    r, k = r[mask], k[mask]
    if r.size < 20:
        raise ValueError("trace too short to compare decay models")
    tail = slice(r.size // 2, r.size)
    log_r = np.log(r[tail])
    rss_exp, r2_exp = _fit_rss(k[tail], log_r)
    rss_pow, _ = _fit_rss(np.log(k[tail]), log_r)
    ok = (r2_exp >= r2_min) and (rss_exp < rss_pow)
    return CheckReport(name, int(r.size), 0 if ok else 1,
                       float(r2_exp - r2_min), -1,
                       detail=f"R2_exp={r2_exp:.5f} rss_exp={rss_exp:.3g} "
                              f"rss_pow={rss_pow:.3g}")


def _fit_rss(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    rss = float(np.sum(resid**2))
    total = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - rss / total if total > 0 else 1.0
    return rss, r2


def suite_problem_families() -> dict[str, CompositeProblem]:
    """The deterministic problem families the default suite runs over.

    Regularization weights are fixed (not support-matched) here: the
    inequalities under test hold for any weight, and fixed values keep the
    suite fast.
    """
    from .experiments import (LassoSpec, gen_lasso, gen_logistic_dataset,
                              logistic_problem, quadratic_problem)
    from .objective import HalfNorm, L1

    lasso130, _ = gen_lasso(LassoSpec(m=130, n=80, lambda1=0.1, seed=0))
    lasso85, _ = gen_lasso(LassoSpec(m=85, n=80, lambda1=0.1, seed=0))
    logistic_data = gen_logistic_dataset(seed=0)
    return {
        "quadratic_zero": quadratic_problem(20),
        "lasso_130x80_l1": lasso130,
        "lasso_85x80_l1": lasso85,
        "logistic_l1": logistic_problem(logistic_data, L1(0.1)),
        "logistic_half": logistic_problem(logistic_data, HalfNorm(0.002)),
        "lasso_130x80_half": CompositeProblem(lasso130.f, HalfNorm(0.05)),
    }


def default_suite(seeds=range(10), n_samples: int = 10_000,
                  families: dict[str, CompositeProblem] | None = None,
                  tol_scale: float = 1e-9) -> list[CheckReport]:
    """Run every applicable lemma check over the problem families.

    Convex families get the contraction, convex descent, and
    subdifferential-bound checks at ``gamma = 1/L``; the convexity-free
    descent check runs on every family at ``gamma = 1/(2L)``.
    """
    if families is None:
        families = suite_problem_families()
    reports = []
    for fam_name, problem in families.items():
        gamma = 1.0 / problem.lipschitz
        for seed in seeds:
            batch = [
                check_contraction(problem, gamma, n_samples, seed, tol_scale),
                check_descent_lemma(problem, gamma, n_samples, seed,
                                    nonconvex=False, tol_scale=tol_scale),
                check_descent_lemma(problem, 0.5 * gamma, n_samples, seed,
                                    nonconvex=True, tol_scale=tol_scale),
                check_subgrad_bound(problem, gamma, n_samples, seed, tol_scale),
            ]
            for rep in batch:
                reports.append(CheckReport(
                    check_name=f"{fam_name}/{rep.check_name}",
                    samples=rep.samples, violations=rep.violations,
                    worst_slack=rep.worst_slack, seed=rep.seed,
                    hypothesis_met=rep.hypothesis_met, detail=rep.detail,
                ))
    return reports
