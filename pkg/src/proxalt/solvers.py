"""Iterative solvers for composite problems, traced per prox evaluation.

Five methods share one trace format: plain proximal gradient, its inertial
(FISTA-style) variant, the alternated-inertia variant (inertia only every
other step), the alternated-extrapolation variant, and a monotone FISTA
comparator.  The trace is keyed by the number of proximal gradient
evaluations, which is the unit all methods are compared in; the functional
comparisons monotone FISTA performs on top are counted separately.

Warm-up conventions: the recursions start from ``y_0 = x_0`` (alternated
inertia) and ``y_{-1} = y_0 = x_0`` (alternated extrapolation), so the first
momentum terms vanish.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .objective import CompositeProblem
from .proxstep import NonFiniteIterateError, ProxResult, prox_gradient_step
from .schedules import InertiaSchedule, NesterovSqrtSchedule

__all__ = [
    "SolverConfig",
    "TraceRecord",
    "SolverTrace",
    "DivergenceDetected",
    "run",
    "run_vanilla",
    "run_inertial",
    "run_alternated_inertia",
    "run_alternated_extrapolation",
    "run_mfista",
    "gamma_max_search",
]

METHODS = ("vanilla", "inertial", "alt_inertia", "alt_extrapolation", "mfista")


@dataclass
class SolverConfig:
    """What to run and for how long.

    ``stop_residual`` and ``max_prox_evals`` form a dual stopping criterion:
    the run ends as soon as a fixed-point residual drops to ``stop_residual``
    or the prox budget is spent, whichever comes first.  ``record_points``
    additionally stores every recorded iterate (needed by the distance
    monotonicity checks; off by default to keep long traces small).
    """

    gamma: float
    method: str = "vanilla"
    schedule: InertiaSchedule | None = None
    max_prox_evals: int = 1000
    stop_residual: float = 0.0
    seed: int = 0
    record_points: bool = False

    def __post_init__(self):
        if self.gamma <= 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if self.max_prox_evals < 1:
            raise ValueError("max_prox_evals must be at least 1")
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; one of {METHODS}")


@dataclass(frozen=True)
class TraceRecord:
    """State after one prox evaluation (record 0 is the initial point).

    ``residual`` and ``dist_bound`` describe the prox application that
    produced the point, so they are NaN on record 0.  ``dist_bound`` is the
    subdifferential-distance bound ``(L*gamma + 1)/gamma * residual``, always
    evaluated at the prox output; ``dist_exact`` is the exact distance at the
    same point.  ``tag`` names the sequence member recorded ("x" or "y").
    """

    prox_evals: int
    F: float
    residual: float
    dist_bound: float
    dist_exact: float
    tag: str


@dataclass
class SolverTrace:
    """Per-prox-evaluation record of a solver run."""

    records: list[TraceRecord] = field(default_factory=list)
    method: str = ""
    gamma: float = float("nan")
    initial_point: np.ndarray | None = None
    final_point: np.ndarray | None = None
    alpha_values: list[float] | None = None
    t_values: list[float] | None = None
    points: list[np.ndarray] | None = None
    extra_f_evals: int = 0

    @property
    def prox_evals(self) -> np.ndarray:
        return np.array([r.prox_evals for r in self.records], dtype=int)

    @property
    def f_values(self) -> np.ndarray:
        return np.array([r.F for r in self.records])

    @property
    def residuals(self) -> np.ndarray:
        return np.array([r.residual for r in self.records])

    @property
    def dist_exact(self) -> np.ndarray:
        return np.array([r.dist_exact for r in self.records])

    @property
    def dist_bound(self) -> np.ndarray:
        return np.array([r.dist_bound for r in self.records])

    def functional_errors(self, f_star: float) -> np.ndarray:
        return self.f_values - f_star


class DivergenceDetected(RuntimeError):
    """The objective stopped being finite; carries the progress so far.

    ``trace`` holds every record up to the last finite one.
    """

    def __init__(self, message: str, trace: SolverTrace):
        super().__init__(message)
        self.trace = trace
        self.last_record = trace.records[-1] if trace.records else None


class _Recorder:
    """Accumulates trace records and enforces the finite-objective contract."""

    def __init__(self, problem: CompositeProblem, config: SolverConfig,
                 x0: np.ndarray, tag: str, method: str):
        self.problem = problem
        self.config = config
        self.count = 0
        x0 = np.asarray(x0, dtype=float)
        if x0.shape != (problem.dim,):
            raise ValueError(f"x0 has shape {x0.shape}, expected ({problem.dim},)")
        f0 = float(problem.value(x0))
        self.trace = SolverTrace(
            records=[TraceRecord(0, f0, math.nan, math.nan,
                                 float(problem.dist_subgradient(x0)), tag)],
            method=method,
            gamma=config.gamma,
            initial_point=x0.copy(),
            points=[x0.copy()] if config.record_points else None,
        )
        if not math.isfinite(f0):
            raise DivergenceDetected("objective not finite at the initial point",
                                     self.trace)
        self._bound_factor = (problem.lipschitz * config.gamma + 1.0) / config.gamma

    def step(self, x: np.ndarray) -> ProxResult:
        """One guarded prox-gradient application (no recording)."""
        try:
            return prox_gradient_step(self.problem, x, self.config.gamma)
        except NonFiniteIterateError as exc:
            raise DivergenceDetected(str(exc), self.trace) from exc

    def add(self, result: ProxResult, tag: str, f_override: float | None = None,
            point_override: np.ndarray | None = None) -> float:
        """Record the outcome of one prox evaluation; returns the residual."""
        out = result.output
        with np.errstate(over="ignore", invalid="ignore"):
            f_val = (float(self.problem.value(out)) if f_override is None
                     else f_override)
            resid = float(result.residual)
        self.count += 1
        point = out if point_override is None else point_override
        if not math.isfinite(f_val):
            raise DivergenceDetected(
                f"objective became non-finite at prox evaluation {self.count}",
                self.trace,
            )
        self.trace.records.append(TraceRecord(
            self.count, f_val, resid, self._bound_factor * resid,
            float(self.problem.dist_subgradient(out)), tag,
        ))
        if self.trace.points is not None:
            self.trace.points.append(np.array(point, dtype=float))
        return resid

    @property
    def budget_left(self) -> int:
        return self.config.max_prox_evals - self.count

    def finish(self, final_point: np.ndarray) -> SolverTrace:
        self.trace.final_point = np.array(final_point, dtype=float)
        return self.trace


def _stop(resid: float, config: SolverConfig) -> bool:
    return resid <= config.stop_residual


def run_vanilla(problem: CompositeProblem, config: SolverConfig,
                x0: np.ndarray) -> SolverTrace:
    """Plain proximal gradient: ``x_{k+1} = T_gamma(x_k)``."""
    rec = _Recorder(problem, config, x0, "x", "vanilla")
    x = rec.trace.initial_point
    while rec.budget_left > 0:
        pr = rec.step(x)
        resid = rec.add(pr, "x")
        x = pr.output
        if _stop(resid, config):
            break
    return rec.finish(x)


def run_inertial(problem: CompositeProblem, config: SolverConfig,
                 x0: np.ndarray) -> SolverTrace:
    """Inertial proximal gradient: every step extrapolates the prox outputs.

    ``y_{k+1} = T_gamma(x_k)``, ``x_{k+1} = y_{k+1} + alpha_{k+1} (y_{k+1} -
    y_k)`` with the coefficients drawn from the configured schedule.  With the
    square-root schedule this is FISTA.  The trace records the ``y`` points.
    """
    if config.schedule is None:
        raise ValueError("inertial run needs a schedule")
    sched = config.schedule.fresh()
    rec = _Recorder(problem, config, x0, "y", "inertial")
    y_prev = rec.trace.initial_point
    x = y_prev
    alphas: list[float] = []
    while rec.budget_left > 0:
        pr = rec.step(x)
        resid = rec.add(pr, "y")
        y = pr.output
        if _stop(resid, config):
            x = y
            break
        alpha = sched.next_alpha()
        alphas.append(alpha)
        x = y + alpha * (y - y_prev)
        y_prev = y
    rec.trace.alpha_values = alphas
    return rec.finish(y_prev if rec.count else x0)


def run_alternated_inertia(problem: CompositeProblem, config: SolverConfig,
                           x0: np.ndarray) -> SolverTrace:
    """Proximal gradient with inertia applied only every other step.

    For even ``k``: ``y_{k+1} = T(x_k)``; ``x_{k+1} = y_{k+1} + alpha_k
    (y_{k+1} - y_k)``; ``y_{k+2} = T(x_{k+1})``; ``x_{k+2} = y_{k+2}``.  The
    even subsequence ``(y_{2k})`` is the monotone one; the trace records every
    prox evaluation, so even prox counts index it directly.
    """
    if config.schedule is None:
        raise ValueError("alternated inertia run needs a schedule")
    sched = config.schedule.fresh()
    rec = _Recorder(problem, config, x0, "y", "alt_inertia")
    y_even = rec.trace.initial_point  # y_{2k}, equals x_{2k}
    alphas: list[float] = []
    last = y_even
    while rec.budget_left > 0:
        pr1 = rec.step(y_even)
        resid = rec.add(pr1, "y")
        y_odd = pr1.output
        last = y_odd
        if _stop(resid, config) or rec.budget_left <= 0:
            break
        alpha = sched.next_alpha()
        alphas.append(alpha)
        x_mid = y_odd + alpha * (y_odd - y_even)
        pr2 = rec.step(x_mid)
        resid = rec.add(pr2, "y")
        y_even = pr2.output
        last = y_even
        if _stop(resid, config):
            break
    rec.trace.alpha_values = alphas
    return rec.finish(last)


def run_alternated_extrapolation(problem: CompositeProblem, config: SolverConfig,
                                 x0: np.ndarray) -> SolverTrace:
    """Three-point extrapolation applied every other step.

    For even ``k`` with pair index ``l = k/2``::

        y_{k+1} = T(x_k)
        x_{k+1} = y_{k+1} - (y_{k+1} - y_k)/t_{l+1}
                          + (t_l - 1)/t_{l+1} * (y_k - y_{k-1})
        y_{k+2} = T(x_{k+1});  x_{k+2} = y_{k+2}

    The ``t`` sequence must come from the square-root or linear recurrence
    (those keep ``t_{k+1}^2 - t_{k+1} <= t_k^2``, which the worst-case rate
    needs).  The first pair is a degenerate warm-up: with ``y_{-1} = y_0``
    and ``t_0 = 0, t_1 = 1`` it re-evaluates ``T`` at ``x_0``.
    """
    sched = config.schedule if config.schedule is not None else NesterovSqrtSchedule()
    from .schedules import LinearOverASchedule  # local: avoid polluting module API

    if not isinstance(sched, (NesterovSqrtSchedule, LinearOverASchedule)):
        raise ValueError(
            "alternated extrapolation needs a square-root or linear t-schedule"
        )
    t_iter = sched.t_stream()
    t_cur = next(t_iter)   # t_0 = 0
    t_next = next(t_iter)  # t_1 = 1
    t_values = [t_cur, t_next]

    rec = _Recorder(problem, config, x0, "y", "alt_extrapolation")
    y_mm = rec.trace.initial_point  # y_{k-1}
    y_m = rec.trace.initial_point   # y_k
    x = rec.trace.initial_point     # x_k
    last = x
    while rec.budget_left > 0:
        pr1 = rec.step(x)
        resid = rec.add(pr1, "y")
        y1 = pr1.output
        last = y1
        if _stop(resid, config) or rec.budget_left <= 0:
            break
        x1 = y1 - (y1 - y_m) / t_next + ((t_cur - 1.0) / t_next) * (y_m - y_mm)
        pr2 = rec.step(x1)
        resid = rec.add(pr2, "y")
        y2 = pr2.output
        last = y2
        y_mm, y_m, x = y1, y2, y2
        t_cur, t_next = t_next, next(t_iter)
        t_values.append(t_next)
        if _stop(resid, config):
            break
    rec.trace.t_values = t_values
    return rec.finish(last)


def run_mfista(problem: CompositeProblem, config: SolverConfig,
               x0: np.ndarray) -> SolverTrace:
    """Monotone FISTA comparator.

    ``z_k = T(y_k)``; ``x_k`` is whichever of ``{z_k, x_{k-1}}`` has the
    smaller objective (ties keep the fresh ``z_k``); then

    ``y_{k+1} = x_k + t_k/t_{k+1} (z_k - x_k) + (t_k - 1)/t_{k+1} (x_k - x_{k-1})``.

    The trace's F column follows the accepted monotone point ``x_k`` while the
    residual/distance columns describe the prox output ``z_k``.  The objective
    test costs one functional evaluation per iteration, counted in
    ``extra_f_evals`` rather than as a prox evaluation.
    """
    sched = config.schedule if (config.schedule is not None
                                and config.schedule.has_t_sequence) else NesterovSqrtSchedule()
    t_iter = sched.t_stream()
    next(t_iter)         # discard t_0 = 0
    t = next(t_iter)     # t_1 = 1

    rec = _Recorder(problem, config, x0, "x", "mfista")
    x_prev = rec.trace.initial_point
    f_prev = rec.trace.records[0].F
    y = x_prev
    while rec.budget_left > 0:
        pr = rec.step(y)
        z = pr.output
        with np.errstate(over="ignore", invalid="ignore"):
            f_z = float(problem.value(z))
        rec.trace.extra_f_evals += 1
        if f_z <= f_prev:
            x, f_x = z, f_z
        else:
            x, f_x = x_prev, f_prev
        resid = rec.add(pr, "x", f_override=f_x, point_override=x)
        if _stop(resid, config):
            x_prev = x
            break
        t_next = next(t_iter)
        y = x + (t / t_next) * (z - x) + ((t - 1.0) / t_next) * (x - x_prev)
        x_prev, f_prev, t = x, f_x, t_next
    return rec.finish(x_prev)


_RUNNERS = {
    "vanilla": run_vanilla,
    "inertial": run_inertial,
    "alt_inertia": run_alternated_inertia,
    "alt_extrapolation": run_alternated_extrapolation,
    "mfista": run_mfista,
}


def run(problem: CompositeProblem, config: SolverConfig, x0: np.ndarray) -> SolverTrace:
    """Dispatch on ``config.method``."""
    return _RUNNERS[config.method](problem, config, x0)


def gamma_max_search(problem: CompositeProblem, probe_iters: int = 1000,
                     x0: np.ndarray | None = None) -> float:
    """Largest admissible step for plain proximal gradient, within 1 percent.

    A step is admissible when ``probe_iters`` plain iterations from ``x0``
    keep the objective finite and below ``1e6 * max(1, F(x0))``.  The search
    doubles from the always-admissible ``1/L`` until failure, then bisects the
    bracket down to 1 percent relative width and returns the admissible end.
    """
    if probe_iters < 100:
        raise ValueError(f"probe_iters must be at least 100, got {probe_iters}")
    if x0 is None:
        x0 = np.ones(problem.dim)
    x0 = np.asarray(x0, dtype=float)
    bound = 1e6 * max(1.0, float(problem.value(x0)))

    def admissible(gamma: float) -> bool:
        x = x0
        with np.errstate(over="ignore", invalid="ignore"):
            for _ in range(probe_iters):
                try:
                    pr = prox_gradient_step(problem, x, gamma)
                except NonFiniteIterateError:
                    return False
                x = pr.output
                f_val = problem.value(x)
                if not np.isfinite(f_val) or f_val > bound:
                    return False
        return True

    lo = 1.0 / problem.lipschitz
    if not admissible(lo):
        raise RuntimeError("probe diverged at gamma = 1/L; problem oracles inconsistent")
    hi = None
    gamma = lo
    for _ in range(80):
        gamma *= 2.0
        if admissible(gamma):
            lo = gamma
        else:
            hi = gamma
            break
    if hi is None:
        return lo  # never diverged within the doubling range
    while hi - lo > 0.01 * lo:
        mid = 0.5 * (lo + hi)
        if admissible(mid):
            lo = mid
        else:
            hi = mid
    return lo
