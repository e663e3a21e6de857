"""Problem construction, dataset ingestion, and trace persistence.

All randomness flows from explicit integer seeds through numpy's PCG64
generator, which is deterministic across platforms: identical seeds give
bit-identical problems and traces.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass

import numpy as np

from .objective import CompositeProblem, HalfNorm, L1, LeastSquares, Logistic
from .schedules import NesterovSqrtSchedule
from .solvers import SolverConfig, SolverTrace, TraceRecord, run_inertial

__all__ = [
    "LassoSpec",
    "DatasetRecord",
    "rng_from_seed",
    "gen_lasso",
    "gen_logistic_dataset",
    "logistic_problem",
    "quadratic_problem",
    "load_ionosphere",
    "write_trace",
    "read_trace",
]

TRACE_HEADER = ["prox_evals", "F", "residual", "dist_bound", "dist_exact", "tag"]


def rng_from_seed(seed: int) -> np.random.Generator:
    """The package-wide generator: PCG64 seeded explicitly."""
    return np.random.Generator(np.random.PCG64(seed))


@dataclass(frozen=True)
class LassoSpec:
    """Synthetic l1-regularized least-squares instance description.

    Defaults mirror the benchmark setup: 130x80 (or 85x80) standard-normal
    design, a 10 percent sparse ground truth, observation noise of standard
    deviation 0.001, and the regularization weight chosen so the original
    sparsity is recovered ("auto").
    """

    m: int = 130
    n: int = 80
    sparsity: float = 0.10
    noise_std: float = 0.001
    lambda1: float | str = "auto"
    seed: int = 0

    def __post_init__(self):
        if self.m < 1 or self.n < 1:
            raise ValueError("matrix dimensions must be positive")
        if not 0.0 < self.sparsity < 1.0:
            raise ValueError("sparsity must lie in (0, 1)")
        if self.noise_std < 0.0:
            raise ValueError("noise level must be nonnegative")
        if self.lambda1 != "auto" and not float(self.lambda1) > 0:
            raise ValueError("lambda1 must be positive or 'auto'")


@dataclass(frozen=True)
class DatasetRecord:
    """A design matrix with its target (labels or observations)."""

    A: np.ndarray
    y: np.ndarray
    provenance: str


def _solve_support(problem: CompositeProblem, budget: int = 30_000) -> int:
    """Support size of an accurately solved l1 problem (internal probe)."""
    cfg = SolverConfig(gamma=1.0 / problem.lipschitz, method="inertial",
                       schedule=NesterovSqrtSchedule(), max_prox_evals=budget,
                       stop_residual=1e-10)
    trace = run_inertial(problem, cfg, np.zeros(problem.dim))
    return int(np.count_nonzero(trace.final_point))


def _auto_lambda(A: np.ndarray, b: np.ndarray, target_support: int,
                 max_steps: int = 60) -> float:
    """Bisection on the l1 weight until the solved support size matches.

    The all-zero solution appears exactly at ``lam >= ||2 A^T b||_inf``, which
    brackets from above; the bracket is narrowed geometrically.
    """
    lam_hi = float(np.max(np.abs(2.0 * A.T @ b)))
    lam_lo = lam_hi * 1e-6

    def support(lam: float) -> int:
        return _solve_support(CompositeProblem(LeastSquares(A, b), L1(lam)))

    for _ in range(8):  # push the lower end until it over-selects
        if support(lam_lo) >= target_support:
            break
        lam_lo *= 1e-2
    for _ in range(max_steps):
        lam_mid = np.sqrt(lam_lo * lam_hi)
        s = support(lam_mid)
        if s == target_support:
            return lam_mid
        if s > target_support:
            lam_lo = lam_mid
        else:
            lam_hi = lam_mid
    raise RuntimeError(
        f"support-matching bisection failed in {max_steps} steps; "
        f"last bracket [{lam_lo:.6g}, {lam_hi:.6g}]"
    )


def gen_lasso(spec: LassoSpec) -> tuple[CompositeProblem, np.ndarray]:
    """Synthetic lasso instance plus its planted coefficient vector.

    The design is i.i.d. standard normal, the planted vector has
    ``ceil(sparsity * n)`` standard-normal entries at uniformly random
    positions, and observations carry Gaussian noise.  With
    ``lambda1="auto"`` the weight is bisected until the solved support size
    equals the planted one.
    """
    rng = rng_from_seed(spec.seed)
    A = rng.standard_normal((spec.m, spec.n))
    n_nonzero = int(np.ceil(spec.sparsity * spec.n))
    support = rng.choice(spec.n, size=n_nonzero, replace=False)
    x_true = np.zeros(spec.n)
    x_true[support] = rng.standard_normal(n_nonzero)
    b = A @ x_true + spec.noise_std * rng.standard_normal(spec.m)
    if spec.lambda1 == "auto":
        lam = _auto_lambda(A, b, n_nonzero)
    else:
        lam = float(spec.lambda1)
    return CompositeProblem(LeastSquares(A, b), L1(lam)), x_true


def gen_logistic_dataset(m: int = 351, n: int = 34, seed: int = 0,
                         n_informative: int = 6,
                         margin_noise: float = 1.0) -> DatasetRecord:
    """Deterministic synthetic binary classification dataset.

    Standard-normal features, labels from the sign of a sparse linear score
    plus Gaussian margin noise.  Shaped like the classic 351x34 ionosphere
    benchmark by default, for use where that file is not distributable.
    """
    rng = rng_from_seed(seed)
    A = rng.standard_normal((m, n))
    w = np.zeros(n)
    idx = rng.choice(n, size=min(n_informative, n), replace=False)
    w[idx] = rng.standard_normal(idx.size)
    score = A @ w + margin_noise * rng.standard_normal(m)
    y = np.where(score >= 0.0, 1.0, -1.0)
    return DatasetRecord(A=A, y=y, provenance=f"synthetic-logistic({m}x{n}, seed={seed})")


def logistic_problem(record: DatasetRecord, reg) -> CompositeProblem:
    """Regularized logistic regression problem over a labeled dataset."""
    return CompositeProblem(Logistic(record.A, record.y), reg)


def quadratic_problem(n: int = 20) -> CompositeProblem:
    """The identity quadratic ``||x||^2`` with no regularizer."""
    from .objective import ZeroReg

    return CompositeProblem(LeastSquares(np.eye(n), np.zeros(n)), ZeroReg())


def load_ionosphere(path, add_intercept: bool = False) -> DatasetRecord:
    """Load the ionosphere-format CSV: 34 numeric columns plus a g/b label.

    Labels map g -> +1 and b -> -1.  The canonical file has 351 rows; other
    sizes parse with a warning.  ``add_intercept`` appends a column of ones
    (the reading under which the feature count is 35).  No standardization is
    applied.
    """
    rows, labels = [], []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row:
                continue
            if len(row) != 35:
                raise ValueError(
                    f"{path}: line {lineno}: expected 35 columns, got {len(row)}"
                )
            try:
                rows.append([float(v) for v in row[:-1]])
            except ValueError as exc:
                raise ValueError(f"{path}: line {lineno}: {exc}") from None
            label = row[-1].strip().lower()
            if label not in ("g", "b"):
                raise ValueError(
                    f"{path}: line {lineno}: label must be 'g' or 'b', got {row[-1]!r}"
                )
            labels.append(1.0 if label == "g" else -1.0)
    if not rows:
        raise ValueError(f"{path}: no data rows")
    A = np.array(rows)
    y = np.array(labels)
    if A.shape[0] != 351:
        warnings.warn(
            f"{path}: {A.shape[0]} rows (the canonical file has 351)",
            stacklevel=2,
        )
    if add_intercept:
        A = np.hstack([A, np.ones((A.shape[0], 1))])
    return DatasetRecord(A=A, y=y, provenance=str(path))


def write_trace(trace: SolverTrace, path) -> None:
    """Persist the per-prox-evaluation records as CSV.

    Floats are written with their shortest round-trip decimal form, so
    ``read_trace`` recovers them bit-exactly.
    """
    with open(path, "w", newline="") as fh:
        fh.write(",".join(TRACE_HEADER) + "\n")
        for r in trace.records:
            fh.write(
                f"{r.prox_evals},{r.F!r},{r.residual!r},"
                f"{r.dist_bound!r},{r.dist_exact!r},{r.tag}\n"
            )


def read_trace(path) -> SolverTrace:
    """Read a trace written by :func:`write_trace` (records only)."""
    records = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty file, expected a header") from None
        if header != TRACE_HEADER:
            raise ValueError(f"{path}: unexpected header {header}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(TRACE_HEADER):
                raise ValueError(
                    f"{path}: line {lineno}: expected {len(TRACE_HEADER)} fields"
                )
            try:
                records.append(TraceRecord(
                    prox_evals=int(row[0]), F=float(row[1]),
                    residual=float(row[2]), dist_bound=float(row[3]),
                    dist_exact=float(row[4]), tag=row[5],
                ))
            except ValueError as exc:
                raise ValueError(f"{path}: line {lineno}: {exc}") from None
    return SolverTrace(records=records)
