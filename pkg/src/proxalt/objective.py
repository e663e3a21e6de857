"""Composite objectives ``F = f + g`` with exact first-order oracles.

Smooth losses expose value / gradient / a Lipschitz constant of the gradient;
regularizers expose value / prox / distance from 0 to the subdifferential.
Every oracle broadcasts over leading axes: a point is a vector of shape
``(n,)`` and a stack of points has shape ``(..., n)``.
"""

from __future__ import annotations

import numpy as np

from .proxstep import prox_half, prox_l1

__all__ = [
    "LeastSquares",
    "Logistic",
    "ZeroReg",
    "L1",
    "HalfNorm",
    "CompositeProblem",
    "lambda_max_ata",
    "loss_value",
    "loss_gradient",
    "lipschitz_constant",
    "reg_value",
    "dist_subgradient",
]

# The cached Lipschitz constant must stay an upper bound: the power-iteration
# estimate approaches lambda_max from below, so it is inflated by this factor.
_LIPSCHITZ_INFLATION = 1.0 + 1e-8
_POWER_TOL = 1e-13
_POWER_MAX_ITERS = 100_000


def _as_matrix(A) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix entries must be finite")
    return A


def _as_vector(b) -> np.ndarray:
    b = np.asarray(b, dtype=float)
    if b.ndim != 1:
        raise ValueError(f"expected a 1-D vector, got shape {b.shape}")
    if not np.all(np.isfinite(b)):
        raise ValueError("vector entries must be finite")
    return b


def lambda_max_ata(A: np.ndarray, tol: float = _POWER_TOL,
                   max_iters: int = _POWER_MAX_ITERS) -> float:
    """Largest eigenvalue of ``A.T @ A`` by power iteration.

    Deterministic start vector (normalized all-ones); converges when the
    eigenvalue estimate changes by less than ``tol`` relatively.  The estimate
    ``||M v||`` with ``||v|| = 1`` never exceeds the true eigenvalue.
    """
    A = _as_matrix(A)
    n = A.shape[1]
    v = np.ones(n) / np.sqrt(n)
    lam = 0.0
    restarted = False
    for _ in range(max_iters):
        w = A.T @ (A @ v)
        norm_w = float(np.linalg.norm(w))
        if norm_w == 0.0:
            if restarted:
                return 0.0
            # start vector was in the kernel; graded restart keeps determinism
            v = np.arange(1.0, n + 1.0)
            v /= np.linalg.norm(v)
            restarted = True
            continue
        if abs(norm_w - lam) <= tol * norm_w:
            return norm_w
        lam = norm_w
        v = w / norm_w
    raise RuntimeError(
        f"power iteration did not converge in {max_iters} steps (last estimate {lam})"
    )


class LeastSquares:
    """Squared-residual loss ``f(x) = ||A x - b||^2`` (no 1/2 factor).

    Gradient ``2 A.T (A x - b)``; gradient Lipschitz constant
    ``2 * lambda_max(A.T A)``.
    """

    def __init__(self, A, b):
        self.A = _as_matrix(A)
        self.b = _as_vector(b)
        if self.A.shape[0] != self.b.shape[0]:
            raise ValueError(
                f"A has {self.A.shape[0]} rows but b has {self.b.shape[0]} entries"
            )
        self._lipschitz = None

    @property
    def dim(self) -> int:
        return self.A.shape[1]

    def value(self, x):
        r = np.asarray(x, dtype=float) @ self.A.T - self.b
        return np.sum(r * r, axis=-1)

    def gradient(self, x):
        r = np.asarray(x, dtype=float) @ self.A.T - self.b
        return 2.0 * (r @ self.A)

    @property
    def lipschitz(self) -> float:
        if self._lipschitz is None:
            self._lipschitz = 2.0 * lambda_max_ata(self.A) * _LIPSCHITZ_INFLATION
        return self._lipschitz


class Logistic:
    """Mean logistic loss with labels in {-1, +1}.

    ``f(x) = (1/m) sum_i log(1 + exp(-y_i <a_i, x>))``.  The gradient
    Lipschitz constant upper bound is ``lambda_max(A.T A) / (4 m)`` from the
    1/4 bound on the sigmoid derivative.
    """

    def __init__(self, A, y):
        self.A = _as_matrix(A)
        self.y = _as_vector(y)
        if self.A.shape[0] != self.y.shape[0]:
            raise ValueError(
                f"A has {self.A.shape[0]} rows but y has {self.y.shape[0]} entries"
            )
        if not np.all(np.isin(self.y, (-1.0, 1.0))):
            raise ValueError("labels must be -1 or +1")
        self._lipschitz = None

    @property
    def dim(self) -> int:
        return self.A.shape[1]

    @property
    def m(self) -> int:
        return self.A.shape[0]

    def value(self, x):
        margins = (np.asarray(x, dtype=float) @ self.A.T) * self.y
        return np.mean(np.logaddexp(0.0, -margins), axis=-1)

    def gradient(self, x):
        margins = (np.asarray(x, dtype=float) @ self.A.T) * self.y
        # sigmoid(-margins), written via tanh for stability at large |margins|
        s = 0.5 * (1.0 - np.tanh(0.5 * margins))
        return -((self.y * s) @ self.A) / self.m

    @property
    def lipschitz(self) -> float:
        if self._lipschitz is None:
            self._lipschitz = (
                lambda_max_ata(self.A) / (4.0 * self.m) * _LIPSCHITZ_INFLATION
            )
        return self._lipschitz


class ZeroReg:
    """The zero regularizer: prox is the identity, subdifferential is {0}."""

    convex = True

    def value(self, x):
        x = np.asarray(x, dtype=float)
        return np.zeros(x.shape[:-1])

    def prox(self, x, tau):
        return np.array(x, dtype=float)

    def dist_to_subdifferential(self, x, grad):
        return np.linalg.norm(grad, axis=-1)


class L1:
    """Weighted l1 norm ``lam * ||x||_1``."""

    convex = True

    def __init__(self, lam: float):
        if not lam > 0:
            raise ValueError(f"l1 weight must be positive, got {lam}")
        self.lam = float(lam)

    def value(self, x):
        return self.lam * np.sum(np.abs(x), axis=-1)

    def prox(self, x, tau):
        return prox_l1(x, tau * self.lam)

    def dist_to_subdifferential(self, x, grad):
        # coordinatewise: |g + lam*sign(x)| off the kink, max(|g|-lam, 0) at it
        x = np.asarray(x, dtype=float)
        grad = np.asarray(grad, dtype=float)
        contrib = np.where(
            x != 0.0,
            np.abs(grad + self.lam * np.sign(x)),
            np.maximum(np.abs(grad) - self.lam, 0.0),
        )
        return np.linalg.norm(contrib, axis=-1)


class HalfNorm:
    """Non-convex square-root penalty ``lam * sum_i sqrt(|x_i|)``."""

    convex = False

    def __init__(self, lam: float):
        if not lam > 0:
            raise ValueError(f"half-norm weight must be positive, got {lam}")
        self.lam = float(lam)

    def value(self, x):
        return self.lam * np.sum(np.sqrt(np.abs(x)), axis=-1)

    def prox(self, x, tau):
        return prox_half(x, tau * self.lam)

    def dist_to_subdifferential(self, x, grad):
        # At zero coordinates the slopes of sqrt(|t|) diverge, so every real is
        # a limiting subgradient there and the contribution is 0.
        x = np.asarray(x, dtype=float)
        grad = np.asarray(grad, dtype=float)
        nz = x != 0.0
        safe = np.where(nz, np.abs(x), 1.0)
        slope = self.lam * np.sign(x) / (2.0 * np.sqrt(safe))
        contrib = np.where(nz, np.abs(grad + slope), 0.0)
        return np.linalg.norm(contrib, axis=-1)


class CompositeProblem:
    """A smooth loss paired with a regularizer: ``F(x) = f(x) + g(x)``.

    Immutable after construction (the reference optimum cache aside); all
    oracles are pure, so instances are safe to share across workers.
    """

    def __init__(self, f, g, reference=None):
        self.f = f
        self.g = g
        self._reference = None
        if reference is not None:
            x_star, f_star = reference
            x_star = _as_vector(x_star)
            if x_star.shape[0] != f.dim:
                raise ValueError("reference point dimension mismatch")
            actual = float(self.value(x_star))
            if abs(actual - f_star) > 1e-12 * max(1.0, abs(f_star)):
                raise ValueError(
                    f"reference objective {f_star} inconsistent with F(x*) = {actual}"
                )
            self._reference = (x_star, float(f_star))

    @property
    def dim(self) -> int:
        return self.f.dim

    @property
    def lipschitz(self) -> float:
        return self.f.lipschitz

    def value(self, x):
        return self.f.value(x) + self.g.value(x)

    def gradient(self, x):
        return self.f.gradient(x)

    def dist_subgradient(self, x):
        return self.g.dist_to_subdifferential(x, self.f.gradient(x))

    def reference_optimum(self, residual_tol: float = 1e-13,
                          max_prox_evals: int = 10**6):
        """Return ``(x_star, F_star)``, solving for it on first use.

        The solve is a plain proximal gradient loop from the origin with
        ``gamma = 1/L`` run until the fixed-point residual drops below
        ``residual_tol`` (capped at ``max_prox_evals`` applications).  The
        result is cached.
        """
        if self._reference is None:
            gamma = 1.0 / self.lipschitz
            x = np.zeros(self.dim)
            for _ in range(max_prox_evals):
                x_new = self.g.prox(x - gamma * self.f.gradient(x), gamma)
                delta = float(np.linalg.norm(x_new - x))
                x = x_new
                if delta <= residual_tol:
                    break
            self._reference = (x, float(self.value(x)))
        return self._reference


def loss_value(f, x):
    """Value of the smooth loss at ``x``."""
    if np.asarray(x).shape[-1] != f.dim:
        raise ValueError("dimension mismatch between loss and point")
    return f.value(x)


def loss_gradient(f, x):
    """Gradient of the smooth loss at ``x``."""
    if np.asarray(x).shape[-1] != f.dim:
        raise ValueError("dimension mismatch between loss and point")
    return f.gradient(x)


def lipschitz_constant(f) -> float:
    """Cached Lipschitz upper bound for the gradient of the loss."""
    return f.lipschitz


def reg_value(g, x):
    """Value of the regularizer at ``x``."""
    return g.value(x)


def dist_subgradient(problem: CompositeProblem, x):
    """Exact Euclidean distance from 0 to the subdifferential of ``F`` at ``x``."""
    return problem.dist_subgradient(x)
