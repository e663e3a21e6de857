"""Proximal operators and the forward-backward (proximal gradient) step.

The thresholding kernels below are pure functions of arrays and broadcast
over leading axes, so a stack of points of shape ``(N, n)`` is processed in
one call.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:  # pragma: no cover - import cycle guard, typing only
    from .objective import CompositeProblem

__all__ = [
    "NonFiniteIterateError",
    "ProxResult",
    "prox_l1",
    "prox_half",
    "prox_gradient_step",
    "residual",
]


class NonFiniteIterateError(RuntimeError):
    """A gradient or iterate stopped being finite.

    The offending point is attached as ``.point``.
    """

    def __init__(self, message: str, point: np.ndarray):
        super().__init__(message)
        self.point = point


def prox_l1(x: np.ndarray, tau) -> np.ndarray:
    """Soft thresholding, the proximal map of ``tau * ||.||_1``.

    Coordinatewise this is the unique minimizer of
    ``tau*|w| + 0.5*(w - x)**2``, i.e. ``sign(x) * max(|x| - tau, 0)``.
    ``tau`` may be a scalar or an array broadcastable against ``x``.
    """
    x = np.asarray(x, dtype=float)
    tau = np.asarray(tau, dtype=float)
    if np.any(tau < 0):
        raise ValueError("soft threshold requires tau >= 0")
    return np.sign(x) * np.maximum(np.abs(x) - tau, 0.0)


def prox_half(x: np.ndarray, tau) -> np.ndarray:
    """Half thresholding, the proximal map of ``tau * sum(sqrt(|.|))``.

    Coordinatewise global minimizer of ``tau*sqrt(|t|) + 0.5*(t - x)**2``.
    With ``u = sqrt(t)`` the stationarity condition for ``t > 0, x > 0`` is
    the depressed cubic ``u**3 - x*u + tau/2 = 0``; its largest root (by the
    trigonometric formula, then a few guarded Newton polish steps) is the only
    candidate competing with ``t = 0``.  The candidate with the smaller
    objective wins and exact ties go to 0, so the operator jumps to zero below
    a threshold magnitude.  Odd symmetry handles ``x < 0``.
    """
    x = np.asarray(x, dtype=float)
    tau = np.asarray(tau, dtype=float)
    if np.any(tau < 0):
        raise ValueError("half thresholding requires tau >= 0")
    a = np.abs(x)
    tau_b = np.broadcast_to(tau, a.shape)
    out = np.zeros_like(a)

    # No interior stationary point exists unless |x| > 3*(tau/4)^(2/3), and
    # that regime sits strictly below the objective tie, so those entries are 0.
    exist = (a > 3.0 * (tau_b / 4.0) ** (2.0 / 3.0)) & (tau_b > 0.0)
    plain = (tau_b == 0.0)
    if np.any(plain):
        out[plain] = a[plain]
    if np.any(exist):
        ae = a[exist]
        te = tau_b[exist]
        cos_arg = np.clip(-(3.0 * np.sqrt(3.0) * te) / (4.0 * ae**1.5), -1.0, 1.0)
        u = 2.0 * np.sqrt(ae / 3.0) * np.cos(np.arccos(cos_arg) / 3.0)
        for _ in range(3):
            cubic = u**3 - ae * u + 0.5 * te
            dcubic = 3.0 * u * u - ae
            safe = dcubic > 1e-12 * np.maximum(ae, 1.0)
            u = u - np.where(safe, cubic / np.where(safe, dcubic, 1.0), 0.0)
        t = u * u
        better = te * u + 0.5 * (t - ae) ** 2 < 0.5 * ae**2
        out[exist] = np.where(better, t, 0.0)
    return np.sign(x) * out


@dataclass(frozen=True)
class ProxResult:
    """One application of the proximal gradient operator.

    ``output = prox_{step * g}(input - step * grad f(input))``.  Carries what
    the descent inequalities need: both points and the step.
    """

    input: np.ndarray
    output: np.ndarray
    step: float

    @property
    def residual(self):
        """Fixed-point residual ``||input - output||`` (per row for stacks)."""
        return np.linalg.norm(self.output - self.input, axis=-1)


def prox_gradient_step(problem: "CompositeProblem", x: np.ndarray, gamma: float) -> ProxResult:
    """Apply ``T_gamma(x) = prox_{gamma g}(x - gamma * grad f(x))``.

    For a zero regularizer this is a plain gradient step.  Raises
    :class:`NonFiniteIterateError` (carrying ``x``) if the gradient is not
    finite.
    """
    if gamma <= 0:
        raise ValueError(f"step size must be positive, got {gamma}")
    x = np.asarray(x, dtype=float)
    with np.errstate(over="ignore", invalid="ignore"):
        grad = problem.f.gradient(x)
    if not np.all(np.isfinite(grad)):
        raise NonFiniteIterateError("gradient is not finite", point=x)
    out = problem.g.prox(x - gamma * grad, gamma)
    return ProxResult(input=x, output=out, step=float(gamma))


def residual(result: ProxResult):
    """Euclidean fixed-point residual of a prox-gradient application."""
    return result.residual
