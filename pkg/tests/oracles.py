"""Independent brute-force oracles used to freeze expected values.

These deliberately avoid the library's closed forms: 1-D proxes are found by
dense grid search, golden-section refinement, and a final bisection on the
objective's derivative (value comparisons alone cannot localize a smooth
minimum better than sqrt(eps), so the derivative sign supplies the last
digits); gradients come from central finite differences, spectra from dense
eigendecomposition.
"""

import numpy as np

_GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


def golden_min(fun, lo, hi, iters=90):
    """Golden-section minimizer of a unimodal scalar function on [lo, hi]."""
    c = hi - _GOLDEN * (hi - lo)
    d = lo + _GOLDEN * (hi - lo)
    for _ in range(iters):
        if fun(c) < fun(d):
            hi = d
        else:
            lo = c
        c = hi - _GOLDEN * (hi - lo)
        d = lo + _GOLDEN * (hi - lo)
    return 0.5 * (lo + hi)


def _derivative_bisect(dobj, t, iters=200):
    """Polish an interior stationary point by bisecting the derivative sign."""
    lo, hi = 0.999 * t, 1.001 * t
    for _ in range(60):  # expand until the derivative changes sign
        if dobj(lo) < 0.0 < dobj(hi):
            break
        lo *= 0.99
        hi *= 1.01
    else:
        return t
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if dobj(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def scalar_prox_oracle(penalty, penalty_prime, x, tau, grid=200_001):
    """Minimize ``tau*penalty(t) + 0.5*(t-x)^2`` by grid + golden + bisection.

    ``penalty`` is a vectorized nonnegative even function with penalty(0)=0,
    so the minimizer lies between 0 and x; ties resolve to 0.
    """
    sign = np.sign(x)
    a = abs(x)
    if a == 0.0:
        return 0.0

    def objective(t):
        return tau * penalty(t) + 0.5 * (t - a) ** 2

    def dobjective(t):
        return tau * penalty_prime(t) + (t - a)

    ts = np.linspace(0.0, 1.5 * a, grid)
    i = int(np.argmin(objective(ts)))
    lo = ts[max(i - 1, 0)]
    hi = ts[min(i + 1, grid - 1)]
    t_best = golden_min(objective, lo, hi)
    if t_best > 0.0:
        t_best = _derivative_bisect(dobjective, t_best)
    if objective(t_best) >= objective(0.0):
        t_best = 0.0
    return sign * t_best


def prox_l1_oracle(x, tau, grid=200_001):
    return scalar_prox_oracle(np.abs, lambda t: 1.0, x, tau, grid=grid)


def prox_half_oracle(x, tau, grid=200_001):
    return scalar_prox_oracle(
        lambda t: np.sqrt(np.abs(t)),
        lambda t: 0.5 / np.sqrt(t),
        x, tau, grid=grid,
    )


def central_difference_gradient(value_fun, x, h=1e-6):
    """Central finite differences, one batched evaluation per call."""
    n = x.size
    eye = np.eye(n)
    plus = x[None, :] + h * eye
    minus = x[None, :] - h * eye
    return (value_fun(plus) - value_fun(minus)) / (2.0 * h)


def top_eigenvalue_oracle(A):
    """Largest eigenvalue of A.T A by full symmetric eigendecomposition."""
    return float(np.linalg.eigvalsh(A.T @ A)[-1])
