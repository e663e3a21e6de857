"""Worst-case weak-descent recurrences and their convergence-rate envelopes.

A sequence obeying the weak descent property together with a
Kurdyka-Lojasiewicz-type sharpness bound satisfies, per step,

    r_{k+1} + (a_k / C^2) * r_{k+1}^(2 - 2*theta)  <=  r_k ,

where ``r_k`` is the functional error, ``theta in (0, 1]`` encodes the
landscape sharpness, ``C > 0`` the sharpness constant, and ``(a_k)`` the
per-step descent coefficients (``sum a_k`` must diverge).  The *equality*
sequence is the pointwise largest one allowed, which makes the rate table
sharply testable: every conforming run must decay at least as fast.

The nine (coefficient regime x theta class) envelope cells:

    regime          theta in (0, 0.5)        theta in [0.5, 1)         theta = 1
    (a) constant    k^(-1/(1-2 theta))       factor C^2/(C^2+a)        finite
    (b) c/k^d       k^(-1-(2t-d)/(1-2t))     exp(-C'/(2C^2) k^(1-d))   finite
    (c) c/k         log(k)^(-1/(1-2 theta))  k^(-C''/(2C^2))           finite

with ``C' = liminf s_k / k^(1-d)``, ``C'' = liminf s_k / log k`` and
``s_k = sum_{l<=k} min(a_l, 2 C^2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "CoefficientSequence",
    "KLRecurrence",
    "RateEnvelope",
    "KLFit",
    "EnvelopeReport",
    "simulate_recurrence",
    "finite_termination_bound",
    "envelope",
    "check_envelope",
    "estimate_liminf_constants",
    "kl_constant_estimate",
    "weak_descent_coefficients",
    "classify_regime",
    "minimal_kl_constant",
]


@dataclass(frozen=True)
class CoefficientSequence:
    """Descent coefficients ``a_k`` of one of the three declared regimes.

    ``constant``: a_k = c;  ``power``: a_k = c/(k+1)^d with d in (0,1);
    ``harmonic``: a_k = c/(k+1).  Indexing starts at k = 0.  All three have a
    divergent sum, which the convergence claims require.
    """

    kind: str
    c: float
    d: float = 0.0

    def __post_init__(self):
        if self.kind not in ("constant", "power", "harmonic"):
            raise ValueError(f"unknown coefficient regime {self.kind!r}")
        if not self.c > 0:
            raise ValueError("coefficient scale must be positive")
        if self.kind == "power" and not 0.0 < self.d < 1.0:
            raise ValueError("power regime needs d in (0, 1)")

    @property
    def regime(self) -> str:
        return {"constant": "a", "power": "b", "harmonic": "c"}[self.kind]

    def value(self, k: int) -> float:
        if self.kind == "constant":
            return self.c
        if self.kind == "power":
            return self.c / (k + 1.0) ** self.d
        return self.c / (k + 1.0)

    def values(self, count: int) -> np.ndarray:
        k = np.arange(count, dtype=float)
        if self.kind == "constant":
            return np.full(count, self.c)
        if self.kind == "power":
            return self.c / (k + 1.0) ** self.d
        return self.c / (k + 1.0)


@dataclass(frozen=True)
class KLRecurrence:
    """Parameters of the worst-case weak-descent recurrence."""

    r0: float
    theta: float
    C: float
    a_seq: CoefficientSequence

    def __post_init__(self):
        if not self.r0 > 0:
            raise ValueError("r0 must be positive")
        if not 0.0 < self.theta <= 1.0:
            raise ValueError("theta must lie in (0, 1]")
        if not self.C > 0:
            raise ValueError("C must be positive")


def _solve_step(r_prev: float, q: float, p: float) -> float:
    """Root of ``r + q * r**p = r_prev`` in (0, r_prev], q >= 0, p in (0, 2).

    The left side is strictly increasing in ``r``, so the root is unique.
    ``p = 1`` and ``p = 0.5`` are exact; other exponents use Newton from
    ``r_prev`` (monotone from above for this profile) with halving as the
    safeguard, refined to ~1e-15 relative.
    """
    if q == 0.0 or r_prev == 0.0:
        return r_prev
    if p == 1.0:
        return r_prev / (1.0 + q)
    if p == 0.5:
        s = 0.5 * (-q + math.sqrt(q * q + 4.0 * r_prev))
        return s * s
    r = r_prev
    for _ in range(200):
        f = r + q * r**p - r_prev
        if f <= 0.0:
            break
        fp = 1.0 + q * p * r ** (p - 1.0)
        r_new = r - f / fp
        if r_new <= 0.0:
            r_new = 0.5 * r
        if abs(r - r_new) <= 1e-15 * r_new:
            r = r_new
            break
        r = r_new
    return max(r, 0.0)


def simulate_recurrence(rec: KLRecurrence, count: int) -> np.ndarray:
    """Worst-case error sequence ``r_0 .. r_count`` (length ``count + 1``).

    Each step solves the recurrence *equality*, the extremal case allowed by
    the inequality.  For ``theta = 1`` the equality is linear,
    ``r_{k+1} = max(r_k - a_k / C^2, 0)``, evaluated through a compensated
    running sum so finite termination lands on the exact index.
    """
    if count < 1:
        raise ValueError("need at least one step")
    c_sq = rec.C * rec.C
    out = np.empty(count + 1)
    out[0] = rec.r0
    if rec.theta == 1.0:
        total, comp = 0.0, 0.0  # Kahan-compensated sum of a_k
        for k in range(count):
            y = rec.a_seq.value(k) - comp
            t = total + y
            comp = (t - total) - y
            total = t
            out[k + 1] = max(rec.r0 - (total + comp) / c_sq, 0.0)
        return out
    p = 2.0 - 2.0 * rec.theta
    r = rec.r0
    for k in range(count):
        r = _solve_step(r, rec.a_seq.value(k) / c_sq, p)
        if r < 1e-315:
            # below the normal float range subnormal rounding destroys the
            # rate content (ratios can round back to 1), so truncate to zero
            r = 0.0
        out[k + 1] = r
    return out


def finite_termination_bound(rec: KLRecurrence) -> int:
    """First sequence index guaranteed exactly zero in the theta = 1 column.

    The worst-case sequence has ``r_{k+1} = 0`` for every ``k >= K`` with
    ``K = inf{k : sum_{l<=k} a_l > C^2 * r0}``, so this returns ``K + 1``
    (the value at index ``K`` itself may or may not already be zero).
    """
    target = rec.C * rec.C * rec.r0
    total, comp = 0.0, 0.0
    for k in range(10_000_000):
        y = rec.a_seq.value(k) - comp
        t = total + y
        comp = (t - total) - y
        total = t
        if total + comp > target:
            return k + 1
    raise RuntimeError("coefficient sum did not exceed the termination target")


@dataclass(frozen=True)
class RateEnvelope:
    """One cell of the rate table, reduced to its falsifiable content.

    ``kind`` picks the model fitted against a sequence and ``expected`` the
    quantity compared (log-log slope, per-step factor, stretch exponent, or a
    termination index).  Leading constants of the power/exp bounds are free.
    """

    regime: str
    theta: float
    kind: str  # "power" | "log_power" | "geometric" | "stretched_exp" | "finite"
    expected: float
    description: str


def envelope(regime: str, theta: float, *, a: float | None = None,
             d: float | None = None, C: float | None = None,
             C_prime: float | None = None, C_dprime: float | None = None,
             termination_index: int | None = None) -> RateEnvelope:
    """Closed-form rate envelope for one (regime, theta) cell.

    Constants are only needed where the cell's falsifiable quantity uses
    them: ``a`` and ``C`` for the geometric factor, ``C_dprime`` and ``C``
    for the harmonic-regime power law, ``d`` for regime (b), and
    ``termination_index`` for ``theta = 1``.
    """
    if regime not in ("a", "b", "c"):
        raise ValueError(f"regime must be one of a, b, c; got {regime!r}")
    if not 0.0 < theta <= 1.0:
        raise ValueError(f"theta must lie in (0, 1], got {theta}")
    if theta == 1.0:
        if termination_index is None:
            raise ValueError("theta = 1 envelope needs the termination index")
        return RateEnvelope(regime, theta, "finite", float(termination_index),
                            f"exact zero at k <= {termination_index}")
    if theta < 0.5:
        if regime == "a":
            slope = -1.0 / (1.0 - 2.0 * theta)
            return RateEnvelope(regime, theta, "power", slope,
                                f"r_k = O(k^{slope:.6g})")
        if regime == "b":
            if d is None:
                raise ValueError("regime (b) envelope needs d")
            slope = -(1.0 + (2.0 * theta - d) / (1.0 - 2.0 * theta))
            return RateEnvelope(regime, theta, "power", slope,
                                f"r_k = O(k^{slope:.6g})")
        slope = -1.0 / (1.0 - 2.0 * theta)
        return RateEnvelope(regime, theta, "log_power", slope,
                            f"r_k = O(log(k)^{slope:.6g})")
    # theta in [0.5, 1)
    if regime == "a":
        if a is None or C is None:
            raise ValueError("regime (a) geometric envelope needs a and C")
        factor = C * C / (C * C + a)
        return RateEnvelope(regime, theta, "geometric", factor,
                            f"r_{{k+1}} <= {factor:.12g} * r_k")
    if regime == "b":
        if d is None:
            raise ValueError("regime (b) envelope needs d")
        return RateEnvelope(regime, theta, "stretched_exp", 1.0 - d,
                            f"r_k = O(exp(-c * k^{1.0 - d:.6g}))")
    if C_dprime is None or C is None:
        raise ValueError("regime (c) envelope needs C'' and C")
    slope = -C_dprime / (2.0 * C * C)
    return RateEnvelope(regime, theta, "power", slope,
                        f"r_k = O(k^{slope:.6g})")


def estimate_liminf_constants(a_seq: CoefficientSequence, count: int,
                              C: float) -> tuple[float, float]:
    """Estimate ``C'`` and ``C''`` from truncated partial sums.

    Uses ``s_k = sum min(a_l, 2 C^2)`` over the horizon and averages the
    ratios over the last decade, since no finite run reaches the liminf.
    """
    a_trunc = np.minimum(a_seq.values(count), 2.0 * C * C)
    s = np.cumsum(a_trunc)
    k = np.arange(1, count + 1, dtype=float)
    tail = slice(int(count * 0.9), count)
    d = a_seq.d if a_seq.kind == "power" else 0.0
    c_prime = float(np.mean(s[tail] / k[tail] ** (1.0 - d)))
    c_dprime = float(np.mean(s[tail] / np.log(k[tail] + 1.0)))
    return c_prime, c_dprime


@dataclass(frozen=True)
class EnvelopeReport:
    kind: str
    fitted: float
    expected: float
    passed: bool
    detail: str = ""


def _fit_line(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    slope, intercept = np.polyfit(x, y, 1)
    return float(slope), float(intercept)


def check_envelope(seq: np.ndarray, env: RateEnvelope,
                   rel_tol: float = 0.10) -> EnvelopeReport:
    """Check a positive decreasing sequence against a rate envelope.

    The envelope cells are upper bounds, so the falsifiable claim is one
    sided: the tail of ``seq`` must not decay more than ``rel_tol`` slower
    than the envelope's rate (slope / per-step factor / stretch exponent).
    Decaying faster conforms.  A sequence that reaches exactly zero decays
    faster than any finite-rate envelope and passes; for the finite cell the
    first zero must not come later than the predicted index.

    The fit uses the tail half of the (positive part of the) sequence.
    """
    seq = np.asarray(seq, dtype=float)
    if seq.size < 100:
        raise ValueError("need at least 100 entries to fit a rate")
    if np.any(seq < 0):
        raise ValueError("sequence must be nonnegative")
    zeros = np.nonzero(seq == 0.0)[0]

    if env.kind == "finite":
        if seq[0] == 0.0:
            return EnvelopeReport("finite", 0.0, env.expected, True,
                                  "degenerate: already at zero")
        if zeros.size == 0:
            return EnvelopeReport("finite", math.inf, env.expected, False,
                                  "never reached zero")
        first = int(zeros[0])
        return EnvelopeReport("finite", float(first), env.expected,
                              first <= env.expected,
                              f"first zero at k = {first}")

    if seq[0] == 0.0:
        raise ValueError("degenerate all-zero sequence has no fittable rate")
    if zeros.size > 0:
        return EnvelopeReport(env.kind, math.inf, env.expected, True,
                              f"hit exact zero at k = {int(zeros[0])}; "
                              "faster than any envelope")

    n = seq.size
    tail = np.arange(n // 2, n)
    r = seq[tail]
    if env.kind == "power":
        slope, _ = _fit_line(np.log(tail.astype(float)), np.log(r))
        passed = -slope >= (1.0 - rel_tol) * (-env.expected)
        return EnvelopeReport("power", slope, env.expected, passed,
                              f"log-log slope over k in [{tail[0]}, {n - 1}]")
    if env.kind == "log_power":
        slope, _ = _fit_line(np.log(np.log(tail.astype(float))), np.log(r))
        passed = -slope >= (1.0 - rel_tol) * (-env.expected)
        return EnvelopeReport("log_power", slope, env.expected, passed,
                              "slope of log r against log log k")
    if env.kind == "geometric":
        rate = float(-np.mean(np.diff(np.log(r))))
        expected_rate = -math.log(env.expected)
        passed = rate >= (1.0 - rel_tol) * expected_rate
        return EnvelopeReport("geometric", math.exp(-rate), env.expected, passed,
                              "per-step factor from mean log decrement")
    if env.kind == "stretched_exp":
        decay = np.log(seq[0] / r)
        ok = decay > 0
        slope, _ = _fit_line(np.log(tail[ok].astype(float)), np.log(decay[ok]))
        passed = slope >= (1.0 - rel_tol) * env.expected
        return EnvelopeReport("stretched_exp", slope, env.expected, passed,
                              "stretch exponent of log(r0/r_k) against k")
    raise ValueError(f"unknown envelope kind {env.kind!r}")


@dataclass(frozen=True)
class KLFit:
    """Sharpness parameters fitted from a solver trace."""

    theta: float
    C: float
    n_points: int
    residual_rms: float


def kl_constant_estimate(trace, f_star: float,
                         window: tuple[float, float] = (1e-10, 1e-2)) -> KLFit:
    """Fit ``log dist = (1 - theta) log(F - F*) - log C`` on a trace.

    Only records with functional error inside ``window`` (and a positive
    exact subdifferential distance) enter the regression; fewer than 10 such
    records is an error.
    """
    r = trace.f_values - f_star
    dist = trace.dist_exact
    mask = (r >= window[0]) & (r <= window[1]) & (dist > 0.0) & np.isfinite(dist)
    if int(mask.sum()) < 10:
        raise ValueError(
            f"only {int(mask.sum())} usable records in the error window {window}"
        )
    log_r = np.log(r[mask])
    log_d = np.log(dist[mask])
    slope, intercept = _fit_line(log_r, log_d)
    resid = log_d - (slope * log_r + intercept)
    return KLFit(theta=1.0 - slope, C=math.exp(-intercept),
                 n_points=int(mask.sum()),
                 residual_rms=float(np.sqrt(np.mean(resid**2))))


def weak_descent_coefficients(alphas, gamma: float, L: float) -> np.ndarray:
    """Per-pair descent coefficients of an alternated-inertia run.

    ``a_k = (2 - alpha_k - gamma L) gamma / (2 (1 + gamma L)^2)``.
    """
    alphas = np.asarray(alphas, dtype=float)
    return (2.0 - alphas - gamma * L) * gamma / (2.0 * (1.0 + gamma * L) ** 2)


def classify_regime(a_values) -> tuple[str, float]:
    """Classify a coefficient sequence as constant / power / harmonic.

    Fits the log-log slope of the tail half; near-zero slope is regime (a),
    slope near -1 regime (c), anything in between regime (b) with the decay
    exponent returned as the second element.
    """
    a_values = np.asarray(a_values, dtype=float)
    if a_values.size < 16:
        raise ValueError("need at least 16 coefficients to classify")
    n = a_values.size
    tail = np.arange(n // 2, n)
    slope, _ = _fit_line(np.log(tail + 1.0), np.log(a_values[tail]))
    d_hat = -slope
    if d_hat <= 0.05:
        return "a", 0.0
    if d_hat >= 0.95:
        return "c", 1.0
    return "b", d_hat


def minimal_kl_constant(r_values, theta: float, a_values) -> float:
    """Smallest ``C`` making every step of a run satisfy the recurrence.

    ``C^2 = max_k a_k r_{k+1}^(2 - 2 theta) / (r_k - r_{k+1})`` over strictly
    decreasing steps with positive errors.  By construction the run then
    satisfies the weak-descent inequality with (theta, C), so the worst-case
    simulation from the same start dominates it.
    """
    r = np.asarray(r_values, dtype=float)
    a = np.asarray(a_values, dtype=float)
    if r.size < 2:
        raise ValueError("need at least one step")
    steps = min(r.size - 1, a.size)
    c_sq = 0.0
    for k in range(steps):
        drop = r[k] - r[k + 1]
        if drop <= 0.0 or r[k + 1] <= 0.0:
            continue
        c_sq = max(c_sq, a[k] * r[k + 1] ** (2.0 - 2.0 * theta) / drop)
    if c_sq == 0.0:
        raise ValueError("no strictly decreasing positive step found")
    return math.sqrt(c_sq)
