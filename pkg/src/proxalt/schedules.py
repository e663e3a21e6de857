"""Inertia coefficient schedules driven by the classical t-recurrences.

A schedule emits ``alpha_{k+1} = (t_k - 1) / t_{k+1}`` with ``t_0 = 0`` and
one of three recurrences for ``t``:

* square-root: ``t_{k+1} = (1 + sqrt(1 + 4 t_k^2)) / 2``
* linear:      ``t_{k+1} = (k + a) / a`` with ``a > 2``
* power:       ``t_{k+1} = ((k + a) / a)^d`` with ``d in (0, 1]`` and
  ``a > max(1, (2d)^(1/d))``

The first emitted coefficient would be ``(t_0 - 1)/t_1 = -1``, which is
meaningless as inertia, so it is forced to 0 (equivalently, the first momentum
term vanishes).  All emissions are clamped to [0, 1].

Schedule state is mutable but confined: use one instance per solver run
(``fresh()`` hands out an unused copy with the same parameters).
"""

from __future__ import annotations

from typing import Iterator

import numpy as np

__all__ = [
    "InertiaSchedule",
    "FixedSchedule",
    "NesterovSqrtSchedule",
    "LinearOverASchedule",
    "PowerOverASchedule",
    "next_alpha",
    "alpha_sequence",
    "parse_schedule",
]


class InertiaSchedule:
    """Base class: a stateful stream of inertia coefficients in [0, 1]."""

    def next_alpha(self) -> float:
        raise NotImplementedError

    def fresh(self) -> "InertiaSchedule":
        """A new, unadvanced schedule with identical parameters."""
        raise NotImplementedError

    @property
    def has_t_sequence(self) -> bool:
        return False

    def t_stream(self) -> Iterator[float]:
        raise TypeError(f"{type(self).__name__} has no t-sequence")


class FixedSchedule(InertiaSchedule):
    """Constant inertia ``alpha`` in [0, 1]."""

    def __init__(self, alpha: float):
        if not 0.0 <= alpha <= 1.0:
            raise ValueError(f"fixed inertia must lie in [0, 1], got {alpha}")
        self.alpha = float(alpha)

    def next_alpha(self) -> float:
        return self.alpha

    def fresh(self) -> "FixedSchedule":
        return FixedSchedule(self.alpha)

    def __repr__(self):
        return f"FixedSchedule({self.alpha})"


class _TRecurrenceSchedule(InertiaSchedule):
    """Shared machinery for schedules derived from a t-recurrence.

    ``raw_ratio=True`` reproduces the literal alternative ratio
    ``t_{k+1} / (t_k - 1)`` (clamped to [0, 1]) instead of the standard
    ``(t_k - 1) / t_{k+1}``; it exists purely as a comparison escape hatch.
    """

    def __init__(self, raw_ratio: bool = False):
        self.raw_ratio = bool(raw_ratio)
        self._k = 0
        self._t = 0.0  # t_0

    def _t_next(self, k: int, t: float) -> float:
        raise NotImplementedError

    @property
    def has_t_sequence(self) -> bool:
        return True

    def t_stream(self) -> Iterator[float]:
        """Yield ``t_0, t_1, ...`` without touching the emission state."""
        k, t = 0, 0.0
        while True:
            yield t
            t = self._t_next(k, t)
            k += 1

    def next_alpha(self) -> float:
        t_next = self._t_next(self._k, self._t)
        if self.raw_ratio:
            denom = self._t - 1.0
            raw = np.inf if denom == 0.0 else t_next / denom
        elif self._k == 0:
            raw = 0.0  # forced: the t_0 = 0 seed gives -1 otherwise
        else:
            raw = (self._t - 1.0) / t_next
        self._k += 1
        self._t = t_next
        return float(min(1.0, max(0.0, raw)))


class NesterovSqrtSchedule(_TRecurrenceSchedule):
    """Square-root recurrence ``t_{k+1} = (1 + sqrt(1 + 4 t_k^2)) / 2``."""

    def _t_next(self, k: int, t: float) -> float:
        return 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))

    def fresh(self) -> "NesterovSqrtSchedule":
        return NesterovSqrtSchedule(raw_ratio=self.raw_ratio)

    def __repr__(self):
        return "NesterovSqrtSchedule()"


class LinearOverASchedule(_TRecurrenceSchedule):
    """Linear recurrence ``t_{k+1} = (k + a) / a`` with ``a > 2``."""

    def __init__(self, a: float, raw_ratio: bool = False):
        if not a > 2.0:
            raise ValueError(f"linear schedule requires a > 2, got {a}")
        super().__init__(raw_ratio=raw_ratio)
        self.a = float(a)

    def _t_next(self, k: int, t: float) -> float:
        return (k + self.a) / self.a

    def fresh(self) -> "LinearOverASchedule":
        return LinearOverASchedule(self.a, raw_ratio=self.raw_ratio)

    def __repr__(self):
        return f"LinearOverASchedule(a={self.a})"


class PowerOverASchedule(_TRecurrenceSchedule):
    """Power recurrence ``t_{k+1} = ((k + a)/a)^d``, ``d in (0, 1]``.

    Inertia then approaches 1 at the slower rate ``1 - alpha_k ~ 1/k^d``.
    """

    def __init__(self, a: float, d: float, raw_ratio: bool = False):
        if not 0.0 < d <= 1.0:
            raise ValueError(f"power schedule requires d in (0, 1], got {d}")
        lower = max(1.0, (2.0 * d) ** (1.0 / d))
        if not a > lower:
            raise ValueError(
                f"power schedule requires a > max(1, (2d)^(1/d)) = {lower}, got {a}"
            )
        super().__init__(raw_ratio=raw_ratio)
        self.a = float(a)
        self.d = float(d)

    def _t_next(self, k: int, t: float) -> float:
        return ((k + self.a) / self.a) ** self.d

    def fresh(self) -> "PowerOverASchedule":
        return PowerOverASchedule(self.a, self.d, raw_ratio=self.raw_ratio)

    def __repr__(self):
        return f"PowerOverASchedule(a={self.a}, d={self.d})"


def next_alpha(schedule: InertiaSchedule) -> float:
    """Advance the schedule and return the next coefficient in [0, 1]."""
    return schedule.next_alpha()


def alpha_sequence(schedule: InertiaSchedule, count: int) -> list[float]:
    """First ``count`` coefficients from a fresh copy of ``schedule``."""
    if count < 1:
        raise ValueError(f"need at least one coefficient, got count={count}")
    s = schedule.fresh()
    return [s.next_alpha() for _ in range(count)]


def parse_schedule(text: str, raw_ratio: bool = False) -> InertiaSchedule:
    """Build a schedule from a compact string.

    Accepted forms: ``fixed:ALPHA``, ``nesterov``, ``linear:A``,
    ``power:A,D``.
    """
    text = text.strip().lower()
    if text == "nesterov":
        return NesterovSqrtSchedule(raw_ratio=raw_ratio)
    kind, _, args = text.partition(":")
    try:
        if kind == "fixed":
            if raw_ratio:
                raise ValueError("raw ratio form needs a t-based schedule")
            return FixedSchedule(float(args))
        if kind == "linear":
            return LinearOverASchedule(float(args), raw_ratio=raw_ratio)
        if kind == "power":
            a_text, _, d_text = args.partition(",")
            return PowerOverASchedule(float(a_text), float(d_text), raw_ratio=raw_ratio)
    except ValueError as exc:
        raise ValueError(f"bad schedule spec {text!r}: {exc}") from None
    raise ValueError(
        f"unknown schedule {text!r}; expected fixed:A, nesterov, linear:A or power:A,D"
    )
