"""Adaptive Dormand-Prince 5(4) time stepping for the semi-discrete system.

The pair is the FSAL seven-stage scheme, advancing with the fifth-order
solution. Output times are hit exactly by shortening the step that would
overshoot them, so no interpolation error enters the stored states.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .discrete import GridFunction
from .semidiscrete import Problem

# Dormand & Prince (1980), RK5(4)7M.
C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
# difference between the fifth- and fourth-order weights
E = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40])

ORDER = 5
STAGES_PER_STEP = 6  # FSAL: the last stage is reused as the next first stage
SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 5.0
PI_BETA = 0.04


class IntegrationError(RuntimeError):
    pass


class StepSizeUnderflow(IntegrationError):
    pass


class MaxStepsExceeded(IntegrationError):
    pass


@dataclass(frozen=True)
class ToleranceSettings:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-10
    initial_step: Optional[float] = None
    max_step: Optional[float] = None
    max_steps: int = 10 ** 7

    def __post_init__(self):
        for name in ("rel_tol", "abs_tol"):
            val = getattr(self, name)
            if not 0 < val < 1:
                raise ValueError(f"{name} must lie in (0, 1), got {val}")
        if self.max_steps < 1:
            raise ValueError("max_steps must be at least 1")
        if self.initial_step is not None and self.initial_step <= 0:
            raise ValueError("initial_step must be positive")
        if self.max_step is not None and self.max_step <= 0:
            raise ValueError("max_step must be positive")


@dataclass
class IntegrationStats:
    steps_accepted: int = 0
    steps_rejected: int = 0
    rhs_evaluations: int = 0

    def as_dict(self) -> dict:
        return {"steps_accepted": self.steps_accepted,
                "steps_rejected": self.steps_rejected,
                "rhs_evaluations": self.rhs_evaluations}


@dataclass
class IntegrationResult:
    times: np.ndarray
    states: list
    stats: IntegrationStats = field(default_factory=IntegrationStats)

    @property
    def final(self):
        return self.states[-1]


def _initial_step(fun, t0, y0, f0, direction_span, rtol, atol, stats):
    sc = atol + rtol * np.abs(y0)
    d0 = np.max(np.abs(y0) / sc)
    d1 = np.max(np.abs(f0) / sc)
    if d1 == 0.0:
        return direction_span
    h0 = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
    h0 = min(h0, direction_span)
    f1 = fun(t0 + h0, y0 + h0 * f0)
    stats.rhs_evaluations += 1
    d2 = np.max(np.abs(f1 - f0) / sc) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1.0 / ORDER)
    return min(100.0 * h0, h1, direction_span)


def _step(fun, t, y, k1, h):
    ks = [k1]
    for i in range(1, 7):
        yi = y.copy()
        for j, a in enumerate(A[i]):
            if a != 0.0:
                yi += (h * a) * ks[j]
        ks.append(fun(t + C[i] * h, yi))
    # stage 7 is evaluated at the fifth-order solution itself
    y_new = y.copy()
    for j in range(6):
        if A[6][j] != 0.0:
            y_new += (h * A[6][j]) * ks[j]
    err = np.zeros_like(y)
    for j in range(7):
        if E[j] != 0.0:
            err += (h * E[j]) * ks[j]
    return y_new, err, ks[6]


def integrate_ode(fun: Callable[[float, np.ndarray], np.ndarray], y0, t_end: float,
                  output_times: Optional[Sequence[float]] = None,
                  tol: Optional[ToleranceSettings] = None, t0: float = 0.0,
                  fixed_step: Optional[float] = None):
    """Integrate y' = fun(t, y) from t0 to t_end.

    Returns ``(times, states, stats)`` where ``states`` is a 2-D array with
    one row per requested output time (default: ``[t_end]``). With
    ``fixed_step`` the error control is bypassed and every step is taken
    with that size (shortened only to land on output times).
    """
    tol = tol or ToleranceSettings()
    if not t_end > t0:
        raise ValueError("t_end must exceed the start time")
    outs = np.array([t_end] if output_times is None or len(output_times) == 0
                    else output_times, dtype=float)
    if np.any(np.diff(outs) <= 0):
        raise ValueError("output_times must be strictly ascending")
    if outs[0] < t0 or outs[-1] > t_end:
        raise ValueError("output_times must lie within [t0, t_end]")

    stats = IntegrationStats()
    y = np.array(y0, dtype=float, copy=True)
    t = float(t0)
    states = np.empty((outs.size, y.size))
    k = 0
    while k < outs.size and outs[k] <= t:
        states[k] = y
        k += 1
    if k == outs.size:
        return outs, states, stats

    f = fun(t, y)
    stats.rhs_evaluations += 1
    t_stop = float(outs[-1])
    span = t_stop - t
    if fixed_step is not None:
        if fixed_step <= 0:
            raise ValueError("fixed_step must be positive")
        h = float(fixed_step)
    elif tol.initial_step is not None:
        h = tol.initial_step
    else:
        h = _initial_step(fun, t, y, f, span, tol.rel_tol, tol.abs_tol, stats)
    if tol.max_step is not None:
        h = min(h, tol.max_step)
    h_min = 1e-14 * max(abs(t_end), 1.0)
    err_old = 1e-4
    rejected_last = False

    while k < outs.size:
        if stats.steps_accepted + stats.steps_rejected >= tol.max_steps:
            raise MaxStepsExceeded(f"exceeded {tol.max_steps} steps at t={t}")
        target = float(outs[k])
        h_try = h
        hit = False
        if t + h_try >= target - 1e-12 * max(abs(target), 1.0):
            h_try = target - t
            hit = True
        if h_try < h_min:
            raise StepSizeUnderflow(f"step size {h_try:.3g} underflow at t={t}")

        y_new, err_vec, f_new = _step(fun, t, y, f, h_try)
        stats.rhs_evaluations += STAGES_PER_STEP

        if fixed_step is not None:
            accept = True
        else:
            scale = tol.abs_tol + tol.rel_tol * np.maximum(np.abs(y), np.abs(y_new))
            err = float(np.max(np.abs(err_vec) / scale))
            if not np.isfinite(err):
                err = np.inf
            accept = err <= 1.0

        if accept:
            stats.steps_accepted += 1
            t = target if hit else t + h_try
            y, f = y_new, f_new
            if hit:
                states[k] = y
                k += 1
            if fixed_step is None:
                if err == 0.0:
                    factor = MAX_FACTOR
                else:
                    factor = SAFETY * err ** -(1.0 / ORDER - 0.75 * PI_BETA) * err_old ** PI_BETA
                    factor = min(MAX_FACTOR, max(MIN_FACTOR, factor))
                if rejected_last:
                    factor = min(factor, 1.0)
                err_old = max(err, 1e-4)
                # a step shortened to hit an output time does not shrink the controller state
                h = max(h, h_try * factor) if hit else h_try * factor
                rejected_last = False
        else:
            stats.steps_rejected += 1
            factor = MIN_FACTOR if not np.isfinite(err) else max(
                MIN_FACTOR, SAFETY * err ** -(1.0 / ORDER))
            h = h_try * min(1.0, factor)
            rejected_last = True
        if tol.max_step is not None:
            h = min(h, tol.max_step)
    return outs, states, stats


def integrate(p: Problem, t_end: float, output_times: Optional[Sequence[float]] = None,
              tol: Optional[ToleranceSettings] = None, fixed_step: Optional[float] = None
              ) -> IntegrationResult:
    """Advance ``p.initial`` to ``t_end`` and return states at ``output_times``."""
    times, states, stats = integrate_ode(p, p.initial.values, t_end, output_times, tol,
                                         fixed_step=fixed_step)
    return IntegrationResult(times, [GridFunction(p.grid, s) for s in states], stats)
