"""Convolution kernels for nonlocally regularized KdV-type equations.

Each catalog kernel carries its closed form, the analytic first derivative
(the only derivative the solver ever samples), and the third derivative used
solely to estimate the total variation of the measure ``alpha'''``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

ScalarFn = Callable[[np.ndarray], np.ndarray]

_SQRT2 = math.sqrt(2.0)
_SQRT3 = math.sqrt(3.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


class KernelKind(enum.Enum):
    ROSENAU_KDV = "rosenau-kdv"
    ROSENAU_BBM_KDV = "rosenau-bbm-kdv"
    EXPONENTIAL = "exponential"
    GAUSSIAN = "gaussian"
    CUSTOM = "custom"


CATALOG_NAMES = tuple(k.value for k in KernelKind if k is not KernelKind.CUSTOM)


@dataclass(frozen=True)
class Kernel:
    """An even convolution kernel together with its odd first derivative.

    ``alpha`` and ``alpha_prime`` accept floats or arrays. ``alpha_third`` is
    only present for catalog kernels whose third derivative is a function
    (no singular part); it feeds the condition report, never the solver.
    """

    kind: KernelKind
    alpha: ScalarFn
    alpha_prime: ScalarFn
    decay_rate: Optional[float] = None
    satisfies_c2: bool = True
    alpha_third: Optional[ScalarFn] = field(default=None, repr=False)
    name: str = ""

    def __call__(self, x):
        return self.alpha(x)


# Closed forms. All are written in |x| with the sign of odd derivatives
# restored from x, so alpha'(0) = 0 falls out of sign(0) = 0.

def _rosenau_kdv(x):
    s = np.abs(x) / _SQRT2
    return np.exp(-s) * (np.cos(s) + np.sin(s)) / (2.0 * _SQRT2)


def _rosenau_kdv_prime(x):
    s = np.abs(x) / _SQRT2
    return -0.5 * np.sign(x) * np.exp(-s) * np.sin(s)


def _rosenau_kdv_third(x):
    s = np.abs(x) / _SQRT2
    return 0.5 * np.sign(x) * np.exp(-s) * np.cos(s)


def _rosenau_bbm(x):
    ax = np.abs(x)
    return (np.exp(-0.5 * _SQRT3 * ax) * (np.cos(0.5 * ax) + _SQRT3 * np.sin(0.5 * ax))
            / (2.0 * _SQRT3))


def _rosenau_bbm_prime(x):
    ax = np.abs(x)
    return -np.sign(x) * np.exp(-0.5 * _SQRT3 * ax) * np.sin(0.5 * ax) / _SQRT3


def _rosenau_bbm_third(x):
    ax = np.abs(x)
    return (np.sign(x) * np.exp(-0.5 * _SQRT3 * ax) * np.cos(0.5 * ax + math.pi / 6.0)
            / _SQRT3)


def _exponential(x):
    return 0.5 * np.exp(-np.abs(x))


def _exponential_prime(x):
    return -0.5 * np.sign(x) * np.exp(-np.abs(x))


def _gaussian(x):
    x = np.asarray(x, dtype=float)
    return _INV_SQRT_2PI * np.exp(-0.5 * x * x)


def _gaussian_prime(x):
    return -np.asarray(x, dtype=float) * _gaussian(x)


def _gaussian_third(x):
    x = np.asarray(x, dtype=float)
    return x * (3.0 - x * x) * _gaussian(x)


def make_kernel(kind) -> Kernel:
    """Build a catalog kernel from a :class:`KernelKind` or its string name."""
    kind = KernelKind(kind) if not isinstance(kind, KernelKind) else kind
    if kind is KernelKind.ROSENAU_KDV:
        return Kernel(kind, _rosenau_kdv, _rosenau_kdv_prime, decay_rate=1.0 / _SQRT2,
                      alpha_third=_rosenau_kdv_third, name=kind.value)
    if kind is KernelKind.ROSENAU_BBM_KDV:
        return Kernel(kind, _rosenau_bbm, _rosenau_bbm_prime, decay_rate=0.5 * _SQRT3,
                      alpha_third=_rosenau_bbm_third, name=kind.value)
    if kind is KernelKind.EXPONENTIAL:
        # alpha' jumps at the origin, so alpha''' is not a finite measure.
        return Kernel(kind, _exponential, _exponential_prime, decay_rate=1.0,
                      satisfies_c2=False, name=kind.value)
    if kind is KernelKind.GAUSSIAN:
        return Kernel(kind, _gaussian, _gaussian_prime, decay_rate=None,
                      alpha_third=_gaussian_third, name=kind.value)
    raise ValueError("custom kernels are built with custom_kernel()")


def custom_kernel(alpha: ScalarFn, alpha_prime: ScalarFn, decay_rate: Optional[float] = None,
                  satisfies_c2: bool = True, name: str = "custom") -> Kernel:
    """Wrap a user-supplied (alpha, alpha') pair. No differentiation is done here."""
    if decay_rate is not None and decay_rate <= 0:
        raise ValueError("decay_rate must be positive")
    return Kernel(KernelKind.CUSTOM, alpha, alpha_prime, decay_rate=decay_rate,
                  satisfies_c2=satisfies_c2, name=name)


def eval_alpha(k: Kernel, x):
    out = k.alpha(x)
    return float(out) if np.ndim(out) == 0 else out


def eval_alpha_prime(k: Kernel, x):
    out = k.alpha_prime(x)
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class ConditionReport:
    """Quadrature estimates behind the kernel admissibility conditions.

    ``mu_total_variation`` is ``None`` when the third derivative is not a
    finite measure.
    """

    kernel: str
    alpha_l1: float
    alpha_prime_l1: float
    alpha_second_l1: float
    mu_total_variation: Optional[float]
    satisfies_c2: bool
    converged: bool
    quad_step: float
    quad_halfwidth: float

    @property
    def w21_norm(self) -> float:
        return self.alpha_l1 + self.alpha_prime_l1 + self.alpha_second_l1


def _trapezoid(y: np.ndarray, step: float) -> float:
    return float(step * (y.sum() - 0.5 * (y[0] + y[-1])))


def _condition_estimates(k: Kernel, q: float, halfwidth: float) -> tuple:
    n = int(round(halfwidth / q))
    x = q * np.arange(-n, n + 1)
    a1 = np.asarray(k.alpha_prime(x), dtype=float)
    # alpha'' from a central difference of alpha' on the quadrature step
    a2 = (np.asarray(k.alpha_prime(x + q), dtype=float)
          - np.asarray(k.alpha_prime(x - q), dtype=float)) / (2.0 * q)
    est = [
        _trapezoid(np.abs(np.asarray(k.alpha(x), dtype=float)), q),
        _trapezoid(np.abs(a1), q),
        _trapezoid(np.abs(a2), q),
    ]
    if not k.satisfies_c2:
        est.append(None)
    elif k.alpha_third is not None:
        # alpha''' is smooth away from 0; integrate each half-line separately
        # so a jump at the origin is not smeared across a panel.
        xp = q * np.arange(0, n + 1)
        xp[0] = np.finfo(float).tiny  # one-sided limit at the origin
        right = np.abs(np.asarray(k.alpha_third(xp), dtype=float))
        left = np.abs(np.asarray(k.alpha_third(-xp), dtype=float))
        est.append(_trapezoid(right, q) + _trapezoid(left, q))
    else:
        a1_ext = np.asarray(k.alpha_prime(q * np.arange(-n - 1, n + 2)), dtype=float)
        a3 = (a1_ext[2:] - 2.0 * a1_ext[1:-1] + a1_ext[:-2]) / (q * q)
        est.append(_trapezoid(np.abs(a3), q))
    return tuple(est)


def verify_conditions(k: Kernel, quad_step: float = 1e-3, quad_halfwidth: float = 60.0,
                      rtol: float = 0.01) -> ConditionReport:
    """Estimate the W^{2,1} norm pieces and |mu|(R) by the trapezoidal rule.

    The estimates are repeated at half the step; if any moves by more than
    ``rtol`` (relative) the report is marked ``converged=False``.
    """
    if quad_step <= 0 or quad_halfwidth <= 0:
        raise ValueError("quad_step and quad_halfwidth must be positive")
    coarse = _condition_estimates(k, quad_step, quad_halfwidth)
    fine = _condition_estimates(k, 0.5 * quad_step, quad_halfwidth)
    converged = True
    for a, b in zip(coarse, fine):
        if a is None:
            continue
        if not (np.isfinite(a) and np.isfinite(b)) or abs(a - b) > rtol * max(abs(b), 1e-300):
            converged = False
    a0, a1, a2, mu = fine
    return ConditionReport(
        kernel=k.name or k.kind.value,
        alpha_l1=a0,
        alpha_prime_l1=a1,
        alpha_second_l1=a2,
        mu_total_variation=mu,
        satisfies_c2=k.satisfies_c2,
        converged=converged,
        quad_step=quad_step,
        quad_halfwidth=quad_halfwidth,
    )
