"""The truncated semi-discrete system dv/dt = -a'_h * f(v) - kappa (D2 a'_h) * v."""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from .discrete import (
    ConvolutionWeights,
    FFTConvolver,
    GridFunction,
    NonFiniteError,
    UniformGrid,
    build_weights,
    convolve_direct,
)
from .kernels import Kernel

DEFAULT_BLOWUP_GUARD = 1e6


class BlowUpError(FloatingPointError):
    """The sup norm of the state left the admissible range during a rhs call."""

    def __init__(self, message: str, index: Optional[int] = None, t: Optional[float] = None):
        super().__init__(message)
        self.index = index
        self.t = t


class NonlinearityKind(enum.Enum):
    LINEAR_PLUS_QUADRATIC = "linear-plus-quadratic"
    POLYNOMIAL = "polynomial"
    CUSTOM = "custom"


@dataclass(frozen=True)
class Nonlinearity:
    """A pointwise nonlinearity with f(0) = 0.

    For polynomial kinds ``coefficients`` maps power -> coefficient and
    ``evaluate`` is generated from it.
    """

    kind: NonlinearityKind
    evaluate: Callable[[np.ndarray], np.ndarray]
    coefficients: dict = field(default_factory=dict)
    spec: str = ""

    def __post_init__(self):
        f0 = float(np.asarray(self.evaluate(np.zeros(1)))[0])
        if abs(f0) > 1e-15:
            raise ValueError(f"nonlinearity must vanish at 0, got f(0) = {f0}")

    def __call__(self, u):
        return self.evaluate(u)

    @property
    def linear_coefficient(self) -> float:
        return float(self.coefficients.get(1, 0.0))

    def nonlinear_part(self, u):
        """f(u) minus its linear term (for polynomial kinds; f itself otherwise)."""
        if self.kind is NonlinearityKind.CUSTOM:
            return self.evaluate(u)
        return self.evaluate(u) - self.linear_coefficient * u

    def lipschitz(self, bound: float) -> float:
        """Upper bound on |f'(u)| for |u| <= bound (polynomial kinds)."""
        if self.kind is NonlinearityKind.CUSTOM:
            raise ValueError("no Lipschitz bound for custom nonlinearities")
        return float(sum(abs(c) * p * bound ** (p - 1) for p, c in self.coefficients.items()))


def polynomial(coefficients: dict, spec: str = "") -> Nonlinearity:
    coeffs = {int(p): float(c) for p, c in coefficients.items() if c != 0}
    if any(p < 1 for p in coeffs):
        raise ValueError("constant term not allowed: f(0) must be 0")
    powers = sorted(coeffs)

    def evaluate(u):
        u = np.asarray(u, dtype=float)
        out = np.zeros_like(u)
        for p in powers:
            out = out + coeffs[p] * u ** p
        return out

    kind = (NonlinearityKind.LINEAR_PLUS_QUADRATIC if coeffs == {1: 1.0, 2: 0.5}
            else NonlinearityKind.POLYNOMIAL)
    return Nonlinearity(kind, evaluate, coeffs, spec or format_polynomial(coeffs))


def linear_plus_quadratic() -> Nonlinearity:
    """f(u) = u + u^2/2, used in every reference experiment."""
    return polynomial({1: 1.0, 2: 0.5}, "u + u^2/2")


def custom_nonlinearity(f: Callable, spec: str = "custom") -> Nonlinearity:
    return Nonlinearity(NonlinearityKind.CUSTOM, f, {}, spec)


_TERM = re.compile(
    r"^(?:(?P<coef>\d+(?:\.\d*)?(?:[eE][-+]?\d+)?|\.\d+(?:[eE][-+]?\d+)?)\s*\*?\s*)?"
    r"(?P<u>u(?:\s*(?:\^|\*\*)\s*(?P<pow>\d+))?)?"
    r"(?:\s*/\s*(?P<den>\d+(?:\.\d*)?))?$"
)


def parse_nonlinearity(text: str) -> Nonlinearity:
    """Parse strings like ``"u + u^2/2"`` or ``"0.5*u^3 - 2*u"``."""
    src = text.strip()
    if not src:
        raise ValueError("empty nonlinearity")
    tokens = re.split(r"(?<![eE])([+-])", src.replace(" ", ""))
    coeffs: dict[int, Fraction] = {}
    sign = 1
    expect_term = True
    for tok in tokens:
        if tok == "":
            continue
        if tok in ("+", "-"):
            if tok == "-":
                sign = -sign
            expect_term = True
            continue
        if not expect_term:
            raise ValueError(f"missing operator before {tok!r} in {text!r}")
        m = _TERM.match(tok)
        if not m or not m.group("u"):
            raise ValueError(f"cannot parse term {tok!r} in {text!r} "
                             "(constant terms are not allowed)")
        c = Fraction(m.group("coef")) if m.group("coef") else Fraction(1)
        if m.group("den"):
            c /= Fraction(m.group("den"))
        p = int(m.group("pow")) if m.group("pow") else 1
        if p < 1:
            raise ValueError("constant term not allowed: f(0) must be 0")
        coeffs[p] = coeffs.get(p, Fraction(0)) + sign * c
        sign = 1
        expect_term = False
    if expect_term:
        raise ValueError(f"dangling operator in {text!r}")
    return polynomial({p: float(c) for p, c in coeffs.items()}, src)


def format_polynomial(coeffs: dict) -> str:
    parts = []
    for p in sorted(coeffs):
        c = coeffs[p]
        body = "u" if p == 1 else f"u^{p}"
        parts.append(body if c == 1 else f"{c!r}*{body}")
    return " + ".join(parts)


@dataclass(frozen=True, eq=False)
class Problem:
    """Kernel, nonlinearity and grid with both weight vectors precomputed.

    ``weights_lin`` already carries the kappa factor.
    """

    kernel: Kernel
    nonlinearity: Nonlinearity
    kappa: float
    grid: UniformGrid
    initial: GridFunction
    weights_nl: ConvolutionWeights
    weights_lin: ConvolutionWeights
    method: str = "fft"
    fused: bool = False
    blowup_guard: float = DEFAULT_BLOWUP_GUARD
    _ops: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.method == "fft":
            m = self.grid.m
            if self.fused:
                a1 = self.nonlinearity.linear_coefficient
                self._ops["nl"] = FFTConvolver(self.weights_nl, m)
                self._ops["lin"] = FFTConvolver(self.weights_nl.scaled(a1) + self.weights_lin, m)
            else:
                self._ops["nl"] = FFTConvolver(self.weights_nl, m)
                self._ops["lin"] = FFTConvolver(self.weights_lin, m)
        elif self.method != "direct":
            raise ValueError(f"unknown convolution method {self.method!r}")

    def __call__(self, t: float, v: np.ndarray) -> np.ndarray:
        return rhs_values(self, v, t)

    @property
    def size(self) -> int:
        return self.grid.m


def assemble(kernel: Kernel, nonlinearity: Nonlinearity, kappa: float, grid: UniformGrid,
             initial: GridFunction, halfwidth: Optional[int] = None, method: str = "fft",
             fused: bool = False, blowup_guard: float = DEFAULT_BLOWUP_GUARD) -> Problem:
    """Precompute the convolution weights and return the ODE system.

    ``halfwidth`` defaults to m - 1, i.e. every lag x_i - x_j on the grid.
    """
    if not kappa > 0:
        raise ValueError(f"kappa must be positive, got {kappa}")
    if initial.grid != grid:
        raise ValueError("initial data does not live on the problem grid")
    K = grid.m - 1 if halfwidth is None else int(halfwidth)
    if not 1 <= K:
        raise ValueError("halfwidth must be at least 1")
    w_nl = build_weights(kernel, grid.h, K, apply_d2=False)
    w_lin = build_weights(kernel, grid.h, K, apply_d2=True).scaled(kappa)
    return Problem(kernel, nonlinearity, float(kappa), grid, initial, w_nl, w_lin,
                   method=method, fused=fused, blowup_guard=blowup_guard)


def rhs_values(p: Problem, v: np.ndarray, t: Optional[float] = None) -> np.ndarray:
    """Array-level right-hand side used by the integrator."""
    vmax = float(np.max(np.abs(v)))
    if not np.isfinite(vmax):
        idx = int(np.flatnonzero(~np.isfinite(v))[0])
        raise BlowUpError(f"non-finite state at node {idx} (t={t})", idx, t)
    if vmax > p.blowup_guard:
        idx = int(np.argmax(np.abs(v)))
        raise BlowUpError(f"sup norm {vmax:.3g} exceeds guard {p.blowup_guard:.3g} "
                          f"at node {idx} (t={t})", idx, t)
    f = p.nonlinearity
    if p.fused:
        nl_in = f.nonlinear_part(v)
    else:
        nl_in = f(v)
    if p.method == "fft":
        out = -(p._ops["nl"](nl_in) + p._ops["lin"](v))
    else:
        lin_w = p.weights_lin
        if p.fused:
            lin_w = p.weights_nl.scaled(f.linear_coefficient) + lin_w
        out = -(convolve_direct(p.weights_nl.values, nl_in) + convolve_direct(lin_w.values, v))
    if not np.all(np.isfinite(out)):
        idx = int(np.flatnonzero(~np.isfinite(out))[0])
        raise BlowUpError(f"non-finite rhs at node {idx} (t={t})", idx, t)
    return out


def rhs(p: Problem, v: GridFunction, t: Optional[float] = None) -> GridFunction:
    if v.grid != p.grid:
        raise ValueError("state does not live on the problem grid")
    return GridFunction(p.grid, rhs_values(p, v.values, t))


__all__ = [
    "BlowUpError",
    "NonFiniteError",
    "Nonlinearity",
    "NonlinearityKind",
    "Problem",
    "assemble",
    "custom_nonlinearity",
    "linear_plus_quadratic",
    "parse_nonlinearity",
    "polynomial",
    "rhs",
    "rhs_values",
]
