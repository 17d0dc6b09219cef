"""Uniform grids, grid functions and the discrete convolution toolkit."""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np
from scipy import fft as sfft

from .kernels import Kernel

TAIL_WARN = 1e-14


class MeshMismatchError(ValueError):
    pass


class NonFiniteError(ValueError):
    """Raised when a grid sample or intermediate value is NaN or infinite."""

    def __init__(self, message: str, index: int | None = None):
        super().__init__(message)
        self.index = index


@dataclass(frozen=True)
class UniformGrid:
    x_left: float
    h: float
    m: int

    def __post_init__(self):
        if not (self.h > 0 and math.isfinite(self.h)):
            raise ValueError(f"mesh size must be positive, got {self.h}")
        if self.m < 3:
            raise ValueError(f"a grid needs at least 3 nodes, got {self.m}")

    @classmethod
    def from_domain(cls, x_left: float, x_right: float, h: float, tol: float = 1e-9):
        """Grid covering [x_left, x_right] with both endpoints as nodes."""
        if not x_right > x_left:
            raise ValueError("empty domain")
        if h <= 0:
            raise ValueError(f"mesh size must be positive, got {h}")
        cells = (x_right - x_left) / h
        n = round(cells)
        if abs(cells - n) > tol * max(1.0, cells):
            raise ValueError(f"h={h} does not divide the domain width {x_right - x_left}")
        return cls(float(x_left), float(h), int(n) + 1)

    @classmethod
    def symmetric(cls, N: int, h: float):
        """The grid x_i = i h, -N <= i <= N."""
        return cls(-N * h, float(h), 2 * N + 1)

    @property
    def nodes(self) -> np.ndarray:
        return self.x_left + self.h * np.arange(self.m)

    @property
    def x_right(self) -> float:
        return self.x_left + (self.m - 1) * self.h


@dataclass(frozen=True, eq=False)
class GridFunction:
    grid: UniformGrid
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (self.grid.m,):
            raise ValueError(f"expected {self.grid.m} values, got shape {vals.shape}")
        bad = np.flatnonzero(~np.isfinite(vals))
        if bad.size:
            raise NonFiniteError(f"non-finite value at node {bad[0]}", int(bad[0]))
        object.__setattr__(self, "values", vals)

    @property
    def x(self) -> np.ndarray:
        return self.grid.nodes

    def to_csv(self, path, exact: np.ndarray | None = None) -> None:
        """Write "x,u" rows (plus "u_exact" when given) at 17 significant digits."""
        write_columns(path, ["x", "u"] + (["u_exact"] if exact is not None else []),
                      [self.x, self.values] + ([exact] if exact is not None else []))

    @classmethod
    def from_csv(cls, path) -> "GridFunction":
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        x = data[:, 0]
        h = (x[-1] - x[0]) / (len(x) - 1)
        return cls(UniformGrid(float(x[0]), float(h), len(x)), data[:, 1])


def fmt(v) -> str:
    """17 significant digits; None becomes an empty field, strings pass through."""
    if v is None:
        return ""
    if isinstance(v, str):
        return v
    return format(float(v), ".17g")


def write_columns(path, header: list[str], columns: list[np.ndarray]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in zip(*columns):
            w.writerow([fmt(v) for v in row])


def restrict(f: Callable, grid: UniformGrid) -> GridFunction:
    """Sample f at the grid nodes."""
    vals = np.asarray(f(grid.nodes), dtype=float)
    if vals.ndim == 0:
        vals = np.full(grid.m, float(vals))
    bad = np.flatnonzero(~np.isfinite(vals))
    if bad.size:
        raise NonFiniteError(f"f is not finite at node {bad[0]} (x={grid.nodes[bad[0]]})",
                             int(bad[0]))
    return GridFunction(grid, vals)


@dataclass(frozen=True, eq=False)
class ConvolutionWeights:
    """Weights w_k for lags k = -K..K, stored at index k + K.

    The mesh factor h is already folded in, so a convolution is the plain
    sum over j of w_{i-j} v_j.
    """

    grid_h: float
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 1 or vals.size % 2 == 0:
            raise ValueError("weights need odd length 2K+1")
        object.__setattr__(self, "values", vals)

    @property
    def halfwidth(self) -> int:
        return (self.values.size - 1) // 2

    def at(self, k: int) -> float:
        K = self.halfwidth
        return float(self.values[k + K]) if -K <= k <= K else 0.0

    def l1(self) -> float:
        return float(np.abs(self.values).sum())

    def scaled(self, factor: float) -> "ConvolutionWeights":
        return ConvolutionWeights(self.grid_h, factor * self.values)

    def __add__(self, other: "ConvolutionWeights") -> "ConvolutionWeights":
        _check_mesh(self.grid_h, other.grid_h)
        K = max(self.halfwidth, other.halfwidth)
        out = np.zeros(2 * K + 1)
        for w in (self, other):
            k = w.halfwidth
            out[K - k:K + k + 1] += w.values
        return ConvolutionWeights(self.grid_h, out)


def _check_mesh(h1: float, h2: float) -> None:
    if abs(h1 - h2) > 1e-12 * max(abs(h1), abs(h2)):
        raise MeshMismatchError(f"mesh sizes differ: {h1} vs {h2}")


def build_weights(k: Kernel, h: float, halfwidth: int, apply_d2: bool = False
                  ) -> ConvolutionWeights:
    """Sample h * alpha'(k h) for |k| <= K, optionally second-differenced in k.

    The differenced variant samples alpha' at lags up to K+1 so every stored
    weight uses the full three-point stencil.
    """
    if h <= 0:
        raise ValueError("h must be positive")
    if halfwidth < 1:
        raise ValueError("halfwidth must be a positive integer")
    K = int(halfwidth)
    if apply_d2:
        lags = np.arange(-K - 1, K + 2)
        a1 = np.asarray(k.alpha_prime(lags * h), dtype=float)
        vals = h * (a1[2:] - 2.0 * a1[1:-1] + a1[:-2]) / (h * h)
    else:
        lags = np.arange(-K, K + 1)
        vals = h * np.asarray(k.alpha_prime(lags * h), dtype=float)
    tail = abs(float(k.alpha_prime(K * h)))
    if tail > TAIL_WARN:
        warnings.warn(
            f"kernel derivative is {tail:.3g} at the weight window edge {K * h:.6g}; "
            "convolution sums are truncated there",
            RuntimeWarning,
            stacklevel=2,
        )
    return ConvolutionWeights(float(h), vals)


def discrete_convolve(w: ConvolutionWeights, v: GridFunction) -> GridFunction:
    """Direct summation out[i] = sum_j w_{i-j} v_j over the grid window."""
    _check_mesh(w.grid_h, v.grid.h)
    return GridFunction(v.grid, convolve_direct(w.values, v.values))


def convolve_direct(wvals: np.ndarray, v: np.ndarray) -> np.ndarray:
    m = v.size
    K = (wvals.size - 1) // 2
    out = np.empty(m)
    for i in range(m):
        # lags i-j in [-K, K] restrict j to [i-K, i+K]
        j0 = max(0, i - K)
        j1 = min(m - 1, i + K)
        # w index for lag i-j is i-j+K, descending as j ascends
        seg = wvals[i - j1 + K:i - j0 + K + 1][::-1]
        out[i] = np.dot(seg, v[j0:j1 + 1])
    return out


class FFTConvolver:
    """Linear convolution with a fixed weight vector on a fixed grid length.

    The weight spectrum is computed once; each application costs one
    forward and one inverse real FFT.
    """

    def __init__(self, weights: ConvolutionWeights | np.ndarray, m: int):
        wvals = weights.values if isinstance(weights, ConvolutionWeights) else np.asarray(weights)
        self.m = int(m)
        self.K = (wvals.size - 1) // 2
        self.n = sfft.next_fast_len(wvals.size + self.m - 1, real=True)
        self.spectrum = sfft.rfft(wvals, self.n)

    def __call__(self, v: np.ndarray) -> np.ndarray:
        return self.apply_spectrum(sfft.rfft(v, self.n))

    def transform(self, v: np.ndarray) -> np.ndarray:
        return sfft.rfft(v, self.n)

    def apply_spectrum(self, vhat: np.ndarray) -> np.ndarray:
        full = sfft.irfft(self.spectrum * vhat, self.n)
        return full[self.K:self.K + self.m]


def discrete_convolve_fast(w: ConvolutionWeights, v: GridFunction) -> GridFunction:
    """FFT-based equivalent of :func:`discrete_convolve`."""
    _check_mesh(w.grid_h, v.grid.h)
    return GridFunction(v.grid, FFTConvolver(w, v.grid.m)(v.values))


def second_difference(v: GridFunction) -> GridFunction:
    """Three-point second difference; boundary nodes are set to 0."""
    if v.grid.m < 3:
        raise ValueError("second difference needs at least 3 nodes")
    u = v.values
    out = np.zeros_like(u)
    out[1:-1] = (u[2:] - 2.0 * u[1:-1] + u[:-2]) / (v.grid.h ** 2)
    return GridFunction(v.grid, out)


def l1h_norm(v: GridFunction) -> float:
    return float(v.grid.h * np.abs(v.values).sum())


def linf_norm(v: GridFunction) -> float:
    return float(np.abs(v.values).max())
