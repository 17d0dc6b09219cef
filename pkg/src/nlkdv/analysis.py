"""Error norms, convergence rates, localization studies and tail diagnostics."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .discrete import GridFunction, UniformGrid, write_columns
from .integrator import IntegrationResult, ToleranceSettings, integrate
from .kernels import make_kernel
from .semidiscrete import Problem, assemble, parse_nonlinearity
from .solutions import SolitaryWave, initial_data, solitary_params, solitary_profile


# -- problem families ------------------------------------------------------

@dataclass(frozen=True)
class WaveSetup:
    """A kernel/nonlinearity pair started from a sech^4 profile.

    ``family`` picks the (A, B, c) constants of the initial profile; the
    exact solution is only meaningful when the kernel matches the family
    and f(u) = u + u^2/2, kappa = 1.
    """

    kernel: str = "rosenau-kdv"
    nonlinearity: str = "u + u^2/2"
    kappa: float = 1.0
    family: str = "rosenau-kdv"
    method: str = "fft"

    @property
    def wave(self) -> SolitaryWave:
        return solitary_params(self.family)

    def exact(self, x, t):
        return solitary_profile(self.wave, x, t)

    def problem(self, grid: UniformGrid) -> Problem:
        return assemble(make_kernel(self.kernel), parse_nonlinearity(self.nonlinearity),
                        self.kappa, grid, initial_data(self.wave, grid), method=self.method)

    def run(self, grid: UniformGrid, t_end: float, tol: Optional[ToleranceSettings] = None,
            output_times: Optional[Sequence[float]] = None) -> IntegrationResult:
        return integrate(self.problem(grid), t_end, output_times, tol)


# -- errors and rates ------------------------------------------------------

def linf_error(numeric: GridFunction, exact: Callable, t: float) -> float:
    """max_i |exact(x_i, t) - numeric_i| over every node of the grid."""
    ref = np.asarray(exact(numeric.x, t), dtype=float)
    return float(np.max(np.abs(ref - numeric.values)))


def rate_two_grid(e1: float, h1: float, e2: float, h2: float) -> float:
    if e1 <= 0 or e2 <= 0:
        raise ValueError("errors must be positive to take a log ratio")
    if h1 <= 0 or h2 <= 0 or h1 == h2:
        raise ValueError("mesh sizes must be positive and distinct")
    return math.log(e1 / e2) / math.log(h1 / h2)


def _nested_stride(coarse: UniformGrid, fine: UniformGrid) -> tuple[int, int]:
    """(offset, stride) locating coarse nodes inside fine, or ValueError."""
    ratio = coarse.h / fine.h
    stride = int(round(ratio))
    offset_f = (coarse.x_left - fine.x_left) / fine.h
    offset = int(round(offset_f))
    tol = 1e-9
    if (stride < 1 or abs(ratio - stride) > tol * ratio or abs(offset_f - offset) > 1e-6
            or offset < 0 or offset + stride * (coarse.m - 1) > fine.m - 1):
        raise ValueError("grids are not nested")
    return offset, stride


def restrict_to(coarse: UniformGrid, fine: GridFunction) -> np.ndarray:
    offset, stride = _nested_stride(coarse, fine.grid)
    return fine.values[offset:offset + stride * (coarse.m - 1) + 1:stride]


def rate_richardson(u_h: GridFunction, u_h2: GridFunction, u_h4: GridFunction) -> float:
    """Order from three solutions on successively refined nested grids.

    Differences are taken on the nodes of the coarsest grid. For halving
    refinement this is log2 of the ratio of successive l-infinity differences.
    """
    g = u_h.grid
    a = u_h.values
    b = restrict_to(g, u_h2)
    c = restrict_to(g, u_h4)
    _nested_stride(u_h2.grid, u_h4.grid)
    r1 = u_h.grid.h / u_h2.grid.h
    r2 = u_h2.grid.h / u_h4.grid.h
    if abs(r1 - r2) > 1e-9 * r1:
        raise ValueError("refinement ratios differ between the two levels")
    d1 = float(np.max(np.abs(a - b)))
    d2 = float(np.max(np.abs(b - c)))
    if d1 == 0.0 or d2 == 0.0:
        raise ValueError("successive solutions coincide; the rate is undefined")
    return math.log(d1 / d2) / math.log(r1)


# -- reports ---------------------------------------------------------------

@dataclass(frozen=True)
class ConvergenceRow:
    h: float
    m: int
    error: Optional[float]
    rate: Optional[float]


@dataclass
class ConvergenceReport:
    rows: list
    mode: str = "exact"
    stats: list = field(default_factory=list)
    states: list = field(default_factory=list, repr=False)

    @property
    def rates(self) -> list:
        return [r.rate for r in self.rows if r.rate is not None]

    @property
    def errors(self) -> list:
        return [r.error for r in self.rows]

    def to_csv(self, path) -> None:
        write_columns(path, ["h", "m", "error", "rate"],
                      [[r.h for r in self.rows], [r.m for r in self.rows],
                       [r.error for r in self.rows], [r.rate for r in self.rows]])


@dataclass(frozen=True)
class LocalizationRow:
    N: int
    halfwidth: float
    error: float


@dataclass
class LocalizationReport:
    rows: list
    h: float
    stats: list = field(default_factory=list)

    @property
    def errors(self) -> list:
        return [r.error for r in self.rows]

    def knee(self, threshold: float = 0.1) -> Optional[int]:
        """Smallest N after which no refinement improves the error by ``threshold`` or more.

        Improvements are relative: (E_k - E_{k+1}) / E_k. Returns None when
        the last step still improves, i.e. no stagnation was observed.
        """
        errs = self.errors
        knee_idx = None
        for k in range(len(errs) - 1, 0, -1):
            if (errs[k - 1] - errs[k]) / errs[k - 1] >= threshold:
                knee_idx = k
                break
        if knee_idx is None:
            return self.rows[0].N if self.rows else None
        if knee_idx == len(errs) - 1:
            return None
        return self.rows[knee_idx].N

    def to_csv(self, path) -> None:
        write_columns(path, ["N", "halfwidth", "error"],
                      [[r.N for r in self.rows], [r.halfwidth for r in self.rows],
                       [r.error for r in self.rows]])


def _fan_out(fn, items, max_workers: int):
    if max_workers <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        return list(pool.map(fn, items))


def convergence_study(setup: WaveSetup, domain: tuple, h_list: Sequence[float], t_end: float,
                      tol: Optional[ToleranceSettings] = None, mode: str = "exact",
                      max_workers: int = 1, keep_states: bool = False) -> ConvergenceReport:
    """Run the setup on each mesh size over a fixed domain and tabulate rates.

    ``mode="exact"`` compares with the travelling sech^4 wave and uses
    two-grid rates; ``mode="richardson"`` compares successive solutions on
    the coarser node set and uses three-grid rates.
    """
    if mode not in ("exact", "richardson"):
        raise ValueError(f"unknown mode {mode!r}")
    hs = [float(h) for h in h_list]
    if any(b >= a for a, b in zip(hs, hs[1:])):
        raise ValueError("h list must be strictly decreasing")
    grids = [UniformGrid.from_domain(domain[0], domain[1], h) for h in hs]
    results = _fan_out(lambda g: setup.run(g, t_end, tol), grids, max_workers)
    finals = [r.final for r in results]

    rows = []
    if mode == "exact":
        errs = [linf_error(u, setup.exact, t_end) for u in finals]
        for i, (g, e) in enumerate(zip(grids, errs)):
            rate = rate_two_grid(errs[i - 1], hs[i - 1], e, hs[i]) if i > 0 else None
            rows.append(ConvergenceRow(g.h, g.m, e, rate))
    else:
        diffs: list = [None]
        for i in range(1, len(finals)):
            fine = restrict_to(grids[i - 1], finals[i])
            diffs.append(float(np.max(np.abs(finals[i - 1].values - fine))))
        for i, g in enumerate(grids):
            rate = rate_richardson(*finals[i - 2:i + 1]) if i >= 2 else None
            rows.append(ConvergenceRow(g.h, g.m, diffs[i], rate))
    return ConvergenceReport(rows, mode, [r.stats.as_dict() for r in results],
                             finals if keep_states else [])


def localization_study(setup: WaveSetup, h: float, N_list: Sequence[int], t_end: float,
                       tol: Optional[ToleranceSettings] = None, max_workers: int = 1
                       ) -> LocalizationReport:
    """Fixed mesh size, growing window [-N h, N h]; error against the exact wave."""
    Ns = [int(n) for n in N_list]
    if any(b <= a for a, b in zip(Ns, Ns[1:])):
        raise ValueError("N list must be strictly increasing")
    grids = [UniformGrid.symmetric(n, h) for n in Ns]
    results = _fan_out(lambda g: setup.run(g, t_end, tol), grids, max_workers)
    rows = [LocalizationRow(n, n * h, linf_error(r.final, setup.exact, t_end))
            for n, r in zip(Ns, results)]
    return LocalizationReport(rows, float(h), [r.stats.as_dict() for r in results])


# -- tails -----------------------------------------------------------------

def tail_sup(v: GridFunction, core_halfwidth: int) -> float:
    """max |v_i| over nodes more than ``core_halfwidth`` indices from the grid center."""
    m = v.grid.m
    center = 0.5 * (m - 1)
    if core_halfwidth < 0 or core_halfwidth >= center:
        raise ValueError("core halfwidth must be below half the grid")
    dist = np.abs(np.arange(m) - center)
    mask = dist > core_halfwidth
    return float(np.max(np.abs(v.values[mask])))


@dataclass(frozen=True)
class DecayFit:
    rate: float
    constant: float


def default_tail_window(m: int, side: str = "right", exclude: int = 4) -> tuple[int, int]:
    """Outer quarter of the nodes on one side, minus ``exclude`` edge nodes."""
    q = max(5, m // 4)
    if side == "right":
        return m - q, m - exclude
    if side == "left":
        return exclude, q
    raise ValueError("side must be 'left' or 'right'")


def decay_fit(v: GridFunction, window: Optional[tuple] = None, side: str = "right",
              exclude: int = 4) -> DecayFit:
    """Least-squares fit of log|v_i| = log C - rate * |x_i| over an index window."""
    lo, hi = window if window is not None else default_tail_window(v.grid.m, side, exclude)
    vals = v.values[lo:hi]
    x = v.x[lo:hi]
    if vals.size < 5:
        raise ValueError("decay fit needs at least 5 nodes")
    if np.any(vals == 0.0):
        raise ValueError("zero value inside the fit window")
    design = np.column_stack([np.ones_like(x), -np.abs(x)])
    coef, *_ = np.linalg.lstsq(design, np.log(np.abs(vals)), rcond=None)
    return DecayFit(rate=float(coef[1]), constant=float(np.exp(coef[0])))
