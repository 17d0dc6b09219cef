"""``nlkdv`` command line: simulate, converge, localize, kernel-check.

Parameters come from (lowest to highest precedence) built-in defaults, a
named preset, a JSON config file (a previous run manifest also works) and
explicit flags.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .analysis import WaveSetup, convergence_study, linf_error, localization_study
from .discrete import UniformGrid, build_weights, write_columns
from .integrator import IntegrationError, ToleranceSettings, integrate
from .kernels import CATALOG_NAMES, make_kernel, verify_conditions
from .semidiscrete import BlowUpError, parse_nonlinearity
from .solutions import WaveFamily

COMMANDS = ("simulate", "converge", "localize", "kernel-check")
EXIT_CONFIG = 2
EXIT_INTEGRATION = 3

FULL_H = [1.0, 0.5, 0.25, 0.125, 0.0625, 0.03125]


class ConfigError(ValueError):
    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


@dataclass
class ExperimentConfig:
    command: str = "simulate"
    kernel: str = "rosenau-kdv"
    nonlinearity: str = "u + u^2/2"
    kappa: float = 1.0
    domain: list = field(default_factory=lambda: [-40.0, 80.0])
    h: Optional[float] = 0.5
    h_list: list = field(default_factory=list)
    n_list: list = field(default_factory=list)
    t_end: float = 40.0
    output_times: list = field(default_factory=list)
    rel_tol: float = 1e-10
    abs_tol: float = 1e-10
    output: str = "nlkdv_out/run"
    compare_exact: bool = False
    family: str = "rosenau-kdv"
    mode: str = "exact"
    method: str = "fft"
    workers: int = 1
    preset: Optional[str] = None
    scale: bool = False

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise ConfigError("command", f"unknown command {self.command!r}")
        if self.kernel not in CATALOG_NAMES:
            raise ConfigError("kernel", f"unknown kernel {self.kernel!r}; "
                              f"choose from {', '.join(CATALOG_NAMES)}")
        if self.family not in [f.value for f in WaveFamily]:
            raise ConfigError("family", f"unknown solitary-wave family {self.family!r}")
        try:
            parse_nonlinearity(self.nonlinearity)
        except ValueError as exc:
            raise ConfigError("nonlinearity", str(exc)) from None
        if not self.kappa > 0:
            raise ConfigError("kappa", "must be positive")
        if len(self.domain) != 2 or not self.domain[1] > self.domain[0]:
            raise ConfigError("domain", "must be [x_left, x_right] with x_right > x_left")
        if not self.t_end > 0:
            raise ConfigError("t_end", "must be positive")
        times = list(self.output_times)
        if any(t < 0 or t > self.t_end for t in times) or any(
                b <= a for a, b in zip(times, times[1:])):
            raise ConfigError("output_times", "must be ascending and inside [0, t_end]")
        for name in ("rel_tol", "abs_tol"):
            if not 0 < getattr(self, name) < 1:
                raise ConfigError(name, "must lie in (0, 1)")
        if self.mode not in ("exact", "richardson"):
            raise ConfigError("mode", "must be 'exact' or 'richardson'")
        if self.method not in ("fft", "direct"):
            raise ConfigError("method", "must be 'fft' or 'direct'")
        if self.command == "simulate":
            self._check_h("h", self.h)
        elif self.command == "converge":
            if not self.h_list:
                raise ConfigError("h_list", "required for converge")
            for h in self.h_list:
                self._check_h("h_list", h)
            if any(b >= a for a, b in zip(self.h_list, self.h_list[1:])):
                raise ConfigError("h_list", "must be strictly decreasing")
        elif self.command == "localize":
            if self.h is None or not self.h > 0:
                raise ConfigError("h", "a positive mesh size is required")
            if not self.n_list or any(int(n) < 1 for n in self.n_list):
                raise ConfigError("n_list", "required for localize, positive integers")
            if any(b <= a for a, b in zip(self.n_list, self.n_list[1:])):
                raise ConfigError("n_list", "must be strictly increasing")

    def _check_h(self, name, h) -> None:
        if h is None or not h > 0:
            raise ConfigError(name, "a positive mesh size is required")
        try:
            UniformGrid.from_domain(self.domain[0], self.domain[1], h)
        except ValueError as exc:
            raise ConfigError(name, str(exc)) from None

    @property
    def tolerances(self) -> ToleranceSettings:
        return ToleranceSettings(rel_tol=self.rel_tol, abs_tol=self.abs_tol)

    @property
    def setup(self) -> WaveSetup:
        return WaveSetup(self.kernel, self.nonlinearity, self.kappa, self.family, self.method)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def _desk(**kw):
    base = {"t_end": 10.0, "rel_tol": 1e-8, "abs_tol": 1e-8}
    base.update(kw)
    return base


PRESETS = {
    "fig1": {
        "full": dict(command="simulate", kernel="rosenau-kdv", family="rosenau-kdv",
                     domain=[-40.0, 80.0], h=0.5, t_end=40.0, output_times=[0.0, 40.0],
                     compare_exact=True),
        "desk": _desk(command="simulate", kernel="rosenau-kdv", family="rosenau-kdv",
                      domain=[-40.0, 80.0], h=0.5, output_times=[0.0, 10.0],
                      compare_exact=True),
    },
    "fig2-kdv": {
        "full": dict(command="converge", mode="exact", kernel="rosenau-kdv",
                     family="rosenau-kdv", domain=[-100.0, 100.0], h_list=FULL_H, t_end=40.0),
        "desk": _desk(command="converge", mode="exact", kernel="rosenau-kdv",
                      family="rosenau-kdv", domain=[-60.0, 80.0],
                      h_list=[0.4, 0.2, 0.1, 0.05]),
    },
    "fig2-bbm": {
        "full": dict(command="converge", mode="exact", kernel="rosenau-bbm-kdv",
                     family="rosenau-bbm-kdv", domain=[-80.0, 120.0], h_list=FULL_H,
                     t_end=40.0),
        "desk": _desk(command="converge", mode="exact", kernel="rosenau-bbm-kdv",
                      family="rosenau-bbm-kdv", domain=[-60.0, 100.0],
                      h_list=[0.4, 0.2, 0.1, 0.05]),
    },
    "fig3-kdv": {
        "full": dict(command="localize", kernel="rosenau-kdv", family="rosenau-kdv", h=0.05,
                     n_list=[600, 800, 1000, 1200, 1600, 2400], t_end=40.0),
        "desk": _desk(command="localize", kernel="rosenau-kdv", family="rosenau-kdv", h=0.05,
                      n_list=[200, 300, 400, 600, 800, 1200]),
    },
    "fig3-bbm": {
        "full": dict(command="localize", kernel="rosenau-bbm-kdv", family="rosenau-bbm-kdv",
                     h=0.05, n_list=[1600, 1800, 2000, 2200, 2400, 3200], t_end=40.0),
        "desk": _desk(command="localize", kernel="rosenau-bbm-kdv", family="rosenau-bbm-kdv",
                      h=0.05, n_list=[400, 500, 600, 800, 1000, 1400]),
    },
    "fig4": {
        "full": dict(command="simulate", kernel="gaussian", family="rosenau-kdv",
                     domain=[-40.0, 80.0], h=0.05, t_end=40.0, output_times=[0.0, 40.0],
                     compare_exact=False),
        "desk": _desk(command="simulate", kernel="gaussian", family="rosenau-kdv",
                      domain=[-40.0, 80.0], h=0.05, output_times=[0.0, 10.0],
                      compare_exact=False),
    },
    "table1": {
        "full": dict(command="converge", mode="richardson", kernel="gaussian",
                     family="rosenau-kdv", domain=[-110.0, 130.0], h_list=FULL_H, t_end=40.0),
        "desk": _desk(command="converge", mode="richardson", kernel="gaussian",
                      family="rosenau-kdv", domain=[-60.0, 80.0],
                      h_list=[0.4, 0.2, 0.1, 0.05, 0.025]),
    },
}


def preset_config(name: str, scale: bool = False) -> dict:
    if name not in PRESETS:
        raise ConfigError("preset", f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    out = dict(PRESETS[name]["desk" if scale else "full"])
    out.update(preset=name, scale=scale)
    return out


_FIELDS = {f.name for f in dataclasses.fields(ExperimentConfig)}


def load_config_file(path) -> dict:
    """Read a JSON config or a run manifest (whose ``config`` key is used)."""
    with open(path) as fh:
        data = json.load(fh)
    if "config" in data and isinstance(data["config"], dict):
        data = data["config"]
    data = dict(data)
    tols = data.pop("tolerances", None)
    if isinstance(tols, dict):
        data.setdefault("rel_tol", tols.get("rel_tol"))
        data.setdefault("abs_tol", tols.get("abs_tol"))
    normalized = {k.replace("-", "_"): v for k, v in data.items()}
    unknown = set(normalized) - _FIELDS
    if unknown:
        raise ConfigError(sorted(unknown)[0], "unknown config field")
    return normalized


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nlkdv", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="JSON config file or previous run manifest")
    p.add_argument("--preset", help=f"one of: {', '.join(PRESETS)}")
    p.add_argument("--scale", action="store_true", default=None,
                   help="desk-scale variant of the preset (shorter runs, tol 1e-8)")
    p.add_argument("--kernel", choices=CATALOG_NAMES)
    p.add_argument("--nonlinearity")
    p.add_argument("--kappa", type=float)
    p.add_argument("--domain", type=float, nargs=2, metavar=("X_LEFT", "X_RIGHT"))
    p.add_argument("--h", type=float)
    p.add_argument("--h-list", type=float, nargs="+")
    p.add_argument("--n-list", type=int, nargs="+")
    p.add_argument("--t-end", type=float)
    p.add_argument("--output-times", type=float, nargs="*")
    p.add_argument("--rel-tol", type=float)
    p.add_argument("--abs-tol", type=float)
    p.add_argument("--output", help="output path prefix")
    p.add_argument("--compare-exact", action=argparse.BooleanOptionalAction, default=None)
    p.add_argument("--family", choices=[f.value for f in WaveFamily])
    p.add_argument("--mode", choices=("exact", "richardson"))
    p.add_argument("--method", choices=("fft", "direct"))
    p.add_argument("--workers", type=int)
    return p


def resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    values: dict = {}
    file_values = load_config_file(args.config) if args.config else {}
    preset = args.preset or file_values.get("preset")
    scale = args.scale if args.scale is not None else bool(file_values.get("scale", False))
    if preset:
        values.update(preset_config(preset, scale))
    values.update(file_values)
    for name in _FIELDS - {"command", "preset", "scale"}:
        val = getattr(args, name, None)
        if val is not None:
            values[name] = val
    values["command"] = args.command
    values["preset"] = preset
    values["scale"] = scale
    cfg = ExperimentConfig(**values)
    cfg.domain = [float(v) for v in cfg.domain]
    cfg.h_list = [float(v) for v in cfg.h_list]
    cfg.n_list = [int(v) for v in cfg.n_list]
    cfg.output_times = [float(v) for v in cfg.output_times]
    cfg.validate()
    return cfg


# -- commands ----------------------------------------------------------------

def _path(cfg: ExperimentConfig, suffix: str) -> Path:
    return Path(f"{cfg.output}_{suffix}")


def run_simulate(cfg: ExperimentConfig) -> dict:
    grid = UniformGrid.from_domain(cfg.domain[0], cfg.domain[1], cfg.h)
    setup = cfg.setup
    res = integrate(setup.problem(grid), cfg.t_end, cfg.output_times or None, cfg.tolerances)
    outputs, errors = [], []
    for k, (t, state) in enumerate(zip(res.times, res.states)):
        exact = setup.exact(grid.nodes, t) if cfg.compare_exact else None
        path = _path(cfg, "profile.csv" if len(res.states) == 1 else f"profile_{k:03d}.csv")
        state.to_csv(path, exact)
        outputs.append(str(path))
        if cfg.compare_exact:
            errors.append(linf_error(state, setup.exact, float(t)))
    final = res.final
    results = {
        "times": [float(t) for t in res.times],
        "final_peak_x": float(grid.nodes[int(np.argmax(final.values))]),
        "final_linf": float(np.max(np.abs(final.values))),
    }
    if cfg.compare_exact:
        results["linf_errors"] = errors
        results["linf_error"] = errors[-1]
    return {"outputs": outputs, "results": results, "stats": res.stats.as_dict()}


def run_converge(cfg: ExperimentConfig) -> dict:
    rep = convergence_study(cfg.setup, tuple(cfg.domain), cfg.h_list, cfg.t_end,
                            cfg.tolerances, mode=cfg.mode, max_workers=cfg.workers)
    path = _path(cfg, "convergence.csv")
    rep.to_csv(path)
    return {"outputs": [str(path)],
            "results": {"errors": rep.errors, "rates": rep.rates},
            "stats": rep.stats}


def run_localize(cfg: ExperimentConfig) -> dict:
    rep = localization_study(cfg.setup, cfg.h, cfg.n_list, cfg.t_end, cfg.tolerances,
                             max_workers=cfg.workers)
    path = _path(cfg, "localization.csv")
    rep.to_csv(path)
    return {"outputs": [str(path)],
            "results": {"errors": rep.errors, "knee_N": rep.knee()},
            "stats": rep.stats}


def run_kernel_check(cfg: ExperimentConfig) -> dict:
    k = make_kernel(cfg.kernel)
    rep = verify_conditions(k)
    d2_norms = {}
    for h in cfg.h_list or [1.0, 0.5, 0.1, 0.05]:
        K = int(np.ceil(60.0 / h))
        d2_norms[str(h)] = build_weights(k, h, K, apply_d2=True).l1()
    results = dataclasses.asdict(rep)
    results["w21_norm"] = rep.w21_norm
    results["d2_weight_l1h"] = d2_norms
    path = _path(cfg, "kernel.csv")
    rows = [(key, val) for key, val in results.items()
            if isinstance(val, (int, float)) and not isinstance(val, bool)]
    write_columns(path, ["quantity", "value"], [[r[0] for r in rows], [r[1] for r in rows]])
    return {"outputs": [str(path)], "results": results, "stats": {}}


RUNNERS = {
    "simulate": run_simulate,
    "converge": run_converge,
    "localize": run_localize,
    "kernel-check": run_kernel_check,
}


def run(cfg: ExperimentConfig) -> dict:
    """Execute one configured command and write its manifest."""
    out = RUNNERS[cfg.command](cfg)
    manifest = {"version": __version__, "config": cfg.to_dict(), **out}
    path = _path(cfg, "manifest.json")
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    manifest["outputs"] = out["outputs"] + [str(path)]
    return manifest


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
    except ConfigError as exc:
        print(f"nlkdv: invalid config field {exc.field!r}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, json.JSONDecodeError, TypeError) as exc:
        print(f"nlkdv: cannot read config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        manifest = run(cfg)
    except (BlowUpError, IntegrationError) as exc:
        print(f"nlkdv: integration failed: {exc}", file=sys.stderr)
        return EXIT_INTEGRATION
    summary = {k: v for k, v in manifest["results"].items() if not isinstance(v, dict)}
    print(json.dumps({"command": cfg.command, "results": summary,
                      "stats": manifest["stats"], "outputs": manifest["outputs"]}, indent=2))
    return 0


if __name__ == "__main__":
    sys.exit(main())
