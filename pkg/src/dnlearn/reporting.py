"""Experiment configuration, presets, repeat orchestration, and artifacts.

An experiment is one (problem, coefficients, method) at a scale preset,
repeated over consecutive seeds.  Each repeat gets its own run directory;
the experiment directory collects metrics.csv, a timing sidecar, error-field
grids for the final networks, and (via `report`) aggregate tables and PGM
heatmaps.
"""

from __future__ import annotations

import configparser
import csv
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .deepddm import DdmConfig, run_deepddm
from .dn_solver import DnConfig, run_dnla
from .geometry import SampleCounts
from .losses import PenaltyConfig
from .metrics import (AggregateRow, MetricRow, aggregate, error_fields,
                      format_aggregate, write_aggregate_csv, write_metrics_csv,
                      write_timing_csv)
from .problems import problem_by_name

METHODS = ("dnla_ritz", "dnla_pinns", "deepddm")


@dataclass(frozen=True)
class Preset:
    n_interior: int
    n_boundary: int
    n_interface: int
    epochs_dirichlet: int
    epochs_neumann: int


PRESETS = {
    "paper": Preset(20000, 5000, 5000, 3000, 1000),
    "desk": Preset(2000, 500, 500, 1000, 500),
}


class ConfigError(ValueError):
    """Invalid experiment configuration; the message names the key."""


@dataclass(frozen=True)
class ExperimentConfig:
    problem: str
    c1: float
    c2: float
    method: str
    preset: str = "desk"
    rho: float = 1.0
    max_outer: int = 2
    repeats: int = 5
    seed: int = 0
    outdir: str = "runs"
    stop_tol: float = 1e-3
    warm_start: bool = True
    hidden_layers: int = 6
    width: int = 50
    lr0: float = 0.01
    weight_decay: float = 1e-2
    # None means: take the preset / penalty-rule value
    epochs_dirichlet: int | None = None
    epochs_neumann: int | None = None
    n_interior: int | None = None
    n_boundary: int | None = None
    n_interface: int | None = None
    beta_D: float | None = None
    beta_N: float | None = None
    penalty: float | None = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise ConfigError(f"invalid value for key method: {self.method!r}")
        if self.preset not in PRESETS:
            raise ConfigError(f"invalid value for key preset: {self.preset!r}")
        if self.repeats < 1:
            raise ConfigError("invalid value for key repeats: need at least 1")


def resolved_counts(cfg: ExperimentConfig) -> SampleCounts:
    preset = PRESETS[cfg.preset]
    n_int = cfg.n_interior if cfg.n_interior is not None else preset.n_interior
    n_bdy = cfg.n_boundary if cfg.n_boundary is not None else preset.n_boundary
    n_ifc = cfg.n_interface if cfg.n_interface is not None else preset.n_interface
    return SampleCounts(n_int, n_int, n_bdy, n_bdy, n_ifc)


def resolved_epochs(cfg: ExperimentConfig) -> tuple[int, int]:
    preset = PRESETS[cfg.preset]
    ed = cfg.epochs_dirichlet if cfg.epochs_dirichlet is not None else preset.epochs_dirichlet
    en = cfg.epochs_neumann if cfg.epochs_neumann is not None else preset.epochs_neumann
    return ed, en


def dn_config(cfg: ExperimentConfig, repeat: int = 0) -> DnConfig:
    assert cfg.method.startswith("dnla_")
    variant = cfg.method.split("_", 1)[1]
    ed, en = resolved_epochs(cfg)
    penalties = None
    if cfg.beta_D is not None or cfg.beta_N is not None:
        base = PenaltyConfig(800.0, 800.0 * max(1.0, cfg.c2 / cfg.c1))
        penalties = PenaltyConfig(cfg.beta_D if cfg.beta_D is not None else base.beta_D,
                                  cfg.beta_N if cfg.beta_N is not None else base.beta_N)
    return DnConfig(rho=cfg.rho, max_outer=cfg.max_outer,
                    epochs_dirichlet=ed, epochs_neumann=en,
                    variant_dirichlet=variant, variant_neumann_interior="ritz",
                    penalties=penalties, stop_tol=cfg.stop_tol,
                    warm_start=cfg.warm_start, seed=cfg.seed + repeat,
                    hidden_layers=cfg.hidden_layers, width=cfg.width,
                    lr0=cfg.lr0, weight_decay=cfg.weight_decay)


def ddm_config(cfg: ExperimentConfig, repeat: int = 0) -> DdmConfig:
    assert cfg.method == "deepddm"
    ed, en = resolved_epochs(cfg)
    penalty = cfg.penalty if cfg.penalty is not None else 400.0
    return DdmConfig(rho=cfg.rho, max_outer=cfg.max_outer,
                     epochs_dirichlet=ed, epochs_neumann=en, penalty=penalty,
                     stop_tol=cfg.stop_tol, warm_start=cfg.warm_start,
                     seed=cfg.seed + repeat, hidden_layers=cfg.hidden_layers,
                     width=cfg.width, lr0=cfg.lr0,
                     weight_decay=cfg.weight_decay)


# ---------------------------------------------------------------------------
# Config files: one [experiment] section of key = value pairs
# ---------------------------------------------------------------------------

def _parse_bool(raw: str) -> bool:
    low = raw.strip().lower()
    if low in ("true", "yes", "on", "1"):
        return True
    if low in ("false", "no", "off", "0"):
        return False
    raise ValueError(raw)


_FIELD_TYPES = {
    "problem": str, "method": str, "preset": str, "outdir": str,
    "c1": float, "c2": float, "rho": float, "stop_tol": float,
    "beta_D": float, "beta_N": float, "penalty": float,
    "lr0": float, "weight_decay": float,
    "max_outer": int, "repeats": int, "seed": int,
    "hidden_layers": int, "width": int,
    "epochs_dirichlet": int, "epochs_neumann": int,
    "n_interior": int, "n_boundary": int, "n_interface": int,
    "warm_start": _parse_bool,
}
_REQUIRED_KEYS = ("problem", "method", "c1", "c2")


def load_config(path) -> ExperimentConfig:
    parser = configparser.ConfigParser()
    parser.optionxform = str
    if not parser.read(path):
        raise ConfigError(f"cannot read config file: {path}")
    sections = parser.sections()
    if sections != ["experiment"]:
        bad = [s for s in sections if s != "experiment"]
        raise ConfigError(f"unknown config section: {bad[0]}" if bad
                          else "missing config section: experiment")
    kwargs = {}
    for key, raw in parser["experiment"].items():
        if key not in _FIELD_TYPES:
            raise ConfigError(f"unknown config key: {key}")
        try:
            kwargs[key] = _FIELD_TYPES[key](raw)
        except ValueError:
            raise ConfigError(f"invalid value for key {key}: {raw!r}") from None
    for key in _REQUIRED_KEYS:
        if key not in kwargs:
            raise ConfigError(f"missing config key: {key}")
    return ExperimentConfig(**kwargs)


# ---------------------------------------------------------------------------
# Running an experiment
# ---------------------------------------------------------------------------

def run_experiment(cfg: ExperimentConfig, echo=None) -> list[MetricRow]:
    """Run all repeats, write metrics.csv / timing.csv / error-field grids,
    and return the metric rows."""
    say = echo or (lambda msg: None)
    outdir = Path(cfg.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    problem = problem_by_name(cfg.problem, cfg.c1, cfg.c2)
    counts = resolved_counts(cfg)
    rows: list[MetricRow] = []
    for repeat in range(cfg.repeats):
        seed = cfg.seed + repeat
        run_dir = outdir / f"seed_{seed}"
        start = time.perf_counter()
        if cfg.method == "deepddm":
            result = run_deepddm(problem, ddm_config(cfg, repeat), counts, run_dir)
        else:
            result = run_dnla(problem, dn_config(cfg, repeat), counts, run_dir)
        wall = time.perf_counter() - start
        if result.aborted:
            say(f"seed {seed}: aborted ({result.aborted})")
        for rec in result.records:
            rows.append(MetricRow(method=cfg.method, problem=cfg.problem,
                                  c1=cfg.c1, c2=cfg.c2, seed=seed,
                                  iteration=rec.iteration,
                                  relative_l2=rec.relative_l2,
                                  trace_delta=rec.trace_delta, wall_time=wall))
            say(f"seed {seed} iteration {rec.iteration}: "
                f"relative_l2 {rec.relative_l2:.6f}")
        if result.net1 is not None and result.net2 is not None:
            verr, gerr = error_fields(result.net1, result.net2, problem)
            np.savetxt(outdir / f"seed_{seed}_value_error.txt", verr, fmt="%.17g")
            np.savetxt(outdir / f"seed_{seed}_grad_error.txt", gerr, fmt="%.17g")
    write_metrics_csv(outdir / "metrics.csv", rows)
    write_timing_csv(outdir / "timing.csv", rows)
    return rows


def read_metrics_csv(path) -> list[MetricRow]:
    rows = []
    with open(path, newline="") as fh:
        for rec in csv.DictReader(fh):
            rows.append(MetricRow(method=rec["method"], problem=rec["problem"],
                                  c1=float(rec["c1"]), c2=float(rec["c2"]),
                                  seed=int(rec["seed"]),
                                  iteration=int(rec["iteration"]),
                                  relative_l2=float(rec["relative_l2"]),
                                  trace_delta=float(rec["trace_delta"])))
    return rows


# ---------------------------------------------------------------------------
# Rendering: aggregate tables and PGM heatmaps
# ---------------------------------------------------------------------------

def write_pgm(path, grid) -> tuple[float, float]:
    """8-bit binary PGM with linear min-max scaling; returns (lo, hi), which
    also land in a .bounds.txt sidecar next to the image."""
    g = np.asarray(grid, dtype=np.float64)
    assert g.ndim == 2
    lo = float(np.min(g))
    hi = float(np.max(g))
    if hi > lo:
        scaled = (g - lo) / (hi - lo)
    else:
        scaled = np.zeros_like(g)
    pixels = np.round(255.0 * scaled).astype(np.uint8)
    path = Path(path)
    with open(path, "wb") as fh:
        fh.write(f"P5\n{g.shape[1]} {g.shape[0]}\n255\n".encode("ascii"))
        fh.write(pixels.tobytes())
    sidecar = path.with_suffix(".bounds.txt")
    sidecar.write_text(f"min = {lo!r}\nmax = {hi!r}\n")
    return lo, hi


def read_pgm(path) -> np.ndarray:
    with open(path, "rb") as fh:
        assert fh.readline().strip() == b"P5"
        w, h = map(int, fh.readline().split())
        assert fh.readline().strip() == b"255"
        data = np.frombuffer(fh.read(w * h), dtype=np.uint8)
    return data.reshape(h, w)


def render_report(outdir, echo=None) -> list[AggregateRow]:
    """Aggregate metrics.csv and render every stored error grid as a PGM."""
    say = echo or (lambda msg: None)
    outdir = Path(outdir)
    rows = read_metrics_csv(outdir / "metrics.csv")
    aggs = aggregate(rows)
    write_aggregate_csv(outdir / "aggregate.csv", aggs)
    for agg in aggs:
        say(f"{agg.method} iteration {agg.iteration}: "
            f"{format_aggregate(agg)} over {agg.n} repeats")
    for grid_path in sorted(outdir.glob("seed_*_error.txt")):
        grid = np.loadtxt(grid_path)
        pgm_path = grid_path.with_suffix(".pgm")
        write_pgm(pgm_path, grid)
        say(f"wrote {pgm_path.name}")
    return aggs
