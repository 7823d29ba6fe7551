"""Relaxed Dirichlet-Neumann outer iteration with neural subdomain solves.

One outer iteration trains net1 on the region-1 subproblem against the
current interface trace, trains net2 globally with the flux carried by the
compensated interior term, evaluates net2 at the interface sample points,
and relaxes the trace toward those values.  The loop driver is generic so
the 1-D finite-difference solver can be plugged in as a subdomain oracle.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import geometry
from .geometry import SampleCounts, SampleSet, eval_grid, sample_sets
from .losses import (PenaltyConfig, VARIANTS, default_penalties,
                     dirichlet_terms, neumann_terms)
from .metrics import relative_l2
from .nets import (MlpNet, MlpSpec, eval_channels, objective_value,
                   save_checkpoint)
from .optim import (AdamWHyper, TrainDivergence, readout_lstsq, train,
                    write_loss_history)
from .problems import InterfaceProblem

STOP_EPS = 1e-12


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class InterfaceTrace:
    """Dirichlet data on fixed interface sample points, seen from region 2."""

    points: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        points = np.ascontiguousarray(self.points, dtype=np.float64)
        values = np.ascontiguousarray(self.values, dtype=np.float64)
        assert points.ndim == 2 and points.shape[1] == 2
        assert values.shape == (points.shape[0],), "trace values must align with points"
        assert np.all(np.isfinite(values)), "non-finite trace values"
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "values", values)


@dataclass(frozen=True)
class DnConfig:
    rho: float
    max_outer: int
    epochs_dirichlet: int = 3000
    epochs_neumann: int = 1000
    variant_dirichlet: str = "pinns"
    variant_neumann_interior: str = "ritz"
    penalties: PenaltyConfig | None = None
    stop_tol: float = 1e-3
    warm_start: bool = True
    seed: int = 0
    hidden_layers: int = 6
    width: int = 50
    lr0: float = 0.01
    weight_decay: float = 1e-2
    readout_polish: bool = True

    def __post_init__(self):
        assert 0.0 < self.rho <= 1.0, "relaxation weight must lie in (0, 1]"
        assert self.max_outer >= 0
        assert self.epochs_dirichlet >= 0 and self.epochs_neumann >= 0
        assert self.variant_dirichlet in VARIANTS
        assert self.variant_neumann_interior in VARIANTS
        assert self.stop_tol >= 0.0
        assert self.lr0 > 0.0 and self.weight_decay >= 0.0

    def net_spec(self) -> MlpSpec:
        return MlpSpec(hidden_layers=self.hidden_layers, width=self.width)

    def hyper(self) -> AdamWHyper:
        return AdamWHyper(lr0=self.lr0, weight_decay=self.weight_decay)

    def method_label(self) -> str:
        # Named after the Dirichlet-side solver; the Neumann side is always
        # the compensated scheme regardless of its interior variant.
        return f"dnla_{self.variant_dirichlet}"


@dataclass
class IterationRecord:
    iteration: int
    relative_l2: float
    trace_delta: float
    loss_dirichlet: float
    loss_neumann: float
    term_losses: dict[str, float]


@dataclass
class RunResult:
    problem: str
    method: str
    trace_points: np.ndarray
    traces: list[np.ndarray]
    records: list[IterationRecord]
    net1: MlpNet | None
    net2: MlpNet | None
    stopped_early: bool
    aborted: str | None = None


def resolve_penalties(config: DnConfig, problem: InterfaceProblem) -> PenaltyConfig:
    return config.penalties or default_penalties(problem)


# ---------------------------------------------------------------------------
# Relaxation and the generic outer-loop driver
# ---------------------------------------------------------------------------

def relax_values(values: np.ndarray, u2_values: np.ndarray, rho: float) -> np.ndarray:
    return rho * u2_values + (1.0 - rho) * values


def relax_update(trace: InterfaceTrace, u2_values, rho: float) -> InterfaceTrace:
    """New trace rho*u2 + (1-rho)*old at the same points."""
    assert 0.0 < rho <= 1.0
    u2 = np.broadcast_to(np.asarray(u2_values, dtype=np.float64),
                         trace.values.shape)
    return InterfaceTrace(trace.points, relax_values(trace.values, u2, rho))


def outer_loop(values0, subsolve, rho: float, max_outer: int, stop_tol: float,
               on_iteration=None):
    """Relaxed fixed-point driver shared by the neural and 1-D oracle paths.

    subsolve(k, values) -> (u2_values, payload).  Returns (history, stopped)
    where history[0] is the initial trace; the loop stops early when
    max|delta| / (max|new| + 1e-12) < stop_tol.
    """
    assert 0.0 < rho <= 1.0
    values = np.array(values0, dtype=np.float64)
    history = [values.copy()]
    stopped = False
    for k in range(max_outer):
        u2, payload = subsolve(k, values)
        new_values = relax_values(values, np.asarray(u2, dtype=np.float64), rho)
        delta = float(np.max(np.abs(new_values - values)))
        rel = delta / (float(np.max(np.abs(new_values))) + STOP_EPS)
        values = new_values
        history.append(values.copy())
        if on_iteration is not None:
            on_iteration(k, values, delta, payload)
        if rel < stop_tol:
            stopped = True
            break
    return history, stopped


def oracle_dn_subsolver(c1, c2, f, grid):
    """Adapter: the 1-D finite-difference alternating solve as a subsolver."""
    from .oracle1d import dn_step_1d

    def subsolve(k, values):
        u2 = dn_step_1d(c1, c2, f, float(values[0]), grid)
        return np.array([u2]), None

    return subsolve


# ---------------------------------------------------------------------------
# Neural subdomain solves
# ---------------------------------------------------------------------------

def solve_dirichlet(problem: InterfaceProblem, samples: SampleSet, trace_values,
                    config: DnConfig, params0: np.ndarray | None = None):
    """Train net1 on region 1 with the current trace as interface target.

    Returns (net, per-epoch loss history); the parameters are the
    minimum-loss snapshot seen during training.
    """
    pens = resolve_penalties(config, problem)
    terms = dirichlet_terms(problem, samples, trace_values, pens.beta_D,
                            config.variant_dirichlet)
    try:
        best, history = train(config.net_spec(), terms, config.epochs_dirichlet,
                              hyper=config.hyper(), seed=config.seed,
                              params0=params0)
    except TrainDivergence as exc:
        raise TrainDivergence(f"dirichlet subproblem: {exc}") from None
    if config.readout_polish and config.epochs_dirichlet > 0:
        best = readout_lstsq(config.net_spec(), best, terms)
    return MlpNet(config.net_spec(), best), history


def solve_neumann(problem: InterfaceProblem, samples: SampleSet, net1: MlpNet,
                  config: DnConfig, params0: np.ndarray | None = None):
    """Train the global net2; the flux of net1 enters only through the
    compensated interior term, so net1 is never differentiated on the
    interface."""
    pens = resolve_penalties(config, problem)
    terms = neumann_terms(problem, samples, net1, pens.beta_N,
                          config.variant_neumann_interior)
    try:
        best, history = train(config.net_spec(), terms, config.epochs_neumann,
                              hyper=config.hyper(), seed=config.seed + 1,
                              params0=params0)
    except TrainDivergence as exc:
        raise TrainDivergence(f"neumann subproblem: {exc}") from None
    if config.readout_polish and config.epochs_neumann > 0:
        best = readout_lstsq(config.net_spec(), best, terms)
    return MlpNet(config.net_spec(), best), history


def interface_gradient_evals(log, geom, tag: str = "net1", tol: float = 1e-9) -> int:
    """Count gradient-mode channel evaluations under `tag` at interface points.

    Zero for the compensated Neumann solve; the strong-flux baseline hits
    every interface sample once per outer iteration.
    """
    count = 0
    for rec in log:
        if rec.tag != tag or rec.mode == "value":
            continue
        pts = np.atleast_2d(np.asarray(rec.points, dtype=np.float64))
        res = geometry.interface_residual(geom, pts)
        count += int(np.count_nonzero(res <= tol))
    return count


# ---------------------------------------------------------------------------
# Full outer iteration
# ---------------------------------------------------------------------------

def _term_metrics(net: MlpNet, terms, prefix: str) -> dict[str, float]:
    out = {}
    for term in terms:
        raw = objective_value(net.params, net.spec,
                              [dataclasses.replace(term, weight=1.0)])
        out[f"{prefix}_{term.tag}"] = raw
    return out


def _write_run_config(path: Path, problem: InterfaceProblem, config,
                      counts: SampleCounts, method: str,
                      extra: dict | None = None) -> None:
    items = {
        "method": method,
        "problem": problem.name,
        "c1": repr(problem.c1),
        "c2": repr(problem.c2),
    }
    for key, value in dataclasses.asdict(config).items():
        if key != "penalties":
            items[key] = repr(value) if isinstance(value, float) else str(value)
    for key, value in dataclasses.asdict(counts).items():
        items[key] = str(value)
    items.update(extra or {})
    with open(path, "w") as fh:
        for key in sorted(items):
            fh.write(f"{key} = {items[key]}\n")


class _RunDir:
    """Artifact emission for one run: config snapshot, per-iteration
    checkpoints and loss curves, and an append-only metrics.csv."""

    def __init__(self, run_dir, problem, config, counts, method, extra=None):
        self.path = Path(run_dir)
        self.path.mkdir(parents=True, exist_ok=True)
        self.columns = None
        _write_run_config(self.path / "config.txt", problem, config, counts,
                          method, extra)

    def record(self, record: IterationRecord, net1, net2, hist1, hist2):
        k = record.iteration
        save_checkpoint(self.path / f"iter_{k:03d}_net1.txt", net1.params, net1.spec)
        save_checkpoint(self.path / f"iter_{k:03d}_net2.txt", net2.params, net2.spec)
        write_loss_history(self.path / f"iter_{k:03d}_net1_loss.csv", hist1)
        write_loss_history(self.path / f"iter_{k:03d}_net2_loss.csv", hist2)
        metrics_path = self.path / "metrics.csv"
        if self.columns is None:
            self.columns = ["iteration", "relative_l2", "trace_delta",
                            "loss_dirichlet", "loss_neumann"] + sorted(record.term_losses)
            with open(metrics_path, "w") as fh:
                fh.write(",".join(self.columns) + "\n")
        cells = [str(k), repr(record.relative_l2), repr(record.trace_delta),
                 repr(record.loss_dirichlet), repr(record.loss_neumann)]
        cells += [repr(record.term_losses[key]) for key in sorted(record.term_losses)]
        with open(metrics_path, "a") as fh:
            fh.write(",".join(cells) + "\n")


def run_dnla(problem: InterfaceProblem, config: DnConfig, counts: SampleCounts,
             run_dir=None) -> RunResult:
    """Run the full outer iteration; returns the trace history, per-iteration
    metrics, and the last trained networks.  Aborts cleanly on training
    divergence, keeping the partial history."""
    method = config.method_label()
    samples = sample_sets(problem.geometry, counts, seed=config.seed)
    grid = eval_grid(problem.geometry)
    pens = resolve_penalties(config, problem)
    extra = {"beta_D": repr(pens.beta_D), "beta_N": repr(pens.beta_N)}
    rundir = (_RunDir(run_dir, problem, config, counts, method, extra)
              if run_dir is not None else None)

    state = {"net1": None, "net2": None, "params1": None, "params2": None}
    traces = [problem.trace0(samples.interface).astype(np.float64)]
    records: list[IterationRecord] = []
    histories = {}

    def subsolve(k, values):
        try:
            net1, hist1 = solve_dirichlet(problem, samples, values, config,
                                          params0=state["params1"])
            net2, hist2 = solve_neumann(problem, samples, net1, config,
                                        params0=state["params2"])
        except TrainDivergence as exc:
            raise TrainDivergence(f"outer iteration {k + 1}: {exc}") from None
        state["net1"], state["net2"] = net1, net2
        if config.warm_start:
            state["params1"], state["params2"] = net1.params, net2.params
        u2, _, _ = eval_channels(net2.params, net2.spec, samples.interface,
                                 mode="value", tag="trace_eval")
        histories[k] = (hist1, hist2)
        return u2, (net1, net2)

    def on_iteration(k, values, delta, payload):
        net1, net2 = payload
        traces.append(values.copy())
        terms1 = dirichlet_terms(problem, samples, traces[-2], pens.beta_D,
                                 config.variant_dirichlet)
        terms2 = neumann_terms(problem, samples, net1, pens.beta_N,
                               config.variant_neumann_interior)
        term_losses = _term_metrics(net1, terms1, "d")
        term_losses.update(_term_metrics(net2, terms2, "n"))
        record = IterationRecord(
            iteration=k + 1,
            relative_l2=relative_l2(net1, net2, problem, grid),
            trace_delta=delta,
            loss_dirichlet=objective_value(net1.params, net1.spec, terms1),
            loss_neumann=objective_value(net2.params, net2.spec, terms2),
            term_losses=term_losses,
        )
        records.append(record)
        hist1, hist2 = histories.pop(k)
        if rundir is not None:
            rundir.record(record, net1, net2, hist1, hist2)

    aborted = None
    stopped = False
    try:
        _, stopped = outer_loop(traces[0], subsolve, config.rho,
                                config.max_outer, config.stop_tol, on_iteration)
    except TrainDivergence as exc:
        aborted = str(exc)

    return RunResult(problem=problem.name, method=method,
                     trace_points=samples.interface, traces=traces,
                     records=records, net1=state["net1"], net2=state["net2"],
                     stopped_early=stopped, aborted=aborted)
