"""Strong-form Dirichlet-Neumann baseline with per-subdomain networks.

Both subproblems minimize pointwise PDE residuals with a single penalty
weight on their boundary data.  The Neumann subproblem receives its flux
target by differentiating net1 directly at the interface points, which is
the exchange the compensated method avoids; near-interface gradient error
therefore feeds straight into the next outer iteration.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dn_solver import (IterationRecord, RunResult, _RunDir, _term_metrics,
                        outer_loop)
from .geometry import SampleCounts, SampleSet, eval_grid, sample_sets
from .losses import (make_boundary_term, make_interface_dirichlet_term,
                     make_pinns_residual_term)
from .metrics import field_values_and_grads, relative_l2
from .nets import JetTerm, MlpNet, MlpSpec, eval_channels, objective_value
from .optim import AdamWHyper, TrainDivergence, readout_lstsq, train
from .problems import InterfaceProblem


@dataclass(frozen=True)
class DdmConfig:
    rho: float
    max_outer: int
    epochs_dirichlet: int = 3000
    epochs_neumann: int = 1000
    penalty: float = 400.0
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
        assert self.penalty > 0.0, "boundary penalty must be positive"
        assert self.stop_tol >= 0.0
        assert self.lr0 > 0.0 and self.weight_decay >= 0.0

    def net_spec(self) -> MlpSpec:
        return MlpSpec(hidden_layers=self.hidden_layers, width=self.width)

    def hyper(self) -> AdamWHyper:
        return AdamWHyper(lr0=self.lr0, weight_decay=self.weight_decay)


# ---------------------------------------------------------------------------
# Loss terms
# ---------------------------------------------------------------------------

def ddm_flux_target(net1, problem: InterfaceProblem, X, normals) -> np.ndarray:
    """Neumann data for region 2: -q - c1 grad(net1).n1 at the interface."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    normals = np.ascontiguousarray(normals, dtype=np.float64)
    if isinstance(net1, MlpNet):
        _, g1, _ = eval_channels(net1.params, net1.spec, X, mode="grad", tag="net1")
    else:
        g1 = np.asarray(net1.grad(X), dtype=np.float64)
    q = np.broadcast_to(np.asarray(problem.q(X, normals), dtype=np.float64),
                        (X.shape[0],))
    return -q - problem.c1 * np.einsum("ij,ij->i", g1, normals)


def make_ddm_flux_term(X, normals, target, c2, weight=1.0,
                       tag="interface_flux") -> JetTerm:
    """Mean-square mismatch of c2 grad(u).n2 against a fixed target, with
    n2 = -n1 for the stored region-1 normals."""
    n1 = np.ascontiguousarray(normals, dtype=np.float64)
    T = np.asarray(target, dtype=np.float64)
    c2 = float(c2)

    def fn(u, gu, lu):
        m = -c2 * np.einsum("ij,ij->i", gu, n1) - T
        value = float(np.mean(m ** 2))
        bar_gu = (-2.0 * c2 / m.size) * m[:, None] * n1
        return value, None, bar_gu, None

    return JetTerm(points=X, fn=fn, mode="grad", weight=weight, tag=tag)


def loss_ddm_flux(net2: MlpNet, X, normals, target, c2) -> float:
    term = make_ddm_flux_term(X, normals, target, c2)
    return objective_value(net2.params, net2.spec, [term])


def ddm_dirichlet_terms(problem: InterfaceProblem, samples: SampleSet,
                        trace_values, penalty) -> list[JetTerm]:
    terms = [make_pinns_residual_term(samples.interior_1, problem.c1, problem.f,
                                      problem.mass_term, tag="omega1")]
    if samples.outer_1.shape[0]:
        terms.append(make_boundary_term(samples.outer_1, problem.g,
                                        weight=penalty, tag="outer1"))
    terms.append(make_interface_dirichlet_term(
        samples.interface, trace_values, problem.p,
        weight=penalty, tag="interface_dirichlet"))
    return terms


def ddm_neumann_terms(problem: InterfaceProblem, samples: SampleSet,
                      net1, penalty) -> list[JetTerm]:
    target = ddm_flux_target(net1, problem, samples.interface, samples.normals)
    terms = [make_pinns_residual_term(samples.interior_2, problem.c2, problem.f,
                                      problem.mass_term, tag="omega2"),
             make_ddm_flux_term(samples.interface, samples.normals, target,
                                problem.c2, weight=penalty, tag="interface_flux")]
    if samples.outer_2.shape[0]:
        terms.append(make_boundary_term(samples.outer_2, problem.g,
                                        weight=penalty, tag="outer2"))
    return terms


# ---------------------------------------------------------------------------
# Subdomain solves
# ---------------------------------------------------------------------------

def ddm_solve_dirichlet(problem: InterfaceProblem, samples: SampleSet,
                        trace_values, config: DdmConfig,
                        params0: np.ndarray | None = None):
    terms = ddm_dirichlet_terms(problem, samples, trace_values, config.penalty)
    try:
        best, history = train(config.net_spec(), terms, config.epochs_dirichlet,
                              hyper=config.hyper(), seed=config.seed,
                              params0=params0)
    except TrainDivergence as exc:
        raise TrainDivergence(f"dirichlet subproblem: {exc}") from None
    if config.readout_polish and config.epochs_dirichlet > 0:
        best = readout_lstsq(config.net_spec(), best, terms)
    return MlpNet(config.net_spec(), best), history


def ddm_solve_neumann(problem: InterfaceProblem, samples: SampleSet,
                      net1: MlpNet, config: DdmConfig,
                      params0: np.ndarray | None = None):
    """net2 lives on region 2 only; its flux data comes from differentiating
    net1 at the interface samples (recomputed once per outer iteration)."""
    terms = ddm_neumann_terms(problem, samples, net1, config.penalty)
    try:
        best, history = train(config.net_spec(), terms, config.epochs_neumann,
                              hyper=config.hyper(), seed=config.seed + 1,
                              params0=params0)
    except TrainDivergence as exc:
        raise TrainDivergence(f"neumann subproblem: {exc}") from None
    if config.readout_polish and config.epochs_neumann > 0:
        best = readout_lstsq(config.net_spec(), best, terms)
    return MlpNet(config.net_spec(), best), history


def interface_flux_error(net1, net2, problem: InterfaceProblem, X, normals) -> float:
    """Mean absolute defect of the transmission condition
    c2 grad(u2).n2 + q + c1 grad(u1).n1 at the interface samples."""
    _, g1 = field_values_and_grads(net1, X)
    _, g2 = field_values_and_grads(net2, X)
    q = np.broadcast_to(np.asarray(problem.q(X, normals), dtype=np.float64),
                        (X.shape[0],))
    m = (-problem.c2 * np.einsum("ij,ij->i", g2, normals) + q
         + problem.c1 * np.einsum("ij,ij->i", g1, normals))
    return float(np.mean(np.abs(m)))


# ---------------------------------------------------------------------------
# Full outer iteration
# ---------------------------------------------------------------------------

def run_deepddm(problem: InterfaceProblem, config: DdmConfig,
                counts: SampleCounts, run_dir=None) -> RunResult:
    """Baseline outer iteration; mirrors run_dnla but with strong-form
    subproblems and the differentiated flux exchange."""
    method = "deepddm"
    samples = sample_sets(problem.geometry, counts, seed=config.seed)
    grid = eval_grid(problem.geometry)
    rundir = (_RunDir(run_dir, problem, config, counts, method)
              if run_dir is not None else None)

    state = {"net1": None, "net2": None, "params1": None, "params2": None}
    traces = [problem.trace0(samples.interface).astype(np.float64)]
    records: list[IterationRecord] = []
    histories = {}

    def subsolve(k, values):
        try:
            net1, hist1 = ddm_solve_dirichlet(problem, samples, values, config,
                                              params0=state["params1"])
            net2, hist2 = ddm_solve_neumann(problem, samples, net1, config,
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
        terms1 = ddm_dirichlet_terms(problem, samples, traces[-2], config.penalty)
        terms2 = ddm_neumann_terms(problem, samples, net1, config.penalty)
        term_losses = _term_metrics(net1, terms1, "d")
        term_losses.update(_term_metrics(net2, terms2, "n"))
        term_losses["flux_error"] = interface_flux_error(
            net1, net2, problem, samples.interface, samples.normals)
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
