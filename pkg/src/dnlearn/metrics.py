"""Error metrics on the shared evaluation grid, and aggregation over repeats."""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass

import numpy as np

from . import geometry
from .geometry import EvalGrid, eval_grid
from .nets import MlpNet, eval_channels
from .problems import Field, InterfaceProblem


@dataclass(frozen=True)
class MetricRow:
    """One (run, outer-iteration) measurement.

    wall_time is kept in memory for the timing sidecar only; it never enters
    metrics.csv so that identical runs produce bit-identical metric files.
    """

    method: str
    problem: str
    c1: float
    c2: float
    seed: int
    iteration: int
    relative_l2: float
    trace_delta: float
    wall_time: float = 0.0

    def __post_init__(self):
        assert self.relative_l2 >= 0.0


# ---------------------------------------------------------------------------
# Field evaluation helpers: accept a trained MlpNet, an analytic Field, or a
# plain callable X -> values, so exact solutions can stand in for networks.
# ---------------------------------------------------------------------------

def field_values(obj, X: np.ndarray) -> np.ndarray:
    if isinstance(obj, MlpNet):
        u, _, _ = eval_channels(obj.params, obj.spec, X, mode="value", tag="metric")
        return u
    if isinstance(obj, Field):
        return np.broadcast_to(np.asarray(obj.value(X), dtype=np.float64),
                               (X.shape[0],)).copy()
    return np.broadcast_to(np.asarray(obj(X), dtype=np.float64), (X.shape[0],)).copy()


def field_values_and_grads(obj, X: np.ndarray):
    if isinstance(obj, MlpNet):
        u, gu, _ = eval_channels(obj.params, obj.spec, X, mode="grad", tag="metric")
        return u, gu
    if isinstance(obj, Field):
        u = np.broadcast_to(np.asarray(obj.value(X), dtype=np.float64),
                            (X.shape[0],)).copy()
        return u, np.asarray(obj.grad(X), dtype=np.float64)
    raise TypeError("gradient evaluation needs an MlpNet or a Field")


def combined_values(net1, net2, problem: InterfaceProblem, grid: EvalGrid) -> np.ndarray:
    """Piecewise surrogate on the grid: net1 on region-1 nodes, net2 elsewhere."""
    out = np.empty(grid.points.shape[0], dtype=np.float64)
    mask1 = grid.tags == geometry.REGION_1
    out[mask1] = field_values(net1, grid.points[mask1])
    out[~mask1] = field_values(net2, grid.points[~mask1])
    return out


def relative_l2(net1, net2, problem: InterfaceProblem, grid: EvalGrid | None = None) -> float:
    """Discrete relative L2 distance to the exact solution over the grid nodes."""
    grid = grid or eval_grid(problem.geometry)
    approx = combined_values(net1, net2, problem, grid)
    exact = problem.exact_values(grid.points)
    denom = math.sqrt(float(np.sum(exact * exact)))
    assert denom > 0.0, "exact solution vanishes on the whole grid"
    return math.sqrt(float(np.sum((approx - exact) ** 2))) / denom


def error_fields(net1, net2, problem: InterfaceProblem, grid: EvalGrid | None = None):
    """(|u_hat - u|, pointwise l2 of grad u_hat - grad u) as shape-`grid.shape` arrays."""
    grid = grid or eval_grid(problem.geometry)
    n = grid.points.shape[0]
    approx = np.empty(n, dtype=np.float64)
    approx_grad = np.empty((n, 2), dtype=np.float64)
    mask1 = grid.tags == geometry.REGION_1
    for obj, mask in ((net1, mask1), (net2, ~mask1)):
        u, gu = field_values_and_grads(obj, grid.points[mask])
        approx[mask] = u
        approx_grad[mask] = gu
    exact = problem.exact_values(grid.points)
    exact_grad = problem.exact_gradients(grid.points)
    value_err = np.abs(approx - exact).reshape(grid.shape)
    grad_err = np.sqrt(np.sum((approx_grad - exact_grad) ** 2, axis=1)).reshape(grid.shape)
    return value_err, grad_err


# ---------------------------------------------------------------------------
# Aggregation over repeats
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AggregateRow:
    method: str
    iteration: int
    n: int
    mean: float
    std: float


def aggregate(rows: list[MetricRow]) -> list[AggregateRow]:
    """Sample mean and (n-1)-denominator std of relative_l2 per (method, iteration).

    Sums go through math.fsum so the result is invariant to row order.
    """
    groups: dict[tuple[str, int], list[float]] = {}
    for row in rows:
        groups.setdefault((row.method, row.iteration), []).append(row.relative_l2)
    out = []
    for (method, iteration) in sorted(groups):
        vals = groups[(method, iteration)]
        n = len(vals)
        mean = math.fsum(vals) / n
        if n > 1:
            std = math.sqrt(math.fsum((v - mean) ** 2 for v in vals) / (n - 1))
        else:
            std = 0.0
        out.append(AggregateRow(method, iteration, n, mean, std))
    return out


def format_aggregate(agg: AggregateRow) -> str:
    return f"{agg.mean:.3f} ± {agg.std:.3f}"


# ---------------------------------------------------------------------------
# CSV emission (schema-stable; float cells use repr so identical runs match
# byte for byte)
# ---------------------------------------------------------------------------

METRICS_COLUMNS = ("method", "problem", "c1", "c2", "seed", "iteration",
                   "relative_l2", "trace_delta")
TIMING_COLUMNS = ("method", "problem", "seed", "iteration", "wall_time")
AGGREGATE_COLUMNS = ("method", "iteration", "n", "mean", "std")


def _write_csv(path, columns, cell_rows, append=False):
    fresh = not (append and os.path.exists(path))
    with open(path, "a" if append else "w", newline="") as fh:
        writer = csv.writer(fh)
        if fresh:
            writer.writerow(columns)
        writer.writerows(cell_rows)


def write_metrics_csv(path, rows: list[MetricRow], append: bool = False) -> None:
    cells = [(r.method, r.problem, repr(r.c1), repr(r.c2), r.seed, r.iteration,
              repr(r.relative_l2), repr(r.trace_delta)) for r in rows]
    _write_csv(path, METRICS_COLUMNS, cells, append)


def write_timing_csv(path, rows: list[MetricRow], append: bool = False) -> None:
    cells = [(r.method, r.problem, r.seed, r.iteration, f"{r.wall_time:.3f}")
             for r in rows]
    _write_csv(path, TIMING_COLUMNS, cells, append)


def write_aggregate_csv(path, aggs: list[AggregateRow]) -> None:
    cells = [(a.method, a.iteration, a.n, repr(a.mean), repr(a.std)) for a in aggs]
    _write_csv(path, AGGREGATE_COLUMNS, cells)
