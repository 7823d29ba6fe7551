"""Grid metrics, aggregation over repeats, and CSV emission."""

import math
import os

import numpy as np
import pytest

from dnlearn import metrics
from dnlearn.geometry import eval_grid
from dnlearn.nets import MlpNet, MlpSpec, forward, init_params
from dnlearn.problems import example_circle, example_zigzag


def exact_standins(problem):
    return problem.exact_u1, problem.exact_u2


def test_relative_l2_exact_standin_is_zero():
    prob = example_circle(1.0, 1000.0)
    net1, net2 = exact_standins(prob)
    assert metrics.relative_l2(net1, net2, prob) == 0.0


def test_relative_l2_doubled_field_is_one():
    prob = example_circle(1.0, 1.0)
    net1 = lambda X: 2.0 * prob.exact_u1.value(X)
    net2 = lambda X: 2.0 * prob.exact_u2.value(X)
    assert metrics.relative_l2(net1, net2, prob) == pytest.approx(1.0, rel=1e-12)


def test_relative_l2_zero_field_is_one():
    prob = example_zigzag(1.0, 1000.0)
    zero = lambda X: np.zeros(X.shape[0])
    assert metrics.relative_l2(zero, zero, prob) == 1.0


def test_combined_values_respects_region_tags():
    prob = example_circle(1.0, 1.0)
    grid = eval_grid(prob.geometry)
    ones = lambda X: np.ones(X.shape[0])
    zero = lambda X: np.zeros(X.shape[0])
    vals = metrics.combined_values(ones, zero, prob, grid)
    assert np.array_equal(vals == 1.0, grid.tags == 1)


def test_error_fields_exact_standin_vanishes():
    prob = example_circle(1.0, 1000.0)
    verr, gerr = metrics.error_fields(*exact_standins(prob), prob)
    assert verr.shape == (100, 100) and gerr.shape == (100, 100)
    assert verr.size == 10000
    assert np.max(verr) <= 1e-12 and np.max(gerr) <= 1e-12


def test_error_field_max_matches_pointwise_recomputation():
    prob = example_circle(1.0, 1.0)
    spec = MlpSpec(hidden_layers=1, width=4)
    net1 = MlpNet(spec, init_params(spec, 3))
    net2 = MlpNet(spec, init_params(spec, 4))
    grid = eval_grid(prob.geometry)
    verr, _ = metrics.error_fields(net1, net2, prob, grid)
    exact = prob.exact_values(grid.points)
    recomputed = 0.0
    for i in range(grid.points.shape[0]):
        net = net1 if grid.tags[i] == 1 else net2
        recomputed = max(recomputed, abs(forward(net.params, spec, grid.points[i]) - exact[i]))
    assert np.max(verr) == pytest.approx(recomputed, rel=1e-12)


def row(method, iteration, rel, seed=0):
    return metrics.MetricRow(method=method, problem="circle", c1=1.0, c2=1.0,
                             seed=seed, iteration=iteration, relative_l2=rel,
                             trace_delta=0.1)


def test_metric_row_rejects_negative_error():
    with pytest.raises(AssertionError):
        row("dnla_pinns", 1, -0.5)


def test_aggregate_hand_example():
    rows = [row("dnla_pinns", 1, 1.0, seed=0), row("dnla_pinns", 1, 3.0, seed=1)]
    (agg,) = metrics.aggregate(rows)
    assert agg.n == 2
    assert agg.mean == pytest.approx(2.0)
    assert agg.std == pytest.approx(math.sqrt(2.0), rel=1e-12)
    assert "1.414" in metrics.format_aggregate(agg)


def test_aggregate_single_repeat_std_zero():
    (agg,) = metrics.aggregate([row("deepddm", 2, 0.5)])
    assert agg.std == 0.0
    assert metrics.format_aggregate(agg) == "0.500 ± 0.000"


def test_aggregate_order_invariant_and_grouped():
    rows = [row("a", 1, 0.3, seed=0), row("b", 1, 0.9, seed=0),
            row("a", 2, 0.1, seed=0), row("a", 1, 0.7, seed=1),
            row("a", 2, 0.2, seed=1)]
    first = metrics.aggregate(rows)
    second = metrics.aggregate(rows[::-1])
    assert first == second
    assert [(a.method, a.iteration) for a in first] == [("a", 1), ("a", 2), ("b", 1)]


def test_metrics_csv_roundtrip_and_append(tmp_path):
    path = tmp_path / "metrics.csv"
    rows = [row("dnla_pinns", 1, 1.0 / 3.0)]
    metrics.write_metrics_csv(path, rows)
    metrics.write_metrics_csv(path, rows, append=True)
    lines = path.read_text().strip().split("\n")
    assert lines[0] == ",".join(metrics.METRICS_COLUMNS)
    assert len(lines) == 3 and lines[1] == lines[2]
    assert repr(1.0 / 3.0) in lines[1]


def test_timing_csv_separate_from_metrics(tmp_path):
    r = metrics.MetricRow(method="m", problem="p", c1=1.0, c2=1.0, seed=0,
                          iteration=1, relative_l2=0.5, trace_delta=0.0,
                          wall_time=12.3456)
    metrics.write_metrics_csv(tmp_path / "metrics.csv", [r])
    metrics.write_timing_csv(tmp_path / "timing.csv", [r])
    assert "wall_time" not in (tmp_path / "metrics.csv").read_text()
    timing = (tmp_path / "timing.csv").read_text()
    assert "wall_time" in timing and "12.346" in timing
