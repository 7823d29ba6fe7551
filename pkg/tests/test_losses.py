"""Loss terms: hand-evaluated values, composite structure, FD gradients."""

import numpy as np
import pytest

from dnlearn.geometry import SampleCounts, sample_interface, sample_sets
from dnlearn.losses import (
    PenaltyConfig,
    default_beta_N,
    default_penalties,
    dirichlet_terms,
    loss_compensated,
    loss_interface_dirichlet,
    loss_interface_flux,
    loss_outer_boundary,
    loss_pinns_residual,
    loss_ritz_interior,
    make_boundary_term,
    make_compensated_term,
    make_interface_dirichlet_term,
    make_interface_flux_term,
    make_pinns_residual_term,
    make_ritz_interior_term,
    neumann_terms,
    objective_dirichlet,
    objective_neumann,
)
from dnlearn.nets import (
    MlpNet,
    MlpSpec,
    init_params,
    objective_value,
    objective_value_and_grad,
)
from dnlearn.problems import example_checkerboard, example_circle

SPEC11 = MlpSpec(hidden_layers=1, width=1)


def const_net(value: float) -> MlpNet:
    # all weights zero, output bias set: u == value, grad == 0, lap == 0
    return MlpNet(SPEC11, np.array([0.0, 0.0, 0.0, 0.0, value]))


def rand_points(rng, n=7):
    return rng.uniform(-1.0, 1.0, (n, 2))


def test_ritz_interior_hand_values():
    rng = np.random.default_rng(0)
    X = rand_points(rng)
    zero = const_net(0.0)
    assert loss_ritz_interior(zero, X, 2.0, lambda X: np.full(len(X), 3.0), True) == 0.0
    one = const_net(1.0)
    f3 = lambda X: np.full(len(X), 3.0)
    assert loss_ritz_interior(one, X, 2.0, f3, True) == pytest.approx(-2.5, abs=1e-15)
    assert loss_ritz_interior(one, X, 2.0, f3, False) == pytest.approx(-3.0, abs=1e-15)


def test_pinns_residual_hand_values():
    rng = np.random.default_rng(1)
    X = rand_points(rng)
    assert loss_pinns_residual(const_net(0.0), X, 1.0,
                               lambda X: np.full(len(X), 3.0), False) == pytest.approx(9.0, abs=1e-15)
    assert loss_pinns_residual(const_net(1.0), X, 1.0,
                               lambda X: np.zeros(len(X)), True) == pytest.approx(1.0, abs=1e-15)


def test_pinns_residual_vanishes_on_exact_polynomial():
    # feed the exact region-2 channels of the checkerboard solution directly
    prob = example_checkerboard(1.0, 1e3)
    rng = np.random.default_rng(2)
    X = np.column_stack([rng.uniform(0.55, 0.95, 40), rng.uniform(0.05, 0.45, 40)])
    u = prob.exact_u2.value(X)
    gu = prob.exact_u2.grad(X)
    lu = (8.0 / prob.c2) * (X[:, 0] * (X[:, 0] - 1) + X[:, 1] * (X[:, 1] - 1))
    term = make_pinns_residual_term(X, prob.c2, prob.f(X), prob.mass_term)
    value = term.fn(u, gu, lu)[0]
    assert value <= 1e-20


def test_outer_boundary_hand_values():
    X = rand_points(np.random.default_rng(3))
    zeros = lambda X: np.zeros(len(X))
    ones = lambda X: np.ones(len(X))
    assert loss_outer_boundary(const_net(0.0), X, zeros) == 0.0
    assert loss_outer_boundary(const_net(1.0), X, zeros) == pytest.approx(1.0, abs=1e-15)
    assert loss_outer_boundary(const_net(1.0), X, ones) == pytest.approx(0.0, abs=1e-15)


def test_interface_dirichlet_hand_values():
    X = rand_points(np.random.default_rng(4))
    n = len(X)
    zeros = lambda X: np.zeros(len(X))
    assert loss_interface_dirichlet(const_net(0.0), X, np.full(n, 2.0),
                                    zeros) == pytest.approx(4.0, abs=1e-15)
    half = lambda X: np.full(len(X), 0.5)
    assert loss_interface_dirichlet(const_net(1.0), X, np.full(n, 0.5),
                                    half) == pytest.approx(0.0, abs=1e-15)
    assert loss_interface_dirichlet(const_net(1.0), X, np.zeros(n),
                                    half) == pytest.approx(0.25, abs=1e-15)


def test_interface_dirichlet_length_mismatch():
    X = rand_points(np.random.default_rng(5))
    with pytest.raises(ValueError, match="trace length"):
        make_interface_dirichlet_term(X, np.zeros(len(X) + 1), lambda X: np.zeros(len(X)))


def test_interface_flux_hand_values():
    X = rand_points(np.random.default_rng(6))
    n = len(X)
    assert loss_interface_flux(const_net(0.0), X, np.full(n, 2.0)) == 0.0
    assert loss_interface_flux(const_net(3.0), X, np.full(n, 2.0)) == pytest.approx(6.0, abs=1e-14)
    prob = example_circle(1.0, 1.0)
    G, N = sample_interface(prob.geometry, 30, np.random.default_rng(7))
    assert loss_interface_flux(const_net(1.0), G, prob.q(G, N)) == pytest.approx(-20.0, abs=1e-12)


def test_compensated_hand_values():
    rng = np.random.default_rng(8)
    X = rand_points(rng)
    f3 = lambda X: np.full(len(X), 3.0)
    net1_zero = MlpNet(SPEC11, np.zeros(SPEC11.n_params()))
    assert loss_compensated(const_net(1.0), net1_zero, X, 1.0, f3, True) == pytest.approx(-3.0, abs=1e-15)
    net1_rand = MlpNet(SPEC11, rng.normal(size=SPEC11.n_params()))
    assert loss_compensated(const_net(0.0), net1_rand, X, 1.0, f3, True) == 0.0
    # near-linear surrogates: u1 ~ x, u2 ~ 2x
    eps = 1e-8
    lin1 = MlpNet(SPEC11, np.array([eps, 0.0, 0.0, 1.0 / eps, 0.0]))
    lin2 = MlpNet(SPEC11, np.array([eps, 0.0, 0.0, 2.0 / eps, 0.0]))
    zerof = lambda X: np.zeros(len(X))
    assert loss_compensated(lin2, lin1, X, 1.0, zerof, False) == pytest.approx(2.0, abs=1e-10)


def _problem_setup(seed=9):
    prob = example_circle(1.0, 1e3)
    samples = sample_sets(prob.geometry, SampleCounts(30, 30, 10, 10, 20), seed=seed)
    return prob, samples


@pytest.mark.parametrize("variant", ["ritz", "pinns"])
def test_dirichlet_objective_equals_sum_of_parts(variant):
    prob, samples = _problem_setup()
    spec = MlpSpec(hidden_layers=2, width=6)
    net = MlpNet(spec, init_params(spec, seed=10))
    trace = prob.trace0(samples.interface)
    terms = dirichlet_terms(prob, samples, trace, 800.0, variant)
    total = objective_dirichlet(net, prob, samples, trace, 800.0, variant)
    parts = sum(objective_value(net.params, spec, t) for t in terms)
    assert total == pytest.approx(parts, rel=1e-15)


@pytest.mark.parametrize("variant", ["ritz", "pinns"])
def test_neumann_objective_equals_sum_of_parts(variant):
    prob, samples = _problem_setup()
    spec = MlpSpec(hidden_layers=2, width=6)
    net1 = MlpNet(spec, init_params(spec, seed=11))
    net2 = MlpNet(spec, init_params(spec, seed=12))
    terms = neumann_terms(prob, samples, net1, 8e5, variant)
    total = objective_neumann(net2, net1, prob, samples, 8e5, variant)
    parts = sum(objective_value(net2.params, spec, t) for t in terms)
    assert total == pytest.approx(parts, rel=1e-15)


def test_neumann_flux_term_contribution():
    prob = example_circle(1.0, 1.0)
    samples = sample_sets(prob.geometry, SampleCounts(10, 10, 5, 5, 25), seed=13)
    spec = MlpSpec(hidden_layers=2, width=6)
    net1 = MlpNet(spec, init_params(spec, seed=14))
    terms = neumann_terms(prob, samples, net1, 800.0)
    flux_terms = [t for t in terms if t.tag == "interface_flux"]
    assert len(flux_terms) == 1
    one = const_net(1.0)
    assert objective_value(one.params, one.spec, flux_terms[0]) == pytest.approx(-20.0, abs=1e-12)


def test_zero_net_homogeneous_dirichlet_objective_is_zero():
    prob, samples = _problem_setup()
    zero = MlpNet(SPEC11, np.zeros(SPEC11.n_params()))
    zerof = lambda X: np.zeros(len(X))
    import dataclasses
    homog = dataclasses.replace(prob, f=zerof, g=zerof, p=zerof)
    trace = np.zeros(samples.interface.shape[0])
    assert objective_dirichlet(zero, homog, samples, trace, 800.0, "ritz") == 0.0


def test_beta_increase_raises_dirichlet_objective():
    prob, samples = _problem_setup()
    zero = MlpNet(SPEC11, np.zeros(SPEC11.n_params()))
    trace = np.full(samples.interface.shape[0], 2.0)
    lo = objective_dirichlet(zero, prob, samples, trace, 800.0, "ritz")
    hi = objective_dirichlet(zero, prob, samples, trace, 1600.0, "ritz")
    assert hi > lo


def test_duplicated_batch_leaves_means_unchanged():
    rng = np.random.default_rng(15)
    X = rand_points(rng, 9)
    X2 = np.vstack([X, X])
    spec = MlpSpec(hidden_layers=2, width=6)
    net = MlpNet(spec, init_params(spec, seed=16))
    net1 = MlpNet(spec, init_params(spec, seed=17))
    f = rng.normal(size=9)
    q = rng.normal(size=9)
    tr = rng.normal(size=9)
    p = rng.normal(size=9)
    g = rng.normal(size=9)
    dup = np.concatenate
    cases = [
        (loss_ritz_interior(net, X, 2.0, f, True),
         loss_ritz_interior(net, X2, 2.0, dup([f, f]), True)),
        (loss_pinns_residual(net, X, 2.0, f, True),
         loss_pinns_residual(net, X2, 2.0, dup([f, f]), True)),
        (loss_outer_boundary(net, X, g),
         loss_outer_boundary(net, X2, dup([g, g]))),
        (loss_interface_dirichlet(net, X, tr, p),
         loss_interface_dirichlet(net, X2, dup([tr, tr]), dup([p, p]))),
        (loss_interface_flux(net, X, q),
         loss_interface_flux(net, X2, dup([q, q]))),
        (loss_compensated(net, net1, X, 2.0, f, True),
         loss_compensated(net, net1, X2, 2.0, dup([f, f]), True)),
    ]
    for single, doubled in cases:
        assert doubled == pytest.approx(single, rel=1e-15, abs=1e-15)


def test_compensated_term_frozen_against_net1():
    rng = np.random.default_rng(18)
    X = rand_points(rng, 12)
    spec = MlpSpec(hidden_layers=2, width=6)
    params1 = init_params(spec, seed=19)
    net1 = MlpNet(spec, params1)
    net2 = MlpNet(spec, init_params(spec, seed=20))
    term = make_compensated_term(X, net1, 1.5, rng.normal(size=12), True)
    v0, g0 = objective_value_and_grad(net2.params, spec, term)
    params1 += 123.0   # mutate the frozen source in place
    v1, g1 = objective_value_and_grad(net2.params, spec, term)
    assert v0 == v1
    assert np.array_equal(g0, g1)
    assert g0.shape == net2.params.shape


def _fd_objective_grad(params, spec, term, h=1e-6):
    g = np.zeros_like(params)
    for i in range(len(params)):
        dp = np.zeros_like(params)
        dp[i] = h
        g[i] = (objective_value(params + dp, spec, term)
                - objective_value(params - dp, spec, term)) / (2 * h)
    return g


def test_fd_gradient_suite_all_losses():
    # 20 random configurations for each of the six loss terms
    spec = MlpSpec(hidden_layers=2, width=6)
    rng = np.random.default_rng(21)
    for case in range(20):
        n = int(rng.integers(4, 16))
        X = rng.uniform(-1, 1, (n, 2))
        c = float(rng.uniform(0.5, 3.0))
        f = rng.normal(size=n)
        mass = bool(rng.integers(0, 2))
        params = init_params(spec, seed=100 + case) + 0.1 * rng.normal(size=spec.n_params())
        net1 = MlpNet(spec, init_params(spec, seed=200 + case))
        terms = [
            make_ritz_interior_term(X, c, f, mass),
            make_pinns_residual_term(X, c, f, mass),
            make_boundary_term(X, rng.normal(size=n)),
            make_interface_dirichlet_term(X, rng.normal(size=n), rng.normal(size=n)),
            make_interface_flux_term(X, rng.normal(size=n)),
            make_compensated_term(X, net1, c, f, mass),
        ]
        for term in terms:
            _, grad = objective_value_and_grad(params, spec, term)
            fd = _fd_objective_grad(params, spec, term)
            err = np.max(np.abs(grad - fd)) / (1.0 + np.max(np.abs(fd)))
            assert err <= 1e-5, (case, term.tag, err)


def test_penalty_defaults():
    assert default_beta_N(1.0, 1.0) == 800.0
    assert default_beta_N(1.0, 1e3) == 800_000.0
    cfg = default_penalties(example_circle(1.0, 1e3))
    assert cfg.beta_D == 800.0 and cfg.beta_N == 800_000.0
    with pytest.raises(AssertionError):
        PenaltyConfig(beta_D=0.0, beta_N=1.0)
