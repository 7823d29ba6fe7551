"""Network evaluation and derivative checks against finite-difference oracles."""

import numpy as np
import pytest

from dnlearn.nets import (
    Jet2,
    JetTerm,
    MlpSpec,
    audit_jets,
    eval_channels,
    forward,
    forward_jet,
    init_params,
    load_checkpoint,
    objective_value,
    objective_value_and_grad,
    parameter_gradient,
    save_checkpoint,
    split_params,
)


def fd_gradient(fun, x, h=1e-5):
    x = np.asarray(x, dtype=np.float64)
    g = np.zeros_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (fun(x + e) - fun(x - e)) / (2.0 * h)
    return g


def fd_laplacian(fun, x, h=1e-5):
    x = np.asarray(x, dtype=np.float64)
    total = 0.0
    f0 = fun(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        total += (fun(x + e) - 2.0 * f0 + fun(x - e)) / (h * h)
    return total


def test_init_biases_zero():
    spec = MlpSpec(hidden_layers=1, width=1)
    params = init_params(spec, seed=7)
    # layout: W0 (1x2), b0 (1), W1 (1x1), b1 (1)
    assert params[2] == 0.0
    assert params[4] == 0.0
    for W, b in split_params(params, spec):
        assert np.all(b == 0.0)


def test_init_deterministic():
    spec = MlpSpec(hidden_layers=3, width=9)
    a = init_params(spec, seed=123)
    b = init_params(spec, seed=123)
    c = init_params(spec, seed=124)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_param_count_paper_network():
    # (2+1)*50 + 5*(50+1)*50 + (50+1)*1 = 12951
    spec = MlpSpec(hidden_layers=6, width=50)
    assert spec.n_params() == 12951
    assert init_params(spec, seed=0).size == 12951


def test_init_glorot_bounds():
    spec = MlpSpec(hidden_layers=2, width=40)
    params = init_params(spec, seed=5)
    dims = spec.layer_dims()
    for (W, _), fan_in, fan_out in zip(split_params(params, spec), dims[:-1], dims[1:]):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        assert np.all(np.abs(W) <= limit)
        # a uniform draw of this size essentially fills the range
        assert np.max(np.abs(W)) > 0.5 * limit


def test_forward_zero_params():
    spec = MlpSpec(hidden_layers=2, width=4)
    params = np.zeros(spec.n_params())
    assert forward(params, spec, (0.3, -0.7)) == 0.0


def test_forward_deterministic_and_matches_jet_value():
    spec = MlpSpec(hidden_layers=3, width=7)
    params = init_params(spec, seed=11)
    x = (0.25, -0.6)
    v1 = forward(params, spec, x)
    v2 = forward(params, spec, x)
    assert v1 == v2
    jet = forward_jet(params, spec, x)
    assert jet.value == v1


def test_single_hidden_unit_jet():
    # output = tanh(a*x1); at the origin tanh'' = 0 so the laplacian vanishes
    spec = MlpSpec(hidden_layers=1, width=1)
    a = 1.3
    params = np.array([a, 0.0, 0.0, 1.0, 0.0])  # W0=[a,0], b0=0, W1=[1], b1=0
    jet = forward_jet(params, spec, (0.0, 0.0))
    assert jet.value == 0.0
    assert np.allclose(jet.grad, [a, 0.0], atol=1e-15)
    assert jet.laplacian == 0.0


def test_zero_params_jet():
    spec = MlpSpec(hidden_layers=2, width=3)
    jet = forward_jet(np.zeros(spec.n_params()), spec, (0.4, 0.9))
    assert jet.value == 0.0 and jet.laplacian == 0.0
    assert np.all(jet.grad == 0.0)


def test_jet_matches_finite_differences():
    # 100 random (params, x) pairs across a few architectures
    rng = np.random.default_rng(42)
    specs = [MlpSpec(1, 5), MlpSpec(2, 8), MlpSpec(3, 6), MlpSpec(4, 10)]
    for case in range(100):
        spec = specs[case % len(specs)]
        params = init_params(spec, seed=1000 + case)
        x = rng.uniform(-1.0, 1.0, size=2)
        jet = forward_jet(params, spec, x)
        f = lambda z: forward(params, spec, z)
        g_fd = fd_gradient(f, x)
        l_fd = fd_laplacian(f, x)
        assert np.all(np.abs(jet.grad - g_fd) <= 1e-6 * (1.0 + np.abs(jet.grad))), case
        assert abs(jet.laplacian - l_fd) <= 1e-5 * (1.0 + abs(jet.laplacian)), case


def test_eval_channels_modes_consistent():
    spec = MlpSpec(2, 6)
    params = init_params(spec, seed=3)
    X = np.random.default_rng(0).uniform(-1, 1, size=(17, 2))
    u_v, g_v, l_v = eval_channels(params, spec, X, mode="value")
    u_g, g_g, l_g = eval_channels(params, spec, X, mode="grad")
    u_j, g_j, l_j = eval_channels(params, spec, X, mode="jet")
    assert g_v is None and l_v is None and l_g is None
    assert np.array_equal(u_v, u_g) and np.array_equal(u_v, u_j)
    assert np.array_equal(g_g, g_j)


def test_constant_objective_zero_gradient():
    spec = MlpSpec(2, 5)
    params = init_params(spec, seed=9)
    term = JetTerm(
        points=np.zeros((4, 2)),
        fn=lambda u, gu, lu: (1.0, None, None, None),
        mode="value",
    )
    grad = parameter_gradient(params, spec, term)
    assert np.all(grad == 0.0)


def test_linear_output_weight_gradient_is_hidden_feature():
    # objective = u(x0); d u / d W_last[0, j] = (last hidden activation)_j
    spec = MlpSpec(hidden_layers=2, width=6)
    params = init_params(spec, seed=21)
    x0 = np.array([0.3, -0.2])

    term = JetTerm(
        points=x0[None, :],
        fn=lambda u, gu, lu: (u[0], np.ones(1), None, None),
        mode="value",
    )
    grad = parameter_gradient(params, spec, term)

    # independent forward pass up to the last hidden layer
    h = x0.copy()
    layers = split_params(params, spec)
    for W, b in layers[:-1]:
        h = np.tanh(W @ h + b)
    n_last = (spec.width + 1) * spec.output_dim
    w_block = grad[-n_last:-spec.output_dim]
    assert np.allclose(w_block, h, rtol=0, atol=1e-14)
    assert np.allclose(grad[-1], 1.0)  # output bias gradient


def _ritz_like_term(points):
    # mean over batch of 0.5*|grad u|^2 + u^2
    n = points.shape[0]

    def fn(u, gu, lu):
        value = np.mean(0.5 * (gu[:, 0] ** 2 + gu[:, 1] ** 2) + u * u)
        return value, 2.0 * u / n, gu / n, None

    return JetTerm(points=points, fn=fn, mode="grad")


def _residual_like_term(points):
    # mean of (laplacian u - u)^2, exercises the second-derivative channel
    n = points.shape[0]

    def fn(u, gu, lu):
        r = lu - u
        return float(np.mean(r * r)), -2.0 * r / n, None, 2.0 * r / n

    return JetTerm(points=points, fn=fn, mode="jet")


@pytest.mark.parametrize("make_term", [_ritz_like_term, _residual_like_term])
def test_parameter_gradient_matches_fd(make_term):
    rng = np.random.default_rng(7)
    spec = MlpSpec(hidden_layers=2, width=6)
    for case in range(4):
        params = init_params(spec, seed=300 + case)
        term = make_term(rng.uniform(-1, 1, size=(8, 2)))
        grad = parameter_gradient(params, spec, term)

        def value_at(p):
            return objective_value(p, spec, term)

        h = 1e-6
        g_fd = np.zeros_like(params)
        for i in range(params.size):
            e = np.zeros_like(params)
            e[i] = h
            g_fd[i] = (value_at(params + e) - value_at(params - e)) / (2 * h)
        assert np.all(np.abs(grad - g_fd) <= 1e-5 * (1.0 + np.abs(g_fd)))


def test_objective_value_and_grad_deterministic():
    spec = MlpSpec(2, 6)
    params = init_params(spec, seed=17)
    terms = [
        _ritz_like_term(np.random.default_rng(1).uniform(-1, 1, (9, 2))),
        _residual_like_term(np.random.default_rng(2).uniform(-1, 1, (5, 2))),
    ]
    v1, g1 = objective_value_and_grad(params, spec, terms)
    v2, g2 = objective_value_and_grad(params, spec, terms)
    assert v1 == v2
    assert np.array_equal(g1, g2)


def test_weighted_terms_scale_gradient():
    spec = MlpSpec(2, 5)
    params = init_params(spec, seed=31)
    pts = np.random.default_rng(3).uniform(-1, 1, (6, 2))
    t1 = _ritz_like_term(pts)
    t2 = _ritz_like_term(pts)
    t2.weight = 2.5
    v1, g1 = objective_value_and_grad(params, spec, t1)
    v2, g2 = objective_value_and_grad(params, spec, t2)
    assert np.isclose(v2, 2.5 * v1, rtol=1e-15)
    assert np.allclose(g2, 2.5 * g1, rtol=1e-13)


def test_smooth_everywhere_in_bbox():
    # the network is one global smooth function: jets evaluable at any point
    spec = MlpSpec(3, 8)
    params = init_params(spec, seed=2)
    for x in [(-1, -1), (1, 1), (0.5, 0.0), (0.0, 0.5), (0.3, 0.3)]:
        jet = forward_jet(params, spec, x)
        assert np.isfinite(jet.value) and np.isfinite(jet.laplacian)


def test_non_finite_params_raise():
    spec = MlpSpec(1, 2)
    params = init_params(spec, seed=0)
    params[0] = np.inf
    with np.errstate(invalid="ignore"), pytest.raises(FloatingPointError):
        forward_jet(params, spec, (0.1, 0.1))


def test_checkpoint_roundtrip(tmp_path):
    spec = MlpSpec(hidden_layers=2, width=7)
    params = init_params(spec, seed=99)
    path = tmp_path / "net.ckpt"
    save_checkpoint(path, params, spec)
    loaded, spec2 = load_checkpoint(path)
    assert spec2 == spec
    assert np.array_equal(loaded, params)


def test_audit_captures_evaluations():
    spec = MlpSpec(1, 3)
    params = init_params(spec, seed=1)
    X = np.zeros((5, 2))
    with audit_jets() as log:
        eval_channels(params, spec, X, mode="grad", tag="net1")
        eval_channels(params, spec, X, mode="value", tag="net2")
    assert len(log) == 2
    assert log[0].tag == "net1" and log[0].mode == "grad"
    assert log[1].tag == "net2" and log[1].mode == "value"
    assert log[0].points.shape == (5, 2)
