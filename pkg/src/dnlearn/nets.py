"""Fully connected tanh networks with exact derivatives.

A network evaluation carries up to three channels per sample point: the value
u, the spatial gradient (u_x, u_y), and the Laplacian u_xx + u_yy.  All three
are propagated forward through the layers analytically (no numerical
differencing, no computation-graph autodiff), and a hand-written reverse pass
produces the exact gradient of any scalar objective built from the channels
with respect to every weight and bias.

Conventions
-----------
Parameters live in one flat float64 vector.  Layout per layer, in order:
W (fan_out x fan_in, row-major), then b (fan_out).  Gradient channel arrays
stack the d/dx block on top of the d/dy block: shape (2n, width) for a batch
of n points.
"""

from __future__ import annotations

import contextlib
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

MODES = ("value", "grad", "jet")


@dataclass(frozen=True)
class MlpSpec:
    """Architecture descriptor: input_dim -> width x hidden_layers -> output_dim, all tanh."""

    hidden_layers: int
    width: int
    input_dim: int = 2
    output_dim: int = 1
    activation: str = "tanh"

    def __post_init__(self):
        assert self.hidden_layers >= 1, "need at least one hidden layer"
        assert self.width >= 1
        assert self.input_dim >= 1 and self.output_dim >= 1
        assert self.activation == "tanh", "only tanh is supported (second derivatives required)"

    def layer_dims(self) -> list[int]:
        return [self.input_dim] + [self.width] * self.hidden_layers + [self.output_dim]

    def n_params(self) -> int:
        dims = self.layer_dims()
        return sum((dims[i] + 1) * dims[i + 1] for i in range(len(dims) - 1))


@dataclass(frozen=True)
class Jet2:
    """One network evaluation: value, gradient (d/dx, d/dy), Laplacian."""

    value: float
    grad: np.ndarray
    laplacian: float


@dataclass(frozen=True)
class MlpNet:
    """A spec bundled with one flat parameter vector."""

    spec: MlpSpec
    params: np.ndarray


def init_params(spec: MlpSpec, seed) -> np.ndarray:
    """Glorot-uniform weights, zero biases; deterministic for a given seed."""
    rng = np.random.default_rng(seed)
    dims = spec.layer_dims()
    chunks = []
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        chunks.append(rng.uniform(-limit, limit, size=fan_out * fan_in))
        chunks.append(np.zeros(fan_out))
    return np.concatenate(chunks)


def split_params(params: np.ndarray, spec: MlpSpec) -> list[tuple[np.ndarray, np.ndarray]]:
    """Views (W, b) per layer into the flat vector; no copies."""
    params = np.asarray(params, dtype=np.float64)
    assert params.ndim == 1 and params.size == spec.n_params(), (
        f"parameter vector length {params.size} != {spec.n_params()} required by spec"
    )
    dims = spec.layer_dims()
    out, offset = [], 0
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        W = params[offset : offset + fan_out * fan_in].reshape(fan_out, fan_in)
        offset += fan_out * fan_in
        b = params[offset : offset + fan_out]
        offset += fan_out
        out.append((W, b))
    return out


# ---------------------------------------------------------------------------
# Evaluation audit.  An active audit collects one record per batched network
# evaluation; solver tests use it to assert which nets were differentiated
# where (in particular: never net1 gradients at interface points inside the
# compensated Neumann solve).
# ---------------------------------------------------------------------------

@dataclass
class AuditRecord:
    points: np.ndarray
    mode: str
    tag: str


_AUDIT_STACK: list[list[AuditRecord]] = []


@contextlib.contextmanager
def audit_jets():
    log: list[AuditRecord] = []
    _AUDIT_STACK.append(log)
    try:
        yield log
    finally:
        _AUDIT_STACK.pop()


def _record_eval(points: np.ndarray, mode: str, tag: str) -> None:
    if _AUDIT_STACK:
        rec = AuditRecord(points=points, mode=mode, tag=tag)
        for log in _AUDIT_STACK:
            log.append(rec)


# ---------------------------------------------------------------------------
# Batched forward propagation of the (value, grad, laplacian) channels.
# ---------------------------------------------------------------------------

def _tanh_derivs(t: np.ndarray, need_third: bool):
    s1 = 1.0 - t * t
    s2 = -2.0 * t * s1
    s3 = (6.0 * t * t - 2.0) * s1 if need_third else None
    return s1, s2, s3


def _forward_channels(layers, X: np.ndarray, mode: str, keep_cache: bool):
    """Run the stacked channels through all layers.

    Returns (u, gu, lu, cache).  gu has shape (n, 2); absent channels are None.
    cache is a per-layer list of tuples used by _backward_channels.
    """
    n = X.shape[0]
    need_g = mode in ("grad", "jet")
    need_l = mode == "jet"

    h = X
    G = None
    L = None
    if need_g:
        # d(input_j)/d(x_i): identity per point, stacked [d/dx block; d/dy block]
        G = np.zeros((2 * n, X.shape[1]))
        G[:n, 0] = 1.0
        G[n:, 1] = 1.0
    if need_l:
        L = np.zeros((n, X.shape[1]))

    cache = [] if keep_cache else None
    last = len(layers) - 1
    for idx, (W, b) in enumerate(layers):
        A = h @ W.T + b
        GA = G @ W.T if need_g else None
        LA = L @ W.T if need_l else None
        if idx == last:
            if keep_cache:
                cache.append((h, G, L, None, None, None, None))
            h, G, L = A, GA, LA
            break
        t = np.tanh(A)
        s1, s2, _ = _tanh_derivs(t, need_third=False)
        sum_ga2 = None
        if need_g:
            GA2 = GA.reshape(2, n, -1)
            Gnew = (s1 * GA2).reshape(2 * n, -1)
        if need_l:
            sum_ga2 = GA2[0] * GA2[0] + GA2[1] * GA2[1]
            Lnew = s2 * sum_ga2 + s1 * LA
        if keep_cache:
            cache.append((h, G, L, t, GA, LA, sum_ga2))
        h = t
        if need_g:
            G = Gnew
        if need_l:
            L = Lnew

    u = h[:, 0]
    gu = None
    if need_g:
        gu = G[:, 0].reshape(2, n).T  # (n, 2)
    lu = L[:, 0] if need_l else None
    return u, gu, lu, cache


def _backward_channels(layers, cache, mode: str, bar_u, bar_gu, bar_lu, grad_out: np.ndarray, spec: MlpSpec):
    """Accumulate d(objective)/d(params) into grad_out given per-sample seeds.

    Seeds are the partials of the objective with respect to the output
    channels: bar_u (n,), bar_gu (n, 2) or None, bar_lu (n,) or None.
    """
    n = bar_u.shape[0]
    need_g = mode in ("grad", "jet")
    need_l = mode == "jet"

    # Bar arrays with respect to the current layer's *output* stack.
    bh = bar_u[:, None]                                   # (n, 1)
    bG = None
    bL = None
    if need_g:
        bG = np.concatenate([bar_gu[:, 0], bar_gu[:, 1]])[:, None] if bar_gu is not None \
            else np.zeros((2 * n, 1))
    if need_l:
        bL = bar_lu[:, None] if bar_lu is not None else np.zeros((n, 1))

    dims = spec.layer_dims()
    offsets = []
    off = 0
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        offsets.append(off)
        off += (fan_in + 1) * fan_out

    for idx in range(len(layers) - 1, -1, -1):
        W, _b = layers[idx]
        h_prev, G_prev, L_prev, t, GA, LA, sum_ga2 = cache[idx]
        if idx != len(layers) - 1:
            # Through the tanh: convert bars w.r.t. activation outputs into
            # bars w.r.t. the pre-activation stack (bh, bG, bL in place).
            s1, s2, s3 = _tanh_derivs(t, need_third=need_l)
            bA = bh * s1
            if need_g:
                GA2 = GA.reshape(2, n, -1)
                bG2 = bG.reshape(2, n, -1)
                bA = bA + (bG2[0] * GA2[0] + bG2[1] * GA2[1]) * s2
            if need_l:
                bA = bA + bL * (s3 * sum_ga2 + s2 * LA)
                bGA = (bG2 * s1 + (2.0 * (bL * s2)) * GA2).reshape(2 * n, -1)
                bLA = bL * s1
            elif need_g:
                bGA = (bG2 * s1).reshape(2 * n, -1)
            bh = bA
            if need_g:
                bG = bGA
            if need_l:
                bL = bLA

        fan_out, fan_in = W.shape
        dW = bh.T @ h_prev
        db = bh.sum(axis=0)  # bias feeds only the value channel
        if need_g:
            dW += bG.T @ G_prev
        if need_l:
            dW += bL.T @ L_prev
        off = offsets[idx]
        grad_out[off : off + fan_out * fan_in] += dW.ravel()
        grad_out[off + fan_out * fan_in : off + (fan_in + 1) * fan_out] += db

        if idx > 0:
            bh = bh @ W
            if need_g:
                bG = bG @ W
            if need_l:
                bL = bL @ W


def eval_channels(params: np.ndarray, spec: MlpSpec, X: np.ndarray, mode: str = "jet", tag: str = ""):
    """Batched evaluation; returns (u, gu, lu) with None for absent channels."""
    assert mode in MODES, f"unknown mode {mode!r}"
    X = np.ascontiguousarray(X, dtype=np.float64)
    assert X.ndim == 2 and X.shape[1] == spec.input_dim
    _record_eval(X, mode, tag)
    layers = split_params(params, spec)
    u, gu, lu, _ = _forward_channels(layers, X, mode, keep_cache=False)
    return u, gu, lu


def forward(params: np.ndarray, spec: MlpSpec, x) -> float:
    """Network value at a single point."""
    X = np.asarray(x, dtype=np.float64).reshape(1, spec.input_dim)
    u, _, _ = eval_channels(params, spec, X, mode="value")
    return float(u[0])


def forward_jet(params: np.ndarray, spec: MlpSpec, x) -> Jet2:
    """Value, exact gradient, and exact Laplacian at a single point."""
    X = np.asarray(x, dtype=np.float64).reshape(1, spec.input_dim)
    u, gu, lu = eval_channels(params, spec, X, mode="jet")
    out = Jet2(value=float(u[0]), grad=gu[0].copy(), laplacian=float(lu[0]))
    if not (np.isfinite(out.value) and np.all(np.isfinite(out.grad)) and np.isfinite(out.laplacian)):
        raise FloatingPointError("non-finite network output (parameter blow-up)")
    return out


# ---------------------------------------------------------------------------
# Objectives: weighted sums of per-batch terms.  A term owns its point batch
# and turns raw channels into (scalar value, per-sample seed arrays).
# ---------------------------------------------------------------------------

@dataclass
class JetTerm:
    """One additive piece of a training objective.

    fn maps the channel arrays (u, gu, lu) to
    (value, bar_u, bar_gu, bar_lu) where bar_* are the partials of the
    *unweighted* term value; bar entries may be None when zero.
    """

    points: np.ndarray
    fn: Callable
    mode: str = "value"
    weight: float = 1.0
    tag: str = ""

    def __post_init__(self):
        self.points = np.ascontiguousarray(self.points, dtype=np.float64)
        assert self.mode in MODES


def _as_terms(objective) -> list[JetTerm]:
    if isinstance(objective, JetTerm):
        return [objective]
    terms = list(objective)
    assert all(isinstance(t, JetTerm) for t in terms)
    return terms


def objective_value(params: np.ndarray, spec: MlpSpec, objective) -> float:
    total = 0.0
    for term in _as_terms(objective):
        u, gu, lu = eval_channels(params, spec, term.points, term.mode, term.tag)
        value = term.fn(u, gu, lu)[0]
        total += term.weight * value
    return float(total)


def objective_value_and_grad(params: np.ndarray, spec: MlpSpec, objective):
    """Objective value and its exact gradient with respect to params.

    Batch reductions run in fixed order (terms in sequence, samples in array
    order), so repeated calls are bit-identical.
    """
    layers = split_params(params, spec)
    grad = np.zeros_like(params)
    total = 0.0
    for term in _as_terms(objective):
        X = term.points
        _record_eval(X, term.mode, term.tag)
        u, gu, lu, cache = _forward_channels(layers, X, term.mode, keep_cache=True)
        value, bar_u, bar_gu, bar_lu = term.fn(u, gu, lu)
        total += term.weight * value
        if bar_u is None:
            bar_u = np.zeros_like(u)
        w = term.weight
        _backward_channels(
            layers, cache, term.mode,
            np.asarray(bar_u) * w,
            None if bar_gu is None else np.asarray(bar_gu) * w,
            None if bar_lu is None else np.asarray(bar_lu) * w,
            grad, spec,
        )
    return float(total), grad


def parameter_gradient(params: np.ndarray, spec: MlpSpec, objective) -> np.ndarray:
    """Exact reverse-mode gradient of a scalar objective built from jets."""
    value, grad = objective_value_and_grad(params, spec, objective)
    if not np.isfinite(value) or not np.all(np.isfinite(grad)):
        raise FloatingPointError("non-finite objective or gradient (divergence)")
    return grad


# ---------------------------------------------------------------------------
# Checkpoint files: one header line with the spec, then one parameter per
# line printed with %.17g (exact float64 round-trip).
# ---------------------------------------------------------------------------

def save_checkpoint(path, params: np.ndarray, spec: MlpSpec) -> None:
    with open(path, "w") as fh:
        fh.write(
            f"mlp input_dim={spec.input_dim} hidden_layers={spec.hidden_layers} "
            f"width={spec.width} output_dim={spec.output_dim} activation={spec.activation}\n"
        )
        for v in np.asarray(params, dtype=np.float64):
            fh.write(f"{v:.17g}\n")


def load_checkpoint(path) -> tuple[np.ndarray, MlpSpec]:
    with open(path) as fh:
        header = fh.readline().split()
        assert header and header[0] == "mlp", f"{path}: not a checkpoint file"
        kv = dict(item.split("=", 1) for item in header[1:])
        spec = MlpSpec(
            hidden_layers=int(kv["hidden_layers"]),
            width=int(kv["width"]),
            input_dim=int(kv["input_dim"]),
            output_dim=int(kv["output_dim"]),
            activation=kv["activation"],
        )
        params = np.array([float(line) for line in fh if line.strip()], dtype=np.float64)
    assert params.size == spec.n_params(), f"{path}: parameter count mismatch"
    return params, spec
