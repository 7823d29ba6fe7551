"""AdamW with decoupled weight decay, a step learning-rate schedule, and the
full-batch training loop with best-checkpoint tracking."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .nets import (MlpSpec, init_params, objective_value,
                   objective_value_and_grad)


class TrainDivergence(RuntimeError):
    """Raised when the training loss or gradient turns non-finite."""


@dataclass(frozen=True)
class AdamWHyper:
    lr0: float = 0.1
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    weight_decay: float = 1e-2

    def __post_init__(self):
        assert 0.0 <= self.beta1 < 1.0 and 0.0 <= self.beta2 < 1.0
        assert self.lr0 > 0.0 and self.eps > 0.0


@dataclass
class AdamWState:
    m: np.ndarray
    v: np.ndarray
    step: int = 0

    @classmethod
    def zeros(cls, n: int) -> "AdamWState":
        return cls(m=np.zeros(n), v=np.zeros(n), step=0)


@dataclass(frozen=True)
class LrSchedule:
    """Piecewise-constant schedule: lr drops by `factor` at each milestone
    fraction of the total epoch count."""

    total_epochs: int
    milestones: tuple[float, ...] = (0.6, 0.8)
    factor: float = 0.1

    def __post_init__(self):
        assert all(0.0 < m < 1.0 for m in self.milestones)
        assert all(a < b for a, b in zip(self.milestones, self.milestones[1:])), \
            "milestones must be strictly increasing"


def lr_at(schedule: LrSchedule, hyper: AdamWHyper, epoch: int) -> float:
    assert 0 <= epoch < max(schedule.total_epochs, 1)
    lr = hyper.lr0
    for m in schedule.milestones:
        if epoch >= m * schedule.total_epochs:
            lr *= schedule.factor
    return lr


def adamw_step(params: np.ndarray, grads: np.ndarray, state: AdamWState,
               hyper: AdamWHyper, lr: float):
    """One decoupled-weight-decay step:
    theta' = theta - lr * mhat/(sqrt(vhat)+eps) - lr * weight_decay * theta."""
    assert params.shape == grads.shape == state.m.shape
    assert lr > 0.0
    step = state.step + 1
    m = hyper.beta1 * state.m + (1.0 - hyper.beta1) * grads
    v = hyper.beta2 * state.v + (1.0 - hyper.beta2) * grads * grads
    mhat = m / (1.0 - hyper.beta1 ** step)
    vhat = v / (1.0 - hyper.beta2 ** step)
    new_params = params - lr * (mhat / (np.sqrt(vhat) + hyper.eps)) - lr * hyper.weight_decay * params
    return new_params, AdamWState(m=m, v=v, step=step)


@dataclass
class LossRecord:
    epoch: int
    loss: float
    lr: float


def write_loss_history(path, history: list[LossRecord]) -> None:
    with open(path, "w") as fh:
        fh.write("epoch,loss,lr\n")
        for rec in history:
            fh.write(f"{rec.epoch},{rec.loss:.17g},{rec.lr:.17g}\n")


def train(spec, objective, epochs: int, hyper: AdamWHyper | None = None,
          schedule: LrSchedule | None = None, seed=0, params0: np.ndarray | None = None):
    """Full-batch training; returns (best_params, history).

    `objective` is either a JetTerm / list of JetTerms (evaluated through the
    network given by `spec`), or a callable params -> (value, grad) for
    generic optimization.  The retained parameters are the snapshot with the
    minimum recorded loss; the loss at epoch e is measured at the parameters
    *before* that epoch's update, so min over the history equals the
    objective at the returned parameters.
    """
    hyper = hyper or AdamWHyper()
    schedule = schedule or LrSchedule(total_epochs=epochs)
    if params0 is not None:
        params = np.array(params0, dtype=np.float64)
    else:
        assert spec is not None, "need a spec or explicit initial parameters"
        params = init_params(spec, seed)
    if epochs == 0:
        return params, []

    if callable(objective) and not isinstance(objective, (list, tuple)):
        evaluate = objective
    else:
        evaluate = lambda p: objective_value_and_grad(p, spec, objective)

    state = AdamWState.zeros(params.size)
    best_loss = np.inf
    best_params = params.copy()
    history: list[LossRecord] = []
    for epoch in range(epochs):
        lr = lr_at(schedule, hyper, epoch)
        value, grad = evaluate(params)
        if not np.isfinite(value) or not np.all(np.isfinite(grad)):
            raise TrainDivergence(f"non-finite training loss at epoch {epoch}: {value}")
        if value < best_loss:
            best_loss = value
            best_params = params.copy()
        history.append(LossRecord(epoch=epoch, loss=float(value), lr=lr))
        params, state = adamw_step(params, grad, state, hyper, lr)
    return best_params, history


def readout_lstsq(spec: MlpSpec, params: np.ndarray, terms) -> np.ndarray:
    """Exact minimization of a term objective over the output-layer block.

    The value, gradient, and Laplacian channels of the network are all linear
    in the final affine layer, so every quadratic-or-linear loss term makes
    the objective restricted to that block an (up to) quadratic function.
    Its gradient is then affine in the block, and d+1 gradient evaluations
    (unit probes along each block coordinate) recover the normal equations
    exactly.  Returns the polished parameter vector if it strictly lowers
    the objective, otherwise the input unchanged.
    """
    params = np.asarray(params, dtype=np.float64)
    dims = spec.layer_dims()
    d = (dims[-2] + 1) * dims[-1]
    lo = params.size - d
    block = slice(lo, params.size)

    def block_grad(p):
        return objective_value_and_grad(p, spec, terms)[1][block]

    g0 = block_grad(params)
    if not np.all(np.isfinite(g0)):
        return params
    A = np.empty((d, d))
    probe = params.copy()
    for i in range(d):
        probe[lo + i] += 1.0
        A[:, i] = block_grad(probe) - g0
        probe[lo + i] = params[lo + i]
    A = 0.5 * (A + A.T)
    rhs = A @ params[block] - g0
    # tiny Tikhonov shift: the quadratic can be singular along feature
    # directions no term observes (e.g. the bias under pure-gradient terms)
    lam = 1e-12 * max(abs(np.trace(A)) / d, 1.0)
    try:
        sol = np.linalg.solve(A + lam * np.eye(d), rhs)
    except np.linalg.LinAlgError:
        sol, *_ = np.linalg.lstsq(A, rhs, rcond=None)
    if not np.all(np.isfinite(sol)):
        return params
    cand = params.copy()
    cand[block] = sol
    before = objective_value(params, spec, terms)
    after = objective_value(cand, spec, terms)
    # margin keeps pure-roundoff re-solves from churning the parameters
    margin = 1e-12 * max(abs(before), abs(after), 1e-300)
    if np.isfinite(after) and after < before - margin:
        return cand
    return params
