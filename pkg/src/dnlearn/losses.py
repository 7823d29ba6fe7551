"""Empirical loss terms and the composite subproblem objectives.

All losses are plain Monte Carlo means over their point batches, reduced in
fixed order.  The Dirichlet objective penalizes its boundary data with
beta_D/2; the Neumann objective couples the global network to the frozen
Dirichlet solution through a compensation term over region 1 and a signed
flux term on the interface, so no interface derivative of the frozen network
is ever formed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from dnlearn import geometry
from dnlearn.geometry import SampleSet
from dnlearn.nets import JetTerm, MlpNet, eval_channels, objective_value
from dnlearn.problems import InterfaceProblem

VARIANTS = ("ritz", "pinns")


@dataclass(frozen=True)
class PenaltyConfig:
    beta_D: float
    beta_N: float

    def __post_init__(self):
        assert self.beta_D > 0 and self.beta_N > 0


def _data_values(data, X: np.ndarray) -> np.ndarray:
    vals = data(X) if callable(data) else data
    return np.ascontiguousarray(np.broadcast_to(vals, (X.shape[0],)), dtype=np.float64)


# ---------------------------------------------------------------------------
# Term builders.  Each returns a JetTerm whose fn yields the scalar value and
# the per-sample adjoint seeds of the unweighted mean.
# ---------------------------------------------------------------------------

def make_ritz_interior_term(X, c, f, mass_term, weight=1.0, tag="interior") -> JetTerm:
    fv = _data_values(f, np.asarray(X))
    n = len(fv)

    def fn(u, gu, lu):
        dens = 0.5 * c * np.einsum("ij,ij->i", gu, gu) - fv * u
        bar_u = -fv / n
        if mass_term:
            dens = dens + 0.5 * u * u
            bar_u = bar_u + u / n
        return float(np.mean(dens)), bar_u, (c / n) * gu, None

    return JetTerm(points=X, fn=fn, mode="grad", weight=weight, tag=tag)


def make_pinns_residual_term(X, c, f, mass_term, weight=1.0, tag="interior") -> JetTerm:
    fv = _data_values(f, np.asarray(X))
    n = len(fv)

    def fn(u, gu, lu):
        r = -c * lu - fv
        if mass_term:
            r = r + u
        bar_u = (2.0 / n) * r if mass_term else None
        return float(np.mean(r * r)), bar_u, None, (-2.0 * c / n) * r

    return JetTerm(points=X, fn=fn, mode="jet", weight=weight, tag=tag)


def make_boundary_term(X, g, weight=1.0, tag="boundary") -> JetTerm:
    gv = _data_values(g, np.asarray(X))
    n = len(gv)

    def fn(u, gu, lu):
        m = u - gv
        return float(np.mean(m * m)), (2.0 / n) * m, None, None

    return JetTerm(points=X, fn=fn, mode="value", weight=weight, tag=tag)


def make_interface_dirichlet_term(X, trace_values, p, weight=1.0,
                                  tag="interface") -> JetTerm:
    X = np.asarray(X)
    trace_values = np.asarray(trace_values, dtype=np.float64)
    if trace_values.shape != (X.shape[0],):
        raise ValueError(
            f"trace length {trace_values.shape} does not match "
            f"{X.shape[0]} interface points")
    target = trace_values + _data_values(p, X)
    return make_boundary_term(X, target, weight=weight, tag=tag)


def make_interface_flux_term(X, q_values, weight=1.0, tag="interface") -> JetTerm:
    qv = np.ascontiguousarray(q_values, dtype=np.float64)
    n = len(qv)

    def fn(u, gu, lu):
        return float(np.mean(qv * u)), qv / n, None, None

    return JetTerm(points=X, fn=fn, mode="value", weight=weight, tag=tag)


def make_compensated_term(X, net1: MlpNet, c1, f, mass_term, weight=1.0,
                          tag="compensated") -> JetTerm:
    """Ritz coupling of the trainee to a frozen network over region 1.

    The frozen values and gradients are captured once at build time, so no
    parameter gradient can flow into net1 and the interface of the frozen
    solution is never differentiated.
    """
    X = np.asarray(X)
    fv = _data_values(f, X)
    n = len(fv)
    u1, g1, _ = eval_channels(net1.params, net1.spec, X, mode="grad", tag="net1")
    u1 = u1.copy()
    g1 = g1.copy()

    def fn(u, gu, lu):
        dens = c1 * np.einsum("ij,ij->i", g1, gu) - fv * u
        bar_u = -fv / n
        if mass_term:
            dens = dens + u1 * u
            bar_u = bar_u + u1 / n
        return float(np.mean(dens)), bar_u, (c1 / n) * g1, None

    return JetTerm(points=X, fn=fn, mode="grad", weight=weight, tag=tag)


# ---------------------------------------------------------------------------
# Scalar wrappers with the per-term signatures.
# ---------------------------------------------------------------------------

def loss_ritz_interior(net: MlpNet, X, c, f, mass_term) -> float:
    return objective_value(net.params, net.spec,
                           make_ritz_interior_term(X, c, f, mass_term))


def loss_pinns_residual(net: MlpNet, X, c, f, mass_term) -> float:
    return objective_value(net.params, net.spec,
                           make_pinns_residual_term(X, c, f, mass_term))


def loss_outer_boundary(net: MlpNet, X, g) -> float:
    return objective_value(net.params, net.spec, make_boundary_term(X, g))


def loss_interface_dirichlet(net1: MlpNet, X, trace_values, p) -> float:
    return objective_value(net1.params, net1.spec,
                           make_interface_dirichlet_term(X, trace_values, p))


def loss_interface_flux(net2: MlpNet, X, q_values) -> float:
    return objective_value(net2.params, net2.spec,
                           make_interface_flux_term(X, q_values))


def loss_compensated(net2: MlpNet, net1: MlpNet, X, c1, f, mass_term) -> float:
    return objective_value(net2.params, net2.spec,
                           make_compensated_term(X, net1, c1, f, mass_term))


# ---------------------------------------------------------------------------
# Composite objectives.
# ---------------------------------------------------------------------------

def _interior_term(variant, X, c, f, mass_term, tag):
    assert variant in VARIANTS, f"unknown variant {variant!r}"
    make = make_ritz_interior_term if variant == "ritz" else make_pinns_residual_term
    return make(X, c, f, mass_term, tag=tag)


def dirichlet_terms(problem: InterfaceProblem, samples: SampleSet, trace_values,
                    beta_D, variant="pinns") -> list[JetTerm]:
    """L_{Omega_1} + (beta_D/2)(L_{D_1} + L_{Gamma_D}); empty batches dropped."""
    terms = [_interior_term(variant, samples.interior_1, problem.c1, problem.f,
                            problem.mass_term, tag="omega1")]
    if samples.outer_1.shape[0]:
        terms.append(make_boundary_term(samples.outer_1, problem.g,
                                        weight=0.5 * beta_D, tag="outer1"))
    terms.append(make_interface_dirichlet_term(
        samples.interface, trace_values, problem.p,
        weight=0.5 * beta_D, tag="interface_dirichlet"))
    return terms


def neumann_terms(problem: InterfaceProblem, samples: SampleSet, net1: MlpNet,
                  beta_N, interior_variant="pinns") -> list[JetTerm]:
    """L_{Omega_2} + L_N + L_{Gamma_N} + (beta_N/2) outer-boundary penalty."""
    terms = [
        _interior_term(interior_variant, samples.interior_2, problem.c2,
                       problem.f, problem.mass_term, tag="omega2"),
        make_compensated_term(samples.interior_1, net1, problem.c1, problem.f,
                              problem.mass_term, tag="compensated"),
        make_interface_flux_term(
            samples.interface, problem.q(samples.interface, samples.normals),
            tag="interface_flux"),
    ]
    for X, tag in [(samples.outer_1, "outer1"), (samples.outer_2, "outer2")]:
        if X.shape[0]:
            terms.append(make_boundary_term(X, problem.g,
                                            weight=0.5 * beta_N, tag=tag))
    return terms


def objective_dirichlet(net1: MlpNet, problem: InterfaceProblem, samples: SampleSet,
                        trace_values, beta_D, variant="pinns") -> float:
    terms = dirichlet_terms(problem, samples, trace_values, beta_D, variant)
    return objective_value(net1.params, net1.spec, terms)


def objective_neumann(net2: MlpNet, net1: MlpNet, problem: InterfaceProblem,
                      samples: SampleSet, beta_N, interior_variant="pinns") -> float:
    terms = neumann_terms(problem, samples, net1, beta_N, interior_variant)
    return objective_value(net2.params, net2.spec, terms)


def default_beta_N(c1: float, c2: float, base: float = 800.0) -> float:
    """Penalty growth rule: the Neumann boundary error scales like c2/beta_N,
    so beta_N rises with the coefficient contrast."""
    return base * max(1.0, c2 / c1)


def default_penalties(problem: InterfaceProblem) -> PenaltyConfig:
    return PenaltyConfig(beta_D=800.0,
                         beta_N=default_beta_N(problem.c1, problem.c2))
