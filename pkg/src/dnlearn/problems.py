"""Benchmark interface problems with manufactured solutions.

Each problem couples two diffusion coefficients (c1 inside region 1, c2 in
region 2) through jump data on the interface.  The strong form is

    -div(c_i grad u_i) [+ u_i] = f   in Omega_i,
    u_i = g                          on the outer boundary piece,
    u_1 - u_2 = p                    on Gamma,
    (c_2 grad u_2 - c_1 grad u_1) . n_1 = q   on Gamma,

with the zero-order term controlled by ``mass_term``.  Source terms and jump
data are hand-differentiated closed forms; ``verify_manufactured`` guards the
algebra with finite-difference and analytic-gradient oracles.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from dnlearn import geometry
from dnlearn.geometry import Geometry, membership_many

PROBLEM_NAMES = ("circle", "zigzag", "checkerboard")

# verify_manufactured tolerances
RESIDUAL_TOL = 1e-4
JUMP_TOL = 1e-10
FLUX_TOL = 1e-8
GRAD_TOL = 1e-5
FD_STEP = 1e-4


@dataclass(frozen=True)
class Field:
    """A scalar field with its analytic gradient, both vectorized over (n,2)."""

    value: Callable[[np.ndarray], np.ndarray]
    grad: Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class InterfaceProblem:
    name: str
    geometry: Geometry
    c1: float
    c2: float
    mass_term: bool
    f: Callable[[np.ndarray], np.ndarray]
    g: Callable[[np.ndarray], np.ndarray]
    p: Callable[[np.ndarray], np.ndarray]
    q: Callable[[np.ndarray, np.ndarray], np.ndarray]
    exact_u1: Field
    exact_u2: Field
    trace0: Callable[[np.ndarray], np.ndarray]

    def __post_init__(self):
        assert self.c1 > 0 and self.c2 > 0

    def exact_values(self, X: np.ndarray) -> np.ndarray:
        tags = membership_many(self.geometry, X)
        return np.where(tags == geometry.REGION_1,
                        self.exact_u1.value(X), self.exact_u2.value(X))

    def exact_gradients(self, X: np.ndarray) -> np.ndarray:
        tags = membership_many(self.geometry, X)
        g1 = self.exact_u1.grad(X)
        g2 = self.exact_u2.grad(X)
        return np.where((tags == geometry.REGION_1)[:, None], g1, g2)

    def coefficients(self, X: np.ndarray) -> np.ndarray:
        tags = membership_many(self.geometry, X)
        return np.where(tags == geometry.REGION_1, self.c1, self.c2)


def _piecewise(geom: Geometry, f1, f2):
    def f(X):
        tags = membership_many(geom, X)
        return np.where(tags == geometry.REGION_1, f1(X), f2(X))
    return f


def example_circle(c1: float, c2: float) -> InterfaceProblem:
    """Continuous solution across a circular interface, no zero-order term.

    u = c1^-1 exp(10(r^2-R^2)) inside, and
    c2^-1 exp(10(R^2-r^2)) + (c1^-1-c2^-1) exp(r^2-R^2) outside.
    """
    geom = geometry.circle_geometry()
    R2 = geometry.CIRCLE_RADIUS ** 2
    d = 1.0 / c1 - 1.0 / c2

    def r2(X):
        return X[:, 0] ** 2 + X[:, 1] ** 2

    def u1(X):
        return np.exp(10.0 * (r2(X) - R2)) / c1

    def grad_u1(X):
        return (20.0 * u1(X))[:, None] * X

    def u2(X):
        s = r2(X)
        return np.exp(10.0 * (R2 - s)) / c2 + d * np.exp(s - R2)

    def grad_u2(X):
        s = r2(X)
        coef = -20.0 * np.exp(10.0 * (R2 - s)) / c2 + 2.0 * d * np.exp(s - R2)
        return coef[:, None] * X

    def f1(X):
        s = r2(X)
        return -np.exp(10.0 * (s - R2)) * (400.0 * s + 40.0)

    def f2(X):
        s = r2(X)
        return (-np.exp(10.0 * (R2 - s)) * (400.0 * s - 40.0)
                - c2 * d * np.exp(s - R2) * (4.0 * s + 4.0))

    def q(X, N):
        # both radial fluxes are constant on r=R; the difference simplifies
        return np.full(X.shape[0], c2 / c1 - 21.0)

    def trace0(X):
        x, y = X[:, 0], X[:, 1]
        return -1000.0 * x * (x - 1.0) * y * (y - 1.0) + 1.0

    return InterfaceProblem(
        name="circle", geometry=geom, c1=c1, c2=c2, mass_term=False,
        f=_piecewise(geom, f1, f2), g=u2,
        p=lambda X: np.zeros(X.shape[0]), q=q,
        exact_u1=Field(u1, grad_u1), exact_u2=Field(u2, grad_u2),
        trace0=trace0)


def example_zigzag(c1: float, c2: float) -> InterfaceProblem:
    """Sawtooth interface, discontinuous scaling of one smooth shape.

    u_i = c_i^-1 sin(2 pi x)(cos(2 pi y) - 1); the flux c_i grad u_i is then
    continuous, so q vanishes while p jumps by (c1^-1 - c2^-1) s(x,y).
    """
    geom = geometry.zigzag_geometry()
    d = 1.0 / c1 - 1.0 / c2
    w = 2.0 * np.pi

    def shape(X):
        return np.sin(w * X[:, 0]) * (np.cos(w * X[:, 1]) - 1.0)

    def shape_grad(X):
        x, y = X[:, 0], X[:, 1]
        gx = w * np.cos(w * x) * (np.cos(w * y) - 1.0)
        gy = -w * np.sin(w * x) * np.sin(w * y)
        return np.column_stack([gx, gy])

    def make_side(c):
        return Field(lambda X, c=c: shape(X) / c,
                     lambda X, c=c: shape_grad(X) / c)

    def f_side(X, c):
        x, y = X[:, 0], X[:, 1]
        # -c Delta(shape/c) + shape/c; Delta shape = -w^2 sin(wx)(2cos(wy)-1)
        return (w ** 2 * np.sin(w * x) * (2.0 * np.cos(w * y) - 1.0)
                + shape(X) / c)

    def trace0(X):
        x, y = X[:, 0], X[:, 1]
        return shape(X) - 1000.0 * x * (x - 1.0) * y * (y - 1.0)

    return InterfaceProblem(
        name="zigzag", geometry=geom, c1=c1, c2=c2, mass_term=True,
        f=_piecewise(geom, lambda X: f_side(X, c1), lambda X: f_side(X, c2)),
        g=lambda X: np.zeros(X.shape[0]),   # shape vanishes on the unit square edge
        p=lambda X: d * shape(X),
        q=lambda X, N: np.zeros(X.shape[0]),
        exact_u1=make_side(c1), exact_u2=make_side(c2),
        trace0=trace0)


def example_checkerboard(c1: float, c2: float) -> InterfaceProblem:
    """Checkerboard partition with a genuinely discontinuous solution.

    u_1 = c1^-1 sin(4 pi x) sin(4 pi y) on the diagonal cells,
    u_2 = c2^-1 4 x(x-1) y(y-1) on the off-diagonal cells.
    """
    geom = geometry.checkerboard_geometry()
    w = 4.0 * np.pi

    def u1(X):
        return np.sin(w * X[:, 0]) * np.sin(w * X[:, 1]) / c1

    def grad_u1(X):
        x, y = X[:, 0], X[:, 1]
        return (w / c1) * np.column_stack(
            [np.cos(w * x) * np.sin(w * y), np.sin(w * x) * np.cos(w * y)])

    def bubble(X):
        x, y = X[:, 0], X[:, 1]
        return x * (x - 1.0) * y * (y - 1.0)

    def u2(X):
        return 4.0 * bubble(X) / c2

    def grad_u2(X):
        x, y = X[:, 0], X[:, 1]
        return (4.0 / c2) * np.column_stack(
            [(2.0 * x - 1.0) * y * (y - 1.0), x * (x - 1.0) * (2.0 * y - 1.0)])

    def f1(X):
        return (2.0 * w ** 2 + 1.0 / c1) * np.sin(w * X[:, 0]) * np.sin(w * X[:, 1])

    def f2(X):
        x, y = X[:, 0], X[:, 1]
        return -8.0 * (x * (x - 1.0) + y * (y - 1.0)) + 4.0 * bubble(X) / c2

    def p(X):
        # u1 vanishes on the cell lines x=1/2 and y=1/2, so the jump is -u2
        return -4.0 * bubble(X) / c2

    def q(X, N):
        # on the cross c2 grad u2 . n = 0 and only one sine survives per leg
        x, y = X[:, 0], X[:, 1]
        return -w * (N[:, 0] * np.sin(w * y) + N[:, 1] * np.sin(w * x))

    def trace0(X):
        x, y = X[:, 0], X[:, 1]
        return (np.sin(w * y) * np.sin(w * x)
                + 100.0 * x * (x - 1.0) ** 3 * y * (y - 1.0) ** 3)

    return InterfaceProblem(
        name="checkerboard", geometry=geom, c1=c1, c2=c2, mass_term=True,
        f=_piecewise(geom, f1, f2),
        g=_piecewise(geom, u1, u2),
        p=p, q=q,
        exact_u1=Field(u1, grad_u1), exact_u2=Field(u2, grad_u2),
        trace0=trace0)


_FACTORIES = {
    "circle": example_circle,
    "zigzag": example_zigzag,
    "checkerboard": example_checkerboard,
}


def problem_by_name(name: str, c1: float, c2: float) -> InterfaceProblem:
    if name not in _FACTORIES:
        raise ValueError(f"unknown problem {name!r}; expected one of {PROBLEM_NAMES}")
    return _FACTORIES[name](c1, c2)


@dataclass(frozen=True)
class VerifyReport:
    """Max deviations of the manufactured data, with argmax locations."""

    max_residual: float
    residual_at: tuple
    max_jump: float
    jump_at: tuple
    max_flux: float
    flux_at: tuple
    max_grad: float
    grad_at: tuple

    @property
    def passed(self) -> bool:
        return (self.max_residual <= RESIDUAL_TOL and self.max_jump <= JUMP_TOL
                and self.max_flux <= FLUX_TOL and self.max_grad <= GRAD_TOL)


def _fd_laplacian(field: Field, X: np.ndarray, h: float) -> np.ndarray:
    ex = np.array([h, 0.0])
    ey = np.array([0.0, h])
    u0 = field.value(X)
    return (field.value(X + ex) + field.value(X - ex)
            + field.value(X + ey) + field.value(X - ey) - 4.0 * u0) / h ** 2


def _fd_gradient(field: Field, X: np.ndarray, h: float) -> np.ndarray:
    ex = np.array([h, 0.0])
    ey = np.array([0.0, h])
    gx = (field.value(X + ex) - field.value(X - ex)) / (2.0 * h)
    gy = (field.value(X + ey) - field.value(X - ey)) / (2.0 * h)
    return np.column_stack([gx, gy])


def verify_manufactured(problem: InterfaceProblem, n_points: int = 300,
                        seed: int = 0) -> VerifyReport:
    """Check f, p, q, and the analytic gradients against independent oracles.

    The PDE residual uses a five-point FD Laplacian of each exact branch at
    random interior points (relative to max(1, |f|)); p and q are compared
    with differences of the exact branches and their analytic gradients; the
    gradients themselves are checked against central differences.
    """
    counts = geometry.SampleCounts(n_points, n_points, 10, 10, n_points)
    ss = geometry.sample_sets(problem.geometry, counts, seed=seed)
    h = FD_STEP

    max_residual, residual_at = 0.0, (np.nan, np.nan)
    for X, field, c in [(ss.interior_1, problem.exact_u1, problem.c1),
                        (ss.interior_2, problem.exact_u2, problem.c2)]:
        # keep the FD stencil strictly inside the box
        xmin, xmax, ymin, ymax = problem.geometry.bbox
        keep = ((X[:, 0] > xmin + 2 * h) & (X[:, 0] < xmax - 2 * h)
                & (X[:, 1] > ymin + 2 * h) & (X[:, 1] < ymax - 2 * h))
        X = X[keep]
        fx = problem.f(X)
        resid = -c * _fd_laplacian(field, X, h) - fx
        if problem.mass_term:
            resid += field.value(X)
        rel = np.abs(resid) / np.maximum(1.0, np.abs(fx))
        i = int(np.argmax(rel))
        if rel[i] > max_residual:
            max_residual, residual_at = float(rel[i]), tuple(X[i])

    G = ss.interface
    jump = np.abs(problem.p(G) - (problem.exact_u1.value(G)
                                  - problem.exact_u2.value(G)))
    i = int(np.argmax(jump))
    max_jump, jump_at = float(jump[i]), tuple(G[i])

    flux_ref = np.einsum("ij,ij->i",
                         problem.c2 * problem.exact_u2.grad(G)
                         - problem.c1 * problem.exact_u1.grad(G), ss.normals)
    flux = np.abs(problem.q(G, ss.normals) - flux_ref)
    i = int(np.argmax(flux))
    max_flux, flux_at = float(flux[i]), tuple(G[i])

    max_grad, grad_at = 0.0, (np.nan, np.nan)
    for X, field in [(ss.interior_1, problem.exact_u1),
                     (ss.interior_2, problem.exact_u2)]:
        ga = field.grad(X)
        gfd = _fd_gradient(field, X, h)
        rel = np.abs(ga - gfd).max(axis=1) / (1.0 + np.abs(gfd).max(axis=1))
        i = int(np.argmax(rel))
        if rel[i] > max_grad:
            max_grad, grad_at = float(rel[i]), tuple(X[i])

    return VerifyReport(max_residual, residual_at, max_jump, jump_at,
                        max_flux, flux_at, max_grad, grad_at)
