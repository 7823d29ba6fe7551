"""Classical 1-D finite-difference oracle for the outer iteration.

Solves -(c u')' + u = f on (0,1) with second-order stencils, including
one-sided second-order endpoint rows for flux and Robin conditions, and
drives the alternating Dirichlet/Neumann iteration on the two subintervals
split at x = gamma.  Everything here is mesh-based and independent of the
network machinery, so it certifies the outer loop and the O(1/beta) penalty
rates without any training in the loop.

Boundary conditions are written with the outward normal of the interval:
("dirichlet", v), ("flux", F) meaning c u' n = F, and ("robin", beta, d)
meaning u + (c/beta) u' n = d.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded


@dataclass(frozen=True)
class Grid1d:
    """Uniform grid on (0,1) with n interior nodes; gamma must sit on a node."""

    n: int
    gamma: float = 0.5

    def __post_init__(self):
        assert self.n >= 7
        k = self.gamma / self.h
        assert abs(k - round(k)) <= 1e-12, "interface must coincide with a node"
        m = round(k)
        # one-sided rows need three nodes on each side of the interface
        assert 3 <= m <= self.n - 2

    @property
    def h(self) -> float:
        return 1.0 / (self.n + 1)

    @property
    def interface_index(self) -> int:
        return round(self.gamma / self.h)

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.n + 2)


def _data_on(f, x: np.ndarray) -> np.ndarray:
    vals = f(x) if callable(f) else f
    return np.ascontiguousarray(np.broadcast_to(vals, x.shape), dtype=np.float64)


def _endpoint_row(A_band, rhs, c, h, bc, side, N):
    """Write the endpoint equation into the (2,2)-banded matrix."""
    i = 0 if side == "left" else N - 1
    sgn = -1.0 if side == "left" else 1.0   # outward normal direction
    # one-sided derivative stencil (second order): indices and weights
    if side == "left":
        idx = (0, 1, 2)
        wts = np.array([-3.0, 4.0, -1.0]) / (2.0 * h)
    else:
        idx = (N - 1, N - 2, N - 3)
        wts = np.array([3.0, -4.0, 1.0]) / (2.0 * h)

    def put(j, val):
        A_band[2 + i - j, j] += val

    kind = bc[0]
    if kind == "dirichlet":
        put(i, 1.0)
        rhs[i] = bc[1]
    elif kind == "flux":
        for j, w in zip(idx, wts):
            put(j, sgn * c * w)
        rhs[i] = bc[1]
    elif kind == "robin":
        beta, data = bc[1], bc[2]
        assert beta > 0
        put(i, 1.0)
        for j, w in zip(idx, wts):
            put(j, sgn * (c / beta) * w)
        rhs[i] = data
    else:
        raise ValueError(f"unknown boundary condition {bc!r}")


def solve_two_point(c, f, bc_left, bc_right, x: np.ndarray) -> np.ndarray:
    """FD solve of -(c u')' + u = f on a uniform node array x."""
    assert c > 0
    N = len(x)
    assert N >= 5
    h = x[1] - x[0]
    fv = _data_on(f, x)
    A = np.zeros((5, N))
    rhs = np.zeros(N)
    i = np.arange(1, N - 1)
    A[2, i] = 2.0 * c / h ** 2 + 1.0          # diagonal
    A[1, i + 1] = -c / h ** 2                 # superdiagonal entries (i, i+1)
    A[3, i - 1] = -c / h ** 2                 # subdiagonal entries (i, i-1)
    rhs[i] = fv[i]
    _endpoint_row(A, rhs, c, h, bc_left, "left", N)
    _endpoint_row(A, rhs, c, h, bc_right, "right", N)
    return solve_banded((2, 2), A, rhs)


def fd_dirichlet_1d(c, f, left_bc: float, right_bc: float, grid: Grid1d) -> np.ndarray:
    return solve_two_point(c, f, ("dirichlet", left_bc), ("dirichlet", right_bc),
                           grid.nodes)


def fd_robin_1d(c, f, beta: float, robin_data, grid: Grid1d) -> np.ndarray:
    d_left, d_right = robin_data
    return solve_two_point(c, f, ("robin", beta, d_left), ("robin", beta, d_right),
                           grid.nodes)


def h1_norm(values: np.ndarray, h: float) -> float:
    """Discrete H1 norm with forward differences for the derivative part."""
    d = np.diff(values) / h
    return float(np.sqrt(h * np.sum(values ** 2) + h * np.sum(d ** 2)))


# ---------------------------------------------------------------------------
# Dirichlet-Neumann iteration on (0,gamma) | (gamma,1).
# ---------------------------------------------------------------------------

def dn_step_1d(c1, c2, f, trace: float, grid: Grid1d) -> float:
    """One alternating solve; returns the Neumann solution at the interface.

    The Dirichlet subproblem takes u(gamma)=trace; its one-sided flux
    c1 u1'(gamma) feeds the Neumann subproblem, whose value at gamma is the
    unrelaxed trace update.
    """
    m = grid.interface_index
    nodes = grid.nodes
    h = grid.h
    x1 = nodes[:m + 1]
    x2 = nodes[m:]
    u1 = solve_two_point(c1, f, ("dirichlet", 0.0), ("dirichlet", trace), x1)
    phi = c1 * (3.0 * u1[-1] - 4.0 * u1[-2] + u1[-3]) / (2.0 * h)
    # left end of the right subdomain: outward normal -1, so c2 u2' n = -phi
    u2 = solve_two_point(c2, f, ("flux", -phi), ("dirichlet", 0.0), x2)
    return float(u2[0])


def dn_iterate_1d(c1, c2, f, rho: float, trace0: float, iters: int,
                  grid: Grid1d) -> np.ndarray:
    """Relaxed Dirichlet-Neumann iteration; returns the trace history."""
    assert 0.0 < rho <= 1.0
    trace = float(trace0)
    history = [trace]
    for _ in range(iters):
        u2_gamma = dn_step_1d(c1, c2, f, trace, grid)
        trace = rho * u2_gamma + (1.0 - rho) * trace
        history.append(trace)
    return np.array(history)


def dn_fixed_point_1d(c1, c2, f, grid: Grid1d, iters: int = 400) -> float:
    """Discrete fixed point of the iteration, found by running it out."""
    return float(dn_iterate_1d(c1, c2, f, 0.5, 0.0, iters, grid)[-1])


def contraction_factor_1d(c1, c2, rho: float, gamma: float = 0.5) -> float:
    """Analytic error-propagation factor of the continuous iteration.

    A trace error e produces flux error S1 e from the Dirichlet side and a
    Neumann response -S1 T2 e at the interface, so the relaxed update scales
    the error by 1 - rho (1 + S1 T2).
    """
    s1 = np.sqrt(c1) / np.tanh(gamma / np.sqrt(c1))
    t2 = np.tanh((1.0 - gamma) / np.sqrt(c2)) / np.sqrt(c2)
    return float(1.0 - rho * (1.0 + s1 * t2))


# ---------------------------------------------------------------------------
# Penalty-rate studies: H1 distance between penalized (Robin) solves and
# their exact-boundary counterparts as beta grows.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RateStudy:
    betas: tuple
    distances: tuple
    used: tuple          # rows kept for the fit (above the round-off plateau)
    slope: float


@dataclass(frozen=True)
class RateData:
    c: float
    f: object
    d_left: float
    d_right: float
    flux_left: float     # conormal data for the neumann-side study


RATE_DATASETS = {
    "poly": RateData(c=1.0, f=lambda x: 2.0 + x * (1.0 - x), d_left=1.0,
                     d_right=-0.5, flux_left=0.7),
    "wave": RateData(c=2.0, f=lambda x: np.sin(2.0 * np.pi * x) + 1.0,
                     d_left=0.3, d_right=0.8, flux_left=-1.2),
    "steep": RateData(c=0.5, f=lambda x: np.exp(x), d_left=-1.0,
                      d_right=0.25, flux_left=2.0),
}

PLATEAU_FLOOR = 1e-12


def robin_rate_study(betas, data: RateData, side: str = "dirichlet",
                     grid: Grid1d = None) -> RateStudy:
    """Distance-to-reference per beta, with a log-log slope fit.

    side="dirichlet": Robin conditions at both ends approximate Dirichlet
    data.  side="neumann": the left end carries exact flux data and only the
    right (outer) end is penalized.  Rows whose distance falls below the
    round-off plateau are excluded from the fit.
    """
    assert side in ("dirichlet", "neumann")
    betas = [float(b) for b in betas]
    assert all(b2 > b1 for b1, b2 in zip(betas, betas[1:])), "betas must increase"
    grid = grid or Grid1d(n=199)
    x = grid.nodes
    if side == "dirichlet":
        ref = solve_two_point(data.c, data.f, ("dirichlet", data.d_left),
                              ("dirichlet", data.d_right), x)
        def penalized(beta):
            return solve_two_point(data.c, data.f,
                                   ("robin", beta, data.d_left),
                                   ("robin", beta, data.d_right), x)
    else:
        ref = solve_two_point(data.c, data.f, ("flux", data.flux_left),
                              ("dirichlet", data.d_right), x)
        def penalized(beta):
            return solve_two_point(data.c, data.f, ("flux", data.flux_left),
                                   ("robin", beta, data.d_right), x)

    floor = PLATEAU_FLOOR * (1.0 + h1_norm(ref, grid.h))
    distances = [h1_norm(penalized(b) - ref, grid.h) for b in betas]
    used = [d > floor for d in distances]
    kept = [(b, d) for b, d, u in zip(betas, distances, used) if u]
    if len(kept) < 2:
        raise ValueError("fewer than two rate-study rows above the round-off plateau")
    lb = np.log10([b for b, _ in kept])
    ld = np.log10([d for _, d in kept])
    slope = float(np.polyfit(lb, ld, 1)[0])
    return RateStudy(betas=tuple(betas), distances=tuple(distances),
                     used=tuple(used), slope=slope)
