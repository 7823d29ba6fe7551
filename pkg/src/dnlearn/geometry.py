"""Benchmark geometries.

Three two-subdomain partitions of a rectangle:

* circle        - Omega_1 is the open disk of radius 0.5 centered at the
                  origin inside (-1,1)^2; the interface is the circle.
* zigzag        - unit square split by a sawtooth polyline around x = 0.5
                  with horizontal amplitude 0.05 and vertical period 0.1.
                  Per cell k = floor(20 y), s = 20 y - k, the curve is
                  x = 0.5 + 0.05 s for even k and x = 0.45 + 0.05 s for odd
                  k; the jumps at y = 0.05 + 0.1 j are closed by horizontal
                  connector segments.  Omega_1 is the region x < x_Gamma(y).
* checkerboard  - unit square cut by the cross x = 0.5, y = 0.5;
                  Omega_1 = lower-left and upper-right cells.

Points exactly on the interface are assigned to Omega_2 (fixed tie-break;
evaluation on Gamma uses the Omega_2 network).  All samplers consume an
explicit seed and are deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

CIRCLE_RADIUS = 0.5
ZIGZAG_AMPLITUDE = 0.05

KINDS = ("circle", "zigzag", "checkerboard")

REGION_1 = 1
REGION_2 = 2


@dataclass(frozen=True)
class Geometry:
    kind: str
    bbox: tuple[float, float, float, float]  # xmin, xmax, ymin, ymax

    def __post_init__(self):
        assert self.kind in KINDS, f"unknown geometry kind {self.kind!r}"


def circle_geometry() -> Geometry:
    return Geometry(kind="circle", bbox=(-1.0, 1.0, -1.0, 1.0))


def zigzag_geometry() -> Geometry:
    return Geometry(kind="zigzag", bbox=(0.0, 1.0, 0.0, 1.0))


def checkerboard_geometry() -> Geometry:
    return Geometry(kind="checkerboard", bbox=(0.0, 1.0, 0.0, 1.0))


def by_name(name: str) -> Geometry:
    return {"circle": circle_geometry, "zigzag": zigzag_geometry,
            "checkerboard": checkerboard_geometry}[name]()


@dataclass
class SampleSet:
    """Monte Carlo training points: subdomain interiors, the pieces of the
    outer boundary owned by each subdomain, and interface points paired with
    the unit normal pointing out of Omega_1."""

    interior_1: np.ndarray
    interior_2: np.ndarray
    outer_1: np.ndarray
    outer_2: np.ndarray
    interface: np.ndarray
    normals: np.ndarray

    def interface_pairs(self):
        return list(zip(self.interface, self.normals))


@dataclass(frozen=True)
class SampleCounts:
    n_interior_1: int
    n_interior_2: int
    n_outer_1: int
    n_outer_2: int
    n_interface: int

    def __post_init__(self):
        assert min(self.n_interior_1, self.n_interior_2, self.n_outer_1,
                   self.n_outer_2, self.n_interface) >= 1


@dataclass
class EvalGrid:
    points: np.ndarray        # (n*n, 2), cell centers, x fastest in blocks
    tags: np.ndarray          # (n*n,) region tags
    xs: np.ndarray
    ys: np.ndarray
    shape: tuple[int, int]


# ---------------------------------------------------------------------------
# Membership
# ---------------------------------------------------------------------------

def zigzag_interface_x(y):
    """x-coordinate of the sawtooth at height y (single-valued branch)."""
    y = np.asarray(y, dtype=np.float64)
    k = np.clip(np.floor(20.0 * y), 0, 19)
    s = 20.0 * y - k
    base = np.where(k % 2 == 0, 0.5, 0.45)
    return base + ZIGZAG_AMPLITUDE * s


def membership_many(geom: Geometry, X) -> np.ndarray:
    """Region tags for a batch of points; interface ties resolve to Omega_2."""
    X = np.asarray(X, dtype=np.float64)
    xmin, xmax, ymin, ymax = geom.bbox
    assert np.all((X[:, 0] >= xmin) & (X[:, 0] <= xmax)
                  & (X[:, 1] >= ymin) & (X[:, 1] <= ymax)), "point outside bbox"
    x, y = X[:, 0], X[:, 1]
    if geom.kind == "circle":
        inside = x * x + y * y < CIRCLE_RADIUS ** 2
    elif geom.kind == "zigzag":
        inside = x < zigzag_interface_x(y)
    else:  # checkerboard
        inside = (x - 0.5) * (y - 0.5) > 0.0
    return np.where(inside, REGION_1, REGION_2).astype(np.int64)


def membership(geom: Geometry, x) -> int:
    return int(membership_many(geom, np.asarray(x, dtype=np.float64)[None, :])[0])


# ---------------------------------------------------------------------------
# Interface and boundary descriptions
# ---------------------------------------------------------------------------

def interface_segments(geom: Geometry):
    """Polyline pieces of Gamma as (p0, p1, n1) with constant unit normal.

    The circle has no polyline; its samples come from the angle parameter.
    """
    if geom.kind == "circle":
        raise ValueError("circle interface is parameterized by angle, not segments")
    segs = []
    if geom.kind == "zigzag":
        r = 1.0 / np.sqrt(2.0)
        n_diag = np.array([r, -r])
        for k in range(20):
            base = 0.5 if k % 2 == 0 else 0.45
            p0 = np.array([base, k / 20.0])
            p1 = np.array([base + ZIGZAG_AMPLITUDE, (k + 1) / 20.0])
            segs.append((p0, p1, n_diag))
        for j in range(10):
            y = 0.05 + 0.1 * j
            segs.append((np.array([0.45, y]), np.array([0.55, y]), np.array([0.0, 1.0])))
    else:  # checkerboard cross, normals point out of Omega_1
        segs = [
            (np.array([0.5, 0.0]), np.array([0.5, 0.5]), np.array([1.0, 0.0])),
            (np.array([0.5, 0.5]), np.array([0.5, 1.0]), np.array([-1.0, 0.0])),
            (np.array([0.0, 0.5]), np.array([0.5, 0.5]), np.array([0.0, 1.0])),
            (np.array([0.5, 0.5]), np.array([1.0, 0.5]), np.array([0.0, -1.0])),
        ]
    return segs


def boundary_segments(geom: Geometry, region: int):
    """Pieces of the outer boundary owned by the closure of Omega_region."""
    assert region in (REGION_1, REGION_2)
    if geom.kind == "circle":
        if region == REGION_1:
            return []  # the disk does not touch the outer boundary
        return [
            (np.array([-1.0, -1.0]), np.array([1.0, -1.0])),
            (np.array([1.0, -1.0]), np.array([1.0, 1.0])),
            (np.array([1.0, 1.0]), np.array([-1.0, 1.0])),
            (np.array([-1.0, 1.0]), np.array([-1.0, -1.0])),
        ]
    if geom.kind == "zigzag":
        # the sawtooth meets the bottom and top edges at x = 0.5
        if region == REGION_1:
            return [
                (np.array([0.0, 0.0]), np.array([0.0, 1.0])),
                (np.array([0.0, 0.0]), np.array([0.5, 0.0])),
                (np.array([0.0, 1.0]), np.array([0.5, 1.0])),
            ]
        return [
            (np.array([1.0, 0.0]), np.array([1.0, 1.0])),
            (np.array([0.5, 0.0]), np.array([1.0, 0.0])),
            (np.array([0.5, 1.0]), np.array([1.0, 1.0])),
        ]
    # checkerboard
    if region == REGION_1:
        return [
            (np.array([0.0, 0.0]), np.array([0.5, 0.0])),
            (np.array([0.0, 0.0]), np.array([0.0, 0.5])),
            (np.array([0.5, 1.0]), np.array([1.0, 1.0])),
            (np.array([1.0, 0.5]), np.array([1.0, 1.0])),
        ]
    return [
        (np.array([0.5, 0.0]), np.array([1.0, 0.0])),
        (np.array([1.0, 0.0]), np.array([1.0, 0.5])),
        (np.array([0.0, 1.0]), np.array([0.5, 1.0])),
        (np.array([0.0, 0.5]), np.array([0.0, 1.0])),
    ]


def interface_residual(geom: Geometry, X) -> np.ndarray:
    """Distance-like defect of points from Gamma (0 for exact samples)."""
    X = np.asarray(X, dtype=np.float64)
    if geom.kind == "circle":
        return np.abs(X[:, 0] ** 2 + X[:, 1] ** 2 - CIRCLE_RADIUS ** 2)
    dists = np.full(X.shape[0], np.inf)
    for p0, p1, _ in interface_segments(geom):
        d = p1 - p0
        L2 = float(d @ d)
        t = np.clip(((X - p0) @ d) / L2, 0.0, 1.0)
        proj = p0 + t[:, None] * d
        dists = np.minimum(dists, np.linalg.norm(X - proj, axis=1))
    return dists


# ---------------------------------------------------------------------------
# Samplers
# ---------------------------------------------------------------------------

def _sample_on_segments(segments, count: int, rng) -> np.ndarray:
    """Uniform-by-arc-length samples on a list of (p0, p1[, ...]) segments."""
    p0 = np.array([s[0] for s in segments])
    p1 = np.array([s[1] for s in segments])
    lengths = np.linalg.norm(p1 - p0, axis=1)
    cum = np.cumsum(lengths)
    t = rng.uniform(0.0, cum[-1], size=count)
    idx = np.searchsorted(cum, t, side="right")
    idx = np.minimum(idx, len(segments) - 1)
    local = (t - (cum[idx] - lengths[idx])) / lengths[idx]
    return p0[idx] + local[:, None] * (p1[idx] - p0[idx]), idx


def _rejection_sample(geom: Geometry, region: int, count: int, rng) -> np.ndarray:
    xmin, xmax, ymin, ymax = geom.bbox
    out = np.empty((count, 2))
    have = 0
    attempts = 0
    limit = 1_000_000 * count
    while have < count:
        n_draw = max(4 * (count - have), 1024)
        attempts += n_draw
        if attempts > limit:
            raise RuntimeError(f"rejection sampling for region {region} exceeded {limit} attempts")
        cand = np.column_stack([rng.uniform(xmin, xmax, n_draw), rng.uniform(ymin, ymax, n_draw)])
        keep = cand[membership_many(geom, cand) == region]
        take = min(count - have, keep.shape[0])
        out[have : have + take] = keep[:take]
        have += take
    return out


def sample_interface(geom: Geometry, count: int, rng):
    """Interface points with exact unit normals pointing out of Omega_1."""
    if geom.kind == "circle":
        theta = rng.uniform(0.0, 2.0 * np.pi, size=count)
        normals = np.column_stack([np.cos(theta), np.sin(theta)])
        points = CIRCLE_RADIUS * normals
        return points, normals
    segs = interface_segments(geom)
    points, idx = _sample_on_segments(segs, count, rng)
    seg_normals = np.array([s[2] for s in segs])
    return points, seg_normals[idx]


def sample_sets(geom: Geometry, counts: SampleCounts, seed) -> SampleSet:
    """Draw all Monte Carlo training sets for one run.

    Interior points come from uniform rejection sampling inside each
    subregion; boundary and interface points are uniform in arc length.  The
    circle geometry has no outer boundary for Omega_1, so outer_1 is empty
    there regardless of the requested count.
    """
    rng = np.random.default_rng(seed)
    interior_1 = _rejection_sample(geom, REGION_1, counts.n_interior_1, rng)
    interior_2 = _rejection_sample(geom, REGION_2, counts.n_interior_2, rng)
    segs1 = boundary_segments(geom, REGION_1)
    if segs1:
        outer_1, _ = _sample_on_segments(segs1, counts.n_outer_1, rng)
    else:
        outer_1 = np.empty((0, 2))
    outer_2, _ = _sample_on_segments(boundary_segments(geom, REGION_2), counts.n_outer_2, rng)
    interface, normals = sample_interface(geom, counts.n_interface, rng)
    return SampleSet(interior_1=interior_1, interior_2=interior_2,
                     outer_1=outer_1, outer_2=outer_2,
                     interface=interface, normals=normals)


def eval_grid(geom: Geometry, n: int = 100) -> EvalGrid:
    """n x n lattice at cell centers of the bbox (nodes avoid the outer
    boundary exactly and the interface generically)."""
    xmin, xmax, ymin, ymax = geom.bbox
    hx = (xmax - xmin) / n
    hy = (ymax - ymin) / n
    xs = xmin + (np.arange(n) + 0.5) * hx
    ys = ymin + (np.arange(n) + 0.5) * hy
    XX, YY = np.meshgrid(xs, ys, indexing="ij")
    points = np.column_stack([XX.ravel(), YY.ravel()])
    tags = membership_many(geom, points)
    return EvalGrid(points=points, tags=tags, xs=xs, ys=ys, shape=(n, n))
