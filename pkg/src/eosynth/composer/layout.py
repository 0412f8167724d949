"""Wind farm internal structure in the unit square.

Grid crossings are candidate turbine positions; a systematic deformation
bends the whole grid with one parameter set, and a random boundary polygon
cuts out the farm's outer shape.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from ..geometry import is_simple, min_pairwise_distance, points_in_region
from ..rng import Stream
from .elements import GenerationError, ResampleSignal

DEFORMATIONS = ("identity", "rotation", "shear", "sinusoidal", "projective")


@dataclass(frozen=True)
class Deformation:
    name: str = "identity"
    params: dict = field(default_factory=dict)


@dataclass(frozen=True)
class GridLayout:
    nx: int
    ny: int
    points: np.ndarray
    deformation: Deformation = Deformation()


@dataclass(frozen=True)
class BoundaryPolygon:
    vertices: np.ndarray
    min_vertex_distance: float

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)


def grid_layout(nx: int, ny: int) -> GridLayout:
    if nx < 2 or ny < 2:
        raise ValueError("a grid needs at least two lines per axis")
    xs = np.arange(nx) / (nx - 1)
    ys = np.arange(ny) / (ny - 1)
    gx, gy = np.meshgrid(xs, ys)
    pts = np.column_stack([gx.ravel(), gy.ravel()])
    return GridLayout(nx, ny, pts)


def generate_grid_layout(density_spec, rng: Stream) -> GridLayout:
    """``density_spec`` is ``((x_lo, x_hi), (y_lo, y_hi))`` in lines per axis."""
    (x_lo, x_hi), (y_lo, y_hi) = density_spec
    if min(x_lo, y_lo) < 2:
        raise ValueError("grid bounds must be at least 2 per axis")
    nx = rng.integers(int(x_lo), int(x_hi))
    ny = rng.integers(int(y_lo), int(y_hi))
    return grid_layout(nx, ny)


def deformation_from_spec(spec) -> Deformation:
    """Build the deformation declared by a sampled WindfarmLayout spec."""
    name = spec.key("deformation")
    if name == "rotation":
        params = {"theta": spec.value("rotation_angle")}
    elif name == "shear":
        params = {"k": spec.value("shear")}
    elif name == "sinusoidal":
        params = {
            "amplitude": spec.value("warp_amplitude"),
            "frequency": spec.value("warp_frequency"),
            "phase": spec.value("warp_phase"),
        }
    elif name == "projective":
        params = {"p": spec.value("projective_x"), "q": spec.value("projective_y")}
    else:
        name, params = "identity", {}
    return Deformation(name, params)


def sample_deformation(rng: Stream) -> Deformation:
    name = DEFORMATIONS[rng.integers(0, len(DEFORMATIONS) - 1)]
    if name == "rotation":
        return Deformation(name, {"theta": rng.uniform(-math.pi / 4, math.pi / 4)})
    if name == "shear":
        return Deformation(name, {"k": rng.uniform(-0.35, 0.35)})
    if name == "sinusoidal":
        return Deformation(name, {
            "amplitude": rng.uniform(0.01, 0.04),
            "frequency": rng.uniform(0.5, 1.5),
            "phase": rng.uniform(0.0, 2 * math.pi),
        })
    if name == "projective":
        return Deformation(name, {"p": rng.uniform(-0.3, 0.3), "q": rng.uniform(-0.3, 0.3)})
    return Deformation()


def transform_points(points: np.ndarray, d: Deformation) -> np.ndarray:
    """Raw deformation about the square's centre, before renormalisation."""
    p = np.asarray(points, dtype=np.float64)
    u = p[:, 0] - 0.5
    v = p[:, 1] - 0.5
    if d.name == "identity":
        return p.copy()
    if d.name == "rotation":
        c, s = math.cos(d.params["theta"]), math.sin(d.params["theta"])
        x, y = c * u - s * v, s * u + c * v
    elif d.name == "shear":
        x, y = u + d.params["k"] * v, v
    elif d.name == "sinusoidal":
        a, f, ph = d.params["amplitude"], d.params["frequency"], d.params["phase"]
        x = u + a * np.sin(2 * math.pi * f * v + ph)
        y = v + a * np.sin(2 * math.pi * f * u + ph)
    elif d.name == "projective":
        w = 1.0 + d.params["p"] * u + d.params["q"] * v
        x, y = u / w, v / w
    else:
        raise ValueError(f"unknown deformation {d.name!r}")
    return np.column_stack([x + 0.5, y + 0.5])


def renormalize(points: np.ndarray) -> np.ndarray:
    """Uniform scale and shift so the points fit [0,1]^2, centred."""
    lo = points.min(axis=0)
    hi = points.max(axis=0)
    extent = float((hi - lo).max())
    if extent == 0:
        return np.full_like(points, 0.5)
    mid = 0.5 * (lo + hi)
    out = (points - mid) / extent + 0.5
    return np.clip(out, 0.0, 1.0)


def apply_deformation(g: GridLayout, family: Deformation, rng: Stream | None = None) -> GridLayout:
    """Deform every grid point with the same parameters, then refit to the unit square.

    ``rng`` is accepted for interface symmetry; the parameters are already
    fixed in ``family``.
    """
    if family.name == "identity":
        return replace(g, deformation=family)
    pts = renormalize(transform_points(g.points, family))
    return replace(g, points=pts, deformation=family)


def _feasible(n: int, min_dist: float, r_max: float) -> bool:
    # n points pairwise >= d apart inside a disc of radius r: the discs of
    # radius d/2 around them fit in a disc of radius r + d/2.
    if n < 2:
        return True
    return n * (min_dist / 2) ** 2 <= (r_max + min_dist / 2) ** 2


def generate_boundary_polygon(n_vertices: int, min_vertex_distance: float, rng: Stream,
                              radius_range: tuple[float, float] = (0.25, 0.5),
                              max_tries: int = 1000) -> BoundaryPolygon:
    """Random star-shaped simple polygon centred in the unit square."""
    n = int(n_vertices)
    if n < 3:
        raise ValueError("a boundary polygon needs at least 3 vertices")
    r_lo, r_hi = radius_range
    if not _feasible(n, min_vertex_distance, r_hi):
        raise GenerationError(
            f"{n} vertices cannot be {min_vertex_distance} apart; use a smaller min vertex distance"
        )
    for _ in range(max_tries):
        angles = np.sort(rng.uniform_array(0.0, 2 * math.pi, n))
        radii = rng.uniform_array(r_lo, r_hi, n)
        verts = np.column_stack([0.5 + radii * np.cos(angles), 0.5 + radii * np.sin(angles)])
        if min_pairwise_distance(verts) >= min_vertex_distance and is_simple(verts):
            return BoundaryPolygon(verts, float(min_vertex_distance))
    raise GenerationError(
        f"no simple {n}-gon with vertex distance >= {min_vertex_distance} in {max_tries} tries; "
        "use a smaller min vertex distance"
    )


def clip_layout(g: GridLayout, b: BoundaryPolygon) -> np.ndarray:
    """Grid points strictly inside the boundary, in grid order."""
    keep = points_in_region(g.points, [b.vertices])
    if not keep.any():
        raise ResampleSignal("no grid point inside the boundary polygon")
    return g.points[keep]
