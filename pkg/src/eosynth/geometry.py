"""Planar polygon predicates used while composing scenes.

A *region* is a list of closed rings (``(n, 2)`` float arrays, first vertex
not repeated) combined under the even-odd rule, so holes and multi-part
shapes need no special casing.

Two point-in-region conventions exist on purpose:

* :func:`points_in_region` is strict: points on an edge are outside.
* :func:`rasterize_region` samples pixel centres with the half-open crossing
  rule, which assigns every centre to exactly one polygon of a partition
  whose neighbours share identical edges.
"""
from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

Ring = np.ndarray
Region = Sequence[np.ndarray]


def as_ring(vertices) -> np.ndarray:
    ring = np.asarray(vertices, dtype=np.float64).reshape(-1, 2)
    if len(ring) > 1 and np.array_equal(ring[0], ring[-1]):
        ring = ring[:-1]
    return ring


def ring_edges(ring: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    return ring, np.roll(ring, -1, axis=0)


def _region_edges(region: Region) -> tuple[np.ndarray, np.ndarray]:
    starts, ends = [], []
    for ring in region:
        a, b = ring_edges(np.asarray(ring, dtype=np.float64))
        starts.append(a)
        ends.append(b)
    if not starts:
        return np.zeros((0, 2)), np.zeros((0, 2))
    return np.concatenate(starts), np.concatenate(ends)


def _canonical_edges(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # Lower endpoint first so the crossing abscissa is computed identically
    # for an edge shared by two polygons in opposite orientation.
    swap = (b[:, 1] < a[:, 1]) | ((b[:, 1] == a[:, 1]) & (b[:, 0] < a[:, 0]))
    lo = np.where(swap[:, None], b, a)
    hi = np.where(swap[:, None], a, b)
    return lo, hi


def signed_area(ring: np.ndarray) -> float:
    x, y = ring[:, 0], ring[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def region_area(region: Region) -> float:
    """Area under the even-odd rule for non-overlapping nested rings."""
    areas = sorted((abs(signed_area(np.asarray(r))) for r in region), reverse=True)
    if not areas:
        return 0.0
    # Rings of a valid region are either disjoint or nested; nesting depth
    # decides the sign. Depth is recovered by point tests on a vertex.
    total = 0.0
    rings = [np.asarray(r, dtype=np.float64) for r in region]
    for i, ring in enumerate(rings):
        probe = _interior_probe(ring)
        depth = sum(
            1 for j, other in enumerate(rings)
            if j != i and points_in_region(probe[None, :], [other])[0]
        )
        total += abs(signed_area(ring)) * (1 if depth % 2 == 0 else -1)
    return total


def _interior_probe(ring: np.ndarray) -> np.ndarray:
    # A point just inside the ring next to its first edge.
    a, b = ring[0], ring[1]
    mid = 0.5 * (a + b)
    normal = np.array([-(b[1] - a[1]), b[0] - a[0]])
    length = np.hypot(*normal)
    if length == 0:
        return mid
    normal /= length
    eps = 1e-7 * max(1.0, float(np.abs(ring).max()))
    if signed_area(ring) < 0:
        normal = -normal
    return mid + eps * normal


def points_on_boundary(points: np.ndarray, region: Region) -> np.ndarray:
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    a, b = _region_edges(region)
    on = np.zeros(len(pts), dtype=bool)
    for (ax, ay), (bx, by) in zip(a, b):
        cross = (bx - ax) * (pts[:, 1] - ay) - (by - ay) * (pts[:, 0] - ax)
        within = (
            (pts[:, 0] >= min(ax, bx)) & (pts[:, 0] <= max(ax, bx))
            & (pts[:, 1] >= min(ay, by)) & (pts[:, 1] <= max(ay, by))
        )
        on |= (cross == 0) & within
    return on


def _crossing_parity(pts: np.ndarray, region: Region) -> np.ndarray:
    a, b = _region_edges(region)
    lo, hi = _canonical_edges(a, b)
    inside = np.zeros(len(pts), dtype=bool)
    px, py = pts[:, 0], pts[:, 1]
    for (ax, ay), (bx, by) in zip(lo, hi):
        if ay == by:
            continue
        spans = (ay <= py) & (py < by)
        if not spans.any():
            continue
        xint = ax + (py[spans] - ay) * (bx - ax) / (by - ay)
        hit = np.zeros(len(pts), dtype=bool)
        hit[spans] = px[spans] < xint
        inside ^= hit
    return inside


def points_in_region(points, region: Region) -> np.ndarray:
    """Strict even-odd containment; boundary points are excluded."""
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    if len(pts) == 0 or not region:
        return np.zeros(len(pts), dtype=bool)
    inside = _crossing_parity(pts, region)
    if inside.any():
        inside &= ~points_on_boundary(pts, region)
    return inside


def points_in_closed_region(points, region: Region) -> np.ndarray:
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    if len(pts) == 0 or not region:
        return np.zeros(len(pts), dtype=bool)
    return _crossing_parity(pts, region) | points_on_boundary(pts, region)


def rasterize_region(region: Region, height: int, width: int, pixel_size: float) -> np.ndarray:
    """Boolean mask of pixel centres inside ``region`` (half-open rule).

    Pixel ``(row, col)`` has its centre at ``((col + .5) * s, (row + .5) * s)``
    in region coordinates.
    """
    mask_counts = np.zeros((height, width + 1), dtype=np.int32)
    if not region:
        return np.zeros((height, width), dtype=bool)
    cols = (np.arange(width) + 0.5) * pixel_size
    rows = (np.arange(height) + 0.5) * pixel_size
    a, b = _region_edges(region)
    lo, hi = _canonical_edges(a, b)
    for (ax, ay), (bx, by) in zip(lo, hi):
        if ay == by:
            continue
        r0 = int(np.searchsorted(rows, ay, side="left"))
        r1 = int(np.searchsorted(rows, by, side="left"))
        if r1 <= r0:
            continue
        ys = rows[r0:r1]
        xint = ax + (ys - ay) * (bx - ax) / (by - ay)
        # Centres strictly left of the crossing toggle.
        k = np.searchsorted(cols, xint, side="left")
        np.add.at(mask_counts, (np.arange(r0, r1), k), 1)
    # Parity of crossings at columns > c, i.e. to the right of each centre.
    right = np.cumsum(mask_counts[:, ::-1], axis=1)[:, ::-1]
    return (right[:, 1:] % 2) == 1


def _orient(p, q, r) -> float:
    return (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])


def _on_segment(p, q, r) -> bool:
    return min(p[0], r[0]) <= q[0] <= max(p[0], r[0]) and min(p[1], r[1]) <= q[1] <= max(p[1], r[1])


def segments_intersect(p1, p2, p3, p4) -> bool:
    """True if closed segments p1p2 and p3p4 share at least one point."""
    d1 = _orient(p3, p4, p1)
    d2 = _orient(p3, p4, p2)
    d3 = _orient(p1, p2, p3)
    d4 = _orient(p1, p2, p4)
    if ((d1 > 0 and d2 < 0) or (d1 < 0 and d2 > 0)) and ((d3 > 0 and d4 < 0) or (d3 < 0 and d4 > 0)):
        return True
    if d1 == 0 and _on_segment(p3, p1, p4):
        return True
    if d2 == 0 and _on_segment(p3, p2, p4):
        return True
    if d3 == 0 and _on_segment(p1, p3, p2):
        return True
    if d4 == 0 and _on_segment(p1, p4, p2):
        return True
    return False


def segments_cross_properly(p1, p2, p3, p4) -> bool:
    d1 = _orient(p3, p4, p1)
    d2 = _orient(p3, p4, p2)
    d3 = _orient(p1, p2, p3)
    d4 = _orient(p1, p2, p4)
    return ((d1 > 0 > d2) or (d1 < 0 < d2)) and ((d3 > 0 > d4) or (d3 < 0 < d4))


def is_simple(ring) -> bool:
    """O(n^2) check that a closed ring has no self-intersection."""
    ring = as_ring(ring)
    n = len(ring)
    if n < 3:
        return False
    if abs(signed_area(ring)) == 0:
        return False
    for i in range(n):
        a1, a2 = ring[i], ring[(i + 1) % n]
        if np.array_equal(a1, a2):
            return False
        for j in range(i + 1, n):
            b1, b2 = ring[j], ring[(j + 1) % n]
            if j == i + 1 or (i == 0 and j == n - 1):
                # Adjacent edges may only share their common vertex.
                shared = a2 if j == i + 1 else a1
                other_a = a1 if j == i + 1 else a2
                other_b = b2 if j == i + 1 else b1
                if _orient(other_a, shared, other_b) == 0 and np.dot(other_a - shared, other_b - shared) > 0:
                    return False
                continue
            if segments_intersect(a1, a2, b1, b2):
                return False
    return True


def min_pairwise_distance(points) -> float:
    pts = np.asarray(points, dtype=np.float64)
    if len(pts) < 2:
        return float("inf")
    d = np.sqrt(((pts[:, None, :] - pts[None, :, :]) ** 2).sum(-1))
    d[np.diag_indices(len(pts))] = np.inf
    return float(d.min())


def _edges_cross(region_a: Region, region_b: Region, *, proper_only: bool) -> bool:
    a1, a2 = _region_edges(region_a)
    b1, b2 = _region_edges(region_b)
    if len(a1) == 0 or len(b1) == 0:
        return False
    test = segments_cross_properly if proper_only else segments_intersect
    # Bounding-box prefilter keeps the pairwise loop cheap on long coastlines.
    amin = np.minimum(a1, a2)
    amax = np.maximum(a1, a2)
    bmin = np.minimum(b1, b2)
    bmax = np.maximum(b1, b2)
    for i in range(len(a1)):
        cand = np.nonzero(
            (bmin[:, 0] <= amax[i, 0]) & (bmax[:, 0] >= amin[i, 0])
            & (bmin[:, 1] <= amax[i, 1]) & (bmax[:, 1] >= amin[i, 1])
        )[0]
        for j in cand:
            if test(a1[i], a2[i], b1[j], b2[j]):
                return True
    return False


def region_vertices(region: Region) -> np.ndarray:
    if not region:
        return np.zeros((0, 2))
    return np.concatenate([np.asarray(r, dtype=np.float64) for r in region])


def region_contains_region(outer: Region, inner: Region) -> bool:
    """Closed ``inner`` lies in the open interior of ``outer``."""
    verts = region_vertices(inner)
    if len(verts) == 0:
        return True
    if not points_in_region(verts, outer).all():
        return False
    if _edges_cross(outer, inner, proper_only=False):
        return False
    # Holes of ``outer`` (or separate parts) sitting inside ``inner``.
    outer_verts = region_vertices(outer)
    return not points_in_closed_region(outer_verts, inner).any()


def regions_overlap(region_a: Region, region_b: Region) -> bool:
    """True if the open interiors intersect; touching boundaries do not count."""
    if not region_a or not region_b:
        return False
    if _edges_cross(region_a, region_b, proper_only=True):
        return True
    if points_in_region(region_vertices(region_a), region_b).any():
        return True
    if points_in_region(region_vertices(region_b), region_a).any():
        return True
    # Edge midpoints catch polygons that only meet at collinear vertices.
    # A midpoint of a shared edge is rounded off the segment, so points
    # within a relative epsilon of the other boundary do not count.
    scale = max(float(np.abs(region_vertices(region_a)).max()), float(np.abs(region_vertices(region_b)).max()), 1.0)
    tol = 1e-9 * scale
    for src, dst in ((region_a, region_b), (region_b, region_a)):
        s, e = _region_edges(src)
        mids = 0.5 * (s + e)
        hit = points_in_region(mids, dst)
        if hit.any() and (boundary_distance(mids[hit], dst) > tol).any():
            return True
    return False


def boundary_distance(points, region: Region) -> np.ndarray:
    """Distance from each point to the nearest edge of ``region``."""
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    a, b = _region_edges(region)
    dist = np.full(len(pts), np.inf)
    for i in range(len(a)):
        dist = np.minimum(dist, point_segment_distance(pts, a[i], b[i]))
    return dist


def point_segment_distance(points: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    ab = b - a
    denom = float(np.dot(ab, ab))
    if denom == 0:
        return np.hypot(points[:, 0] - a[0], points[:, 1] - a[1])
    t = np.clip(((points - a) @ ab) / denom, 0.0, 1.0)
    proj = a + t[:, None] * ab
    return np.hypot(points[:, 0] - proj[:, 0], points[:, 1] - proj[:, 1])


def distance_points_to_region(points, region: Region) -> np.ndarray:
    """Euclidean distance from each point to the closed region (0 inside)."""
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    if len(pts) == 0:
        return np.zeros(0)
    if not region:
        return np.full(len(pts), np.inf)
    dist = boundary_distance(pts, region)
    dist[points_in_region(pts, region)] = 0.0
    return dist


def bbox(points: Iterable) -> tuple[float, float, float, float]:
    pts = np.asarray(list(points) if not isinstance(points, np.ndarray) else points, dtype=np.float64).reshape(-1, 2)
    return float(pts[:, 0].min()), float(pts[:, 1].min()), float(pts[:, 0].max()), float(pts[:, 1].max())
