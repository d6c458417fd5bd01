"""2D geometry primitives: containment, polyline queries, headings, grids.

All functions are pure and operate on plain numpy arrays:
points are ``(2,)``, point sets ``(N, 2)``, polylines ``(N, 2)`` with
``N >= 2``, polygon rings ``(N, 2)`` with ``N >= 3`` (implicitly closed).
"""

from __future__ import annotations

import math
from typing import Iterable, Mapping

import numpy as np

from .errors import DegenerateHeadingError, InvalidMapError

# Boundary points count as inside within this band (meters).
BOUNDARY_EPS = 1e-9
# Vectors shorter than this have no usable direction (meters).
DEGENERATE_EPS = 1e-6


def as_points(obj) -> np.ndarray:
    pts = np.asarray(obj, dtype=float)
    if pts.ndim == 1:
        pts = pts.reshape(1, 2)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError(f"expected (N, 2) points, got shape {pts.shape}")
    if not np.isfinite(pts).all():
        raise ValueError("points contain NaN or inf")
    return pts


def signed_area(ring: np.ndarray) -> float:
    """Shoelace area; positive for counter-clockwise rings."""
    x, y = ring[:, 0], ring[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    return 0.5 * float(np.sum(x * yn - xn * y))


def normalize_ring(ring) -> np.ndarray:
    """Validate a polygon ring and return it counter-clockwise."""
    ring = as_points(ring)
    if len(ring) < 3:
        raise InvalidMapError(f"polygon needs >= 3 vertices, got {len(ring)}")
    area = signed_area(ring)
    if abs(area) < 1e-12:
        raise InvalidMapError("degenerate polygon (zero area)")
    return ring[::-1].copy() if area < 0 else ring


def distance_to_ring(points, ring) -> np.ndarray:
    """Min distance from each point to the closed boundary of ``ring``."""
    pts = as_points(points)
    ring = as_points(ring)
    a = ring
    b = np.roll(ring, -1, axis=0)
    ab = b - a  # (E, 2)
    denom = np.einsum("ij,ij->i", ab, ab)  # (E,)
    ap = pts[:, None, :] - a[None, :, :]  # (N, E, 2)
    t = np.einsum("nej,ej->ne", ap, ab) / np.where(denom > 0, denom, 1.0)
    t = np.clip(t, 0.0, 1.0)
    foot = a[None, :, :] + t[:, :, None] * ab[None, :, :]
    d = np.linalg.norm(pts[:, None, :] - foot, axis=-1)
    return d.min(axis=1)


def points_in_polygon(points, ring, eps: float = BOUNDARY_EPS) -> np.ndarray:
    """Even-odd containment test; points within ``eps`` of the boundary count
    as inside."""
    pts = as_points(points)
    ring = as_points(ring)
    if len(ring) < 3 or abs(signed_area(ring)) < 1e-12:
        raise InvalidMapError("degenerate polygon (zero area)")
    x, y = pts[:, 0:1], pts[:, 1:2]  # (N, 1)
    x1, y1 = ring[:, 0], ring[:, 1]
    x2, y2 = np.roll(x1, -1), np.roll(y1, -1)
    straddles = (y1 > y) != (y2 > y)  # half-open rule, (N, E)
    with np.errstate(divide="ignore", invalid="ignore"):
        x_cross = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
    hits = straddles & (x < x_cross)
    inside = (hits.sum(axis=1) % 2).astype(bool)
    if eps > 0:
        outside = ~inside
        if outside.any():
            near = distance_to_ring(pts[outside], ring) <= eps
            inside[np.flatnonzero(outside)[near]] = True
    return inside


def point_in_polygon(p, ring, eps: float = BOUNDARY_EPS) -> bool:
    return bool(points_in_polygon(np.asarray(p, float).reshape(1, 2), ring, eps)[0])


def arc_length(polyline) -> float:
    pts = as_points(polyline)
    if len(pts) < 2:
        raise ValueError("polyline needs >= 2 points")
    return float(np.linalg.norm(np.diff(pts, axis=0), axis=1).sum())


def heading(v) -> float:
    """Direction of ``v`` in radians, x-axis = 0, range (-pi, pi]."""
    vx, vy = float(v[0]), float(v[1])
    if math.hypot(vx, vy) <= DEGENERATE_EPS:
        raise DegenerateHeadingError(f"degenerate heading for vector ({vx}, {vy})")
    h = math.atan2(vy, vx)
    if h <= -math.pi:
        h += 2 * math.pi
    return h


def angle_between(v1, v2) -> float:
    """Unsigned angle in [0, pi] via clamped dot product (no wrap-around)."""
    v1 = np.asarray(v1, float)
    v2 = np.asarray(v2, float)
    n1 = np.linalg.norm(v1)
    n2 = np.linalg.norm(v2)
    if n1 <= DEGENERATE_EPS or n2 <= DEGENERATE_EPS:
        raise DegenerateHeadingError("degenerate heading in angle_between")
    c = float(np.dot(v1, v2) / (n1 * n2))
    return math.acos(max(-1.0, min(1.0, c)))


def nearest_on_polyline(p, polyline) -> tuple[np.ndarray, float, float]:
    """Closest point on a polyline.

    Returns ``(foot, arc_offset, tangent_heading)``. When the foot lands on a
    shared vertex the following segment supplies the heading.
    """
    p = np.asarray(p, float)
    pts = as_points(polyline)
    if len(pts) < 2:
        raise ValueError("polyline needs >= 2 points")
    a = pts[:-1]
    b = pts[1:]
    ab = b - a
    denom = np.einsum("ij,ij->i", ab, ab)
    t = np.einsum("ij,ij->i", p[None, :] - a, ab) / np.where(denom > 0, denom, 1.0)
    t = np.where(denom > 0, np.clip(t, 0.0, 1.0), 0.0)
    foot = a + t[:, None] * ab
    d = np.linalg.norm(p[None, :] - foot, axis=1)
    ties = np.flatnonzero(d <= d.min() + 1e-12)
    i = int(ties[-1])  # later segment wins at shared vertices
    seg_len = np.sqrt(denom)
    offset = float(seg_len[:i].sum() + t[i] * seg_len[i])
    if denom[i] > 0:
        tangent = heading(ab[i])
    else:  # degenerate segment; fall back to any non-degenerate one
        usable = np.flatnonzero(seg_len > DEGENERATE_EPS)
        if len(usable) == 0:
            raise DegenerateHeadingError("polyline has no usable direction")
        tangent = heading(ab[usable[0]])
    return foot[i].copy(), offset, tangent


class GridIndex:
    """Uniform-grid spatial index over labelled shapes.

    ``closed=True`` treats each shape as a polygon ring (distance 0 inside),
    otherwise as a bare point set. Immutable after construction.
    """

    def __init__(
        self,
        shapes: Mapping[str, np.ndarray] | Iterable[tuple[str, np.ndarray]],
        cell_size: float = 10.0,
        closed: bool = False,
    ):
        if cell_size <= 0:
            raise ValueError("cell_size must be positive")
        items = dict(shapes)
        self.cell_size = float(cell_size)
        self.closed = closed
        self._shapes = {k: as_points(v) for k, v in items.items()}
        self._cells: dict[tuple[int, int], list[str]] = {}
        for item_id, pts in self._shapes.items():
            lo = np.floor(pts.min(axis=0) / self.cell_size).astype(int)
            hi = np.floor(pts.max(axis=0) / self.cell_size).astype(int)
            for cx in range(lo[0], hi[0] + 1):
                for cy in range(lo[1], hi[1] + 1):
                    self._cells.setdefault((cx, cy), []).append(item_id)

    def min_distance(self, item_id: str, p) -> float:
        pts = self._shapes[item_id]
        if self.closed:
            if point_in_polygon(p, pts):
                return 0.0
            return float(distance_to_ring(np.asarray(p, float).reshape(1, 2), pts)[0])
        return float(np.linalg.norm(pts - np.asarray(p, float), axis=1).min())

    def query_radius(self, center, r: float) -> list[str]:
        """Exact radius query: ids whose shape is within ``r`` of ``center``."""
        if r <= 0:
            raise ValueError("radius must be positive")
        c = np.asarray(center, float)
        lo = np.floor((c - r) / self.cell_size).astype(int)
        hi = np.floor((c + r) / self.cell_size).astype(int)
        candidates: set[str] = set()
        for cx in range(lo[0], hi[0] + 1):
            for cy in range(lo[1], hi[1] + 1):
                candidates.update(self._cells.get((cx, cy), ()))
        return sorted(i for i in candidates if self.min_distance(i, c) <= r)


def rasterize_occupancy(points, roi, cell: float) -> set[tuple[int, int]]:
    """Grid cells of ``roi = (min_x, min_y, max_x, max_y)`` touched by points.

    Points on the max edge are clamped into the last cell.
    """
    if cell <= 0:
        raise ValueError("cell must be positive")
    min_x, min_y, max_x, max_y = (float(v) for v in roi)
    if max_x <= min_x or max_y <= min_y:
        raise ValueError("empty roi")
    pts = as_points(points) if len(points) else np.empty((0, 2))
    nx = max(1, math.ceil((max_x - min_x) / cell))
    ny = max(1, math.ceil((max_y - min_y) / cell))
    cells: set[tuple[int, int]] = set()
    for x, y in pts:
        if min_x <= x <= max_x and min_y <= y <= max_y:
            ix = min(int((x - min_x) // cell), nx - 1)
            iy = min(int((y - min_y) // cell), ny - 1)
            cells.add((ix, iy))
    return cells
