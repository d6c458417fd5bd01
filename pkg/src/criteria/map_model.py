"""Lane-level HD-map model and the queries the admissibility tests need."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import geom
from .errors import InvalidMapError

log = logging.getLogger(__name__)

# Centerlines may wander this far outside their lane polygon (meters).
CENTERLINE_TOL = 0.5


class Turn(Enum):
    NONE = "NONE"
    LEFT = "LEFT"
    RIGHT = "RIGHT"


@dataclass(frozen=True)
class LaneSegment:
    id: str
    centerline: np.ndarray  # (N, 2), N >= 2
    polygon: np.ndarray  # CCW ring, (N, 2), N >= 3
    turn: Turn = Turn.NONE
    is_intersection: bool = False
    successors: tuple[str, ...] = ()
    left_neighbor: str | None = None
    right_neighbor: str | None = None

    def __post_init__(self):
        cl = geom.as_points(self.centerline)
        if len(cl) < 2:
            raise InvalidMapError(f"lane {self.id!r}: centerline needs >= 2 points")
        object.__setattr__(self, "centerline", cl)
        object.__setattr__(self, "polygon", geom.normalize_ring(self.polygon))
        object.__setattr__(self, "successors", tuple(self.successors))


def is_turn_lane(lane: LaneSegment) -> bool:
    """An intersection lane tagged LEFT or RIGHT."""
    return lane.is_intersection and lane.turn in (Turn.LEFT, Turn.RIGHT)


class RoadMap:
    """Immutable lane map with a grid index over lane polygons."""

    def __init__(
        self,
        map_id: str,
        lanes: list[LaneSegment],
        drivable: list[np.ndarray],
        cell_size: float = 10.0,
    ):
        self.map_id = map_id
        self.lanes = {}
        for lane in lanes:
            if lane.id in self.lanes:
                raise InvalidMapError(f"duplicate lane id {lane.id!r}")
            self.lanes[lane.id] = lane
        self.drivable = [geom.normalize_ring(r) for r in drivable]
        self._validate()
        self.lane_index = geom.GridIndex(
            {lane.id: lane.polygon for lane in lanes},
            cell_size=cell_size,
            closed=True,
        )

    def _validate(self) -> None:
        for lane in self.lanes.values():
            for succ in lane.successors:
                if succ not in self.lanes:
                    raise InvalidMapError(
                        f"lane {lane.id!r}: successor {succ!r} not in map"
                    )
            inside = geom.points_in_polygon(lane.centerline, lane.polygon)
            if not inside.all():
                outside = lane.centerline[~inside]
                d = geom.distance_to_ring(outside, lane.polygon)
                if d.max() > CENTERLINE_TOL:
                    raise InvalidMapError(
                        f"lane {lane.id!r}: centerline strays "
                        f"{d.max():.2f} m outside its polygon"
                    )
            if not self.contains_many(lane.polygon).all():
                log.warning(
                    "map %s: lane %s polygon not fully inside drivable area",
                    self.map_id,
                    lane.id,
                )

    # -- queries ---------------------------------------------------------

    def lanes_containing(self, p) -> list[str]:
        """Ids of every lane whose polygon contains ``p`` (boundary counts)."""
        candidates = self.lane_index.query_radius(p, geom.BOUNDARY_EPS + 1e-6)
        return [
            i for i in candidates if geom.point_in_polygon(p, self.lanes[i].polygon)
        ]

    def lanes_within_radius(self, p, r: float) -> list[str]:
        return self.lane_index.query_radius(p, r)

    def lane_heading_at(self, lane_id: str, p) -> float:
        lane = self.lanes[lane_id]
        _, _, tangent = geom.nearest_on_polyline(p, lane.centerline)
        return tangent

    def drivable_contains(self, p) -> bool:
        return any(geom.point_in_polygon(p, ring) for ring in self.drivable)

    def contains_many(self, points) -> np.ndarray:
        """Vectorized drivable-area membership for a batch of points."""
        pts = geom.as_points(points)
        inside = np.zeros(len(pts), dtype=bool)
        for ring in self.drivable:
            pending = ~inside
            if not pending.any():
                break
            inside[pending] |= geom.points_in_polygon(pts[pending], ring)
        return inside
