import numpy as np
import pytest

from criteria import geom, io
from criteria.errors import InvalidMapError
from criteria.map_model import LaneSegment, RoadMap, Turn, is_turn_lane

from conftest import simple_lane


def overlap_map():
    """Two lanes whose polygons overlap around x in [40, 60]."""
    a = simple_lane("A", y=0.0, x0=0.0, x1=60.0)
    b = simple_lane("B", y=0.0, x0=40.0, x1=100.0)
    return RoadMap(map_id="overlap", lanes=[a, b],
                   drivable=[a.polygon, b.polygon])


class TestLanesContaining:
    def test_centerline_midpoint(self, straight_road):
        lane = straight_road.lanes["E0"]
        mid = lane.centerline[len(lane.centerline) // 2]
        assert "E0" in straight_road.lanes_containing(mid)

    def test_far_off_road(self, straight_road):
        assert straight_road.lanes_containing((0.0, 80.0)) == []

    def test_overlap_returns_both(self):
        road = overlap_map()
        p = (50.0, 0.0)
        got = road.lanes_containing(p)
        want = [
            lane_id
            for lane_id in sorted(road.lanes)
            if geom.point_in_polygon(p, road.lanes[lane_id].polygon)
        ]
        assert got == want == ["A", "B"]


class TestLanesWithinRadius:
    def test_covers_parallel_lanes(self, straight_road):
        got = straight_road.lanes_within_radius((0.0, -1.85), 100.0)
        assert set(got) == set(straight_road.lanes)

    def test_tight_radius(self, straight_road):
        got = straight_road.lanes_within_radius((0.0, -1.85), 1.0)
        assert got == ["E0"]

    @pytest.mark.parametrize("seed", range(10))
    def test_matches_linear_scan(self, straight_road, seed):
        rng = np.random.default_rng(seed)
        p = rng.uniform(-220, 220, size=2)
        r = float(rng.uniform(1, 150))
        want = sorted(
            lane.id
            for lane in straight_road.lanes.values()
            if (
                geom.point_in_polygon(p, lane.polygon)
                or geom.distance_to_ring(p.reshape(1, 2), lane.polygon)[0] <= r
            )
        )
        assert straight_road.lanes_within_radius(p, r) == want

    def test_containing_subset_of_radius(self, t_road):
        rng = np.random.default_rng(3)
        for _ in range(50):
            p = rng.uniform(-50, 50, size=2)
            contained = set(t_road.lanes_containing(p))
            for r in (0.5, 5.0, 50.0):
                assert contained <= set(t_road.lanes_within_radius(p, r))


class TestLaneHeading:
    def test_eastbound(self, straight_road):
        assert straight_road.lane_heading_at("E0", (10.0, -1.85)) == pytest.approx(0.0)

    def test_westbound(self, straight_road):
        assert straight_road.lane_heading_at("W0", (10.0, 1.85)) == pytest.approx(
            np.pi
        )

    def test_chord_heading_on_curved_lane(self, t_road):
        lane = next(l for l in t_road.lanes.values() if l.turn is Turn.LEFT)
        cl = lane.centerline
        i = len(cl) // 2
        mid = (cl[i] + cl[i + 1]) / 2
        want = geom.heading(cl[i + 1] - cl[i])
        assert t_road.lane_heading_at(lane.id, mid) == pytest.approx(want)


class TestDrivable:
    def test_on_lane_surface(self, straight_road):
        assert straight_road.drivable_contains((5.0, -1.85))

    def test_off_road_void(self, straight_road):
        assert not straight_road.drivable_contains((0.0, 60.0))

    def test_matches_per_polygon_oracle(self, t_road):
        rng = np.random.default_rng(8)
        pts = rng.uniform(-210, 210, size=(1000, 2))
        got = t_road.contains_many(pts)
        want = np.zeros(len(pts), dtype=bool)
        for ring in t_road.drivable:
            want |= geom.points_in_polygon(pts, ring)
        assert (got == want).all()

    def test_centerline_vertices_drivable(self, t_road):
        for lane in t_road.lanes.values():
            assert t_road.contains_many(lane.centerline).all()


class TestIsTurnLane:
    def test_conjunction(self):
        left = simple_lane("l", turn=Turn.LEFT, is_intersection=True)
        none = simple_lane("n", turn=Turn.NONE, is_intersection=True)
        off = simple_lane("o", turn=Turn.RIGHT, is_intersection=False)
        assert is_turn_lane(left)
        assert not is_turn_lane(none)
        assert not is_turn_lane(off)


class TestInvariants:
    def test_duplicate_lane_ids_rejected(self):
        a = simple_lane("X")
        with pytest.raises(InvalidMapError):
            RoadMap(map_id="bad", lanes=[a, a], drivable=[a.polygon])

    def test_dangling_successor_rejected(self):
        a = simple_lane("X", successors=("nope",))
        with pytest.raises(InvalidMapError):
            RoadMap(map_id="bad", lanes=[a], drivable=[a.polygon])

    def test_stray_centerline_rejected(self):
        lane = LaneSegment(
            id="stray",
            centerline=np.array([[0.0, 0.0], [100.0, 10.0]]),
            polygon=np.array(
                [[0.0, -1.85], [100.0, -1.85], [100.0, 1.85], [0.0, 1.85]]
            ),
        )
        with pytest.raises(InvalidMapError):
            RoadMap(map_id="bad", lanes=[lane], drivable=[lane.polygon])

    def test_roundtrip_preserves_queries(self, t_road, tmp_path):
        path = tmp_path / "map.json"
        io.save_map(path, t_road)
        loaded = io.load_map(path)
        rng = np.random.default_rng(12)
        probes = rng.uniform(-210, 210, size=(200, 2))
        for p in probes:
            assert loaded.lanes_containing(p) == t_road.lanes_containing(p)
            assert loaded.drivable_contains(tuple(p)) == t_road.drivable_contains(
                tuple(p)
            )
            assert loaded.lanes_within_radius(p, 50.0) == t_road.lanes_within_radius(
                p, 50.0
            )
