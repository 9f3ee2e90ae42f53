import math
import random
from collections import Counter

import pytest
from hypothesis import given, settings, strategies as st

from ridepool.core import CityMap, TripRequest, ValidationError, trip_direction
from ridepool.pooling import (
    angle_between,
    bucket_count,
    is_correlated,
    pool_requests,
    singleton_table,
    trip_angle,
)

THETAS = [10, 30, 45, 60, 90]
GRID = CityMap.grid(11, 11)
CENTER = 60  # (5, 5)


def fan_city(angles):
    """Zone 0 at the origin, zone i+1 on the unit circle at angles[i] degrees."""
    cent = {0: (0.0, 0.0)}
    for i, a in enumerate(angles):
        cent[i + 1] = (math.cos(math.radians(a)), math.sin(math.radians(a)))
    return CityMap.from_edges(cent, [(0, i + 1) for i in range(len(angles))])


@pytest.mark.parametrize("vec, deg", [((1, 0), 0.0), ((0, 1), 90.0), ((-1, -1), 225.0),
                                      ((0, 0), 0.0), ((1, -1e-300), 0.0), ((1, -1), 315.0)])
def test_trip_angle(vec, deg):
    assert trip_angle(vec) == pytest.approx(deg)
    assert 0 <= trip_angle(vec) < 360


def test_bucket_count():
    assert [bucket_count(t) for t in THETAS] == [36, 12, 8, 6, 4]
    with pytest.raises(ValidationError):
        bucket_count(7)


def test_identical_direction_fills_4_then_1():
    city = fan_city([20])
    reqs = [TripRequest(0, i, 0, 1) for i in range(5)]
    table = pool_requests(reqs, 30, 4, city)
    assert len(table.buckets) == 12
    assert [len(c) for c in table.buckets[0]] == [4, 1]
    assert all(not c.members for b in table.buckets[1:] for c in b)
    assert [c.member_ids for c in table.clusters()] == [[0, 1, 2, 3], [4]]


def test_10_and_50_degrees_separate():
    city = fan_city([10, 50])
    table = pool_requests([TripRequest(0, 0, 0, 1), TripRequest(0, 1, 0, 2)], 30, 4, city)
    got = [(c.bucket_index, c.member_ids) for c in table.clusters()]
    assert got == [(0, [0]), (1, [1])]


def test_no_wraparound_at_seam():
    city = fan_city([359.9, 0.1])
    table = pool_requests([TripRequest(0, 0, 0, 1), TripRequest(0, 1, 0, 2)], 30, 4, city)
    assert [c.bucket_index for c in table.clusters()] == [0, 11]


def test_same_zone_trip_bucket_zero():
    city = fan_city([100])
    table = pool_requests([TripRequest(0, 0, 0, 0)], 30, 4, city)
    assert [c.bucket_index for c in table.clusters()] == [0]


def test_multi_rider_requests_count_seats():
    city = fan_city([5])
    reqs = [TripRequest(0, 0, 0, 1, k=3), TripRequest(0, 1, 0, 1, k=2), TripRequest(0, 2, 0, 1, k=1)]
    table = pool_requests(reqs, 30, 4, city)
    assert [(c.member_ids, c.seats) for c in table.clusters()] == [([0], 3), ([1, 2], 3)]


def test_foreign_origin_rejected():
    city = fan_city([5])
    with pytest.raises(ValidationError):
        pool_requests([TripRequest(0, 0, 0, 1), TripRequest(0, 1, 1, 0)], 30, 4, city, zone_id=0)


@pytest.mark.parametrize("a, b, theta, expect", [
    ((1, 2), (1, 2), 30, True),
    ((1, 0), (0, 1), 30, False),
    ((1, 0), (math.cos(math.radians(30)), math.sin(math.radians(30))), 30, True),
    ((1, 0), (math.cos(math.radians(30.01)), math.sin(math.radians(30.01))), 30, False),
    ((0, 0), (-1, 0), 10, True),
])
def test_is_correlated(a, b, theta, expect):
    assert is_correlated(a, b, theta) is expect


def test_angle_between_is_inverse_cosine():
    assert angle_between((1, 0), (-1, 0)) == pytest.approx(180.0)
    assert angle_between((3, 4), (4, 3)) == pytest.approx(math.degrees(math.acos(24 / 25)))


def grid_requests(dests, origin=CENTER):
    return [TripRequest(0, i, origin, d) for i, d in enumerate(dests)]


@settings(max_examples=150, deadline=None)
@given(st.sampled_from(THETAS), st.integers(1, 6),
       st.lists(st.integers(0, 120), max_size=60))
def test_capacity_and_soundness(theta, cap, dests):
    reqs = grid_requests(dests)
    table = pool_requests(reqs, theta, cap, GRID, CENTER)
    assert len(table.buckets) == 360 // theta
    seen = []
    for b, bucket in enumerate(table.buckets):
        # all but the last cluster in a bucket are full
        for c in bucket[:-1]:
            assert c.seats == cap
        for c in bucket:
            assert c.seats <= cap and c.bucket_index == b
            seen += c.member_ids
            dirs = [trip_direction(r, GRID) for r in c.members]
            for i in range(len(dirs)):
                for j in range(i + 1, len(dirs)):
                    assert is_correlated(dirs[i], dirs[j], theta)
                    if any(dirs[i]) and any(dirs[j]):
                        assert angle_between(dirs[i], dirs[j]) < theta
    assert sorted(seen) == list(range(len(reqs)))
    assert table.ops == len(reqs)


@pytest.mark.parametrize("n", [10 ** 3, 10 ** 4, 10 ** 5])
def test_operation_count_linear(n):
    rng = random.Random(n)
    reqs = grid_requests([rng.randrange(121) for _ in range(n)])
    table = pool_requests(reqs, 30, 4, GRID, CENTER)
    assert table.ops == n


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(0, 120), max_size=40), st.randoms(use_true_random=False))
def test_sizes_independent_of_interleaving(dests, rnd):
    reqs = grid_requests(dests)
    shuffled = list(reqs)
    rnd.shuffle(shuffled)

    def sizes(rs):
        t = pool_requests(rs, 30, 4, GRID, CENTER)
        return [Counter(len(c) for c in bucket if c.members) for bucket in t.buckets]

    assert sizes(reqs) == sizes(shuffled)


def test_insertion_order_preserved():
    city = fan_city([5])
    reqs = [TripRequest(0, i, 0, 1) for i in (7, 3, 9)]
    assert [c.member_ids for c in pool_requests(reqs, 30, 4, city).clusters()] == [[7, 3, 9]]


def test_singleton_table():
    reqs = [TripRequest(0, 0, 0, 1), TripRequest(0, 1, 0, 2)]
    t = singleton_table(reqs, 0, 4)
    assert [c.member_ids for c in t.clusters()] == [[0], [1]]
