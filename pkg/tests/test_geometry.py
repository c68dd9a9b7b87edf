import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.spatial.transform import Rotation

from cubessl.errors import InvalidArgumentError
from cubessl.geometry import (
    MicArray,
    MicPair,
    cartesian_to_spherical,
    cubical_array,
    direction_vector,
    enumerate_pairs,
    farfield_tdoa,
    point_delay_difference,
    wrap_degrees,
)

C = 343.0


def test_cubical_array_vertices(cube):
    pos = cube.positions
    assert pos.shape == (8, 3)
    np.testing.assert_allclose(np.abs(pos), 0.075)
    assert np.linalg.norm(pos.mean(axis=0)) < 1e-9


def test_cubical_array_order_z_then_y_then_x(cube):
    keys = [(z, y, x) for x, y, z in cube.mics]
    assert keys == sorted(keys)
    assert cube.mics[0] == (-0.075, -0.075, -0.075)
    assert cube.mics[7] == (0.075, 0.075, 0.075)


def test_cubical_array_pair_distance_extremes(cube):
    # brute force over all 28 vertex pairs
    d = [math.dist(a, b) for a, b in itertools.combinations(cube.mics, 2)]
    assert min(d) == pytest.approx(0.15, abs=1e-12)
    assert max(d) == pytest.approx(0.15 * math.sqrt(3), abs=1e-12)
    assert max(d) == pytest.approx(0.2598, abs=1e-4)


def test_cubical_array_scales_linearly(cube):
    big = cubical_array(2.0)
    np.testing.assert_array_equal(big.positions, cube.positions * (2.0 / 0.15))


@pytest.mark.parametrize("edge", [0.0, -0.1, float("nan"), float("inf")])
def test_cubical_array_rejects_bad_edge(edge):
    with pytest.raises(InvalidArgumentError):
        cubical_array(edge)


def test_mic_array_validation():
    with pytest.raises(InvalidArgumentError):
        MicArray(((0.0, 0.0, 0.0),))
    with pytest.raises(InvalidArgumentError):
        MicArray(((0.0, 0.0, 0.0), (0.0, 0.0, 1e-9)))
    with pytest.raises(InvalidArgumentError):
        MicArray(((0.0, 0.0, 0.0), (float("nan"), 0.0, 0.0)))
    with pytest.raises(InvalidArgumentError):
        MicArray(((0.0, 0.0, 0.0), (1.0, 0.0, 0.0)), speed_of_sound=0.0)


def test_mic_array_json_round_trip(tmp_path, cube):
    path = tmp_path / "array.json"
    cube.save(path)
    assert MicArray.load(path) == cube


def test_enumerate_pairs(cube):
    pairs = enumerate_pairs(cube)
    assert len(pairs) == 28
    assert [(p.index_a, p.index_b) for p in pairs] == list(itertools.combinations(range(8), 2))
    for p in pairs:
        assert p.distance == pytest.approx(math.dist(cube.mics[p.index_a], cube.mics[p.index_b]), abs=1e-15)
    two = MicArray(((0.0, 0.0, 0.0), (0.1, 0.0, 0.0)))
    assert len(enumerate_pairs(two)) == 1


def test_enumerate_pairs_opposite_vertices(cube):
    pair = enumerate_pairs(cube)[6]
    assert (pair.index_a, pair.index_b) == (0, 7)
    assert pair.distance == pytest.approx(0.2598, abs=1e-4)


@pytest.mark.parametrize(
    "angle, expected",
    [
        (0.0, 0.0),
        (math.pi / 2, 4.3732e-4),  # 0.15 / 343
        (math.pi / 6, 2.1866e-4),  # 0.15 * 0.5 / 343
    ],
)
def test_farfield_tdoa(angle, expected):
    assert farfield_tdoa(0.15, angle, C) == pytest.approx(expected, abs=5e-9)


def test_farfield_tdoa_rejects_bad_c():
    with pytest.raises(InvalidArgumentError):
        farfield_tdoa(0.15, 0.1, 0.0)


def _line_array():
    return MicArray(((0.075, 0.0, 0.0), (-0.075, 0.0, 0.0)), C)


def test_point_delay_difference_collinear_far_point():
    arr = _line_array()
    pair = enumerate_pairs(arr)[0]
    # |p - a| = 9.925, |p - b| = 10.075 exactly
    assert point_delay_difference((10.0, 0.0, 0.0), pair, arr) == pytest.approx(-0.15 / C, rel=1e-12)
    assert point_delay_difference((10.0, 0.0, 0.0), pair, arr) == pytest.approx(-4.3732e-4, abs=5e-9)


def test_point_delay_difference_equidistant_and_antisymmetric():
    arr = _line_array()
    pair = enumerate_pairs(arr)[0]
    assert point_delay_difference((0.0, 3.0, 1.0), pair, arr) == 0.0
    rev = MicPair(pair.index_b, pair.index_a, pair.distance)
    p = (1.0, 2.0, -0.5)
    assert point_delay_difference(p, rev, arr) == -point_delay_difference(p, pair, arr)


def test_point_delay_difference_rejects_coincident_point():
    arr = _line_array()
    with pytest.raises(InvalidArgumentError):
        point_delay_difference((0.075, 0.0, 0.0), enumerate_pairs(arr)[0], arr)


finite = st.floats(-5, 5, allow_nan=False)


@settings(max_examples=200, deadline=None)
@given(st.tuples(finite, finite, finite))
def test_delay_bounded_by_pair_distance(point):
    cube = cubical_array()
    if np.min(np.linalg.norm(cube.positions - np.array(point), axis=1)) < 1e-3:
        return
    for pair in enumerate_pairs(cube):
        assert abs(point_delay_difference(point, pair, cube)) <= pair.distance / C + 1e-15


@settings(max_examples=50, deadline=None)
@given(st.floats(-180, 180), st.floats(-90, 90))
def test_delay_converges_to_farfield(az, el):
    cube = cubical_array()
    u = direction_vector(az, el)
    pos = cube.positions
    for pair in enumerate_pairs(cube):
        far = u @ (pos[pair.index_b] - pos[pair.index_a]) / C
        assert point_delay_difference(100.0 * u, pair, cube) == pytest.approx(far, abs=1e-6)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_delay_rotation_invariant(seed):
    rng = np.random.default_rng(seed)
    cube = cubical_array()
    rot = Rotation.random(random_state=seed)
    rotated = MicArray.from_positions(rot.apply(cube.positions), C)
    point = rng.uniform(-3, 3, 3) + np.array([1.0, 0, 0])
    for pair in enumerate_pairs(cube):
        a = point_delay_difference(point, pair, cube)
        b = point_delay_difference(rot.apply(point), pair, rotated)
        assert abs(a - b) <= 1e-12


def test_spherical_round_trip():
    for az, el in [(0, 0), (90, 10), (-135, 35), (180, -45)]:
        got = cartesian_to_spherical(2.0 * direction_vector(az, el))
        assert got[0] == pytest.approx(az)
        assert got[1] == pytest.approx(el)
        assert got[2] == pytest.approx(2.0)


@pytest.mark.parametrize("angle, wrapped", [(-180, 180), (180, 180), (540, 180), (-190, 170), (359, -1)])
def test_wrap_degrees(angle, wrapped):
    assert wrap_degrees(angle) == wrapped
