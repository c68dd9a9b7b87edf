import math

import numpy as np
import pytest

from cubessl.errors import InvalidArgumentError
from cubessl.geometry import MicArray, enumerate_pairs, point_delay_difference
from cubessl.spectral import CorrelationFunction, interpolate_correlation
from cubessl.srp_grid import (
    DoaEstimate,
    SrpMap,
    accumulate_srp,
    angular_distance,
    build_delay_table,
    build_grid,
    find_peaks,
)

FS = 16000.0


@pytest.fixture(scope="module")
def grid():
    return build_grid(1.5, 2.0, 2.0)


@pytest.fixture(scope="module")
def table(grid, cube):
    return build_delay_table(grid, cube, FS)


def test_grid_size_and_radius(grid):
    assert grid.size == 180 * 91 == 16380
    assert grid.azimuths[0] == -178.0 and grid.azimuths[-1] == 180.0
    assert grid.elevations[0] == -90.0 and grid.elevations[-1] == 90.0
    np.testing.assert_allclose(np.linalg.norm(grid.points, axis=1), 1.5, rtol=1e-9)


def test_grid_frame_convention(grid):
    g = grid.flat_index(grid.azimuths.index(0.0), grid.elevations.index(0.0))
    np.testing.assert_allclose(grid.points[g], [1.5, 0.0, 0.0], atol=1e-12)
    top = grid.elevations.index(90.0)
    for ai in range(len(grid.azimuths)):
        np.testing.assert_allclose(grid.points[grid.flat_index(ai, top)], [0.0, 0.0, 1.5], atol=1e-12)
    g = grid.flat_index(grid.azimuths.index(90.0), grid.elevations.index(0.0))
    np.testing.assert_allclose(grid.points[g], [0.0, 1.5, 0.0], atol=1e-12)


def test_flat_index_bijection(grid):
    seen = set()
    for g in range(grid.size):
        ai, ei = grid.unravel(g)
        assert grid.flat_index(ai, ei) == g
        seen.add((ai, ei))
    assert len(seen) == grid.size
    assert grid.angles(grid.flat_index(3, 5)) == (grid.azimuths[3], grid.elevations[5])


@pytest.mark.parametrize("az, el", [(7.0, 2.0), (2.0, 7.0), (0.0, 2.0), (2.0, -1.0)])
def test_grid_rejects_non_divisors(az, el):
    with pytest.raises(InvalidArgumentError):
        build_grid(1.0, az, el)


def test_delay_table_shape_and_bound(table, cube):
    assert table.shifts.shape == (28, 16380)
    assert table.shifts.size == 458640
    d_max = max(p.distance for p in enumerate_pairs(cube))
    bound = d_max * FS / cube.speed_of_sound
    assert bound == pytest.approx(12.12, abs=0.01)
    assert table.max_shift <= bound
    for p, pair in enumerate(enumerate_pairs(cube)):
        assert np.all(np.abs(table.shifts[p]) <= pair.distance * FS / cube.speed_of_sound + 1e-12)


def test_delay_table_matches_geometry(table, grid, cube):
    pairs = enumerate_pairs(cube)
    for p in (0, 6, 27):
        for g in (0, 1234, 9000, 16379):
            expected = point_delay_difference(grid.points[g], pairs[p], cube) * FS
            assert table.shifts[p, g] == pytest.approx(expected, abs=1e-9)


def test_delay_table_antisymmetry_exact(table, grid, cube):
    reversed_table = build_delay_table(grid, cube, FS, pairs=table.pairs[:, ::-1])
    assert np.array_equal(reversed_table.shifts, -table.shifts)


def test_delay_table_linear_in_sample_rate(table, grid, cube):
    doubled = build_delay_table(grid, cube, 2 * FS)
    assert np.array_equal(doubled.shifts, 2 * table.shifts)


def test_delay_table_equidistant_point_gives_zero():
    arr = MicArray(((0.1, 0.0, 0.0), (-0.1, 0.0, 0.0)))
    grid = build_grid(1.0, 90.0, 90.0)
    table = build_delay_table(grid, arr, FS)
    g = grid.flat_index(grid.azimuths.index(90.0), grid.elevations.index(0.0))
    assert table.shifts[0, g] == 0.0


def test_delay_table_rejects_radius_inside_array(cube):
    with pytest.raises(InvalidArgumentError):
        build_delay_table(build_grid(0.1, 10, 10), cube, FS)


def test_accumulate_zero_correlations_leaves_map(table, grid):
    start = SrpMap(np.arange(grid.size, dtype=float), 2)
    out = accumulate_srp(np.zeros((28, 41)), table, start)
    np.testing.assert_array_equal(out.power, start.power)
    assert out.frames_accumulated == 3


def test_accumulate_single_pair_impulse():
    arr = MicArray(((0.075, 0.0, 0.0), (-0.075, 0.0, 0.0)))
    grid = build_grid(1.5, 10.0, 10.0)
    table = build_delay_table(grid, arr, FS)
    corr = np.zeros(41)
    corr[20] = 1.0  # unit impulse at lag 0
    out = accumulate_srp([CorrelationFunction(corr, FS)], table, SrpMap.empty(grid))
    support = np.abs(table.shifts[0]) < 1.0
    assert np.all(out.power[support] > 0)
    assert np.all(out.power[~support] == 0)
    np.testing.assert_allclose(out.power[support], 1 - np.abs(table.shifts[0][support]), atol=1e-12)


def test_accumulate_matches_pointwise_interpolation(cube, rng):
    grid = build_grid(1.5, 30.0, 30.0)
    table = build_delay_table(grid, cube, FS)
    corrs = [CorrelationFunction(rng.standard_normal(2 * 20 + 1), FS) for _ in range(28)]
    out = accumulate_srp(corrs, table, SrpMap.empty(grid))
    for g in range(grid.size):
        expected = sum(interpolate_correlation(c, table.shifts[p, g]) for p, c in enumerate(corrs))
        assert out.power[g] == pytest.approx(expected, abs=1e-12)


def test_accumulate_rejects_missing_pair_and_short_lags(table, grid):
    with pytest.raises(InvalidArgumentError):
        accumulate_srp(np.zeros((27, 41)), table, SrpMap.empty(grid))
    with pytest.raises(InvalidArgumentError):
        accumulate_srp(np.zeros((28, 11)), table, SrpMap.empty(grid))


def test_find_peaks_single_entry(grid):
    power = np.zeros(grid.size)
    g = grid.flat_index(10, 40)
    power[g] = 5.0
    peaks = find_peaks(SrpMap(power, 1), grid)
    assert len(peaks) == 1
    assert (peaks[0].azimuth, peaks[0].elevation) == grid.angles(g)
    assert peaks[0].power == 5.0


def _bump_map(grid, centres, widths=8.0):
    power = np.zeros(grid.size)
    for (az, el), amp in centres:
        ang = np.degrees(np.arccos(np.clip(grid.directions @ DoaEstimate(az, el).direction, -1, 1)))
        power += amp * np.exp(-0.5 * (ang / widths) ** 2)
    return SrpMap(power, 1)


def test_find_peaks_merges_close_sources(grid):
    srp = _bump_map(grid, [((40, 10), 1.0), ((48, 10), 0.9)], widths=3.0)
    peaks = find_peaks(srp, grid, max_sources=3, suppression_radius=20.0)
    assert len(peaks) == 1


def test_find_peaks_orders_by_power_and_separates(grid):
    srp = _bump_map(grid, [((-135, 36), 0.6), ((90, 74), 1.0), ((146, 60), 0.8)])
    peaks = find_peaks(srp, grid, max_sources=3, suppression_radius=20.0)
    assert [(p.azimuth, p.elevation) for p in peaks] == [(90, 74), (146, 60), (-136, 36)]
    assert peaks[0].power > peaks[1].power > peaks[2].power


def test_find_peaks_returns_fewer_when_exhausted(grid):
    srp = _bump_map(grid, [((0, 0), 1.0)])
    assert len(find_peaks(srp, grid, max_sources=3)) == 1


def test_find_peaks_pole_is_one_point(grid):
    srp = _bump_map(grid, [((0, 90), 1.0), ((0, 0), 0.5)])
    peaks = find_peaks(srp, grid, max_sources=3)
    assert len(peaks) == 2
    assert peaks[0].elevation == 90.0
    assert angular_distance(peaks[1], DoaEstimate(0, 0)) < 1e-9


@pytest.mark.parametrize("seed", range(5))
def test_find_peaks_invariants_random_maps(seed):
    grid = build_grid(1.5, 6.0, 6.0)
    rng = np.random.default_rng(seed)
    centres = [((rng.uniform(-180, 180), rng.uniform(-80, 80)), rng.uniform(0.2, 1.0)) for _ in range(6)]
    srp = _bump_map(grid, centres, widths=10.0)
    srp.power += 0.01 * rng.standard_normal(grid.size)
    peaks = find_peaks(srp, grid, max_sources=5, suppression_radius=25.0)
    powers = [p.power for p in peaks]
    assert all(a > b for a, b in zip(powers, powers[1:]))
    for i in range(len(peaks)):
        for j in range(i):
            assert angular_distance(peaks[i], peaks[j]) >= 25.0
    assert peaks[0].power == srp.power.max()


def test_find_peaks_rejects_bad_args(grid):
    with pytest.raises(InvalidArgumentError):
        find_peaks(SrpMap.empty(grid), grid, max_sources=0)
    with pytest.raises(InvalidArgumentError):
        find_peaks(SrpMap.empty(grid), grid, suppression_radius=0)


@pytest.mark.parametrize(
    "a, b, expected",
    [((10, 20), (10, 20), 0.0), ((0, 0), (180, 0), 180.0), ((0, 0), (90, 0), 90.0), ((0, 90), (77, 90), 0.0)],
)
def test_angular_distance(a, b, expected):
    assert angular_distance(DoaEstimate(*a), DoaEstimate(*b)) == pytest.approx(expected, abs=1e-9)


def test_doa_estimate_ranges():
    assert DoaEstimate(-180, 0).azimuth == 180.0
    with pytest.raises(InvalidArgumentError):
        DoaEstimate(0, 91)
