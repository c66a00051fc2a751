import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from rhscellfree.geometry import (
    BsSite,
    NetworkRealization,
    Region,
    UeLayout,
    local_frame_position,
    local_positions,
    nearest_ue,
    sample_ppp,
    sample_uniform_disk,
    serving_sets,
)

coord = st.floats(-100, 100, allow_nan=False)


def test_region_area():
    assert Region(100.0).area == pytest.approx(math.pi * 1e4)
    assert 1e-3 * Region(100.0).area == pytest.approx(31.416, abs=1e-3)


def test_poisson_count_statistics():
    rng = np.random.default_rng(1)
    region = Region(100.0)
    counts = np.array([sample_ppp(region, 1e-3, rng).num_bs for _ in range(20000)])
    mean = region.area * 1e-3
    se_mean = math.sqrt(mean / len(counts))
    assert abs(counts.mean() - mean) < 3 * se_mean
    # sampling variance of a Poisson sample variance is about (mu + 2 mu^2) / n
    se_var = math.sqrt((mean + 2 * mean**2) / len(counts))
    assert abs(counts.var(ddof=1) - mean) < 3 * se_var


def test_centers_inside_disk_and_uniform():
    pts = sample_uniform_disk(100.0, 200000, np.random.default_rng(2))
    r = np.hypot(pts[:, 0], pts[:, 1])
    assert np.all(r <= 100.0)
    for r0 in (25.0, 50.0, 75.0):
        p = (r0 / 100.0) ** 2
        frac = np.mean(r <= r0)
        assert abs(frac - p) < 3 * math.sqrt(p * (1 - p) / len(r))


def test_ppp_reproducible():
    a = sample_ppp(Region(100.0), 1e-3, np.random.default_rng(9))
    b = sample_ppp(Region(100.0), 1e-3, np.random.default_rng(9))
    assert np.array_equal(a.centers, b.centers)
    assert np.array_equal(a.azimuths, b.azimuths)
    assert np.all((a.azimuths >= 0) & (a.azimuths < math.pi))


def test_realization_arrays_are_read_only():
    net = sample_ppp(Region(50.0), 1e-2, np.random.default_rng(0))
    with pytest.raises(ValueError):
        net.centers[0, 0] = 1.0


def test_broadside_without_height():
    lp = local_frame_position(BsSite((0.0, 0.0), 0.0, 0.0), (0.0, 7.0))
    assert np.allclose(lp.q, [0.0, 0.0, 7.0], atol=1e-12)
    assert lp.sin_psi == pytest.approx(1.0)


def test_broadside_with_height():
    lp = local_frame_position(BsSite((0.0, 0.0), 10.0, 0.0), (0.0, 30.0))
    assert lp.range == pytest.approx(math.sqrt(1000.0), rel=1e-12)
    assert lp.range == pytest.approx(31.6228, abs=1e-4)
    assert lp.sin_psi == pytest.approx(30.0 / math.sqrt(1000.0), rel=1e-12)
    assert lp.sin_psi == pytest.approx(0.9487, abs=1e-4)


def test_back_side_is_folded():
    front = local_frame_position(BsSite((0.0, 0.0), 10.0, 0.3), (5.0, 20.0)).q
    back = local_frame_position(BsSite((0.0, 0.0), 10.0, 0.3 + math.pi), (5.0, 20.0)).q
    assert front[2] >= 0 and back[2] >= 0
    assert np.allclose(front[[1, 2]], back[[1, 2]])
    assert front[0] == pytest.approx(-back[0])


def test_coincident_ue_without_height_rejected():
    with pytest.raises(ValueError, match="degenerate"):
        local_positions([[1.0, 1.0]], [0.0], 0.0, [[1.0, 1.0]])


@given(c=st.tuples(coord, coord), u=st.tuples(coord, coord),
       az=st.floats(0, math.pi, exclude_max=True), h=st.floats(1, 30),
       x=st.floats(-0.2, 0.2), y=st.floats(-0.2, 0.2))
def test_local_frame_preserves_distances(c, u, az, h, x, y):
    q = local_frame_position(BsSite(c, h, az), u).q
    local = math.dist(q, (x, y, 0.0))
    elem = (c[0] + x * math.cos(az), c[1] + x * math.sin(az), h + y)
    glob = math.dist((u[0], u[1], 0.0), elem)
    assert local == pytest.approx(glob, rel=1e-12, abs=1e-12)


def test_single_ue_served_by_every_bs():
    net = sample_ppp(Region(100.0), 1e-3, np.random.default_rng(4))
    sets = serving_sets(net, UeLayout(np.zeros((1, 2))))
    assert np.array_equal(sets[0], np.arange(net.num_bs))


def test_tie_goes_to_lower_index():
    net = NetworkRealization([[0.0, 0.0]], [0.0], 10.0, Region(100.0), 1e-3)
    ues = UeLayout(np.array([[5.0, 0.0], [-5.0, 0.0]]))
    assert nearest_ue(net, ues)[0] == 0


@given(arrays(float, (20, 2), elements=coord), arrays(float, (4, 2), elements=coord))
def test_serving_sets_brute_force(bs, ue):
    net = NetworkRealization(bs, np.zeros(20), 10.0, Region(150.0), 1e-3)
    sets = serving_sets(net, UeLayout(ue))
    assert sum(len(s) for s in sets) == 20
    for l in range(20):
        d = [(bs[l, 0] - ue[k, 0]) ** 2 + (bs[l, 1] - ue[k, 1]) ** 2 for k in range(4)]
        best = min(range(4), key=lambda k: (d[k], k))
        assert l in sets[best]


def test_empty_network():
    net = NetworkRealization(np.zeros((0, 2)), np.zeros(0), 10.0, Region(10.0), 1e-3)
    assert net.num_bs == 0
    assert len(nearest_ue(net, UeLayout(np.zeros((1, 2))))) == 0
