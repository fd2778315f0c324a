from __future__ import annotations

import cmath
import math
import random

import pytest
from hypothesis import given, strategies as st

from paredlab import hypdisk as hd
from paredlab.errors import ValidationError


def disk_points(rmax=0.95):
    return st.builds(lambda r, t: r * cmath.exp(2j * math.pi * t),
                     st.floats(0, rmax), st.floats(0, 1))


def test_dist_trivial_values():
    assert hd.dist(0j, 0j) == 0
    assert hd.dist(0j, 0.5 + 0j) == pytest.approx(math.log(3), abs=1e-14)


def test_disk_point_rejects_boundary():
    with pytest.raises(ValidationError):
        hd.DiskPoint(1 - 1e-15 + 0j)
    hd.DiskPoint(0.5j)


def test_dist_symmetric_on_random_pairs():
    rng = random.Random(1)
    for _ in range(100):
        a = complex(rng.uniform(-0.7, 0.7), rng.uniform(-0.7, 0.7))
        b = complex(rng.uniform(-0.7, 0.7), rng.uniform(-0.7, 0.7))
        assert abs(hd.dist(a, b) - hd.dist(b, a)) < 1e-12


@given(disk_points(), disk_points(), disk_points())
def test_triangle_inequality(a, b, c):
    assert hd.dist(a, c) <= hd.dist(a, b) + hd.dist(b, c) + 1e-12


@given(disk_points(), disk_points(), disk_points(0.9))
def test_isometry_invariance(a, b, c):
    m = hd.to_origin(c)
    assert hd.dist(m(a), m(b)) == pytest.approx(hd.dist(a, b), abs=1e-10)


def test_to_origin():
    assert hd.to_origin(0j)(0.3 + 0.2j) == 0.3 + 0.2j
    c = 0.4 - 0.7j
    assert abs(hd.to_origin(c)(c)) < 1e-14
    w = hd.to_origin(0.9 + 0j)(0.99 + 0j)
    assert abs(w.imag) < 1e-15 and 0 < w.real < 1
    assert hd.dist_to_origin(w) == pytest.approx(hd.dist(0.9 + 0j, 0.99 + 0j), abs=1e-10)


def test_geodesic_examples():
    assert abs(complex(hd.geodesic(-0.5 + 0j, 0.5 + 0j, 0.5))) < 1e-14
    for t in (0.1, 0.5, 0.9):
        z = complex(hd.geodesic(0j, hd.IdealPoint(0.0), t))
        assert abs(z.imag) < 1e-15 and z.real > 0


def test_geodesic_midpoint_matches_mobius_transport():
    a, b = 0.3 + 0j, 0.3j
    mid = complex(hd.geodesic(a, b, 0.5))
    # oracle: move a to 0, the midpoint of [0, w] is tanh(d/4) in the direction of w
    m = hd.to_origin(a)
    w = m(b)
    half = math.tanh(hd.dist(a, b) / 4) * w / abs(w)
    assert abs(mid - m.inverse(half)) < 1e-12
    assert hd.dist(a, mid) == pytest.approx(hd.dist(mid, b), abs=1e-12)


def test_projection_examples():
    assert abs(complex(hd.project_to_hull(0.5j, [-0.5 + 0j, 0.5 + 0j]))) < 1e-9
    x = 0.2 - 0.3j
    assert abs(complex(hd.project_to_hull(x, [x])) - x) < 1e-12


def test_projection_against_dense_sampling():
    x, p, q = 0.3 + 0.4j, 0j, 0.9 + 0j
    foot = complex(hd.project_to_hull(x, [p, q]))
    samples = [complex(hd.geodesic(p, q, k / 20000)) for k in range(20001)]
    best = min(samples, key=lambda z: hd.dist(x, z))
    assert hd.dist(x, foot) <= hd.dist(x, best) + 1e-9
    assert abs(foot - best) < 1e-3


def test_angles():
    assert hd.angle_at(0j, 0.5 + 0j, 0.5j) == pytest.approx(math.pi / 2, abs=1e-14)
    assert hd.angle_at(0j, 0.5 + 0j, -0.5 + 0j) == pytest.approx(math.pi, abs=1e-14)


@pytest.mark.parametrize("theta", [math.pi / 6, math.pi / 3, math.pi / 2, 2 * math.pi / 3])
def test_thin_triangles_bounded(theta):
    c = hd.thin_triangle_constant(theta, samples=2000)
    assert c <= hd.thin_triangle_bound(theta) + 1e-9
    for a, b, cc in hd.sample_triangles(theta, 200, seed=7):
        assert hd.angle_at(b, a, cc) >= theta - 1e-9
        assert hd.triangle_excess(a, b, cc) <= hd.thin_triangle_bound(theta) + 1e-9


def test_radial_comparison_grid():
    assert hd.he_grid_violations() == []
