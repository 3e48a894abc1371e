import math

import numpy as np
import pytest

from zermelo_kit import Mat2, Vec2, cross, curvature, perp
from zermelo_kit.errors import ZeroSpeed

N_PROBES = 10_000
REL_TOL = 1e-12


def test_perp_definition():
    assert perp(Vec2(1, 0)) == Vec2(0, 1)
    assert perp(Vec2(0, 1)) == Vec2(-1, 0)


def test_perp_involution_example():
    assert perp(perp(Vec2(3, -2))) == Vec2(-3, 2)


def test_vec2_rejects_non_finite():
    with pytest.raises(ValueError):
        Vec2(float("nan"), 0.0)
    with pytest.raises(ValueError):
        Mat2(1.0, 0.0, float("inf"), 0.0)


def test_curvature_unit_circle():
    assert curvature(Vec2(1, 0), Vec2(0, 1)) == 1.0


def test_curvature_straight_line():
    assert curvature(Vec2(2, 0), Vec2(0, 0)) == 0.0


def test_curvature_radius_four_circle():
    # radius-4 circle traversed at speed 2: u(t) = 4(cos(t/2), sin(t/2)),
    # derivatives at t=0 are (0, 2) and (-1, 0)
    assert curvature(Vec2(0, 2), Vec2(-1, 0)) == pytest.approx(0.25, abs=1e-15)
    # cross-check against central finite differences of the parametrization;
    # h balances O(h^2) truncation against eps/h^2 roundoff in u''
    h = 1e-4
    t0 = 0.7

    def pos(t):
        return np.array([4 * math.cos(t / 2), 4 * math.sin(t / 2)])

    up = (pos(t0 + h) - pos(t0 - h)) / (2 * h)
    upp = (pos(t0 + h) - 2 * pos(t0) + pos(t0 - h)) / h**2
    k = curvature(Vec2(*up), Vec2(*upp))
    assert k == pytest.approx(0.25, rel=1e-5)


def test_curvature_radius_two_circle():
    # same tangent speed on a radius-2 circle doubles the curvature
    assert curvature(Vec2(0, 2), Vec2(-2, 0)) == pytest.approx(0.5, abs=1e-15)


def test_curvature_zero_speed_raises():
    with pytest.raises(ZeroSpeed):
        curvature(Vec2(0, 0), Vec2(1, 1))


def _random_vecs(rng, n):
    arr = rng.standard_normal((n, 2)) * 10.0 ** rng.uniform(-3, 3, (n, 1))
    return arr


def test_property_p1_involution_exact():
    rng = np.random.default_rng(20260810)
    for ax, ay in _random_vecs(rng, N_PROBES):
        a = Vec2(ax, ay)
        assert perp(perp(a)) == Vec2(-ax, -ay)


def test_property_p2_antisymmetry():
    rng = np.random.default_rng(20260811)
    va = _random_vecs(rng, N_PROBES)
    vb = _random_vecs(rng, N_PROBES)
    for (ax, ay), (bx, by) in zip(va, vb):
        a, b = Vec2(ax, ay), Vec2(bx, by)
        lhs = perp(a).dot(b)
        rhs = -a.dot(perp(b))
        scale = a.norm() * b.norm() + 1e-300
        assert abs(lhs - rhs) <= REL_TOL * scale


def test_property_p3_triple_identity():
    rng = np.random.default_rng(20260812)
    va = _random_vecs(rng, N_PROBES)
    vb = _random_vecs(rng, N_PROBES)
    vc = _random_vecs(rng, N_PROBES)
    for (ax, ay), (bx, by), (cx, cy) in zip(va, vb, vc):
        a, b, c = Vec2(ax, ay), Vec2(bx, by), Vec2(cx, cy)
        lhs = a.dot(b) * c - a.dot(c) * b
        rhs = c.dot(perp(b)) * perp(a)
        scale = a.norm() * b.norm() * c.norm() + 1e-300
        assert abs(lhs.x1 - rhs.x1) <= REL_TOL * scale
        assert abs(lhs.x2 - rhs.x2) <= REL_TOL * scale


def test_property_p4_matrix_identity():
    # <Da,b>b - <a,b>D^T b = -<b, D perp(b)> perp(a); expanding components
    # shows the perp(a) coefficient carries the minus sign
    rng = np.random.default_rng(20260813)
    va = _random_vecs(rng, N_PROBES)
    vb = _random_vecs(rng, N_PROBES)
    ms = rng.standard_normal((N_PROBES, 4))
    for (ax, ay), (bx, by), (m11, m12, m21, m22) in zip(va, vb, ms):
        a, b = Vec2(ax, ay), Vec2(bx, by)
        d = Mat2(m11, m12, m21, m22)
        lhs = d.matvec(a).dot(b) * b - a.dot(b) * d.tmatvec(b)
        rhs = -b.dot(d.matvec(perp(b))) * perp(a)
        scale = (a.norm() * b.norm() ** 2
                 * max(abs(m11), abs(m12), abs(m21), abs(m22)) + 1e-300)
        assert abs(lhs.x1 - rhs.x1) <= REL_TOL * scale
        assert abs(lhs.x2 - rhs.x2) <= REL_TOL * scale


def test_cross_matches_perp_dot():
    rng = np.random.default_rng(7)
    for (ax, ay), (bx, by) in zip(_random_vecs(rng, 100), _random_vecs(rng, 100)):
        a, b = Vec2(ax, ay), Vec2(bx, by)
        assert cross(a, b) == perp(a).dot(b)
