import numpy as np
import pytest

from tentmle import tent
from tentmle.errors import (
    DegenerateGeometry,
    DimensionMismatch,
    OutsideHull,
)


def unit_interval():
    return tent.PointSet([[0.0, 1.0]])


def three_on_line():
    return tent.PointSet([[0.0, 0.5, 1.0]])


def unit_square():
    # Corners (0,0), (1,0), (0,1), (1,1).
    return tent.PointSet([[0.0, 1.0, 0.0, 1.0], [0.0, 0.0, 1.0, 1.0]])


def random_point_set(rng, d, n):
    # Poles spread out enough that degeneracy is never an issue.
    while True:
        pts = rng.uniform(-1.0, 1.0, size=(d, n))
        try:
            return tent.PointSet(pts)
        except DegenerateGeometry:
            continue


def test_point_set_validation():
    with pytest.raises(DegenerateGeometry):
        tent.PointSet([[0.0]])  # single point, no interior
    with pytest.raises(DegenerateGeometry):
        tent.PointSet([[0.0, 1.0, 2.0], [0.0, 1.0, 2.0]])  # collinear in 2-d
    with pytest.raises(DimensionMismatch):
        tent.PointSet([0.0, 1.0])  # not a 2-d array
    with pytest.raises(ValueError):
        tent.PointSet([[0.0, np.nan]])


def test_from_rows_round_trip():
    rows = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    ps = tent.PointSet.from_rows(rows)
    assert ps.dim == 2
    assert ps.count == 3
    np.testing.assert_array_equal(ps.points, rows.T)
    lo, hi = ps.bounding_box()
    np.testing.assert_array_equal(lo, [0.0, 0.0])
    np.testing.assert_array_equal(hi, [1.0, 1.0])


def test_interval_statistic_interpolates():
    ps = unit_interval()
    y = np.array([0.0, -1.0])
    assert tent.tent_eval(ps, y, [0.25]) == pytest.approx(-0.25, abs=1e-9)
    stat = tent.poly_stat(ps, y, [0.25])
    np.testing.assert_allclose(stat.dense(), [0.75, 0.25], atol=1e-9)


def test_dominated_pole_gets_zero_weight():
    # The middle pole sits strictly below the segment joining its neighbours,
    # so the tent ignores it: the function is flat zero across [0, 1].
    ps = three_on_line()
    y = np.array([0.0, -1.0, 0.0])
    assert tent.tent_eval(ps, y, [0.5]) == pytest.approx(0.0, abs=1e-9)
    stat = tent.poly_stat(ps, y, [0.5])
    np.testing.assert_allclose(stat.dense(), [0.5, 0.0, 0.5], atol=1e-9)


def test_square_center_statistic():
    ps = unit_square()
    y = np.array([0.0, 0.0, 0.0, -1.0])
    assert tent.tent_eval(ps, y, [0.5, 0.5]) == pytest.approx(0.0, abs=1e-9)
    stat = tent.poly_stat(ps, y, [0.5, 0.5])
    assert stat.support_size <= 3
    np.testing.assert_allclose(stat.dense(), [0.0, 0.5, 0.5, 0.0], atol=1e-9)
    assert stat.dot(y) == pytest.approx(0.0, abs=1e-9)


def test_outside_hull_behaviour():
    ps = unit_square()
    y = np.zeros(4)
    assert not tent.in_hull(ps, [1.5, 0.5])
    assert tent.in_hull(ps, [1.0, 1.0])  # corner counts as inside
    assert tent.tent_eval(ps, y, [-0.1, 0.5]) == -np.inf
    assert tent.density_unscaled(ps, y, [-0.1, 0.5]) == 0.0
    with pytest.raises(OutsideHull):
        tent.poly_stat(ps, y, [2.0, 2.0])


def test_query_validation():
    ps = unit_square()
    y = np.zeros(4)
    with pytest.raises(DimensionMismatch):
        tent.tent_eval(ps, y, [0.5])
    with pytest.raises(DimensionMismatch):
        tent.as_heights(ps, [0.0, 0.0])
    with pytest.raises(ValueError):
        tent.tent_eval(ps, y, [np.inf, 0.0])
    with pytest.raises(ValueError):
        tent.as_heights(ps, [0.0, 0.0, 0.0, np.nan])


def test_density_unscaled_matches_exp():
    ps = unit_interval()
    y = np.array([0.0, -2.0])
    val = tent.tent_eval(ps, y, [0.5])
    assert tent.density_unscaled(ps, y, [0.5]) == pytest.approx(np.exp(val))


def test_sparsify_degenerate_weights():
    # Flat heights over the square make every convex combination optimal; a
    # dense optimal weight vector must still come back with small support.
    ps = unit_square()
    y = np.zeros(4)
    alpha = np.full(4, 0.25)
    b = np.array([0.5, 0.5, 1.0])
    reduced = tent._sparsify(ps, y, b, alpha, 0.0)
    support = np.flatnonzero(reduced > tent.SUPPORT_TOL)
    assert support.size <= 3
    assert reduced.sum() == pytest.approx(1.0, abs=1e-9)
    np.testing.assert_allclose(ps.points @ reduced, [0.5, 0.5], atol=1e-9)


def test_statistic_invariants_random():
    rng = np.random.default_rng(7)
    for trial in range(40):
        d = int(rng.integers(1, 4))
        n = int(rng.integers(d + 1, d + 6))
        ps = random_point_set(rng, d, n)
        y = rng.normal(size=n)
        # Interior query: random convex combination of the poles.
        w = rng.dirichlet(np.ones(n))
        x = ps.points @ w
        stat = tent.poly_stat(ps, y, x)
        assert stat.support_size <= d + 1
        dense = stat.dense()
        assert np.all(dense >= 0.0)
        assert dense.sum() == pytest.approx(1.0, abs=1e-8)
        np.testing.assert_allclose(ps.points @ dense, x, atol=1e-7)
        assert stat.dot(y) == pytest.approx(tent.tent_eval(ps, y, x), abs=1e-7)


def test_tent_dominates_pole_heights():
    # The tent is the least concave majorant, so it sits at or above every
    # pole height at that pole.
    rng = np.random.default_rng(11)
    for trial in range(20):
        d = int(rng.integers(1, 4))
        n = int(rng.integers(d + 1, d + 6))
        ps = random_point_set(rng, d, n)
        y = rng.normal(size=n)
        for i in range(n):
            val = tent.tent_eval(ps, y, ps.points[:, i])
            assert val >= y[i] - 1e-8


def test_tent_is_concave_along_segments():
    rng = np.random.default_rng(13)
    ps = random_point_set(rng, 2, 6)
    y = rng.normal(size=6)
    for trial in range(30):
        w1 = rng.dirichlet(np.ones(6))
        w2 = rng.dirichlet(np.ones(6))
        x1 = ps.points @ w1
        x2 = ps.points @ w2
        mid = 0.5 * (x1 + x2)
        v1 = tent.tent_eval(ps, y, x1)
        v2 = tent.tent_eval(ps, y, x2)
        vm = tent.tent_eval(ps, y, mid)
        assert vm >= 0.5 * (v1 + v2) - 1e-8
