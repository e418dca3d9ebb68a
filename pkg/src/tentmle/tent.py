"""Tent functions over a finite point set, evaluated through linear programs.

A tent function is the smallest concave function interpolating prescribed
heights at a fixed set of poles, and minus infinity outside their convex
hull. Its value at a query point is the optimum of a small LP over convex
combination weights, and the weights themselves act as a sparse sufficient
statistic for the associated exponential family density exp(tent).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import lp
from .errors import (
    DegenerateGeometry,
    DimensionMismatch,
    NumericalFailure,
    OutsideHull,
)

# Entries of a combination weight vector below this are treated as zero.
SUPPORT_TOL = 1e-9
# Agreement required between a statistic and the quantities it certifies.
STAT_TOL = 1e-8


class PointSet:
    """An ordered collection of points spanning a full-dimensional hull.

    Points are stored as columns of a ``(dim, count)`` array. Construction
    fails with :class:`DegenerateGeometry` when the affine hull of the
    columns is lower-dimensional, which keeps every downstream operation on
    solid ground: hulls have interior, covariances can be rounded, and the
    log-partition integral is over a genuine d-dimensional body.
    """

    __slots__ = ("_points", "_eq")

    def __init__(self, points):
        pts = np.asarray(points, dtype=float)
        if pts.ndim != 2:
            raise DimensionMismatch("points must form a (dim, count) array")
        if not np.all(np.isfinite(pts)):
            raise ValueError("points contain non-finite coordinates")
        d, n = pts.shape
        if d < 1:
            raise DimensionMismatch("ambient dimension must be at least 1")
        if n < d + 1:
            raise DegenerateGeometry(
                f"{n} points cannot span a {d}-dimensional hull; need at least {d + 1}"
            )
        centered = pts - pts[:, :1]
        if np.linalg.matrix_rank(centered) < d:
            raise DegenerateGeometry(
                "points lie in a lower-dimensional affine subspace"
            )
        self._points = pts
        # Equality system [X; 1] shared by every hull membership LP.
        self._eq = np.vstack([pts, np.ones(n)])

    @classmethod
    def from_rows(cls, rows) -> "PointSet":
        """Build from an array of shape (count, dim), one point per row."""
        rows = np.asarray(rows, dtype=float)
        if rows.ndim != 2:
            raise DimensionMismatch("row data must be two-dimensional")
        return cls(rows.T)

    @property
    def dim(self) -> int:
        return self._points.shape[0]

    @property
    def count(self) -> int:
        return self._points.shape[1]

    @property
    def points(self) -> np.ndarray:
        return self._points

    def barycenter(self) -> np.ndarray:
        return self._points.mean(axis=1)

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        return self._points.min(axis=1), self._points.max(axis=1)

    def __repr__(self) -> str:
        return f"PointSet(dim={self.dim}, count={self.count})"


def as_heights(ps: PointSet, heights) -> np.ndarray:
    """Validate a height vector against ``ps`` and return it as an array."""
    y = np.atleast_1d(np.asarray(heights, dtype=float))
    if y.shape != (ps.count,):
        raise DimensionMismatch(
            f"expected {ps.count} heights, got {y.shape}"
        )
    if not np.all(np.isfinite(y)):
        raise ValueError("heights must be finite")
    return y


@dataclass(frozen=True)
class PolyStat:
    """Sparse convex-combination weights expressing a point over the poles.

    ``indices`` and ``values`` describe the nonzero weights; ``length`` is
    the pole count. At most dim+1 weights are nonzero and they sum to one.
    """

    length: int
    indices: np.ndarray
    values: np.ndarray

    def dense(self) -> np.ndarray:
        out = np.zeros(self.length)
        out[self.indices] = self.values
        return out

    @property
    def support_size(self) -> int:
        return len(self.indices)

    def dot(self, heights) -> float:
        heights = np.asarray(heights, dtype=float)
        return float(self.values @ heights[self.indices])


def _query_rhs(ps: PointSet, x) -> np.ndarray:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.shape != (ps.dim,):
        raise DimensionMismatch(f"query point has shape {x.shape}, expected ({ps.dim},)")
    if not np.all(np.isfinite(x)):
        raise ValueError("query point must be finite")
    b = np.empty(ps.dim + 1)
    b[: ps.dim] = x
    b[-1] = 1.0
    return b


def in_hull(ps: PointSet, x) -> bool:
    """Whether ``x`` lies in the convex hull of the poles (within LP tolerance)."""
    b = _query_rhs(ps, x)
    status, *_ = lp._solve_raw(ps._eq, b, np.zeros(ps.count))
    return status == lp.OPTIMAL


def tent_eval(ps: PointSet, heights, x) -> float:
    """Tent function value at ``x``; ``-inf`` outside the hull.

    The value is the best height achievable by a convex combination of poles
    that reproduces ``x``, i.e. the upper concave interpolation of the pole
    heights evaluated at the query.
    """
    y = as_heights(ps, heights)
    b = _query_rhs(ps, x)
    status, _, value, _, _ = lp._solve_raw(ps._eq, b, y)
    if status != lp.OPTIMAL:
        return -np.inf
    return value


def density_unscaled(ps: PointSet, heights, x) -> float:
    """exp of the tent value: the unnormalized density at ``x`` (0 outside)."""
    return float(np.exp(tent_eval(ps, heights, x)))


def poly_stat(ps: PointSet, heights, x) -> PolyStat:
    """Sufficient statistic at ``x``: sparse weights certifying the tent value.

    Solves the tent evaluation LP and returns its optimal basic solution. If
    a degenerate optimum carries more than dim+1 nonzero weights, columns are
    forbidden one at a time (lowest index first, falling back to scanning the
    rest of the support) and the LP re-solved until the support is small
    enough, never giving up optimality.
    """
    y = as_heights(ps, heights)
    b = _query_rhs(ps, x)
    status, alpha, value, _, _ = lp._solve_raw(ps._eq, b, y)
    if status != lp.OPTIMAL:
        raise OutsideHull(f"point {np.asarray(x)} is outside the hull")

    support = np.flatnonzero(alpha > SUPPORT_TOL)
    if support.size > ps.dim + 1:
        alpha = _sparsify(ps, y, b, alpha, value)
        support = np.flatnonzero(alpha > SUPPORT_TOL)

    values = alpha[support]
    stat = PolyStat(ps.count, support, values)
    total = float(values.sum())
    if abs(total - 1.0) > STAT_TOL:
        raise NumericalFailure(f"statistic weights sum to {total}, not 1")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    recon = ps.points[:, support] @ values
    if np.max(np.abs(recon - x)) > STAT_TOL * (1.0 + float(np.max(np.abs(x)))):
        raise NumericalFailure("statistic fails to reproduce the query point")
    if abs(stat.dot(y) - value) > STAT_TOL * (1.0 + abs(value)):
        raise NumericalFailure("statistic value drifted from the tent value")
    return stat


def _sparsify(ps: PointSet, y, b, alpha, value) -> np.ndarray:
    """Reduce an optimal weight vector to a basic one of support <= dim+1."""
    prob = lp.LinearProgram(y, ps._eq, b)
    tol = STAT_TOL * (1.0 + abs(value))
    forbidden: set[int] = set()
    while True:
        support = np.flatnonzero(alpha > SUPPORT_TOL)
        if support.size <= ps.dim + 1:
            return alpha
        progressed = False
        for j in support:
            probe = lp.fixed_basis_resolve(prob, forbidden | {int(j)})
            if probe.is_optimal and abs(probe.value - value) <= tol:
                alpha = probe.solution
                forbidden.add(int(j))
                progressed = True
                break
        if not progressed:
            raise NumericalFailure(
                "could not sparsify a degenerate statistic without losing value"
            )
