"""Normalizing-constant estimation for tent densities.

Two routes are provided. A Monte Carlo route slices the region under the
density into geometrically spaced level sets and estimates their volumes
by rejection from the bounding box; it works in any dimension and carries
an explicit additive error bound on the log partition. An exact quadrature
route integrates the piecewise log-linear density in closed form for one-
and two-dimensional point sets; besides the partition value it returns the
expectation of the convex-weight statistic, which the fitting code uses as
a reference gradient.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateChord,
    NumericalFailure,
    OutsideHull,
    UnsupportedDimension,
    VanishingLevelSet,
)
from .sampling import (
    Chord,
    LineTent,
    _envelope_1d,
    _walk_chord,
    chord_range,
    segment_mass,
    segment_masses,
)
from .tent import PointSet, as_heights, poly_stat, tent_eval

# Default geometric factor in the truncation depth; callers with a tighter
# bound on the hull may lower it.
HULL_CONSTANT = 8.0

# Switch point between the closed-form first moment and its series; below
# this slope the closed form loses about six digits to cancellation.
_MOMENT_SERIES_CUTOFF = 1e-3

# Outer quadrature: nested Gauss-Legendre panels accepted at this relative
# agreement, bisected otherwise.
_PANEL_TOL = 1e-8
_PANEL_ABS_FLOOR = 1e-9
_MAX_PANELS = 10_000

_GL_COARSE = np.polynomial.legendre.leggauss(16)
_GL_FINE = np.polynomial.legendre.leggauss(32)


@dataclass(frozen=True)
class SliceEstimate:
    """Monte Carlo log-partition estimate with its error bookkeeping.

    ``additive_error`` bounds, at the requested confidence, the gap between
    ``log_partition`` and the true value: the slicing bias plus a Hoeffding
    term for the pool average. ``truncation_depth`` is the log-density range
    that the slices cover below the maximum.
    """

    log_partition: float
    additive_error: float
    slice_count: int
    truncation_depth: float

    def __post_init__(self):
        if self.slice_count < 1:
            raise ValueError("slice count must be at least one")
        if not self.additive_error > 0.0:
            raise ValueError("additive error must be positive")


def truncation_depth(epsilon: float, dim: int, hull_constant: float = HULL_CONSTANT) -> float:
    """How far below its maximum the log density must be sliced.

    Mass below the returned depth contributes at most ``epsilon / 2`` of the
    total, so slicing can stop there. Grows only logarithmically with the
    accuracy and near-linearly with the dimension.
    """
    if not 0.0 < epsilon <= 0.1:
        raise ValueError("epsilon must lie in (0, 0.1]")
    if dim < 1:
        raise ValueError("dimension must be at least one")
    if not hull_constant > 0.0:
        raise ValueError("hull constant must be positive")
    return 2.0 * math.log(2.0 / epsilon) + dim * math.log(hull_constant * dim)


def level_set_volume(
    rng: np.random.Generator,
    point_set: PointSet,
    heights,
    level: float,
    rel_err: float = 0.05,
    confidence: float = 0.95,
    *,
    max_draws: int = 200_000,
    pilot: int = 1024,
) -> float:
    """Volume of the superlevel set ``{x : tent(x) >= level}`` by rejection.

    Draws uniformly from the bounding box until a Hoeffding bound certifies
    the requested relative error at the requested confidence, or the draw
    budget runs out (the running estimate is returned in that case). Raises
    :class:`VanishingLevelSet` when the level exceeds the tent maximum or no
    hit is found within the budget.
    """
    y = as_heights(point_set, heights)
    if not math.isfinite(level):
        raise ValueError("level must be finite")
    if not (rel_err > 0.0 and 0.0 < confidence < 1.0):
        raise ValueError("need rel_err > 0 and confidence in (0, 1)")
    if max_draws < 1 or pilot < 1:
        raise ValueError("draw counts must be positive")
    if level > float(y.max()):
        raise VanishingLevelSet("level lies above the tent maximum")
    lo, hi = point_set.bounding_box()
    box_volume = float(np.prod(hi - lo))
    log_conf = math.log(2.0 / (1.0 - confidence))
    hits = 0
    draws = 0
    batch = min(pilot, max_draws)
    while True:
        block = lo + (hi - lo) * rng.random((batch, point_set.dim))
        for row in block:
            # Counts hull membership too: the tent is -inf outside.
            if tent_eval(point_set, y, row) >= level - 1e-9:
                hits += 1
        draws += batch
        if hits == 0:
            if draws >= max_draws:
                raise VanishingLevelSet("no bounding-box draw reached the level")
            batch = min(max_draws - draws, 4 * draws)
            continue
        p_hat = hits / draws
        needed = math.ceil(log_conf / (2.0 * (rel_err * p_hat) ** 2))
        target = min(needed, max_draws)
        if draws >= target:
            return box_volume * hits / draws
        batch = target - draws


def log_partition_sliced(
    rng: np.random.Generator,
    point_set: PointSet,
    heights,
    epsilon: float = 0.1,
    *,
    confidence: float = 0.95,
    pool_size: int = 20_000,
    hull_constant: float = HULL_CONSTANT,
) -> SliceEstimate:
    """Log of the tent density's normalizing integral, by level-set slicing.

    The integral is written as a sum over level sets at geometrically spaced
    density thresholds ``q^i`` with ``q = 1 - epsilon/2``, truncated once the
    discarded tail is provably below ``epsilon/2`` of the total. All slice
    volumes are estimated from one shared pool of bounding-box draws: each
    draw contributes the telescoped weight of every slice containing it, so
    the whole sum is a single sample mean.
    """
    y = as_heights(point_set, heights)
    depth = truncation_depth(epsilon, point_set.dim, hull_constant)
    if not 0.0 < confidence < 1.0:
        raise ValueError("confidence must lie in (0, 1)")
    if pool_size < 2:
        raise ValueError("pool size must be at least two")
    q = 1.0 - epsilon / 2.0
    neg_log_q = -math.log(q)
    top = math.ceil(depth / neg_log_q)
    tail = q ** (top + 1)
    h_max = float(y.max())
    lo, hi = point_set.bounding_box()
    box_volume = float(np.prod(hi - lo))
    phi_sum = 0.0
    block = lo + (hi - lo) * rng.random((pool_size, point_set.dim))
    for row in block:
        h = tent_eval(point_set, y, row)
        if h == -np.inf:
            continue
        first = max(0, math.ceil((h_max - h) / neg_log_q))
        if first > top:
            continue
        phi_sum += q**first - tail
    phi_mean = phi_sum / pool_size
    if phi_mean <= 0.0:
        raise VanishingLevelSet("no bounding-box draw landed in any slice")
    hoeffding = math.sqrt(math.log(2.0 / (1.0 - confidence)) / (2.0 * pool_size))
    return SliceEstimate(
        log_partition=math.log(box_volume) + h_max + math.log(phi_mean),
        additive_error=epsilon + hoeffding / phi_mean,
        slice_count=top + 1,
        truncation_depth=depth,
    )


def _first_moment(length: float, h0: float, h1: float) -> float:
    """Integral of ``(t / length) * exp(h(t))`` over one linear piece."""
    delta = h1 - h0
    if abs(delta) <= _MOMENT_SERIES_CUTOFF:
        poly = 0.5 + delta * (1.0 / 3.0 + delta * (0.125 + delta * (1.0 / 30.0 + delta / 144.0)))
        return length * math.exp(h0) * poly
    return length * (math.exp(h1) * (delta - 1.0) + math.exp(h0)) / (delta * delta)


def _first_moments(lengths: np.ndarray, h0: np.ndarray, h1: np.ndarray) -> np.ndarray:
    """Vectorized :func:`_first_moment`."""
    delta = h1 - h0
    small = np.abs(delta) <= _MOMENT_SERIES_CUTOFF
    safe = np.where(small, 1.0, delta)
    closed = lengths * (np.exp(h1) * (delta - 1.0) + np.exp(h0)) / (safe * safe)
    poly = 0.5 + delta * (1.0 / 3.0 + delta * (0.125 + delta * (1.0 / 30.0 + delta / 144.0)))
    series = lengths * np.exp(h0) * poly
    return np.where(small, series, closed)


def _face_weights(ps: PointSet, support: np.ndarray, x: np.ndarray):
    """Affine weights over the given poles reproducing ``x``, or None.

    The weights may be negative; on a face whose poles all attain the tent's
    local affine function, any affine combination reproduces the tent value,
    so signed weights are as good as convex ones for moment integration.
    """
    cols = np.vstack([ps.points[:, support], np.ones(len(support))])
    rhs = np.append(x, 1.0)
    sol = np.linalg.lstsq(cols, rhs, rcond=None)[0]
    if not np.all(np.isfinite(sol)):
        return None
    if np.max(np.abs(cols @ sol - rhs)) > 1e-7 * (1.0 + np.max(np.abs(rhs))):
        return None
    out = np.zeros(ps.count)
    out[support] = sol
    return out


def _chord_moments(ps: PointSet, y: np.ndarray, chord: Chord, shift: float) -> np.ndarray:
    """Mass and per-pole statistic moments of ``exp(tent - shift)`` along a chord.

    Returns a vector of length ``count + 1``: the chord's total mass first,
    then the unnormalized integral of each pole's convex weight. Within one
    linearity cell the weight statistic is affine in position, so it equals
    the interpolation between its endpoint values and integrates against the
    exponential in closed form.
    """
    breaks, cell_heights, supports, end_weights = _walk_chord(ps, y, chord)
    out = np.zeros(1 + ps.count)
    for k, support in enumerate(supports):
        t0, t1 = breaks[k], breaks[k + 1]
        length = t1 - t0
        h0 = cell_heights[k] - shift
        h1 = cell_heights[k + 1] - shift
        m0 = segment_mass(length, h0, h1)
        m1 = _first_moment(length, h0, h1)
        w_end = np.zeros(ps.count)
        w_end[support] = end_weights[k]
        w_start = _face_weights(ps, support, chord.point_at(t0))
        if w_start is None:
            probe = chord.point_at(t0 + 1e-7 * length)
            w_start = poly_stat(ps, y, probe).dense()
        out[0] += m0
        out[1:] += w_start * (m0 - m1) + w_end * m1
    return out


def _moments_line(ps: PointSet, y: np.ndarray) -> tuple[float, np.ndarray]:
    """Exact log partition and statistic expectation for a 1-d point set."""
    hull_x, hull_h, hull_idx = _envelope_1d(ps, y)
    h_max = float(y.max())
    m0 = segment_masses(LineTent(hull_x, hull_h - h_max))
    m1 = _first_moments(np.diff(hull_x), hull_h[:-1] - h_max, hull_h[1:] - h_max)
    moments = np.zeros(ps.count)
    np.add.at(moments, hull_idx[:-1], m0 - m1)
    np.add.at(moments, hull_idx[1:], m1)
    mass = float(m0.sum())
    return h_max + math.log(mass), moments / mass


def _moments_planar(ps: PointSet, y: np.ndarray) -> tuple[float, np.ndarray]:
    """Log partition and statistic expectation for a 2-d point set.

    Integrates exactly along vertical chords and adaptively across: between
    consecutive pole abscissae the chord integral is an analytic function of
    the abscissa (crossing a vertical edge of the tent's subdivision would
    require a pole at that abscissa), so nested Gauss panels converge fast.
    """
    h_max = float(y.max())
    lo, hi = ps.bounding_box()
    base_y = 0.5 * (lo[1] + hi[1])
    span = hi[0] - lo[0]
    direction = np.array([0.0, 1.0])

    def column(x1: float) -> np.ndarray:
        for shift in (0.0, 1e-9 * span):
            base = np.array([x1 + shift, base_y])
            try:
                t_lo, t_hi = chord_range(ps, base, direction)
                chord = Chord(base, direction, t_lo, t_hi)
                return _chord_moments(ps, y, chord, h_max)
            except (DegenerateChord, OutsideHull):
                continue
        raise NumericalFailure("vertical chord integration failed inside a panel")

    coarse_x, coarse_w = _GL_COARSE
    fine_x, fine_w = _GL_FINE
    total = np.zeros(1 + ps.count)
    abscissae = np.unique(ps.points[0])
    stack = [(a, b) for a, b in zip(abscissae[:-1], abscissae[1:])]
    panels = 0
    while stack:
        a, b = stack.pop()
        panels += 1
        if panels > _MAX_PANELS:
            raise NumericalFailure("outer quadrature did not converge")
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        coarse = half * sum(w * column(mid + half * x) for x, w in zip(coarse_x, coarse_w))
        fine = half * sum(w * column(mid + half * x) for x, w in zip(fine_x, fine_w))
        err = float(np.max(np.abs(fine - coarse)))
        if err <= _PANEL_ABS_FLOOR + _PANEL_TOL * float(np.max(np.abs(fine))):
            total += fine
        else:
            stack.append((a, mid))
            stack.append((mid, b))
    mass = total[0]
    if not mass > 0.0:
        raise NumericalFailure("planar quadrature produced a nonpositive mass")
    return h_max + math.log(mass), total[1:] / mass


def tent_moments_quadrature(point_set: PointSet, heights) -> tuple[float, np.ndarray]:
    """Log partition and statistic expectation in one pass (dims 1 and 2).

    The expectation is taken under the normalized tent density; entry ``j``
    is the mean convex weight the density places on pole ``j``, which is the
    gradient of the log partition in pole height ``j`` wherever the optimal
    weights are almost-everywhere unique.
    """
    y = as_heights(point_set, heights)
    if point_set.dim == 1:
        return _moments_line(point_set, y)
    if point_set.dim == 2:
        return _moments_planar(point_set, y)
    raise UnsupportedDimension("exact quadrature covers dimensions 1 and 2 only")


def log_partition_quadrature(point_set: PointSet, heights) -> float:
    """Exact (dim 1) or high-accuracy (dim 2) log normalizing integral."""
    return tent_moments_quadrature(point_set, heights)[0]


def statistic_expectation_quadrature(point_set: PointSet, heights) -> np.ndarray:
    """Expected convex-weight statistic under the normalized tent density."""
    return tent_moments_quadrature(point_set, heights)[1]
