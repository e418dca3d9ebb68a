"""Sampling machinery for tent densities.

The exponential of a tent function restricted to a line is piecewise
exponential-linear, so a chord admits an exact sampler: walk the chord's
linearity cells to recover the restricted one-dimensional tent, pick a
segment with probability proportional to its closed-form mass, and invert
the segment CDF. Hit-and-run iterates that along random directions,
optionally premultiplied by a rounding map so elongated hulls mix well.
The module also provides covariance-based isotropic rounding and a
separation oracle for superlevel sets of the density.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import lp
from .errors import (
    DegenerateChord,
    DimensionMismatch,
    NumericalFailure,
    OutsideHull,
    RankDeficient,
    StuckChain,
)
from .tent import PointSet, as_heights, poly_stat, tent_eval

# Treat exponent differences below this as flat when integrating/sampling.
FLAT_TOL = 1e-8
# Fraction of chord length used to nudge probes off cell boundaries. The
# last escalation rescues chords passing so close to a hull vertex that a
# pole's weight at the finer probes falls below the support filter.
NUDGE_FRACTION = 1e-7
RETRY_NUDGE_FRACTION = 1e-5
FINAL_NUDGE_FRACTION = 1e-2
# Consecutive degenerate directions tolerated before a chain gives up.
MAX_REDRAWS = 100


@dataclass(frozen=True)
class Chord:
    """A maximal segment of a line inside the hull.

    Points on the chord are ``origin + t * direction`` for ``t`` in
    ``[t_lo, t_hi]``; the direction must be a unit vector.
    """

    origin: np.ndarray
    direction: np.ndarray
    t_lo: float
    t_hi: float

    def __post_init__(self):
        origin = np.atleast_1d(np.asarray(self.origin, dtype=float))
        direction = np.atleast_1d(np.asarray(self.direction, dtype=float))
        if origin.shape != direction.shape or origin.ndim != 1:
            raise DimensionMismatch("origin and direction must be vectors of equal length")
        if not (np.all(np.isfinite(origin)) and np.all(np.isfinite(direction))):
            raise ValueError("chord data must be finite")
        if abs(float(direction @ direction) - 1.0) > 2e-10:
            raise ValueError("direction must be a unit vector")
        if not (math.isfinite(self.t_lo) and math.isfinite(self.t_hi)):
            raise ValueError("chord parameters must be finite")
        if not self.t_lo < self.t_hi:
            raise DegenerateChord("chord has no interior")
        object.__setattr__(self, "origin", origin)
        object.__setattr__(self, "direction", direction)

    @property
    def length(self) -> float:
        return self.t_hi - self.t_lo

    def point_at(self, t: float) -> np.ndarray:
        return self.origin + t * self.direction


@dataclass(frozen=True)
class LineTent:
    """A one-dimensional tent: piecewise-linear log density along a chord.

    ``log_heights[i]`` is the log density at parameter ``breakpoints[i]``;
    between breakpoints the log density is linear.
    """

    breakpoints: np.ndarray
    log_heights: np.ndarray

    def __post_init__(self):
        bp = np.atleast_1d(np.asarray(self.breakpoints, dtype=float))
        lh = np.atleast_1d(np.asarray(self.log_heights, dtype=float))
        if bp.ndim != 1 or bp.shape != lh.shape or bp.size < 2:
            raise ValueError("need matching breakpoint and height vectors, length >= 2")
        if not (np.all(np.isfinite(bp)) and np.all(np.isfinite(lh))):
            raise ValueError("line tent data must be finite")
        if np.any(np.diff(bp) <= 0.0):
            raise ValueError("breakpoints must be strictly increasing")
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "log_heights", lh)

    @property
    def segment_count(self) -> int:
        return self.breakpoints.size - 1


@dataclass(frozen=True)
class AffineMap:
    """Invertible linear map with an offset, used as a rounding transform.

    ``converged`` records whether the rounding loop that produced the map
    met its eigenvalue-ratio target; the map is still usable either way.
    """

    matrix: np.ndarray
    offset: np.ndarray
    converged: bool = True
    log_abs_det: float = field(init=False)

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=float)
        off = np.atleast_1d(np.asarray(self.offset, dtype=float))
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise DimensionMismatch("map matrix must be square")
        if off.shape != (mat.shape[0],):
            raise DimensionMismatch("offset length must match the matrix size")
        if not (np.all(np.isfinite(mat)) and np.all(np.isfinite(off))):
            raise ValueError("map data must be finite")
        sign, logdet = np.linalg.slogdet(mat)
        if sign == 0 or not math.isfinite(logdet):
            raise ValueError("map matrix must be invertible")
        object.__setattr__(self, "matrix", mat)
        object.__setattr__(self, "offset", off)
        object.__setattr__(self, "log_abs_det", float(logdet))

    @classmethod
    def identity(cls, dim: int) -> "AffineMap":
        return cls(np.eye(dim), np.zeros(dim))


@dataclass(frozen=True)
class Hyperplane:
    """Oriented hyperplane ``{x : <normal, x> = offset}`` with unit normal."""

    normal: np.ndarray
    offset: float

    def signed_distance(self, x) -> float:
        return float(self.normal @ np.asarray(x, dtype=float)) - self.offset


def chord_range(ps: PointSet, x0, theta) -> tuple[float, float]:
    """Extreme parameters t with ``x0 + t*theta`` in the hull.

    Two LPs over convex-combination weights and a sign-split free parameter
    give the exact entry and exit values. Raises :class:`OutsideHull` when
    ``x0`` itself admits no representation.
    """
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    if x0.shape != (ps.dim,) or theta.shape != (ps.dim,):
        raise DimensionMismatch("query point and direction must match the hull dimension")
    if not (np.all(np.isfinite(x0)) and np.all(np.isfinite(theta))):
        raise ValueError("query point and direction must be finite")
    if float(theta @ theta) <= 0.0:
        raise ValueError("direction must be nonzero")

    n = ps.count
    a = np.zeros((ps.dim + 1, n + 2))
    a[: ps.dim, :n] = ps.points
    a[ps.dim, :n] = 1.0
    a[: ps.dim, n] = -theta
    a[: ps.dim, n + 1] = theta
    b = np.append(x0, 1.0)
    c = np.zeros(n + 2)
    c[n] = 1.0
    c[n + 1] = -1.0

    status_hi, _, t_hi, _, _ = lp._solve_raw(a, b, c)
    if status_hi == lp.INFEASIBLE:
        raise OutsideHull("line base point is outside the hull")
    status_lo, _, neg_t_lo, _, _ = lp._solve_raw(a, b, -c)
    if status_hi != lp.OPTIMAL or status_lo != lp.OPTIMAL:
        raise NumericalFailure("chord extent LP did not reach an optimum")
    return -neg_t_lo, t_hi


def chord_through(ps: PointSet, x0, theta) -> Chord:
    """Normalize a direction and build the maximal chord through ``x0``."""
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    norm = float(np.linalg.norm(theta))
    if norm <= 0.0 or not math.isfinite(norm):
        raise ValueError("direction must be nonzero and finite")
    unit = theta / norm
    t_lo, t_hi = chord_range(ps, x0, unit)
    return Chord(np.asarray(x0, dtype=float), unit, t_lo, t_hi)


def _face_max_t(ps: PointSet, chord: Chord, support) -> tuple[float, np.ndarray]:
    """Largest t keeping the chord point inside the hull of the given poles."""
    k = len(support)
    cols = ps.points[:, support]
    a = np.zeros((ps.dim + 1, k + 2))
    a[: ps.dim, :k] = cols
    a[ps.dim, :k] = 1.0
    a[: ps.dim, k] = -chord.direction
    a[: ps.dim, k + 1] = chord.direction
    b = np.append(chord.origin, 1.0)
    c = np.zeros(k + 2)
    c[k] = 1.0
    c[k + 1] = -1.0
    status, sol, value, _, _ = lp._solve_raw(a, b, c)
    if status != lp.OPTIMAL:
        raise NumericalFailure("cell-boundary LP failed on an identified support")
    return value, sol[:k]


def _face_height(ps: PointSet, heights, support, x) -> float | None:
    """Height of the affine piece spanned by ``support`` at ``x``, if defined."""
    cols = ps._eq[:, support]
    rhs = np.append(np.asarray(x, dtype=float), 1.0)
    w, *_ = np.linalg.lstsq(cols, rhs, rcond=None)
    if np.max(np.abs(cols @ w - rhs)) > 1e-7 * (1.0 + float(np.max(np.abs(rhs)))):
        return None
    return float(heights[support] @ w)


def _walk_chord(ps: PointSet, y: np.ndarray, chord: Chord):
    """Cell walk along a chord; shared core of the restriction builders.

    Returns breakpoints, log heights at the breakpoints, and for each
    segment the active pole indices plus the convex weights representing
    the segment's right endpoint over those poles.
    """
    length = chord.length
    end_tol = 1e-9 * length

    breaks = [chord.t_lo]
    heights_out = [0.0]
    supports: list[np.ndarray] = []
    end_weights: list[np.ndarray] = []
    t = chord.t_lo
    for _ in range(ps.count):
        stat = None
        advance = None
        for frac in (NUDGE_FRACTION, RETRY_NUDGE_FRACTION, FINAL_NUDGE_FRACTION):
            probe_t = t + frac * length
            if probe_t >= chord.t_hi:
                probe_t = 0.5 * (t + chord.t_hi)
            try:
                stat = poly_stat(ps, y, chord.point_at(probe_t))
            except OutsideHull:
                continue
            t_star, alpha = _face_max_t(ps, chord, stat.indices)
            t_star = min(t_star, chord.t_hi)
            if t_star > t + end_tol:
                advance = (t_star, alpha)
                break
        if advance is None:
            raise DegenerateChord("chord walk stalled in a lower-dimensional face")
        t_star, alpha = advance
        breaks.append(t_star)
        heights_out.append(float(y[stat.indices] @ alpha))
        supports.append(stat.indices)
        end_weights.append(alpha)
        t = t_star
        if t >= chord.t_hi - end_tol:
            break
    else:
        raise DegenerateChord("chord crossed more linearity cells than poles")

    h_lo = _face_height(ps, y, supports[0], chord.point_at(chord.t_lo))
    if h_lo is None:
        h_lo = tent_eval(ps, y, chord.point_at(chord.t_lo + end_tol))
        if h_lo == -np.inf:
            raise NumericalFailure("could not evaluate the tent at the chord start")
    heights_out[0] = min(h_lo, float(y.max()))
    return breaks, heights_out, supports, end_weights


def restrict_to_line(ps: PointSet, heights, chord: Chord) -> LineTent:
    """One-dimensional tent obtained by restricting the tent to a chord.

    Walks the chord cell by cell: a probe nudged slightly past the current
    breakpoint identifies the active poles, then an LP pushes t as far as
    the hull of those poles allows. Each step is guaranteed to advance by
    at least the nudge, and a restricted tent has at most one linear piece
    per pole, so more than ``count`` steps signals a degenerate chord.
    """
    y = as_heights(ps, heights)
    if chord.origin.shape != (ps.dim,):
        raise DimensionMismatch("chord dimension does not match the point set")
    breaks, heights_out, _, _ = _walk_chord(ps, y, chord)
    return LineTent(np.asarray(breaks), np.asarray(heights_out))


def _envelope_1d(ps: PointSet, y: np.ndarray):
    """Upper concave envelope of (position, height) pairs via monotone chain.

    Returns the envelope's x values, heights, and the pole index of each
    envelope vertex.
    """
    xs = ps.points[0]
    order = np.argsort(xs, kind="stable")
    hull_x: list[float] = []
    hull_y: list[float] = []
    hull_i: list[int] = []
    for i in order:
        xi, yi = float(xs[i]), float(y[i])
        if hull_x and xi == hull_x[-1]:
            if yi > hull_y[-1]:
                hull_y[-1] = yi
                hull_i[-1] = int(i)
            continue
        while len(hull_x) >= 2:
            # Pop the middle point when it does not rise above the segment
            # joining its neighbours.
            x0, y0 = hull_x[-2], hull_y[-2]
            x1, y1 = hull_x[-1], hull_y[-1]
            if (x1 - x0) * (yi - y0) - (y1 - y0) * (xi - x0) >= 0.0:
                hull_x.pop()
                hull_y.pop()
                hull_i.pop()
            else:
                break
        hull_x.append(xi)
        hull_y.append(yi)
        hull_i.append(int(i))
    return np.asarray(hull_x), np.asarray(hull_y), np.asarray(hull_i)


def line_tent_1d(ps: PointSet, heights) -> LineTent:
    """Restricted tent for a one-dimensional point set, via the upper envelope.

    Equivalent to restricting along the only available direction but built
    directly with a monotone-chain scan, which is cheaper and serves as an
    independent cross-check of the LP-based chord walk.
    """
    if ps.dim != 1:
        raise DimensionMismatch("direct envelope construction needs dim == 1")
    y = as_heights(ps, heights)
    hull_x, hull_y, _ = _envelope_1d(ps, y)
    return LineTent(hull_x, hull_y)


def segment_mass(length: float, h0: float, h1: float) -> float:
    """Integral of exp over one linear piece of log density.

    Closed form ``length * |e^h0 - e^h1| / |h0 - h1|``, evaluated stably and
    replaced by its second-order expansion when the heights nearly agree.
    """
    if not (length > 0.0 and math.isfinite(length)):
        raise ValueError("segment length must be positive and finite")
    if not (math.isfinite(h0) and math.isfinite(h1)):
        raise ValueError("segment heights must be finite")
    delta = h1 - h0
    if abs(delta) <= FLAT_TOL:
        return length * math.exp(0.5 * (h0 + h1)) * (1.0 + delta * delta / 24.0)
    top = max(h0, h1)
    return length * math.exp(top) * (-math.expm1(-abs(delta))) / abs(delta)


def segment_masses(lt: LineTent) -> np.ndarray:
    """Vector of segment masses for a one-dimensional tent."""
    h = lt.log_heights
    lengths = np.diff(lt.breakpoints)
    delta = np.diff(h)
    adelta = np.abs(delta)
    top = np.maximum(h[:-1], h[1:])
    with np.errstate(divide="ignore", invalid="ignore"):
        sloped = lengths * np.exp(top) * (-np.expm1(-adelta)) / adelta
    flat = lengths * np.exp(0.5 * (h[:-1] + h[1:])) * (1.0 + delta * delta / 24.0)
    return np.where(adelta > FLAT_TOL, sloped, flat)


def _segment_quantile(lengths, deltas, u) -> np.ndarray:
    """Inverse CDF of density ∝ exp(delta * t / length) on [0, length]."""
    out = u * lengths
    neg = deltas < -FLAT_TOL
    if np.any(neg):
        d = deltas[neg]
        out[neg] = (lengths[neg] / d) * np.log1p(u[neg] * np.expm1(d))
    pos = deltas > FLAT_TOL
    if np.any(pos):
        # Mirror the negative-slope case to keep expm1 away from overflow.
        d = deltas[pos]
        out[pos] = lengths[pos] + (lengths[pos] / d) * np.log1p(
            (1.0 - u[pos]) * np.expm1(-d)
        )
    return np.clip(out, 0.0, lengths)


def sample_segment(rng, length: float, h0: float, h1: float) -> float:
    """Exact draw from density ∝ exp(h0 + (h1-h0) t / length) on [0, length]."""
    if not (length > 0.0 and math.isfinite(length)):
        raise ValueError("segment length must be positive and finite")
    if not (math.isfinite(h0) and math.isfinite(h1)):
        raise ValueError("segment heights must be finite")
    u = rng.random(1)
    t = _segment_quantile(np.array([length]), np.array([h1 - h0]), u)
    return float(t[0])


def sample_line_tent(rng, lt: LineTent, size=None, masses=None):
    """Exact draws from the density ∝ exp of a one-dimensional tent.

    Returns a scalar parameter when ``size`` is None, else an array of
    ``size`` draws. Precomputed segment masses may be passed to avoid
    recomputation in tight loops.
    """
    if masses is None:
        masses = segment_masses(lt)
    total = float(masses.sum())
    if not (total > 0.0 and math.isfinite(total)):
        raise NumericalFailure("line tent has no finite positive mass")
    probs = masses / total
    probs = probs / probs.sum()
    k = 1 if size is None else int(size)
    seg = rng.choice(probs.size, size=k, p=probs)
    u = rng.random(k)
    lengths = np.diff(lt.breakpoints)[seg]
    deltas = np.diff(lt.log_heights)[seg]
    t = lt.breakpoints[seg] + _segment_quantile(lengths, deltas, u)
    if size is None:
        return float(t[0])
    return t


def sample_line(rng, ps: PointSet, heights, chord: Chord) -> np.ndarray:
    """Exact draw from the tent density restricted to a chord."""
    lt = restrict_to_line(ps, heights, chord)
    t = sample_line_tent(rng, lt)
    return chord.point_at(t)


def default_chain_steps(n: int, d: int) -> int:
    """Default hit-and-run step budget for an n-pole, d-dimensional instance."""
    return max(500, 50 * n * d)


def hit_and_run(rng, ps: PointSet, heights, amap: AffineMap, x_start, steps: int) -> np.ndarray:
    """Run ``steps`` hit-and-run updates and return the final point.

    Directions are uniform in the space transformed by ``amap`` (the map's
    matrix applied to a uniform unit vector, then renormalized), and each
    update resamples the current point exactly along its chord. The start
    point must lie strictly inside the hull. Degenerate chords cause a
    direction redraw; too many consecutive redraws raise
    :class:`StuckChain`.
    """
    if steps < 1:
        raise ValueError("need at least one step")
    y = as_heights(ps, heights)
    x = np.array(np.atleast_1d(x_start), dtype=float)
    if x.shape != (ps.dim,):
        raise DimensionMismatch("start point dimension mismatch")
    if amap.matrix.shape[0] != ps.dim:
        raise DimensionMismatch("map dimension mismatch")
    done = 0
    redraws = 0
    while done < steps:
        z = rng.standard_normal(ps.dim)
        norm = float(np.linalg.norm(z))
        if norm < 1e-14:
            redraws += 1
            if redraws >= MAX_REDRAWS:
                raise StuckChain("could not draw a usable direction")
            continue
        direction = amap.matrix @ (z / norm)
        direction = direction / float(np.linalg.norm(direction))
        try:
            t_lo, t_hi = chord_range(ps, x, direction)
            chord = Chord(x, direction, t_lo, t_hi)
            lt = restrict_to_line(ps, y, chord)
        except DegenerateChord:
            redraws += 1
            if redraws >= MAX_REDRAWS:
                raise StuckChain("chain stuck on degenerate chords")
            continue
        redraws = 0
        t = sample_line_tent(rng, lt)
        # Keep strictly inside the hull so the next chord has interior.
        margin = 1e-12 * chord.length
        t = min(max(t, t_lo + margin), t_hi - margin)
        x = chord.point_at(t)
        done += 1
    return x


def sample_chain(
    rng,
    ps: PointSet,
    heights,
    amap: AffineMap,
    *,
    count: int,
    burn_in: int = 0,
    thin: int = 1,
    start=None,
) -> np.ndarray:
    """Collect ``count`` points from one hit-and-run chain, one per ``thin`` steps."""
    if count < 1:
        raise ValueError("need at least one sample")
    if thin < 1:
        raise ValueError("thinning interval must be at least 1")
    x = ps.barycenter() if start is None else np.asarray(start, dtype=float)
    if burn_in > 0:
        x = hit_and_run(rng, ps, heights, amap, x, burn_in)
    out = np.empty((count, ps.dim))
    for i in range(count):
        x = hit_and_run(rng, ps, heights, amap, x, thin)
        out[i] = x
    return out


def estimate_covariance(samples) -> tuple[np.ndarray, np.ndarray]:
    """Sample mean and unbiased covariance of row-stacked points."""
    arr = np.asarray(samples, dtype=float)
    if arr.ndim != 2:
        raise DimensionMismatch("samples must form a (count, dim) array")
    m, d = arr.shape
    if m < d + 1:
        raise RankDeficient(f"need at least {d + 1} samples, got {m}")
    mean = arr.mean(axis=0)
    centered = arr - mean
    cov = (centered.T @ centered) / (m - 1)
    eigs = np.linalg.eigvalsh(cov)
    if eigs[-1] <= 0.0 or eigs[0] <= 1e-12 * max(eigs[-1], 1e-300):
        raise RankDeficient("sample covariance is numerically singular")
    return mean, cov


def _psd_sqrt(mat: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh(mat)
    if vals[-1] <= 0.0 or vals[0] <= 1e-14 * vals[-1]:
        raise RankDeficient("covariance square root is numerically singular")
    return (vecs * np.sqrt(vals)) @ vecs.T


def round_to_isotropic(
    rng,
    ps: PointSet,
    heights,
    target_C: float,
    *,
    chain_steps: int | None = None,
    sample_count: int | None = None,
    max_rounds: int = 12,
) -> AffineMap:
    """Find a map under which the tent density is approximately isotropic.

    Alternates sampling with the current map and composing it with the
    square root of the observed covariance until the covariance eigenvalue
    ratio in the transformed space drops to ``target_C ** 2``. An infinite
    target disables rounding. If the loop hits ``max_rounds`` the best map
    found is returned with ``converged=False`` rather than raising.
    """
    y = as_heights(ps, heights)
    if math.isnan(target_C) or target_C <= 1.0:
        raise ValueError("target_C must exceed 1")
    if math.isinf(target_C):
        return AffineMap.identity(ps.dim)
    steps = default_chain_steps(ps.count, ps.dim) if chain_steps is None else chain_steps
    count = max(50 * ps.dim, 4 * (ps.dim + 1)) if sample_count is None else sample_count
    thin = max(1, steps // 100)

    matrix = np.eye(ps.dim)
    mean = ps.barycenter()
    x = ps.barycenter()
    best_ratio = np.inf
    best = (matrix, mean)
    target_sq = target_C * target_C
    for round_idx in range(max_rounds):
        burn = steps if round_idx == 0 else max(1, steps // 5)
        amap = AffineMap(matrix, mean)
        samples = sample_chain(
            rng, ps, y, amap, count=count, burn_in=burn, thin=thin, start=x
        )
        x = samples[-1]
        mean, cov = estimate_covariance(samples)
        half = np.linalg.solve(matrix, cov)
        cov_z = np.linalg.solve(matrix, half.T).T
        cov_z = 0.5 * (cov_z + cov_z.T)
        eigs = np.linalg.eigvalsh(cov_z)
        if eigs[0] <= 0.0:
            raise RankDeficient("transformed covariance lost positive definiteness")
        ratio = float(eigs[-1] / eigs[0])
        if ratio < best_ratio:
            best_ratio = ratio
            best = (matrix, mean)
        if ratio <= target_sq:
            return AffineMap(matrix, mean, converged=True)
        matrix = matrix @ _psd_sqrt(cov_z)
    return AffineMap(best[0], best[1], converged=False)


def level_set_separation(ps: PointSet, heights, z, delta: float):
    """Separate a point from a superlevel set of the tent density, if possible.

    The superlevel set collects points whose density is at least ``delta``
    times the density at the highest pole. Returns None when the query point
    ``z`` belongs to the set (or cannot be certified outside it), otherwise a
    :class:`Hyperplane` with ``z`` strictly on the positive side and the
    whole set on the other.

    The certificate comes from one LP: push along the ray from the highest
    pole toward ``z`` for as long as the ray stays in the hull at log height
    within ``log(delta)`` of the top. If the ray exits before reaching ``z``,
    the LP's dual prices define the separating hyperplane through the exit
    point.
    """
    y = as_heights(ps, heights)
    z = np.atleast_1d(np.asarray(z, dtype=float))
    if z.shape != (ps.dim,):
        raise DimensionMismatch("query point dimension mismatch")
    if not np.all(np.isfinite(z)):
        raise ValueError("query point must be finite")
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie strictly between 0 and 1")

    i_max = int(np.argmax(y))
    x_max = ps.points[:, i_max]
    y_max = float(y[i_max])
    ray = z - x_max
    scale = max(1.0, float(np.max(np.abs(z))), float(np.max(np.abs(x_max))))
    if float(np.max(np.abs(ray))) <= 1e-12 * scale:
        return None

    n, d = ps.count, ps.dim
    a = np.zeros((d + 2, n + 3))
    a[:d, :n] = ps.points
    a[:d, n] = -ray
    a[:d, n + 1] = ray
    a[d, :n] = 1.0
    a[d + 1, :n] = y
    a[d + 1, n + 2] = -1.0
    b = np.concatenate([x_max, [1.0, y_max + math.log(delta)]])
    c = np.zeros(n + 3)
    c[n] = 1.0
    c[n + 1] = -1.0

    out = lp.solve(lp.LinearProgram(c, a, b))
    if out.status == lp.UNBOUNDED:
        return None
    if not out.is_optimal:
        raise NumericalFailure("level set probe LP failed")
    t_star = out.value
    if t_star >= 1.0 - 1e-9:
        return None

    u = out.dual[:d]
    if abs(float(u @ ray) + 1.0) > 1e-6:
        raise NumericalFailure("level set dual certificate is inconsistent")
    norm = float(np.linalg.norm(u))
    normal = -u / norm
    kappa = x_max + t_star * ray
    return Hyperplane(normal, float(normal @ kappa))
