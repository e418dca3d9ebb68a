"""Maximum-likelihood fitting of tent densities.

The estimator ascends the population log-likelihood surrogate
``<(1/n)1, y> - A(y)`` by stochastic gradient steps: each iteration draws a
point from the current tent density and moves the heights toward the data
weights and away from the drawn point's convex weights. A restart wrapper
doubles the iteration budget until a step-schedule bound certifies the
requested expected gap. A small brute-force oracle maximizes the same
objective with exact quadrature gradients for cross-checking in one and two
dimensions.
"""

import math
import time
from collections import deque
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import optimize

from . import lp
from .errors import NumericalFailure, RankDeficient, UnsupportedDimension
from .partition import (
    log_partition_quadrature,
    log_partition_sliced,
    tent_moments_quadrature,
)
from .sampling import (
    AffineMap,
    _psd_sqrt,
    estimate_covariance,
    hit_and_run,
    line_tent_1d,
    round_to_isotropic,
    sample_line_tent,
)
from .tent import PointSet, as_heights, poly_stat, tent_eval

# Largest pole count the planar quadrature normalizer is asked to handle;
# beyond it the sliced Monte Carlo estimate takes over.
_QUADRATURE_POLE_LIMIT = 64

# Cap on stored trace rows and surrogate log entries for long runs.
_TRACE_LIMIT = 512


@dataclass(frozen=True)
class FitConfig:
    """Knobs for the stochastic fit.

    ``tv_exponent`` scales the per-iteration chain budget, which grows only
    logarithmically with the iteration count unless ``strict_tv`` asks for
    the literal (astronomically large) total-variation schedule.
    ``radius_clip`` projects the heights onto the ball ``norm(y) <= R`` after
    every step, supplying the diameter used by the certification bound.
    """

    iterations: int = 1000
    step_constant: float = 1.0
    seed: int | None = None
    chain_steps: int | None = None
    round_target_C: float = 2.0
    tv_exponent: float = 0.5
    restart: bool = False
    radius_clip: float | None = None
    epsilon: float = 0.1
    strict_tv: bool = False
    suffix_average: bool = False
    wall_cap: float | None = None
    round_every: int = 25

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("iterations must be at least one")
        if not self.step_constant > 0.0:
            raise ValueError("step constant must be positive")
        if not self.round_target_C > 1.0:
            raise ValueError("rounding target must exceed one")
        if self.chain_steps is not None and self.chain_steps < 1:
            raise ValueError("chain steps must be at least one")
        if not self.tv_exponent > 0.0:
            raise ValueError("tv exponent must be positive")
        if self.radius_clip is not None and not self.radius_clip > 0.0:
            raise ValueError("radius clip must be positive")
        if not 0.0 < self.epsilon <= 0.1:
            raise ValueError("epsilon must lie in (0, 0.1]")
        if self.wall_cap is not None and not self.wall_cap > 0.0:
            raise ValueError("wall cap must be positive")
        if self.round_every < 1:
            raise ValueError("rounding cadence must be at least one")


@dataclass(frozen=True)
class Model:
    """A fitted tent density in exponential form."""

    point_set: PointSet
    heights: np.ndarray
    log_partition: float
    normalized: bool = False
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "heights", as_heights(self.point_set, self.heights))
        if not math.isfinite(self.log_partition):
            raise ValueError("log partition must be finite")


@dataclass(frozen=True)
class FitReport:
    """Outcome of one fitting run: the model plus run telemetry.

    ``trace`` rows are (iteration, step size, gradient norm, height sum);
    every logged gradient norm is strictly below one and the height sum is
    constant unless clipping rescales. ``certified_gap`` is filled in by
    the restart wrapper.
    """

    model: Model
    objective_estimate: float
    wall_time: float
    trace: tuple
    certified_gap: float | None = None
    budget_exhausted: bool = False


def default_chain_budget(iterations: int, tv_exponent: float) -> int:
    """Per-iteration hit-and-run steps under the affordable heuristic."""
    return max(2, math.ceil(tv_exponent * math.log(1.0 + iterations)))


def strict_chain_budget(
    iterations: int, count: int, target_c: float, start_distance: float = 1.0
) -> int:
    """Per-iteration steps for the literal total-variation schedule.

    Drives each chain to total variation 1/iterations^2 of the target,
    using the C-isotropic mixing bound with start-distance parameter H.
    Unaffordable except for token budgets; provided for fidelity.
    """
    eps = 1.0 / float(iterations) ** 2
    return math.ceil(
        target_c**4
        * start_distance**4
        * count**3
        / eps**4
        * math.log(2.0 * start_distance / eps) ** 3
    )


def expected_gap_bound(diameter: float, step_constant: float, steps: int) -> float:
    """Certified expected suboptimality of the final iterate after ``steps``.

    Equals ``(D^2/c + c G^2) (2 + log T) / sqrt(T)`` with the gradient bound
    G = 1; decreasing in T from T = 3 on.
    """
    if steps < 1:
        raise ValueError("steps must be at least one")
    if not (diameter > 0.0 and step_constant > 0.0):
        raise ValueError("diameter and step constant must be positive")
    return (
        (diameter**2 / step_constant + step_constant)
        * (2.0 + math.log(steps))
        / math.sqrt(steps)
    )


def _estimate_log_partition(rng, ps: PointSet, y: np.ndarray, epsilon: float) -> float:
    """Reporting-time normalizer: exact quadrature when affordable, else MC."""
    if ps.dim == 1 or (ps.dim == 2 and ps.count <= _QUADRATURE_POLE_LIMIT):
        return log_partition_quadrature(ps, y)
    return log_partition_sliced(rng, ps, y, epsilon).log_partition


def _clip_heights(y: np.ndarray, radius: float | None) -> np.ndarray:
    if radius is None:
        return y
    norm = float(np.linalg.norm(y))
    if norm > radius:
        return y * (radius / norm)
    return y


def sgd_fit(rng: np.random.Generator, point_set: PointSet, config: FitConfig) -> FitReport:
    """Stochastic maximum-likelihood fit over tent heights.

    Starts from uniform heights (1/n)1 and iterates
    ``y += eta_t ((1/n)1 - T(s))`` with ``eta_t = c/sqrt(t)`` and ``s`` drawn
    from the current tent density: exactly on a line in dimension one, by
    warm-started hit-and-run otherwise. The update direction sums to zero,
    so the height sum is conserved unless ``radius_clip`` projects. The
    normalizer is estimated once at reporting time.
    """
    n = point_set.count
    target = np.full(n, 1.0 / n)
    y = _clip_heights(target.copy(), config.radius_clip)
    m = config.iterations
    if config.strict_tv:
        steps_per_iter = strict_chain_budget(m, n, config.round_target_C)
    elif config.chain_steps is not None:
        steps_per_iter = config.chain_steps
    else:
        steps_per_iter = default_chain_budget(m, config.tv_exponent)

    started = time.monotonic()
    line_mode = point_set.dim == 1
    if not line_mode:
        amap = round_to_isotropic(rng, point_set, y, config.round_target_C)
        x_state = point_set.barycenter()
        reservoir = deque(maxlen=max(64, 4 * (point_set.dim + 1)))

    stride = max(1, m // _TRACE_LIMIT)
    trace = []
    surrogate_trace = []
    max_grad_norm = 0.0
    max_height_norm = float(np.linalg.norm(y))
    base_sum = float(y.sum())
    height_sum_drift = 0.0
    suffix_sum = np.zeros(n)
    suffix_count = 0

    for t in range(1, m + 1):
        if line_mode:
            draw = sample_line_tent(rng, line_tent_1d(point_set, y))
            sample = np.array([draw])
        else:
            x_state = hit_and_run(rng, point_set, y, amap, x_state, steps_per_iter)
            sample = x_state
            reservoir.append(np.array(sample))
            if t % config.round_every == 0 and len(reservoir) >= 2 * (point_set.dim + 1):
                try:
                    _, cov = estimate_covariance(np.array(reservoir))
                    amap = AffineMap(_psd_sqrt(cov), np.zeros(point_set.dim))
                except RankDeficient:
                    pass
        stat = poly_stat(point_set, y, sample)
        gradient = target - stat.dense()
        eta = config.step_constant / math.sqrt(t)
        grad_norm = float(np.linalg.norm(gradient))
        max_grad_norm = max(max_grad_norm, grad_norm)
        y = _clip_heights(y + eta * gradient, config.radius_clip)
        max_height_norm = max(max_height_norm, float(np.linalg.norm(y)))
        height_sum_drift = max(height_sum_drift, abs(float(y.sum()) - base_sum))
        if t % stride == 0 or t == 1 or t == m:
            trace.append((t, eta, grad_norm, float(y.sum())))
            surrogate_trace.append((t, float(target @ y)))
        if config.suffix_average and t > m // 2:
            suffix_sum += y
            suffix_count += 1

    if config.suffix_average and suffix_count:
        y = _clip_heights(suffix_sum / suffix_count, config.radius_clip)

    log_partition = _estimate_log_partition(rng, point_set, y, config.epsilon)
    diagnostics = {
        "iterations_run": m,
        "final_height_norm": float(np.linalg.norm(y)),
        "surrogate_trace": tuple(surrogate_trace),
        "max_grad_norm": max_grad_norm,
        "max_height_norm": max_height_norm,
        "height_sum_drift": height_sum_drift,
    }
    model = Model(point_set, y, log_partition, normalized=False, diagnostics=diagnostics)
    return FitReport(
        model=model,
        objective_estimate=float(target @ y) - log_partition,
        wall_time=time.monotonic() - started,
        trace=tuple(trace),
    )


def fit_with_restarts(
    rng: np.random.Generator, point_set: PointSet, config: FitConfig, target_gap: float
) -> FitReport:
    """Rerun :func:`sgd_fit` with doubling budgets until a gap certificate.

    After each run the step-schedule bound is evaluated with the diameter
    from ``radius_clip`` (or twice the largest height norm seen) and the run
    is accepted once the bound reaches ``target_gap``. A configured wall
    cap instead returns the best run so far with ``budget_exhausted`` set.
    """
    if not target_gap > 0.0:
        raise ValueError("target gap must be positive")
    iterations = config.iterations
    started = time.monotonic()
    while True:
        report = sgd_fit(rng, point_set, replace(config, iterations=iterations))
        if config.radius_clip is not None:
            diameter = 2.0 * config.radius_clip
        else:
            diameter = 2.0 * report.model.diagnostics["max_height_norm"]
        gap = expected_gap_bound(diameter, config.step_constant, iterations)
        report = replace(report, certified_gap=gap)
        if gap <= target_gap:
            return report
        if config.wall_cap is not None and time.monotonic() - started >= config.wall_cap:
            return replace(report, budget_exhausted=True)
        iterations *= 2


def log_likelihood(model: Model, data: PointSet) -> float:
    """Sum of log densities of the data points under the model.

    Minus infinity when any point falls outside the model's hull.
    """
    total = 0.0
    for i in range(data.count):
        value = tent_eval(model.point_set, model.heights, data.points[:, i])
        if value == -np.inf:
            return -math.inf
        total += value - model.log_partition
    return total


def normalize(model: Model) -> Model:
    """Shift heights so the density integrates to one (within the A error)."""
    return Model(
        model.point_set,
        model.heights - model.log_partition,
        0.0,
        normalized=True,
        diagnostics=dict(model.diagnostics),
    )


def _mixture_gap(expectations: list, target: np.ndarray) -> float:
    """Distance from the target to the convex hull of observed expectations.

    Solves min over simplex mixtures of the sup-norm residual with one small
    LP. Near a height vector where the optimal weights are not unique, the
    subgradient set is exactly such a hull, so this is the right optimality
    residual for the fixed-point check.
    """
    k = len(expectations)
    n = len(target)
    ex = np.column_stack(expectations)
    # Columns: mixture weights, the residual bound u, then 2n slacks.
    a = np.zeros((1 + 2 * n, k + 1 + 2 * n))
    b = np.zeros(1 + 2 * n)
    a[0, :k] = 1.0
    b[0] = 1.0
    for j in range(n):
        row = 1 + j
        a[row, :k] = ex[j]
        a[row, k] = -1.0
        a[row, k + 1 + j] = 1.0
        b[row] = target[j]
        row = 1 + n + j
        a[row, :k] = ex[j]
        a[row, k] = 1.0
        a[row, k + 1 + n + j] = -1.0
        b[row] = target[j]
    c = np.zeros(k + 1 + 2 * n)
    c[k] = -1.0
    outcome = lp.solve(lp.LinearProgram(c, a, b), want_dual=False)
    if outcome.status != lp.OPTIMAL:
        raise NumericalFailure("mixture residual program did not solve")
    return max(0.0, -outcome.value)


def oracle_fit(point_set: PointSet, *, tol: float = 1e-4, max_rounds: int = 200) -> Model:
    """Deterministic small-instance fit by exact quadrature ascent.

    Maximizes ``<(1/n)1, y> - A(y)`` with exact gradients
    ``(1/n)1 - E[T]``, diminishing steps, and a simplex-method polish,
    then certifies optimality: either the gradient residual is within
    ``tol``, or the target lies within ``tol`` of the hull of expectation
    vectors probed around the optimum (the fixed point can sit where the
    expectation jumps between selections, so the hull is the honest check).
    Convexity of A makes any certified point globally optimal. Returns the
    normalized model.
    """
    if point_set.dim > 2:
        raise UnsupportedDimension("the fitting oracle covers dimensions 1 and 2 only")
    if point_set.count > 8:
        raise ValueError("the fitting oracle is limited to 8 poles")
    n = point_set.count
    target = np.full(n, 1.0 / n)

    def objective(heights: np.ndarray) -> float:
        return float(target @ heights) - log_partition_quadrature(point_set, heights)

    y = np.zeros(n)
    best_y = y.copy()
    best_value = objective(y)
    rounds_used = 0
    certified = False
    surrogate_trace = [(0, best_value)]
    for k in range(1, max_rounds + 1):
        rounds_used = k
        log_a, expect = tent_moments_quadrature(point_set, y)
        if float(np.max(np.abs(target - expect))) <= tol:
            best_y = y.copy()
            best_value = float(target @ y) - log_a
            certified = True
            break
        value = float(target @ y) - log_a
        if value > best_value:
            best_value = value
            best_y = y.copy()
        y = y + (0.5 / math.sqrt(k)) * (target - expect)
        if k % 20 == 0:
            surrogate_trace.append((k, best_value))

    if not certified:
        # Polish over the mean-zero subspace; the objective is invariant to
        # adding a constant, so one direction is redundant.
        basis = np.linalg.svd(np.ones((1, n)))[2][1:].T

        def negated(u: np.ndarray) -> float:
            return -objective(best_y + basis @ u)

        result = optimize.minimize(
            negated,
            np.zeros(n - 1),
            method="Nelder-Mead",
            options={"xatol": 1e-9, "fatol": 1e-12, "maxfev": 4000},
        )
        if -result.fun > best_value:
            best_value = -result.fun
            best_y = best_y + basis @ result.x

    log_a, expect = tent_moments_quadrature(point_set, best_y)
    gap = float(np.max(np.abs(target - expect)))
    if gap > tol:
        probes = [expect]
        delta = 3e-5
        for j in range(n):
            for sign in (delta, -delta):
                bump = np.zeros(n)
                bump[j] = sign
                probes.append(tent_moments_quadrature(point_set, best_y + bump)[1])
        gap = min(gap, _mixture_gap(probes, target))
    if gap > tol:
        raise NumericalFailure(
            f"fitting oracle could not certify optimality (residual {gap:.3g})"
        )
    surrogate_trace.append((rounds_used, best_value))
    diagnostics = {
        "iterations_run": rounds_used,
        "final_height_norm": float(np.linalg.norm(best_y - log_a)),
        "surrogate_trace": tuple(surrogate_trace),
        "optimality_gap": gap,
    }
    model = Model(point_set, best_y, log_a, normalized=False, diagnostics=diagnostics)
    return normalize(model)
