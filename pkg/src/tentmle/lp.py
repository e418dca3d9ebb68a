"""Dense linear programming in standard equality form.

Problems are stated as

    maximize    objective . alpha
    subject to  constraint_matrix @ alpha == rhs,  alpha >= 0

and solved with a two-phase primal simplex using Bland's anti-cycling rule.
The solver is deliberately small and deterministic: the problems produced by
the geometry layer have a handful of rows and columns, and reproducibility of
the returned basis matters more than large-scale speed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionMismatch, NumericalFailure

# Relative feasibility tolerance on equality residuals.
FEASIBILITY_TOL = 1e-9
# Entries of a returned solution in [-CLAMP_TOL, 0) are snapped to zero.
CLAMP_TOL = 1e-12
# Reduced costs and pivot elements below this are treated as zero.
_PIVOT_TOL = 1e-9

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class LinearProgram:
    """A maximization problem over the nonnegative orthant."""

    objective: np.ndarray
    constraint_matrix: np.ndarray
    rhs: np.ndarray

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.objective, dtype=float))
        a = np.asarray(self.constraint_matrix, dtype=float)
        b = np.atleast_1d(np.asarray(self.rhs, dtype=float))
        if a.ndim != 2:
            raise DimensionMismatch("constraint matrix must be two-dimensional")
        rows, cols = a.shape
        if c.shape != (cols,):
            raise DimensionMismatch(
                f"objective has length {c.shape[0]}, expected {cols}"
            )
        if b.shape != (rows,):
            raise DimensionMismatch(f"rhs has length {b.shape[0]}, expected {rows}")
        if rows < 1 or cols < 1:
            raise DimensionMismatch("problem must have at least one row and column")
        for name, arr in (("objective", c), ("constraint matrix", a), ("rhs", b)):
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} contains non-finite entries")
        object.__setattr__(self, "objective", c)
        object.__setattr__(self, "constraint_matrix", a)
        object.__setattr__(self, "rhs", b)


@dataclass(frozen=True)
class LpOutcome:
    """Result of :func:`solve`.

    ``status`` is one of ``"optimal"``, ``"infeasible"``, ``"unbounded"``.
    For optimal outcomes ``solution`` is a basic feasible point (support no
    larger than the row count), ``basis`` lists the basic column indices and
    ``dual`` carries one multiplier per original constraint row.
    """

    status: str
    solution: np.ndarray | None = None
    value: float | None = None
    basis: tuple[int, ...] | None = None
    dual: np.ndarray | None = None

    @property
    def is_optimal(self) -> bool:
        return self.status == OPTIMAL


def solve(lp: LinearProgram, *, want_dual: bool = True) -> LpOutcome:
    """Solve ``lp``, distinguishing optimal, infeasible and unbounded cases."""

    status, x, value, basis, dual = _solve_raw(
        lp.constraint_matrix, lp.rhs, lp.objective, want_dual=want_dual
    )
    if status != OPTIMAL:
        return LpOutcome(status=status)
    return LpOutcome(OPTIMAL, x, value, tuple(int(j) for j in basis), dual)


def fixed_basis_resolve(lp: LinearProgram, forbidden: Iterable[int]) -> LpOutcome:
    """Re-solve ``lp`` with the given variables pinned to zero.

    Used to sparsify degenerate optima: forbidding a column removes it from
    the problem entirely, so any optimum of the reduced problem is an optimum
    of the original over the remaining support.
    """

    forbidden = sorted(set(int(j) for j in forbidden))
    k = lp.constraint_matrix.shape[1]
    for j in forbidden:
        if j < 0 or j >= k:
            raise DimensionMismatch(f"forbidden index {j} out of range for {k} columns")
    keep = [j for j in range(k) if j not in set(forbidden)]
    if not keep:
        return LpOutcome(status=INFEASIBLE)
    a = lp.constraint_matrix[:, keep]
    c = lp.objective[keep]
    status, x_red, value, basis_red, dual = _solve_raw(a, lp.rhs, c)
    if status != OPTIMAL:
        return LpOutcome(status=status)
    x = np.zeros(k)
    x[keep] = x_red
    basis = tuple(keep[j] for j in basis_red)
    return LpOutcome(OPTIMAL, x, value, basis, dual)


def _solve_raw(a, b, c, want_dual=False):
    """Two-phase simplex on raw arrays.

    Returns ``(status, x, value, basis, dual)``; the last four are ``None``
    unless the status is optimal. ``dual`` has one entry per row of ``a``
    (zero for rows found to be redundant) and is only computed on request.
    """

    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    c = np.asarray(c, dtype=float)
    m, k = a.shape
    cap = 50 * (m + k)
    scale = float(np.max(np.abs(b))) if b.size else 0.0
    feas_tol = FEASIBILITY_TOL * (1.0 + scale)

    # Flip rows so the right-hand side is nonnegative; remember the signs so
    # dual multipliers can be mapped back to the original orientation.
    flip = np.where(b < 0.0, -1.0, 1.0)
    a_f = a * flip[:, None]
    b_f = b * flip

    # Single tableau for both phases, laid out [variables | artificials | b].
    # Phase 1 maximizes the negated artificial sum from an artificial basis;
    # phase 2 reuses the same storage and simply stops considering artificial
    # columns when picking entering variables. The last row holds reduced
    # costs; objective values are recomputed from the solution at the end.
    T = np.zeros((m + 1, k + m + 1))
    T[:m, :k] = a_f
    idx = np.arange(m)
    T[idx, k + idx] = 1.0
    T[:m, -1] = b_f
    T[m, :k] = a_f.sum(axis=0)
    basis = list(range(k, k + m))
    row_ids = list(range(m))

    pivots = _pivot_until_optimal(T, basis, k + m, cap)
    if pivots is None:
        raise NumericalFailure("simplex iteration cap exceeded in phase 1")
    if pivots == UNBOUNDED:
        raise NumericalFailure("phase 1 reported an unbounded direction")
    artificial_sum = 0.0
    for i, var in enumerate(basis):
        if var >= k:
            artificial_sum += max(T[i, -1], 0.0)
    if artificial_sum > feas_tol:
        return INFEASIBLE, None, None, None, None

    # Drive any lingering artificial variables out of the basis; a row whose
    # only nonzero pivots are artificial is redundant and gets dropped.
    drop = []
    for i in range(len(basis)):
        if basis[i] < k:
            continue
        piv_col = -1
        for j in range(k):
            if abs(T[i, j]) > _PIVOT_TOL:
                piv_col = j
                break
        if piv_col >= 0:
            _pivot(T, i, piv_col)
            basis[i] = piv_col
        else:
            drop.append(i)
    if drop:
        keep_rows = [i for i in range(len(basis)) if i not in set(drop)]
        T = T[keep_rows + [T.shape[0] - 1], :]
        basis = [basis[i] for i in keep_rows]
        row_ids = [row_ids[i] for i in keep_rows]

    # Phase 2: rebuild reduced costs from c over the original columns.
    n_rows = len(basis)
    T[-1, :] = 0.0
    T[-1, :k] = c
    for i in range(n_rows):
        cb = c[basis[i]]
        if cb != 0.0:
            T[-1, :] -= cb * T[i, :]

    pivots = _pivot_until_optimal(T, basis, k, cap)
    if pivots is None:
        raise NumericalFailure("simplex iteration cap exceeded in phase 2")
    if pivots == UNBOUNDED:
        return UNBOUNDED, None, None, None, None

    x = np.zeros(k)
    for i, var in enumerate(basis):
        x[var] = T[i, -1]
    x[(x >= -CLAMP_TOL) & (x < 0.0)] = 0.0
    residual = np.max(np.abs(a @ x - b)) if m else 0.0
    if residual > 10.0 * feas_tol or np.any(x < -CLAMP_TOL):
        raise NumericalFailure(
            f"simplex produced an infeasible solution (residual {residual:.3e})"
        )
    value = float(c @ x)

    dual = None
    if want_dual:
        dual = np.zeros(m)
        basis_mat = a_f[row_ids][:, basis]
        try:
            dual_kept = np.linalg.solve(basis_mat.T, c[basis])
        except np.linalg.LinAlgError:
            dual_kept, *_ = np.linalg.lstsq(basis_mat.T, c[basis], rcond=None)
        for i, rid in enumerate(row_ids):
            dual[rid] = dual_kept[i] * flip[rid]

    return OPTIMAL, x, value, list(basis), dual


def _pivot_until_optimal(T, basis, n_cols, cap):
    """Run Bland-rule pivots in place until optimality or unboundedness.

    Entering variable: lowest index with positive reduced cost. Leaving row:
    smallest ratio, ties broken by smallest basic variable index. Returns the
    pivot count, the string ``"unbounded"``, or ``None`` at the iteration cap.
    """

    count = 0
    m = T.shape[0] - 1
    while True:
        reduced = T[-1, :n_cols]
        improving = reduced > _PIVOT_TOL
        if not improving.any():
            return count
        enter = int(improving.argmax())
        leave = -1
        best_ratio = np.inf
        for i in range(m):
            coef = T[i, enter]
            if coef > _PIVOT_TOL:
                ratio = max(T[i, -1], 0.0) / coef
                if ratio < best_ratio - 1e-15 or (
                    abs(ratio - best_ratio) <= 1e-15
                    and (leave < 0 or basis[i] < basis[leave])
                ):
                    best_ratio = ratio
                    leave = i
        if leave < 0:
            return UNBOUNDED
        _pivot(T, leave, enter)
        basis[leave] = enter
        count += 1
        if count > cap:
            return None


def _pivot(T, pr, pc):
    prow = T[pr]
    prow /= prow[pc]
    col = T[:, pc].copy()
    col[pr] = 0.0
    T -= col[:, None] * prow


def enumerate_basic_optimum(
    a: Sequence[Sequence[float]], b: Sequence[float], c: Sequence[float]
) -> tuple[float, np.ndarray] | None:
    """Brute-force reference: best objective over all basic feasible points.

    Tries every row-count-sized column subset, solves the square system and
    keeps feasible solutions. Returns ``(value, solution)`` or ``None`` when
    no basic feasible point exists. Exponential; intended for cross-checking
    the simplex on desk-sized instances only.
    """

    from itertools import combinations

    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    c = np.asarray(c, dtype=float)
    m, k = a.shape
    best = None
    for cols in combinations(range(k), min(m, k)):
        sub = a[:, cols]
        try:
            sol, residual, rank, _ = np.linalg.lstsq(sub, b, rcond=None)
        except np.linalg.LinAlgError:
            continue
        if np.max(np.abs(sub @ sol - b)) > 1e-8 * (1.0 + np.max(np.abs(b))):
            continue
        if np.any(sol < -1e-9):
            continue
        x = np.zeros(k)
        x[list(cols)] = np.clip(sol, 0.0, None)
        value = float(c @ x)
        if best is None or value > best[0]:
            best = (value, x)
    return best
