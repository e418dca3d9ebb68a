import numpy as np
import pytest

from tentmle import lp
from tentmle.errors import DimensionMismatch


def make_bounded_feasible(rng, rows, cols):
    """Random equality-form instance that is feasible and bounded.

    Feasibility comes from building the rhs out of a known nonnegative point;
    boundedness from including an all-ones row, which traps the feasible set
    inside a scaled simplex.
    """
    a = rng.normal(size=(rows - 1, cols))
    a = np.vstack([np.ones(cols), a])
    x0 = rng.uniform(0.0, 1.0, size=cols)
    x0[rng.random(cols) < 0.3] = 0.0
    if x0.sum() == 0.0:
        x0[0] = 1.0
    b = a @ x0
    c = rng.normal(size=cols)
    return lp.LinearProgram(c, a, b)


def test_simple_equality_instance():
    prob = lp.LinearProgram([0.0, 1.0], [[1.0, 1.0], [0.0, 1.0]], [1.0, 0.5])
    out = lp.solve(prob)
    assert out.is_optimal
    assert out.value == pytest.approx(0.5, abs=1e-12)
    np.testing.assert_allclose(out.solution, [0.5, 0.5], atol=1e-12)


def test_infeasible_detected():
    prob = lp.LinearProgram([1.0, 1.0], [[1.0, 1.0], [1.0, 1.0]], [1.0, 2.0])
    out = lp.solve(prob)
    assert out.status == lp.INFEASIBLE
    assert out.solution is None


def test_unbounded_detected():
    prob = lp.LinearProgram([1.0, 0.0], [[1.0, -1.0]], [0.0])
    out = lp.solve(prob)
    assert out.status == lp.UNBOUNDED


def square_density_program():
    # Tent evaluation at the square's center: corners (0,0),(1,0),(0,1),(1,1)
    # with heights (0, 0, 0, -1); optimum picks the zero-height midpoint pair.
    a = np.array(
        [
            [0.0, 1.0, 0.0, 1.0],
            [0.0, 0.0, 1.0, 1.0],
            [1.0, 1.0, 1.0, 1.0],
        ]
    )
    b = np.array([0.5, 0.5, 1.0])
    c = np.array([0.0, 0.0, 0.0, -1.0])
    return lp.LinearProgram(c, a, b)


def test_square_center_height_program():
    prob = square_density_program()
    ref = lp.enumerate_basic_optimum(prob.constraint_matrix, prob.rhs, prob.objective)
    assert ref is not None
    assert ref[0] == pytest.approx(0.0, abs=1e-12)

    out = lp.solve(prob)
    assert out.is_optimal
    assert out.value == pytest.approx(0.0, abs=1e-9)
    np.testing.assert_allclose(out.solution, [0.0, 0.5, 0.5, 0.0], atol=1e-9)
    assert len(out.basis) <= 3


def test_fixed_basis_resolve_on_square():
    prob = square_density_program()
    out = lp.fixed_basis_resolve(prob, [1])
    assert out.is_optimal
    assert out.value == pytest.approx(-0.5, abs=1e-9)
    assert out.solution[1] == 0.0
    support = set(np.flatnonzero(out.solution > 1e-9))
    assert support == {0, 3}


def test_fixed_basis_resolve_infeasible():
    # One-dimensional poles {0, 1}, query 0.5: forbidding either pole leaves
    # nothing to combine.
    prob = lp.LinearProgram(
        [0.0, 0.0], [[0.0, 1.0], [1.0, 1.0]], [0.5, 1.0]
    )
    out = lp.fixed_basis_resolve(prob, [0])
    assert out.status == lp.INFEASIBLE


def test_fixed_basis_resolve_rejects_bad_index():
    prob = square_density_program()
    with pytest.raises(DimensionMismatch):
        lp.fixed_basis_resolve(prob, [7])


def test_validation_rejects_shape_mismatch():
    with pytest.raises(DimensionMismatch):
        lp.LinearProgram([1.0], [[1.0, 2.0]], [1.0])
    with pytest.raises(DimensionMismatch):
        lp.LinearProgram([1.0, 2.0], [[1.0, 2.0]], [1.0, 2.0])
    with pytest.raises(ValueError):
        lp.LinearProgram([np.nan, 1.0], [[1.0, 2.0]], [1.0])


def test_matches_enumeration_on_random_instances():
    rng = np.random.default_rng(20240817)
    for trial in range(25):
        rows = int(rng.integers(2, 5))
        cols = int(rng.integers(rows, 9))
        prob = make_bounded_feasible(rng, rows, cols)
        out = lp.solve(prob)
        assert out.is_optimal, f"trial {trial} unexpectedly {out.status}"
        ref = lp.enumerate_basic_optimum(
            prob.constraint_matrix, prob.rhs, prob.objective
        )
        assert ref is not None
        assert out.value == pytest.approx(ref[0], abs=1e-8)


def test_solution_invariants_on_random_instances():
    rng = np.random.default_rng(7)
    for _ in range(25):
        rows = int(rng.integers(2, 5))
        cols = int(rng.integers(rows, 9))
        prob = make_bounded_feasible(rng, rows, cols)
        out = lp.solve(prob)
        assert out.is_optimal
        x = out.solution
        assert np.all(x >= 0.0)
        residual = np.max(np.abs(prob.constraint_matrix @ x - prob.rhs))
        assert residual <= 1e-9 * (1.0 + np.max(np.abs(prob.rhs)))
        # basic solution: support within the row count
        assert np.count_nonzero(x > 1e-9) <= rows
        assert len(out.basis) <= rows


def test_dual_certificates_on_random_instances():
    rng = np.random.default_rng(99)
    for _ in range(25):
        rows = int(rng.integers(2, 5))
        cols = int(rng.integers(rows, 9))
        prob = make_bounded_feasible(rng, rows, cols)
        out = lp.solve(prob)
        assert out.is_optimal
        y = out.dual
        # strong duality and dual feasibility for a maximization problem
        assert float(y @ prob.rhs) == pytest.approx(out.value, abs=1e-7)
        reduced = prob.objective - prob.constraint_matrix.T @ y
        assert np.all(reduced <= 1e-7)
