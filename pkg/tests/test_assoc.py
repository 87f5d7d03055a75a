"""Association costs, gating and the assignment solver."""

import itertools

import numpy as np
import pytest

from radarid.assoc import (
    GATE_THRESHOLD_90,
    Box,
    CostMatrix,
    gate,
    hungarian,
    iou_cost,
    mahalanobis_cost,
)


def brute_force_min_cost(costs, forbidden=None):
    """Oracle: exhaustive search over maximal allowed partial assignments."""
    n_rows, n_cols = costs.shape
    if forbidden is None:
        forbidden = np.zeros_like(costs, dtype=bool)
    best = (-1, np.inf)  # (cardinality, cost) with cardinality maximized first
    k = min(n_rows, n_cols)
    for rows in itertools.combinations(range(n_rows), k):
        for cols in itertools.permutations(range(n_cols), k):
            pairs = [(r, c) for r, c in zip(rows, cols) if not forbidden[r, c]]
            total = sum(costs[r, c] for r, c in pairs)
            key = (-len(pairs), total)
            if key < (-best[0], best[1]):
                best = (len(pairs), total)
    return best


def test_iou_identical_boxes():
    b = Box(center=(4.0, 1.0))
    assert iou_cost(b, b) == -1.0


def test_iou_disjoint_boxes():
    a = Box(center=(4.0, 1.0))
    b = Box(center=(10.0, 1.0))
    assert iou_cost(a, b) == 0.0


def test_iou_hand_geometry():
    # [0,2]x[0,2] vs [1,3]x[0,2]: intersection 2, union 6
    a = Box(center=(1.0, 1.0), height_m=2.0, width_mps=2.0)
    b = Box(center=(2.0, 1.0), height_m=2.0, width_mps=2.0)
    assert iou_cost(a, b) == pytest.approx(-1.0 / 3.0)


def test_iou_symmetric_and_bounded():
    rng = np.random.default_rng(0)
    for _ in range(100):
        a = Box(center=tuple(rng.uniform(-5, 5, 2)), height_m=rng.uniform(0.5, 3), width_mps=rng.uniform(0.5, 3))
        b = Box(center=tuple(rng.uniform(-5, 5, 2)), height_m=rng.uniform(0.5, 3), width_mps=rng.uniform(0.5, 3))
        cost = iou_cost(a, b)
        assert -1.0 <= cost <= 0.0
        assert cost == pytest.approx(iou_cost(b, a))


def test_mahalanobis_zero_residual():
    assert mahalanobis_cost(np.zeros(2), np.eye(2)) == 0.0


def test_mahalanobis_identity_is_euclidean():
    r = np.array([0.3, -0.4])
    assert mahalanobis_cost(r, np.eye(2)) == pytest.approx(0.25)


def test_mahalanobis_hand_value():
    assert mahalanobis_cost(np.array([1.0, 1.0]), np.diag([2.0, 2.0])) == pytest.approx(1.0)


def test_mahalanobis_singular_covariance():
    with pytest.raises(ValueError, match="singular"):
        mahalanobis_cost(np.array([1.0, 0.0]), np.zeros((2, 2)))


def test_mahalanobis_reparameterization_invariance():
    rng = np.random.default_rng(1)
    for _ in range(30):
        residual = rng.normal(size=2)
        a = rng.normal(size=(2, 2))
        cov = a @ a.T + 0.1 * np.eye(2)
        lin = rng.normal(size=(2, 2)) + 2 * np.eye(2)
        base = mahalanobis_cost(residual, cov)
        mapped = mahalanobis_cost(lin @ residual, lin @ cov @ lin.T)
        assert mapped == pytest.approx(base, rel=1e-9)


def test_gate_thresholds():
    costs = np.array([[4.7, 4.5], [0.1, 9.0]])
    gated = gate(CostMatrix.from_costs(costs), GATE_THRESHOLD_90)
    assert gated.forbidden.tolist() == [[True, False], [False, True]]


def test_gate_all_forbidden_empty_assignment():
    costs = np.full((2, 3), 100.0)
    gated = gate(CostMatrix.from_costs(costs))
    result = hungarian(gated)
    assert result.pairs == []
    assert result.unmatched_rows == [0, 1]
    assert result.unmatched_cols == [0, 1, 2]


def test_hungarian_two_by_two():
    result = hungarian(np.array([[1.0, 2.0], [2.0, 1.0]]))
    assert result.pairs == [(0, 0), (1, 1)]
    assert result.total_cost == pytest.approx(2.0)


def test_hungarian_zero_diagonal():
    costs = np.full((3, 3), 50.0)
    np.fill_diagonal(costs, 0.0)
    result = hungarian(costs)
    assert result.pairs == [(0, 0), (1, 1), (2, 2)]


def test_hungarian_rectangular_unmatched_row():
    costs = np.array([[5.0, 1.0], [2.0, 4.0], [3.0, 3.0]])
    result = hungarian(costs)
    assert len(result.pairs) == 2
    assert len(result.unmatched_rows) == 1
    _, total = brute_force_min_cost(costs)
    assert result.total_cost == pytest.approx(total)


def test_hungarian_matches_brute_force():
    rng = np.random.default_rng(2)
    for trial in range(200):
        n_rows = int(rng.integers(1, 6))
        n_cols = int(rng.integers(1, 6))
        costs = rng.normal(size=(n_rows, n_cols)) * rng.uniform(0.5, 20)
        result = hungarian(costs)
        cardinality, total = brute_force_min_cost(costs)
        assert len(result.pairs) == cardinality, f"trial {trial}"
        assert result.total_cost == pytest.approx(total), f"trial {trial}"


def test_hungarian_with_forbidden_matches_brute_force():
    rng = np.random.default_rng(3)
    for trial in range(120):
        n_rows = int(rng.integers(1, 5))
        n_cols = int(rng.integers(1, 5))
        costs = rng.normal(size=(n_rows, n_cols))
        forbidden = rng.random((n_rows, n_cols)) < 0.4
        result = hungarian(CostMatrix(costs=costs, forbidden=forbidden))
        for r, c in result.pairs:
            assert not forbidden[r, c]
        cardinality, total = brute_force_min_cost(costs, forbidden)
        assert len(result.pairs) == cardinality, f"trial {trial}"
        assert result.total_cost == pytest.approx(total), f"trial {trial}"


def test_hungarian_row_column_shift_invariance():
    rng = np.random.default_rng(4)
    for _ in range(50):
        costs = rng.normal(size=(4, 4))
        base = hungarian(costs).pairs
        shifted = costs.copy()
        shifted[2, :] += 7.3
        shifted[:, 1] -= 2.9
        assert hungarian(shifted).pairs == base
