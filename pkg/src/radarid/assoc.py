"""Track-detection association: costs, gating and the Hungarian solver."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Box",
    "CostMatrix",
    "Assignment",
    "iou_cost",
    "mahalanobis_cost",
    "gate",
    "hungarian",
    "GATE_THRESHOLD_90",
]

# 90% confidence from an inverse chi-squared distribution with 2 dof
GATE_THRESHOLD_90 = 4.605


@dataclass(frozen=True)
class Box:
    """Axis-aligned box in (range, velocity) space around a subject."""

    center: tuple[float, float]  # (r [m], v [m/s])
    height_m: float = 2.0  # extent along range
    width_mps: float = 2.5  # extent along velocity

    def __post_init__(self):
        if self.height_m <= 0 or self.width_mps <= 0:
            raise ValueError("box dimensions must be positive")

    @property
    def edges(self) -> tuple[float, float, float, float]:
        r, v = self.center
        return (
            r - self.height_m / 2,
            r + self.height_m / 2,
            v - self.width_mps / 2,
            v + self.width_mps / 2,
        )


def iou_cost(a: Box, b: Box) -> float:
    """Negative intersection-over-union of the two boxes, in [-1, 0]."""
    ar0, ar1, av0, av1 = a.edges
    br0, br1, bv0, bv1 = b.edges
    dr = max(0.0, min(ar1, br1) - max(ar0, br0))
    dv = max(0.0, min(av1, bv1) - max(av0, bv0))
    inter = dr * dv
    if inter == 0.0:
        return 0.0
    union = a.height_m * a.width_mps + b.height_m * b.width_mps - inter
    return -inter / union


def mahalanobis_cost(residual: np.ndarray, covariance: np.ndarray) -> float:
    """Squared Mahalanobis distance of an innovation residual."""
    residual = np.asarray(residual, dtype=float)
    try:
        solved = np.linalg.solve(covariance, residual)
    except np.linalg.LinAlgError as exc:
        raise ValueError("singular innovation covariance") from exc
    return float(residual @ solved)


@dataclass
class CostMatrix:
    costs: np.ndarray  # (n_tracks, n_detections)
    forbidden: np.ndarray  # bool mask, same shape

    @classmethod
    def from_costs(cls, costs: np.ndarray) -> "CostMatrix":
        costs = np.asarray(costs, dtype=float)
        return cls(costs=costs, forbidden=np.zeros(costs.shape, dtype=bool))


def gate(matrix: CostMatrix, threshold: float = GATE_THRESHOLD_90) -> CostMatrix:
    """Forbid every pair whose cost exceeds the gate threshold."""
    return CostMatrix(costs=matrix.costs, forbidden=matrix.forbidden | (matrix.costs > threshold))


@dataclass
class Assignment:
    pairs: list[tuple[int, int]]  # (row, column), ascending rows
    unmatched_rows: list[int]
    unmatched_cols: list[int]
    total_cost: float


def hungarian(matrix: CostMatrix | np.ndarray) -> Assignment:
    """Minimum-total-cost assignment between rows and columns.

    Rectangular matrices are padded to square with a finite sentinel larger
    than any achievable real cost sum; forbidden pairs get the same
    sentinel, so the solver first maximizes the number of allowed pairs and
    then minimizes their total cost.  Forbidden pairs never appear in the
    result.
    """
    if isinstance(matrix, np.ndarray):
        matrix = CostMatrix.from_costs(matrix)
    costs, forbidden = matrix.costs, matrix.forbidden
    n_rows, n_cols = costs.shape
    if n_rows == 0 or n_cols == 0 or forbidden.all():
        return Assignment(
            pairs=[],
            unmatched_rows=list(range(n_rows)),
            unmatched_cols=list(range(n_cols)),
            total_cost=0.0,
        )
    finite = costs[~forbidden]
    sentinel = float(np.sum(np.abs(finite))) + 1.0
    size = max(n_rows, n_cols)
    padded = np.full((size, size), sentinel)
    padded[:n_rows, :n_cols] = np.where(forbidden, sentinel, costs)

    row_of_col = _solve_square(padded)

    pairs = []
    for col, row in enumerate(row_of_col):
        if row < n_rows and col < n_cols and not forbidden[row, col]:
            pairs.append((row, col))
    pairs.sort()
    matched_rows = {r for r, _ in pairs}
    matched_cols = {c for _, c in pairs}
    return Assignment(
        pairs=pairs,
        unmatched_rows=[r for r in range(n_rows) if r not in matched_rows],
        unmatched_cols=[c for c in range(n_cols) if c not in matched_cols],
        total_cost=float(sum(costs[r, c] for r, c in pairs)),
    )


def _solve_square(a: np.ndarray) -> np.ndarray:
    """Exact square assignment via shortest augmenting paths with potentials.

    Returns ``row_of_col`` where column j is assigned to row row_of_col[j].
    O(n^3); fine for the matrix sizes a tracking frame produces.
    """
    n = a.shape[0]
    inf = np.inf
    u = np.zeros(n + 1)
    v = np.zeros(n + 1)
    match = np.zeros(n + 1, dtype=int)  # 1-based: match[j] = row assigned to column j
    way = np.zeros(n + 1, dtype=int)
    for i in range(1, n + 1):
        match[0] = i
        j0 = 0
        minv = np.full(n + 1, inf)
        used = np.zeros(n + 1, dtype=bool)
        while True:
            used[j0] = True
            i0 = match[j0]
            delta = inf
            j1 = 0
            for j in range(1, n + 1):
                if used[j]:
                    continue
                cur = a[i0 - 1, j - 1] - u[i0] - v[j]
                if cur < minv[j]:
                    minv[j] = cur
                    way[j] = j0
                if minv[j] < delta:
                    delta = minv[j]
                    j1 = j
            for j in range(n + 1):
                if used[j]:
                    u[match[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if match[j0] == 0:
                break
        while j0 != 0:
            j1 = way[j0]
            match[j0] = match[j1]
            j0 = j1
    return match[1:] - 1
