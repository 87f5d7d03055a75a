"""Density-based detection: per-frame clustering of denoised map points."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .maps import PointCloud

__all__ = [
    "DetectParams",
    "Scaler",
    "Cluster",
    "DetectionSet",
    "normalize_points",
    "dbscan",
    "power_weighted_centroid",
    "detect_frame",
]

NOISE = -1


@dataclass(frozen=True)
class DetectParams:
    eps: float = 0.04
    min_pts: int = 40

    def __post_init__(self):
        if self.eps <= 0:
            raise ValueError("eps must be positive")
        if self.min_pts < 1:
            raise ValueError("min_pts must be at least 1")


@dataclass
class Scaler:
    """Per-axis min-max transform to [0, 1] and its inverse.

    Degenerate axes (all points equal) map to 0.5 and invert back to the
    original constant.
    """

    lo: np.ndarray
    span: np.ndarray

    def transform(self, coords: np.ndarray) -> np.ndarray:
        out = np.empty_like(coords, dtype=float)
        ok = self.span > 0
        out[:, ok] = (coords[:, ok] - self.lo[ok]) / self.span[ok]
        out[:, ~ok] = 0.5
        return out

    def inverse(self, normed: np.ndarray) -> np.ndarray:
        out = normed * self.span + self.lo
        degenerate = self.span == 0
        out[:, degenerate] = self.lo[degenerate]
        return out


def normalize_points(coords: np.ndarray) -> tuple[np.ndarray, Scaler]:
    """Min-max scale each axis over this frame's points."""
    coords = np.asarray(coords, dtype=float)
    if coords.ndim != 2 or len(coords) == 0:
        raise ValueError("need a nonempty (n, d) array of points")
    lo = coords.min(axis=0)
    span = coords.max(axis=0) - lo
    scaler = Scaler(lo=lo, span=span)
    return scaler.transform(coords), scaler


def _neighbor_lists(points: np.ndarray, eps: float) -> list[np.ndarray]:
    n = len(points)
    eps2 = eps * eps
    block = max(1, int(4_000_000 // max(n, 1)))
    neighbors: list[np.ndarray] = []
    for start in range(0, n, block):
        chunk = points[start : start + block]
        d2 = ((chunk[:, None, :] - points[None, :, :]) ** 2).sum(axis=2)
        for row in d2:
            neighbors.append(np.flatnonzero(row <= eps2))
    return neighbors


def dbscan(points: np.ndarray, params: DetectParams) -> np.ndarray:
    """Label points with cluster ids (0, 1, ...) or NOISE (-1).

    Core points have at least ``min_pts`` neighbors within ``eps``
    (inclusive boundary, the point itself counted); clusters are maximal
    density-connected sets grown in ascending point order, so border-point
    ties resolve to the first cluster that reaches them.
    """
    points = np.asarray(points, dtype=float)
    n = len(points)
    labels = np.full(n, -2, dtype=int)  # -2 = unvisited
    if n == 0:
        return labels
    neighbors = _neighbor_lists(points, params.eps)
    is_core = np.array([len(nb) >= params.min_pts for nb in neighbors])

    cluster = 0
    for i in range(n):
        if labels[i] != -2:
            continue
        if not is_core[i]:
            labels[i] = NOISE
            continue
        labels[i] = cluster
        seeds = list(neighbors[i])
        k = 0
        while k < len(seeds):
            j = seeds[k]
            k += 1
            if labels[j] == NOISE:
                labels[j] = cluster  # border point reclaimed
            if labels[j] != -2:
                continue
            labels[j] = cluster
            if is_core[j]:
                seeds.extend(neighbors[j])
        cluster += 1
    return labels


def power_weighted_centroid(coords: np.ndarray, powers: np.ndarray) -> np.ndarray:
    """Mean of the points weighted by received power."""
    total = float(np.sum(powers))
    if total <= 0:
        raise ValueError("cluster has no positive power")
    return (coords * powers[:, None]).sum(axis=0) / total


@dataclass
class Cluster:
    indices: np.ndarray  # into the frame's PointCloud
    centroid: np.ndarray  # physical units, (r, v) or (r, v, theta)
    total_power: float

    def __len__(self) -> int:
        return len(self.indices)


@dataclass
class DetectionSet:
    clusters: list[Cluster]
    frame_index: int
    n_noise: int = 0

    def __len__(self) -> int:
        return len(self.clusters)


def detect_frame(cloud: PointCloud, params: DetectParams, frame_index: int = 0) -> DetectionSet:
    """Cluster one frame's denoised points into detections.

    Coordinates are min-max normalized per frame before clustering so
    ``eps`` stays meaningful as the scene geometry changes; centroids are
    computed back in physical units.
    """
    if len(cloud) == 0:
        return DetectionSet(clusters=[], frame_index=frame_index)
    normed, _ = normalize_points(cloud.coords)
    labels = dbscan(normed, params)
    clusters = []
    for cid in range(labels.max() + 1):
        idx = np.flatnonzero(labels == cid)
        powers = cloud.powers[idx]
        clusters.append(
            Cluster(
                indices=idx,
                centroid=power_weighted_centroid(cloud.coords[idx], powers),
                total_power=float(powers.sum()),
            )
        )
    return DetectionSet(
        clusters=clusters,
        frame_index=frame_index,
        n_noise=int(np.sum(labels == NOISE)),
    )
