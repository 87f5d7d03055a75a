"""Detection: normalization, density clustering, power-weighted centroids."""

import numpy as np
import pytest

from radarid.detect import (
    DetectParams,
    dbscan,
    detect_frame,
    normalize_points,
    power_weighted_centroid,
)
from radarid.maps import PointCloud


def brute_force_core_partition(points, eps, min_pts):
    """Oracle: connected components of the eps-graph over core points."""
    n = len(points)
    d2 = ((points[:, None, :] - points[None, :, :]) ** 2).sum(-1)
    neighbor_counts = (d2 <= eps * eps).sum(axis=1)
    core = neighbor_counts >= min_pts
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for i in range(n):
        if not core[i]:
            continue
        for j in range(i + 1, n):
            if core[j] and d2[i, j] <= eps * eps:
                parent[find(i)] = find(j)
    groups = {}
    for i in range(n):
        if core[i]:
            groups.setdefault(find(i), set()).add(i)
    return core, {frozenset(g) for g in groups.values()}


def labels_to_core_partition(labels, core):
    groups = {}
    for i, lab in enumerate(labels):
        if core[i] and lab >= 0:
            groups.setdefault(lab, set()).add(i)
    return {frozenset(g) for g in groups.values()}


def test_normalize_basic():
    normed, _ = normalize_points(np.array([[0.0], [5.0], [10.0]]))
    np.testing.assert_allclose(normed[:, 0], [0.0, 0.5, 1.0])


def test_normalize_degenerate_single_point():
    normed, scaler = normalize_points(np.array([[3.0, 7.0]]))
    np.testing.assert_allclose(normed, [[0.5, 0.5]])
    np.testing.assert_allclose(scaler.inverse(normed), [[3.0, 7.0]])


def test_normalize_round_trip():
    rng = np.random.default_rng(0)
    coords = rng.normal(size=(40, 3)) * [5.0, 1.0, 0.2] + [8.0, 0.0, 0.1]
    normed, scaler = normalize_points(coords)
    assert normed.min() >= 0 and normed.max() <= 1
    np.testing.assert_allclose(scaler.inverse(normed), coords, atol=1e-12)


def test_dbscan_two_blobs():
    rng = np.random.default_rng(1)
    blob_a = rng.normal(scale=0.01, size=(60, 2)) + [0.2, 0.2]
    blob_b = rng.normal(scale=0.01, size=(60, 2)) + [0.7, 0.7]
    points = np.vstack([blob_a, blob_b])
    labels = dbscan(points, DetectParams(eps=0.04, min_pts=40))
    assert set(labels) == {0, 1}
    assert (labels[:60] == labels[0]).all()
    assert (labels[60:] == labels[60]).all()
    assert labels[0] != labels[60]


def test_dbscan_sparse_points_are_noise():
    rng = np.random.default_rng(2)
    points = rng.random((10, 2))
    labels = dbscan(points, DetectParams(eps=0.04, min_pts=40))
    assert (labels == -1).all()


def test_dbscan_duplicates_one_cluster():
    points = np.tile([[0.5, 0.5]], (50, 1))
    labels = dbscan(points, DetectParams(eps=0.04, min_pts=40))
    assert (labels == 0).all()


def test_dbscan_matches_graph_oracle():
    rng = np.random.default_rng(3)
    for trial in range(30):
        n = int(rng.integers(20, 200))
        points = rng.random((n, 2))
        eps = float(rng.uniform(0.05, 0.25))
        min_pts = int(rng.integers(2, 12))
        labels = dbscan(points, DetectParams(eps=eps, min_pts=min_pts))
        core, expected = brute_force_core_partition(points, eps, min_pts)
        assert labels_to_core_partition(labels, core) == expected, f"trial {trial}"


def test_dbscan_core_partition_permutation_stable():
    rng = np.random.default_rng(4)
    points = np.vstack(
        [rng.normal(scale=0.03, size=(50, 2)) + c for c in ([0.2, 0.2], [0.8, 0.3], [0.5, 0.8])]
    )
    params = DetectParams(eps=0.08, min_pts=10)
    base = dbscan(points, params)
    core, base_partition = brute_force_core_partition(points, params.eps, params.min_pts)
    perm = rng.permutation(len(points))
    shuffled = dbscan(points[perm], params)
    unshuffled = np.empty_like(shuffled)
    unshuffled[perm] = shuffled
    assert labels_to_core_partition(base, core) == labels_to_core_partition(unshuffled, core)


def test_centroid_equal_weights_midpoint():
    c = power_weighted_centroid(np.array([[0.0, 0.0], [2.0, 4.0]]), np.array([1.0, 1.0]))
    np.testing.assert_allclose(c, [1.0, 2.0])


def test_centroid_hand_weights():
    c = power_weighted_centroid(np.array([[1.0, 1.0], [3.0, 3.0]]), np.array([1.0, 3.0]))
    np.testing.assert_allclose(c, [2.5, 2.5])


def test_centroid_single_point():
    c = power_weighted_centroid(np.array([[4.0, -1.0]]), np.array([2.0]))
    np.testing.assert_allclose(c, [4.0, -1.0])


def test_centroid_zero_power_error():
    with pytest.raises(ValueError, match="power"):
        power_weighted_centroid(np.array([[1.0, 1.0]]), np.array([0.0]))


def test_centroid_equivariance():
    rng = np.random.default_rng(5)
    coords = rng.normal(size=(20, 2))
    powers = rng.random(20) + 0.1
    base = power_weighted_centroid(coords, powers)
    shifted = power_weighted_centroid(coords + [3.0, -2.0], powers)
    np.testing.assert_allclose(shifted, base + [3.0, -2.0], atol=1e-12)
    scaled = power_weighted_centroid(coords * 2.5, powers)
    np.testing.assert_allclose(scaled, base * 2.5, atol=1e-12)
    repowered = power_weighted_centroid(coords, powers * 7.0)
    np.testing.assert_allclose(repowered, base, atol=1e-12)


def make_cloud(coords, powers):
    coords = np.asarray(coords, dtype=float)
    return PointCloud(
        coords=coords,
        powers=np.asarray(powers, dtype=float),
        range_bins=np.arange(len(coords)),
        doppler_bins=np.zeros(len(coords), dtype=int),
        n_doppler_bins=8,
    )


def test_detect_frame_clusters_disjoint():
    rng = np.random.default_rng(6)
    blob_a = rng.normal(scale=0.05, size=(60, 2)) + [4.0, 1.0]
    blob_b = rng.normal(scale=0.05, size=(60, 2)) + [9.0, -1.0]
    coords = np.vstack([blob_a, blob_b])
    cloud = make_cloud(coords, np.ones(120))
    detections = detect_frame(cloud, DetectParams(eps=0.05, min_pts=20), frame_index=3)
    assert len(detections.clusters) == 2
    assert detections.frame_index == 3
    seen = set()
    for cluster in detections.clusters:
        ids = set(cluster.indices.tolist())
        assert not ids & seen
        seen |= ids
        assert len(cluster) >= 20
        lo = coords[cluster.indices].min(axis=0)
        hi = coords[cluster.indices].max(axis=0)
        assert np.all(cluster.centroid >= lo) and np.all(cluster.centroid <= hi)


def test_detect_frame_empty_cloud():
    cloud = make_cloud(np.zeros((0, 2)), np.zeros(0))
    detections = detect_frame(cloud, DetectParams(), frame_index=0)
    assert len(detections.clusters) == 0
