"""Trajectory lifecycle: creation, coasting, deletion, merging, ghost removal.

A detection with no matching track starts a *tentative* trajectory, which
is promoted once it has been matched on ``min_hits`` consecutive frames (a
single miss deletes it, so the streak restarts from scratch).  A confirmed
trajectory that goes unmatched coasts on prediction for up to ``max_age``
frames before deletion.  In the RDA space, confirmed trajectories closer
than ``merge_dist_m`` collapse onto the more stable one, and any
trajectory whose state leaves the room is discarded as a multipath ghost.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from . import assoc, kalman
from .detect import DetectionSet
from .scene import Room

__all__ = [
    "TrackParams",
    "Trajectory",
    "TrajectorySet",
    "Tracker",
    "StepResult",
    "recent_state_variance",
    "remove_ghosts",
]

TENTATIVE = "tentative"
CONFIRMED = "confirmed"


@dataclass(frozen=True)
class TrackParams:
    max_age: int = 10
    min_hits: int = 15
    merge_dist_m: float = 0.5
    variance_window: int = 5
    room: Room | None = None
    box_height_m: float = 2.0
    box_width_mps: float = 2.5
    gate_threshold: float = assoc.GATE_THRESHOLD_90
    rd_merge: bool = False  # merging is an RDA measure; off for RD unless asked

    def __post_init__(self):
        if min(self.max_age, self.min_hits, self.variance_window) < 1:
            raise ValueError("lifecycle counters must be positive")
        if self.merge_dist_m <= 0:
            raise ValueError("merge distance must be positive")


@dataclass
class Trajectory:
    id: int
    kf: kalman.KalmanState
    status: str = TENTATIVE
    missed: int = 0
    hit_streak: int = 1
    state_history: list = field(default_factory=list)
    mud_buffer: object = None  # attached by the pipeline
    label_history: list = field(default_factory=list)
    final_label: int | None = None

    @property
    def confirmed(self) -> bool:
        return self.status == CONFIRMED

    def record_state(self, window: int):
        self.state_history.append(self.kf.x.copy())
        if len(self.state_history) > window:
            del self.state_history[0]


def recent_state_variance(traj: Trajectory) -> float:
    """Trace of the sample covariance of the stored state estimates.

    Fewer than two stored estimates count as perfectly stable (0).
    """
    if len(traj.state_history) < 2:
        return 0.0
    states = np.stack(traj.state_history)
    return float(np.sum(np.var(states, axis=0, ddof=1)))


@dataclass
class TrajectorySet:
    active: list[Trajectory] = field(default_factory=list)
    next_id: int = 0

    def new(self, kf_state) -> Trajectory:
        traj = Trajectory(id=self.next_id, kf=kf_state)
        self.next_id += 1
        self.active.append(traj)
        return traj

    def confirmed(self) -> list[Trajectory]:
        return [t for t in self.active if t.confirmed]

    def remove(self, traj: Trajectory):
        self.active.remove(traj)


@dataclass
class StepResult:
    events: list[dict]
    assigned: dict[int, int]  # trajectory id -> cluster index, this frame


def remove_ghosts(tracks: TrajectorySet, room: Room | None, frame: int = 0) -> list[dict]:
    """Delete trajectories whose estimated position lies outside the room.

    Only meaningful for cartesian (RDA) states; called on an RD tracker the
    room test would compare range/velocity against wall coordinates, so it
    degrades to a warning no-op.
    """
    events = []
    if room is None:
        return events
    for traj in list(tracks.active):
        if traj.kf.space != "rda":
            warnings.warn("ghost removal needs cartesian states; skipping in RD space")
            return events
        x, y = traj.kf.x[0], traj.kf.x[2]
        if not room.contains(x, y):
            tracks.remove(traj)
            events.append(
                {"frame": frame, "event": "deleted", "track": traj.id, "reason": "ghost",
                 "x": float(x), "y": float(y)}
            )
    return events


class Tracker:
    """Single-writer association and lifecycle manager for one pipeline."""

    def __init__(
        self,
        space: str,
        kf_params,
        params: TrackParams = TrackParams(),
    ):
        if space not in ("rd", "rda"):
            raise ValueError(f"unknown tracking space {space!r}")
        if space == "rd" and not isinstance(kf_params, kalman.KalmanParamsRD):
            raise ValueError("RD tracking needs KalmanParamsRD")
        if space == "rda" and not isinstance(kf_params, kalman.KalmanParamsRDA):
            raise ValueError("RDA tracking needs KalmanParamsRDA")
        self.space = space
        self.kf_params = kf_params
        self.params = params
        self.tracks = TrajectorySet()
        self.frame = -1

    # -- observations ----------------------------------------------------

    def _observation(self, cluster) -> np.ndarray:
        if self.space == "rd":
            return np.asarray(cluster.centroid[:2], dtype=float)
        r, theta = cluster.centroid[0], cluster.centroid[2]
        return kalman.polar_to_cartesian(r, theta)

    def _box(self, center) -> assoc.Box:
        return assoc.Box(
            center=(float(center[0]), float(center[1])),
            height_m=self.params.box_height_m,
            width_mps=self.params.box_width_mps,
        )

    def _cost_matrix(self, detections: DetectionSet) -> assoc.CostMatrix:
        n_tracks = len(self.tracks.active)
        n_dets = len(detections.clusters)
        costs = np.zeros((n_tracks, n_dets))
        forbidden = np.zeros((n_tracks, n_dets), dtype=bool)
        for i, traj in enumerate(self.tracks.active):
            if self.space == "rd":
                box_i = self._box(traj.kf.x)
                for j, cluster in enumerate(detections.clusters):
                    cost = assoc.iou_cost(box_i, self._box(cluster.centroid[:2]))
                    if cost == 0.0:
                        forbidden[i, j] = True  # no overlap: a meaningless match
                    else:
                        dr = abs(traj.kf.x[0] - cluster.centroid[0])
                        # deterministic tie-breaks: smaller range gap, then lower indices
                        costs[i, j] = cost + 1e-9 * dr + 1e-12 * i + 1e-13 * j
            else:
                for j, cluster in enumerate(detections.clusters):
                    inno = kalman.innovation(traj.kf, self._observation(cluster), self.kf_params)
                    costs[i, j] = assoc.mahalanobis_cost(inno.residual, inno.covariance)
        matrix = assoc.CostMatrix(costs=costs, forbidden=forbidden)
        if self.space == "rda":
            matrix = assoc.gate(matrix, self.params.gate_threshold)
        return matrix

    # -- the per-frame step ------------------------------------------------

    def step(self, detections: DetectionSet) -> StepResult:
        """Advance every trajectory by one frame against this frame's detections."""
        self.frame += 1
        frame = self.frame
        events: list[dict] = []
        assigned: dict[int, int] = {}

        for traj in self.tracks.active:
            traj.kf = kalman.predict(traj.kf, self.kf_params)

        matches: list[tuple[Trajectory, int]] = []
        matched_tracks: set[int] = set()
        matched_dets: set[int] = set()
        if self.tracks.active and detections.clusters:
            assignment = assoc.hungarian(self._cost_matrix(detections))
            for row, col in assignment.pairs:
                traj = self.tracks.active[row]
                matches.append((traj, col))
                matched_tracks.add(traj.id)
                matched_dets.add(col)

        for traj, col in matches:
            z = self._observation(detections.clusters[col])
            traj.kf, _ = kalman.update(traj.kf, z, self.kf_params)
            traj.missed = 0
            traj.hit_streak += 1
            assigned[traj.id] = col
            events.append({"frame": frame, "event": "assigned", "track": traj.id, "detection": col})
            if traj.status == TENTATIVE and traj.hit_streak >= self.params.min_hits:
                traj.status = CONFIRMED
                events.append({"frame": frame, "event": "confirmed", "track": traj.id})

        for traj in list(self.tracks.active):
            if traj.id in matched_tracks:
                continue
            if traj.status == TENTATIVE:
                # a single miss breaks the required consecutive-detection streak
                self.tracks.remove(traj)
                events.append(
                    {"frame": frame, "event": "deleted", "track": traj.id, "reason": "tentative_miss"}
                )
                continue
            traj.missed += 1
            traj.hit_streak = 0
            if traj.missed >= self.params.max_age:
                self.tracks.remove(traj)
                events.append({"frame": frame, "event": "deleted", "track": traj.id, "reason": "age"})
            else:
                events.append({"frame": frame, "event": "coasted", "track": traj.id, "missed": traj.missed})

        for col, cluster in enumerate(detections.clusters):
            if col in matched_dets:
                continue
            z = self._observation(cluster)
            if self.space == "rd":
                state = kalman.init_state_rd(z, self.kf_params)
            else:
                state = kalman.init_state_rda(z, self.kf_params)
            traj = self.tracks.new(state)
            assigned[traj.id] = col
            events.append({"frame": frame, "event": "created", "track": traj.id, "detection": col})
            if self.params.min_hits <= 1:
                traj.status = CONFIRMED
                events.append({"frame": frame, "event": "confirmed", "track": traj.id})

        for traj in self.tracks.active:
            traj.record_state(self.params.variance_window)

        if self.space == "rda" or self.params.rd_merge:
            events.extend(self._merge(frame))
        if self.space == "rda":
            events.extend(remove_ghosts(self.tracks, self.params.room, frame))

        assigned = {tid: col for tid, col in assigned.items() if any(t.id == tid for t in self.tracks.active)}
        return StepResult(events=events, assigned=assigned)

    def _merge(self, frame: int) -> list[dict]:
        events = []
        while True:
            confirmed = self.tracks.confirmed()
            worst = None
            for i in range(len(confirmed)):
                for j in range(i + 1, len(confirmed)):
                    a, b = confirmed[i], confirmed[j]
                    dist = float(np.linalg.norm(a.kf.position() - b.kf.position()))
                    if dist < self.params.merge_dist_m:
                        va, vb = recent_state_variance(a), recent_state_variance(b)
                        # delete the shakier track; newer id loses ties
                        loser = (a if va > vb else b) if va != vb else max(a, b, key=lambda t: t.id)
                        if worst is None or dist < worst[0]:
                            worst = (dist, loser, a if loser is b else b)
            if worst is None:
                return events
            dist, loser, kept = worst
            self.tracks.remove(loser)
            events.append(
                {"frame": frame, "event": "merged", "track": loser.id, "into": kept.id,
                 "distance": dist}
            )

    # -- introspection -----------------------------------------------------

    @property
    def trajectories(self) -> list[Trajectory]:
        return self.tracks.active

    def confirmed(self) -> list[Trajectory]:
        return self.tracks.confirmed()

    @property
    def n_confirmed(self) -> int:
        return len(self.tracks.confirmed())
