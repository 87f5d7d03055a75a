"""Identity assignment, temporal label smoothing and evaluation metrics."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import assoc

__all__ = [
    "UNKNOWN_THRESHOLD",
    "SMOOTHING_WINDOW",
    "assign_instant_labels",
    "smooth_label",
    "SubjectMetrics",
    "Metrics",
    "compute_metrics",
]

UNKNOWN_THRESHOLD = 0.1
SMOOTHING_WINDOW = 9


def assign_instant_labels(
    score_matrix: np.ndarray, unknown_threshold: float = UNKNOWN_THRESHOLD
) -> list[int | None]:
    """Jointly exclusive per-frame labels from the trajectory-class score matrix.

    Minimum-cost assignment on the negated scores guarantees no class goes
    to two trajectories.  A trajectory left without a class (more
    trajectories than classes) or whose assigned score falls below the
    threshold is labeled unknown (None).
    """
    scores = np.asarray(score_matrix, dtype=float)
    if scores.ndim != 2:
        raise ValueError("score matrix must be (n_trajectories, n_classes)")
    labels: list[int | None] = [None] * scores.shape[0]
    if scores.size == 0:
        return labels
    assignment = assoc.hungarian(-scores)
    for row, col in assignment.pairs:
        if scores[row, col] >= unknown_threshold:
            labels[row] = col
    return labels


def smooth_label(
    label_history: list[int],
    final_label: int | None,
    instant: int | None,
    window: int = SMOOTHING_WINDOW,
) -> int | None:
    """Advance one trajectory's smoothed label by one frame.

    ``label_history`` is mutated in place: concrete instantaneous labels
    are appended (unknown votes are not, so a flip still takes ``window``
    concrete agreeing votes).  The first concrete vote becomes the final
    label outright; afterwards the final label flips to a new value only
    once the last ``window`` votes all agree on it.
    """
    if instant is not None:
        label_history.append(instant)
        if len(label_history) > window:
            del label_history[: len(label_history) - window]
    if final_label is None:
        return instant
    if (
        len(label_history) >= window
        and label_history[-1] != final_label
        and all(vote == label_history[-1] for vote in label_history[-window:])
    ):
        return label_history[-1]
    return final_label


# --- evaluation ----------------------------------------------------------------


@dataclass
class SubjectMetrics:
    scored: int = 0
    detected: int = 0
    labeled: int = 0
    correct: int = 0
    unknown: int = 0

    @property
    def accuracy(self) -> float:
        return self.correct / self.labeled if self.labeled else 0.0

    @property
    def r_und(self) -> float:
        return (self.scored - self.detected) / self.scored if self.scored else 0.0

    @property
    def r_unk(self) -> float:
        return self.unknown / self.scored if self.scored else 0.0


@dataclass
class Metrics:
    per_subject: dict[int, SubjectMetrics] = field(default_factory=dict)

    @property
    def accuracy(self) -> float:
        vals = [m.accuracy for m in self.per_subject.values()]
        return float(np.mean(vals)) if vals else 0.0

    @property
    def r_und(self) -> float:
        vals = [m.r_und for m in self.per_subject.values()]
        return float(np.mean(vals)) if vals else 0.0

    @property
    def r_unk(self) -> float:
        vals = [m.r_unk for m in self.per_subject.values()]
        return float(np.mean(vals)) if vals else 0.0

    def table(self) -> str:
        lines = [f"{'subject':>8} {'accuracy':>9} {'r_und':>7} {'r_unk':>7} {'frames':>7}"]
        for sid in sorted(self.per_subject):
            m = self.per_subject[sid]
            lines.append(
                f"{sid:>8} {m.accuracy:>9.4f} {m.r_und:>7.4f} {m.r_unk:>7.4f} {m.scored:>7}"
            )
        lines.append(
            f"{'average':>8} {self.accuracy:>9.4f} {self.r_und:>7.4f} {self.r_unk:>7.4f}"
        )
        return "\n".join(lines)


def compute_metrics(
    truth: dict[int, list[tuple[int, np.ndarray]]],
    records: dict[int, list[tuple[int, np.ndarray, int | None]]],
    match_dist: float = 0.5,
    warmup_frames: int = 45,
) -> Metrics:
    """Score labeled tracks against simulator ground truth.

    ``truth`` maps frame -> [(subject_id, coords)], ``records`` maps
    frame -> [(track_id, coords, final_label)] where coords live in the
    tracking space ((r, v) for RD, (x, y) for RDA).  Subjects and tracks
    pair up greedily by distance within ``match_dist``; the warm-up frames
    a trajectory needs to fill its first window are excluded, as are any
    truth frames before a subject enters the scene.

    Per subject: accuracy = correct / labeled frames, the undetected ratio
    counts scored frames with no matched track, and the unknown ratio
    counts matched frames without a concrete label.
    """
    if not truth:
        raise ValueError("empty ground truth")
    metrics = Metrics()
    for frame in sorted(truth):
        if frame < warmup_frames:
            continue
        subjects = truth[frame]
        tracks = records.get(frame, [])
        candidates = []
        for si, (sid, s_coords) in enumerate(subjects):
            for ti, (_, t_coords, _) in enumerate(tracks):
                dist = float(np.linalg.norm(np.asarray(s_coords) - np.asarray(t_coords)))
                if dist <= match_dist:
                    candidates.append((dist, si, ti))
        candidates.sort()
        used_s, used_t = set(), set()
        matched: dict[int, int] = {}
        for dist, si, ti in candidates:
            if si in used_s or ti in used_t:
                continue
            used_s.add(si)
            used_t.add(ti)
            matched[si] = ti
        for si, (sid, _) in enumerate(subjects):
            m = metrics.per_subject.setdefault(sid, SubjectMetrics())
            m.scored += 1
            if si not in matched:
                continue
            m.detected += 1
            label = tracks[matched[si]][2]
            if label is None:
                m.unknown += 1
            else:
                m.labeled += 1
                if label == sid:
                    m.correct += 1
    return metrics
