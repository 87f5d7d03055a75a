"""The per-frame online loop: maps -> detect -> track -> micro-Doppler -> labels."""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field, replace

import numpy as np

from . import kalman, labeler, maps, mud
from .classifier import GaitClassifier
from .detect import DetectParams, detect_frame
from .scene import Room, SceneScript
from .tracks import Tracker, TrackParams

__all__ = [
    "MapConfig",
    "PipelineConfig",
    "TrackRecord",
    "FrameResult",
    "Pipeline",
    "run_online",
    "sweep",
    "write_records_csv",
    "read_records_csv",
    "write_truth_csv",
    "read_truth_csv",
    "ground_truth",
    "write_events_jsonl",
]


@dataclass(frozen=True)
class MapConfig:
    n_fft_range: int = 1024
    n_fft_doppler: int = 256
    n_fft_angle: int = 64
    rd_range_bins: int = maps.RD_RANGE_BINS
    rda_range_bins: int = maps.RDA_RANGE_BINS
    static_center_bins: int = maps.STATIC_CENTER_BINS
    static_edge_bins: int = maps.STATIC_EDGE_BINS


@dataclass(frozen=True)
class PipelineConfig:
    space: str = "rd"  # "rd" | "rda"
    mode: str = "joint"  # "joint" | "separate"
    antenna: int = 0
    map_cfg: MapConfig = MapConfig()
    denoise: maps.DenoiseProfile = maps.DenoiseProfile()
    detect: DetectParams = DetectParams()
    kf_rd: kalman.KalmanParamsRD = kalman.KalmanParamsRD()
    kf_rda: kalman.KalmanParamsRDA = kalman.KalmanParamsRDA()
    track: TrackParams = TrackParams()
    mud_bins: int = mud.N_DOPPLER_BINS
    mud_frames: int = mud.WINDOW_FRAMES
    smoothing_window: int = labeler.SMOOTHING_WINDOW
    unknown_threshold: float = labeler.UNKNOWN_THRESHOLD
    match_dist: float = 0.5  # track-to-truth pairing radius for metrics

    def __post_init__(self):
        if self.space not in ("rd", "rda"):
            raise ValueError(f"unknown space {self.space!r}")
        if self.mode not in ("joint", "separate"):
            raise ValueError(f"unknown mode {self.mode!r}")

    @property
    def warmup_frames(self) -> int:
        """Frames before the first label can exist: confirmation plus one window."""
        return self.track.min_hits + self.mud_frames


@dataclass
class TrackRecord:
    frame: int
    track_id: int
    coords: np.ndarray  # (r, v) for RD, (x, y) for RDA
    instant_label: int | None
    final_label: int | None
    scores: np.ndarray | None


@dataclass
class FrameResult:
    frame_index: int
    n_detections: int
    records: list[TrackRecord]
    events: list[dict]
    timing: dict[str, float] = field(default_factory=dict)


class Pipeline:
    """Single online pipeline instance; strictly sequential over frames."""

    def __init__(self, config: PipelineConfig, model: GaitClassifier | None = None):
        self.config = config
        self.model = model
        if model is not None:
            if model.config.n_doppler_bins != config.mud_bins or model.config.window_frames != config.mud_frames:
                raise ValueError(
                    "classifier input "
                    f"({model.config.n_doppler_bins}x{model.config.window_frames}) does not match "
                    f"pipeline micro-Doppler shape ({config.mud_bins}x{config.mud_frames})"
                )
        kf = config.kf_rd if config.space == "rd" else config.kf_rda
        self.tracker = Tracker(config.space, kf, config.track)

    def process(self, cube) -> FrameResult:
        cfg = self.config
        mc = cfg.map_cfg
        t0 = time.perf_counter()
        if cfg.space == "rd":
            m = maps.compute_rd(
                cube, cfg.antenna, mc.n_fft_range, mc.n_fft_doppler, mc.rd_range_bins
            )
        else:
            m = maps.compute_rda(
                cube, mc.n_fft_range, mc.n_fft_doppler, mc.n_fft_angle, mc.rda_range_bins
            )
        m = maps.remove_static(m, mc.static_center_bins, mc.static_edge_bins)
        cloud = maps.denoise(m, cfg.denoise)
        t1 = time.perf_counter()
        if cloud.n_doppler_bins != cfg.mud_bins:
            raise ValueError(
                f"map has {cloud.n_doppler_bins} Doppler bins but the pipeline expects {cfg.mud_bins}"
            )

        detections = detect_frame(cloud, cfg.detect, cube.frame_index)
        t2 = time.perf_counter()

        step = self.tracker.step(detections)
        t3 = time.perf_counter()

        windows = []
        window_trajs = []
        for traj in self.tracker.trajectories:
            if not traj.confirmed:
                continue
            if traj.mud_buffer is None:
                traj.mud_buffer = mud.MudBuffer(cfg.mud_bins, cfg.mud_frames)
            cluster_idx = step.assigned.get(traj.id)
            vec = None
            if cluster_idx is not None:
                vec = mud.extract_mud(cloud, detections.clusters[cluster_idx], cfg.mud_bins)
            window = mud.push_and_window(traj.mud_buffer, vec, traj.id, cube.frame_index)
            if window is not None:
                windows.append(window.image)
                window_trajs.append(traj)
        t4 = time.perf_counter()

        scores = None
        if self.model is not None and windows:
            scores = self.model.predict_proba(np.stack(windows))
        t5 = time.perf_counter()

        instant_by_id: dict[int, int | None] = {}
        scores_by_id: dict[int, np.ndarray] = {}
        if scores is not None:
            if cfg.mode == "joint":
                instants = labeler.assign_instant_labels(scores, cfg.unknown_threshold)
                for traj, instant, row in zip(window_trajs, instants, scores):
                    instant_by_id[traj.id] = instant
                    scores_by_id[traj.id] = row
                    traj.final_label = labeler.smooth_label(
                        traj.label_history, traj.final_label, instant, cfg.smoothing_window
                    )
            else:  # one-shot labeling per trajectory, never revisited
                for traj, row in zip(window_trajs, scores):
                    best = int(np.argmax(row))
                    instant = best if row[best] >= cfg.unknown_threshold else None
                    instant_by_id[traj.id] = instant
                    scores_by_id[traj.id] = row
                    if traj.final_label is None and instant is not None:
                        traj.final_label = instant

        records = [
            TrackRecord(
                frame=cube.frame_index,
                track_id=traj.id,
                coords=traj.kf.position(),
                instant_label=instant_by_id.get(traj.id),
                final_label=traj.final_label,
                scores=scores_by_id.get(traj.id),
            )
            for traj in self.tracker.trajectories
            if traj.confirmed
        ]
        t6 = time.perf_counter()
        timing = {
            "maps": t1 - t0,
            "detect": t2 - t1,
            "track": t3 - t2,
            "mud": t4 - t3,
            "classify": t5 - t4,
            "label": t6 - t5,
        }
        return FrameResult(
            frame_index=cube.frame_index,
            n_detections=len(detections.clusters),
            records=records,
            events=step.events,
            timing=timing,
        )


def run_online(config: PipelineConfig, cubes, model: GaitClassifier | None = None):
    """Run the online loop over a cube stream, yielding one result per frame."""
    pipeline = Pipeline(config, model)
    for cube in cubes:
        yield pipeline.process(cube)


def sweep(param_path: str, values, run_one) -> list[dict]:
    """Evaluate a scalar config parameter over a list of values.

    ``run_one(value)`` must return a Metrics object for a pipeline run with
    the parameter set to ``value``; the result rows feed the sweep CSV.
    """
    rows = []
    for value in values:
        metrics = run_one(value)
        rows.append(
            {
                "parameter": param_path,
                "value": value,
                "accuracy": metrics.accuracy,
                "r_und": metrics.r_und,
                "r_unk": metrics.r_unk,
            }
        )
    return rows


def override_config(config: PipelineConfig, param_path: str, value) -> PipelineConfig:
    """Return a config with one (possibly nested) field replaced."""
    parts = param_path.split(".")
    if len(parts) == 1:
        return replace(config, **{parts[0]: value})
    if len(parts) == 2:
        section = getattr(config, parts[0])
        return replace(config, **{parts[0]: replace(section, **{parts[1]: value})})
    raise ValueError(f"cannot address config field {param_path!r}")


# --- ground truth and result files --------------------------------------------


def ground_truth(scene: SceneScript, frame_period_s: float) -> list[tuple]:
    """Per-frame torso state of every subject: (frame, id, x, y, r, v)."""
    rows = []
    for t in range(scene.duration_frames):
        ts = t * frame_period_s
        for subject in scene.subjects:
            path = subject.torso.path
            x, y = path.position(ts)
            vx, vy = path.velocity(ts)
            r = float(np.hypot(x, y))
            v = float((x * vx + y * vy) / r) if r > 0 else 0.0
            rows.append((t, subject.identity, float(x), float(y), r, v))
    return rows


def write_truth_csv(path, rows):
    with open(path, "w") as f:
        f.write("frame,subject,x,y,r,v\n")
        for frame, sid, x, y, r, v in rows:
            f.write(f"{frame},{sid},{x:.9g},{y:.9g},{r:.9g},{v:.9g}\n")


def read_truth_csv(path, space: str) -> dict[int, list[tuple[int, np.ndarray]]]:
    """Truth rows keyed by frame, with coordinates in the tracking space."""
    truth: dict[int, list[tuple[int, np.ndarray]]] = {}
    with open(path) as f:
        header = f.readline().strip().split(",")
        if header != ["frame", "subject", "x", "y", "r", "v"]:
            raise ValueError(f"unexpected truth header {header}")
        for line in f:
            frame, sid, x, y, r, v = line.strip().split(",")
            coords = np.array([float(r), float(v)]) if space == "rd" else np.array([float(x), float(y)])
            truth.setdefault(int(frame), []).append((int(sid), coords))
    return truth


def write_records_csv(path, results, n_classes: int):
    """Per-frame trajectory records: states, labels, score vectors."""

    def fmt_label(x):
        return "" if x is None else str(x)

    with open(path, "w") as f:
        score_cols = ",".join(f"score_{u}" for u in range(n_classes))
        f.write(f"frame,track,c0,c1,instant,final,{score_cols}\n")
        for result in results:
            for rec in result.records:
                scores = rec.scores if rec.scores is not None else [float("nan")] * n_classes
                f.write(
                    f"{rec.frame},{rec.track_id},{rec.coords[0]:.9g},{rec.coords[1]:.9g},"
                    f"{fmt_label(rec.instant_label)},{fmt_label(rec.final_label)},"
                    + ",".join(f"{s:.9g}" for s in scores)
                    + "\n"
                )


def read_records_csv(path) -> dict[int, list[tuple[int, np.ndarray, int | None]]]:
    records: dict[int, list[tuple[int, np.ndarray, int | None]]] = {}
    with open(path) as f:
        header = f.readline().strip().split(",")
        if header[:6] != ["frame", "track", "c0", "c1", "instant", "final"]:
            raise ValueError(f"unexpected records header {header}")
        for line in f:
            parts = line.strip().split(",")
            frame = int(parts[0])
            coords = np.array([float(parts[2]), float(parts[3])])
            final = int(parts[5]) if parts[5] != "" else None
            records.setdefault(frame, []).append((int(parts[1]), coords, final))
    return records


def write_events_jsonl(path, results):
    with open(path, "w") as f:
        for result in results:
            for event in result.events:
                f.write(json.dumps(event) + "\n")
