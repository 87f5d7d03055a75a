"""Ready-made desk-scale scenes: training walks, formations, crossings, ghosts.

These fixtures run the full chain in seconds on a laptop.  They keep the
radar waveform at its stock values but use fewer receive antennas for RDA
scenes and a detection density tuned to point-scatterer subjects, which
light up far fewer cells than a real human body.
"""

from __future__ import annotations

import numpy as np

from .detect import DetectParams, detect_frame
from .maps import DenoiseProfile, compute_rd, denoise, remove_static
from .mud import extract_mud, windows_from_series
from .params import RadarParams
from .pipeline import MapConfig, PipelineConfig
from .scene import Room, SceneScript, Scatterer, SubjectModel, WaypointPath, make_walker
from .simulate import synthesize_frame
from .tracks import TrackParams

__all__ = [
    "GAIT_PROFILES",
    "desk_radar",
    "desk_pipeline_config",
    "solo_walk_scene",
    "three_subject_scene",
    "square_formation_scene",
    "crossing_scene",
    "ghost_scene",
    "solo_mud_series",
    "build_training_windows",
]

# Gait parameters that tell the four stock identities apart: cadence and
# limb swing amplitudes differ, walking speeds deliberately overlap.
GAIT_PROFILES = [
    {"gait_freq_hz": 0.85, "leg_amp_mps": 0.80, "arm_amp_mps": 0.35, "torso_bounce_mps": 0.10},
    {"gait_freq_hz": 1.55, "leg_amp_mps": 1.20, "arm_amp_mps": 0.30, "torso_bounce_mps": 0.06},
    {"gait_freq_hz": 2.00, "leg_amp_mps": 0.65, "arm_amp_mps": 0.30, "torso_bounce_mps": 0.16},
    {"gait_freq_hz": 1.05, "leg_amp_mps": 1.85, "arm_amp_mps": 1.10, "torso_bounce_mps": 0.22},
]

DESK_NOISE_POWER = 1.0


def desk_radar(space: str = "rd") -> RadarParams:
    """Stock waveform; one antenna for RD work, eight for RDA."""
    return RadarParams(n_antennas=1 if space == "rd" else 8)


def desk_pipeline_config(space: str = "rd", mode: str = "joint", room: Room | None = None) -> PipelineConfig:
    """Pipeline settings tuned for simulated point-scatterer subjects.

    The RDA map has over thirty times the cells of an RD map, so its
    threshold profile sits higher above the noise floor to keep the
    expected number of noise cells per frame near zero.
    """
    if space == "rd":
        denoise = DenoiseProfile(near_db=18.0, far_db=8.0)
    else:
        denoise = DenoiseProfile(near_db=28.0, far_db=18.0)
    return PipelineConfig(
        space=space,
        mode=mode,
        map_cfg=MapConfig(),
        denoise=denoise,
        detect=DetectParams(eps=0.09, min_pts=12),
        track=TrackParams(room=room),
    )


def _walker(identity: int, waypoints, phase: float = 0.0, profile: int | None = None) -> SubjectModel:
    spec = GAIT_PROFILES[(identity if profile is None else profile) % len(GAIT_PROFILES)]
    return make_walker(
        identity,
        waypoints,
        gait_freq_hz=spec["gait_freq_hz"],
        leg_amp_mps=spec["leg_amp_mps"],
        arm_amp_mps=spec["arm_amp_mps"],
        torso_bounce_mps=spec["torso_bounce_mps"],
        phase_rad=phase,
        leg_segments=3,
        arm_segments=2,
    )


def _lane_waypoints(y: float, r0: float, r1: float, speeds, t0: float = 0.0):
    """Back-and-forth radial lane at lateral offset y, one leg per speed."""
    out = [(t0, r0, y)]
    t, pos, target = t0, r0, r1
    for v in speeds:
        t += abs(target - pos) / v
        out.append((t, target, y))
        pos, target = target, r0 if target == r1 else r1
    return out


def solo_walk_scene(
    identity: int,
    duration_frames: int = 300,
    phase: float = 0.0,
    band: tuple[float, float] = (3.5, 6.5),
) -> SceneScript:
    """One subject pacing a short radial lane both ways at several speeds.

    The lane is short (about three meters) so any run a few seconds long
    covers outbound and inbound walking evenly; ``band`` picks the range
    interval, so training can cover the noise texture of near and far
    ranges alike.  Speeds stay within what the association boxes tolerate
    across a turnaround.
    """
    speeds = [1.0, 1.15, 0.8, 1.1, 0.9, 1.05, 0.95, 1.0, 0.85, 1.1]
    waypoints = _lane_waypoints(0.3, band[0], band[1], speeds)
    subject = _walker(identity, waypoints, phase=phase)
    return SceneScript(
        subjects=[subject],
        room=Room(0.5, 18.0, -2.2, 2.2),
        duration_frames=duration_frames,
        noise_power=DESK_NOISE_POWER,
    )


def three_subject_scene(duration_frames: int = 240) -> SceneScript:
    """Three subjects in separated range lanes, varied speeds; the RD scenario.

    Lane gaps stay above the clustering reach so neighbors never share a
    cluster, and speeds stay below half the association box width so a
    turnaround cannot throw a track.
    """
    lanes = [
        _lane_waypoints(-0.5, 3.0, 7.6, [1.05, 0.9, 1.15, 1.0]),
        _lane_waypoints(0.4, 9.6, 13.6, [0.95, 1.15, 0.85, 1.05]),
        _lane_waypoints(1.0, 15.3, 17.8, [0.8, 0.95, 0.85, 1.0]),
    ]
    subjects = [_walker(i, lanes[i], phase=0.7 * i) for i in range(3)]
    return SceneScript(
        subjects=subjects,
        room=Room(0.5, 18.6, -2.2, 2.2),
        duration_frames=duration_frames,
        noise_power=DESK_NOISE_POWER,
    )


def _loop_waypoints(cx: float, cy: float, speed: float, laps: float, start_corner: int = 0):
    """Rectangular loop tilted against boresight so no side is purely tangential."""
    half_a, half_b = 0.6, 0.45
    tilt = np.deg2rad(38.0)
    ca, sa = np.cos(tilt), np.sin(tilt)
    corners = []
    for dx, dy in [(-half_a, -half_b), (half_a, -half_b), (half_a, half_b), (-half_a, half_b)]:
        corners.append((cx + dx * ca - dy * sa, cy + dx * sa + dy * ca))
    waypoints = []
    t = 0.0
    n_segments = int(round(laps * 4))
    pos = corners[start_corner % 4]
    waypoints.append((t, pos[0], pos[1]))
    for k in range(n_segments):
        nxt = corners[(start_corner + k + 1) % 4]
        t += float(np.hypot(nxt[0] - pos[0], nxt[1] - pos[1])) / speed
        waypoints.append((t, nxt[0], nxt[1]))
        pos = nxt
    return waypoints


def square_formation_scene(duration_frames: int = 300) -> SceneScript:
    """Four subjects looping at one common speed, pairs at equal range.

    The worst case for tracking: ranges and speeds match within each pair,
    so separation rests on azimuth and identification rests on gait alone.
    """
    speed = 1.0
    centers = [(4.0, -1.8), (4.0, 1.8), (7.0, -1.8), (7.0, 1.8)]
    subjects = []
    for i, (cx, cy) in enumerate(centers):
        waypoints = _loop_waypoints(cx, cy, speed, laps=10.0, start_corner=i)
        subjects.append(_walker(i, waypoints, phase=0.9 * i))
    return SceneScript(
        subjects=subjects,
        room=Room(0.5, 9.5, -4.0, 4.0),
        duration_frames=duration_frames,
        noise_power=DESK_NOISE_POWER,
    )


def crossing_scene(duration_frames: int = 220, swap_speeds: bool = True) -> SceneScript:
    """Two subjects meeting in range while exchanging walking speeds.

    The faster subject overtakes exactly when the slower one speeds up, so
    their clusters merge briefly and a constant-velocity prediction lands
    on the wrong person afterwards; the classic association-swap case.
    """
    meet_t = 6.0
    fast, slow = 1.55, 0.45
    a_meet = 3.2 + fast * meet_t
    b_meet = a_meet + 0.05
    if swap_speeds:
        a_way = [(0.0, 3.2, -0.3), (meet_t, a_meet, -0.3), (meet_t + 9.0, a_meet + slow * 9.0, -0.3)]
        b_way = [(0.0, b_meet - slow * meet_t, 0.3), (meet_t, b_meet, 0.3), (meet_t + 9.0, b_meet + fast * 9.0, 0.3)]
    else:
        a_way = [(0.0, 3.2, -0.3), (meet_t + 9.0, 3.2 + fast * (meet_t + 9.0), -0.3)]
        b_way = [(0.0, b_meet - slow * meet_t, 0.3), (meet_t + 9.0, b_meet + slow * 9.0, 0.3)]
    subjects = [_walker(0, a_way), _walker(1, b_way)]
    return SceneScript(
        subjects=subjects,
        room=Room(0.5, 22.0, -2.2, 2.2),
        duration_frames=duration_frames,
        noise_power=DESK_NOISE_POWER,
    )


def ghost_scene(duration_frames: int = 220) -> SceneScript:
    """One real subject plus a moving multipath phantom beyond the far wall."""
    room = Room(0.5, 7.0, -3.5, 3.5)
    subject = _walker(0, _lane_waypoints(-0.8, 3.0, 6.0, [1.0, 0.9, 1.1, 1.0]))
    ghost_path = WaypointPath([(0.0, 8.0, 1.2), (10.0, 9.4, 1.6), (20.0, 8.0, 1.2)])
    ghost = Scatterer(0.9, ghost_path, modulation=_ghost_mod())
    return SceneScript(
        subjects=[subject],
        room=room,
        duration_frames=duration_frames,
        noise_power=DESK_NOISE_POWER,
        ghosts=[ghost],
    )


def _ghost_mod():
    from .scene import DopplerModulation

    return DopplerModulation(amplitude_mps=0.5, frequency_hz=1.2, phase_rad=0.3)


# --- training data -------------------------------------------------------------


def solo_mud_series(
    scene: SceneScript,
    params: RadarParams,
    config: PipelineConfig,
    seed: int = 0,
) -> np.ndarray:
    """Per-frame micro-Doppler vectors of a solo scene, straight off detection.

    For one walker the strongest cluster *is* the subject, so no tracking
    is needed to separate contributions; frames without a detection
    contribute zeros, exactly like coasted frames online.
    """
    mc = config.map_cfg
    series = np.zeros((config.mud_bins, scene.duration_frames))
    for t in range(scene.duration_frames):
        cube = synthesize_frame(scene, params, t, seed=seed)
        m = compute_rd(cube, config.antenna, mc.n_fft_range, mc.n_fft_doppler, mc.rd_range_bins)
        m = remove_static(m, mc.static_center_bins, mc.static_edge_bins)
        cloud = denoise(m, config.denoise)
        detections = detect_frame(cloud, config.detect, t)
        if detections.clusters:
            best = max(detections.clusters, key=lambda c: c.total_power)
            series[:, t] = extract_mud(cloud, best, config.mud_bins)
    return series


def solo_loop_scene(
    identity: int,
    duration_frames: int = 90,
    phase: float = 0.0,
    center: tuple[float, float] = (5.5, 0.0),
    speed: float = 1.0,
) -> SceneScript:
    """One subject walking a tilted loop; covers meandering radial motion."""
    waypoints = _loop_waypoints(center[0], center[1], speed, laps=6.0)
    subject = _walker(identity, waypoints, phase=phase)
    return SceneScript(
        subjects=[subject],
        room=Room(0.5, 18.0, -4.0, 4.0),
        duration_frames=duration_frames,
        noise_power=DESK_NOISE_POWER,
    )


TRAINING_RUNS = [  # (kind, gait phase offset, place)
    ("lane", 0.0, (3.5, 6.5)),
    ("lane", 2.1, (8.5, 11.5)),
    ("lane", 4.3, (14.8, 17.8)),
    ("loop", 1.2, (5.5, 0.0)),
]


def build_training_windows(
    identities=(0, 1, 2, 3),
    frames_per_subject: int = 360,
    params: RadarParams | None = None,
    config: PipelineConfig | None = None,
    stride: int = 5,
    seed: int = 0,
    runs=TRAINING_RUNS,
):
    """Solo-walk training set: (windows, labels) ready for the trainer.

    Each identity walks one short sequence per training run: radial lanes
    at several range bands plus one loop, covering different stride
    alignments, both Doppler signs, near/far noise texture and meandering
    radial motion.
    """
    params = params or desk_radar("rd")
    config = config or desk_pipeline_config("rd")
    frames_per_run = frames_per_subject // len(runs)
    all_windows = []
    all_labels = []
    for identity in identities:
        for k, (kind, phase, place) in enumerate(runs):
            if kind == "lane":
                scene = solo_walk_scene(
                    identity, duration_frames=frames_per_run, phase=phase + 0.31 * identity, band=place
                )
            else:
                scene = solo_loop_scene(
                    identity, duration_frames=frames_per_run, phase=phase + 0.31 * identity, center=place
                )
            series = solo_mud_series(scene, params, config, seed=seed + identity + 1000 * k)
            windows = windows_from_series(series, config.mud_frames, stride)
            all_windows.append(windows)
            all_labels.append(np.full(len(windows), identity))
    return np.concatenate(all_windows), np.concatenate(all_labels)
