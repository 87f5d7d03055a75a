"""Scripted scenes: walking subjects, multipath ghosts, room geometry.

The radar sits at the origin and looks along the +x axis.  Azimuth is
measured from boresight, ``theta = atan2(y, x)``, so a target at
``(x, y) = (r cos(theta), r sin(theta))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Room",
    "WaypointPath",
    "DopplerModulation",
    "Scatterer",
    "SubjectModel",
    "SceneScript",
    "make_walker",
    "parse_scene",
    "format_scene",
]


@dataclass(frozen=True)
class Room:
    """Axis-aligned room bounds in radar coordinates."""

    x_min: float
    x_max: float
    y_min: float
    y_max: float

    def contains(self, x: float, y: float) -> bool:
        return self.x_min <= x <= self.x_max and self.y_min <= y <= self.y_max


class WaypointPath:
    """Piecewise-linear planar path through (time, x, y) waypoints.

    Position is clamped to the end points outside the scripted time span;
    velocity is zero there.
    """

    def __init__(self, waypoints):
        pts = sorted((float(t), float(x), float(y)) for t, x, y in waypoints)
        if not pts:
            raise ValueError("a path needs at least one waypoint")
        self.times = np.array([p[0] for p in pts])
        self.xs = np.array([p[1] for p in pts])
        self.ys = np.array([p[2] for p in pts])
        if len(self.times) > 1 and np.any(np.diff(self.times) <= 0):
            raise ValueError("waypoint times must be strictly increasing")

    @property
    def waypoints(self):
        return list(zip(self.times.tolist(), self.xs.tolist(), self.ys.tolist()))

    @property
    def t_end(self) -> float:
        return float(self.times[-1])

    def position(self, t):
        t = np.asarray(t, dtype=float)
        return np.interp(t, self.times, self.xs), np.interp(t, self.times, self.ys)

    def velocity(self, t):
        t = np.asarray(t, dtype=float)
        if len(self.times) == 1:
            z = np.zeros_like(t)
            return z, z.copy()
        seg = np.clip(np.searchsorted(self.times, t, side="right") - 1, 0, len(self.times) - 2)
        dt = self.times[seg + 1] - self.times[seg]
        vx = (self.xs[seg + 1] - self.xs[seg]) / dt
        vy = (self.ys[seg + 1] - self.ys[seg]) / dt
        inside = (t >= self.times[0]) & (t < self.times[-1])
        return np.where(inside, vx, 0.0), np.where(inside, vy, 0.0)


@dataclass(frozen=True)
class DopplerModulation:
    """Sinusoidal radial-velocity offset, v(t) = amp * sin(2*pi*freq*t + phase)."""

    amplitude_mps: float = 0.0
    frequency_hz: float = 0.0
    phase_rad: float = 0.0

    def __post_init__(self):
        if self.amplitude_mps < 0:
            raise ValueError("modulation amplitude must be nonnegative")
        if self.frequency_hz < 0:
            raise ValueError("modulation frequency must be nonnegative")

    def radial_velocity(self, t):
        if self.amplitude_mps == 0.0:
            return np.zeros_like(np.asarray(t, dtype=float))
        return self.amplitude_mps * np.sin(
            2.0 * np.pi * self.frequency_hz * np.asarray(t, dtype=float) + self.phase_rad
        )

    def radial_offset(self, t):
        """Time integral of the velocity offset (zero at t = 0)."""
        t = np.asarray(t, dtype=float)
        if self.amplitude_mps == 0.0:
            return np.zeros_like(t)
        if self.frequency_hz == 0.0:
            return self.amplitude_mps * math.sin(self.phase_rad) * t
        w = 2.0 * np.pi * self.frequency_hz
        return (self.amplitude_mps / w) * (np.cos(self.phase_rad) - np.cos(w * t + self.phase_rad))


@dataclass
class Scatterer:
    """Point reflector riding on a path, optionally with a gait-like velocity modulation."""

    reflectivity: float
    path: WaypointPath
    modulation: DopplerModulation = field(default_factory=DopplerModulation)

    def __post_init__(self):
        if self.reflectivity < 0:
            raise ValueError("reflectivity must be nonnegative")

    def kinematics(self, t):
        """Radial range, radial velocity and azimuth at the given times."""
        t = np.asarray(t, dtype=float)
        x, y = self.path.position(t)
        vx, vy = self.path.velocity(t)
        base_range = np.hypot(x, y)
        radial = np.where(base_range > 0, (x * vx + y * vy) / np.maximum(base_range, 1e-30), 0.0)
        rng = base_range + self.modulation.radial_offset(t)
        vel = radial + self.modulation.radial_velocity(t)
        theta = np.arctan2(y, x)
        return rng, vel, theta


@dataclass
class SubjectModel:
    """One person: a torso scatterer plus limb scatterers on the same path."""

    identity: int
    torso: Scatterer
    limbs: list[Scatterer]

    def __post_init__(self):
        if len(self.limbs) < 2:
            raise ValueError("a subject needs at least two limb scatterers")
        for limb in self.limbs:
            if limb.path is not self.torso.path:
                raise ValueError("limb scatterers must share the torso path")

    @property
    def scatterers(self) -> list[Scatterer]:
        return [self.torso] + list(self.limbs)

    @property
    def gait_freq_hz(self) -> float:
        return max(limb.modulation.frequency_hz for limb in self.limbs)


@dataclass
class SceneScript:
    """Everything the simulator needs for one sequence."""

    subjects: list[SubjectModel]
    room: Room
    duration_frames: int
    noise_power: float = 1.0
    ghosts: list[Scatterer] = field(default_factory=list)

    def all_scatterers(self):
        out = []
        for s in self.subjects:
            out.extend(s.scatterers)
        out.extend(self.ghosts)
        return out


LEG_SEGMENT_FRACTIONS = (0.4, 0.7, 1.0)  # hip-to-foot swing amplitudes
ARM_SEGMENT_FRACTIONS = (0.55, 1.0)


def make_walker(
    identity: int,
    waypoints,
    gait_freq_hz: float = 1.0,
    leg_amp_mps: float = 1.0,
    arm_amp_mps: float = 0.0,
    torso_bounce_mps: float = 0.0,
    torso_reflectivity: float = 1.0,
    leg_reflectivity: float = 0.45,
    arm_reflectivity: float = 0.25,
    phase_rad: float = 0.0,
    leg_segments: int = 1,
    arm_segments: int = 1,
) -> SubjectModel:
    """Build a walking subject: a torso plus swinging leg (and arm) scatterers.

    Legs swing in antiphase at the gait frequency, arms (when enabled)
    likewise with smaller amplitude, and the torso can bounce gently at
    twice the gait frequency.  ``leg_segments``/``arm_segments`` > 1 split
    each limb into scatterers of graded swing amplitude (hip, knee, foot),
    filling the Doppler space between the torso line and the limb tips the
    way an articulated body does.
    """
    path = WaypointPath(waypoints)
    torso_mod = DopplerModulation(torso_bounce_mps, 2.0 * gait_freq_hz, phase_rad)
    torso = Scatterer(torso_reflectivity, path, torso_mod)
    limbs = []
    leg_fracs = LEG_SEGMENT_FRACTIONS[-leg_segments:]
    arm_fracs = ARM_SEGMENT_FRACTIONS[-arm_segments:]
    for side_phase in (phase_rad, phase_rad + np.pi):
        for frac in leg_fracs:
            limbs.append(
                Scatterer(
                    leg_reflectivity / len(leg_fracs),
                    path,
                    DopplerModulation(frac * leg_amp_mps, gait_freq_hz, side_phase),
                )
            )
    if arm_amp_mps > 0:
        for side_phase in (phase_rad + np.pi, phase_rad):
            for frac in arm_fracs:
                limbs.append(
                    Scatterer(
                        arm_reflectivity / len(arm_fracs),
                        path,
                        DopplerModulation(frac * arm_amp_mps, gait_freq_hz, side_phase),
                    )
                )
    return SubjectModel(identity=identity, torso=torso, limbs=limbs)


# --- scene script text format ------------------------------------------------
#
# Scene files are plain text.  Scene-level keys come first, then one section
# per subject or ghost:
#
#   room = 0.5 18 -2.2 2.2        # x_min x_max y_min y_max [m]
#   duration = 300                # frames
#   noise_power = 1.0             # linear power of the complex white noise
#
#   [subject 0]
#   torso = 1.0                   # reflectivity [, bounce_amp bounce_freq bounce_phase]
#   limb = 0.45 1.0 1.1 0.0       # reflectivity amplitude freq phase
#   limb = 0.45 1.0 1.1 3.1416
#   waypoint = 0.0 4.0 0.0        # t[s] x[m] y[m]
#   waypoint = 20.0 12.0 0.5
#
#   [ghost]
#   reflectivity = 0.6
#   modulation = 0.3 1.0 0.0      # optional: amplitude freq phase
#   waypoint = 0.0 20.0 1.0


def _floats(text: str) -> list[float]:
    return [float(tok) for tok in text.replace(",", " ").split()]


def parse_scene(text: str) -> SceneScript:
    room = None
    duration = None
    noise_power = 1.0
    subjects: list[SubjectModel] = []
    ghosts: list[Scatterer] = []
    section = None  # None | ("subject", id, state) | ("ghost", state)

    def close_section():
        if section is None:
            return
        kind, state = section
        if not state["waypoints"]:
            raise ValueError(f"{kind} section has no waypoints")
        path = WaypointPath(state["waypoints"])
        if kind == "subject":
            torso_spec = state["torso"]
            mod = DopplerModulation(*torso_spec[1:4]) if len(torso_spec) > 1 else DopplerModulation()
            torso = Scatterer(torso_spec[0], path, mod)
            limbs = [
                Scatterer(spec[0], path, DopplerModulation(spec[1], spec[2], spec[3]))
                for spec in state["limbs"]
            ]
            subjects.append(SubjectModel(identity=state["id"], torso=torso, limbs=limbs))
        else:
            mod = DopplerModulation(*state["modulation"]) if state["modulation"] else DopplerModulation()
            ghosts.append(Scatterer(state["reflectivity"], path, mod))

    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            close_section()
            head = line.strip("[]").split()
            if head[0] == "subject":
                section = ("subject", {"id": int(head[1]), "torso": None, "limbs": [], "waypoints": []})
            elif head[0] == "ghost":
                section = ("ghost", {"reflectivity": 1.0, "modulation": None, "waypoints": []})
            else:
                raise ValueError(f"unknown section {line!r}")
            continue
        if "=" not in line:
            raise ValueError(f"cannot parse scene line {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if section is None:
            if key == "room":
                room = Room(*_floats(value))
            elif key == "duration":
                duration = int(value)
            elif key == "noise_power":
                noise_power = float(value)
            else:
                raise ValueError(f"unknown scene key {key!r}")
            continue
        kind, state = section
        if key == "waypoint":
            state["waypoints"].append(tuple(_floats(value)))
        elif kind == "subject" and key == "torso":
            state["torso"] = _floats(value)
        elif kind == "subject" and key == "limb":
            state["limbs"].append(_floats(value))
        elif kind == "ghost" and key == "reflectivity":
            state["reflectivity"] = float(value)
        elif kind == "ghost" and key == "modulation":
            state["modulation"] = _floats(value)
        else:
            raise ValueError(f"unknown key {key!r} in {kind} section")
    close_section()

    if room is None or duration is None:
        raise ValueError("scene must define 'room' and 'duration'")
    return SceneScript(
        subjects=subjects,
        room=room,
        duration_frames=duration,
        noise_power=noise_power,
        ghosts=ghosts,
    )


def format_scene(scene: SceneScript) -> str:
    lines = [
        f"room = {scene.room.x_min:g} {scene.room.x_max:g} {scene.room.y_min:g} {scene.room.y_max:g}",
        f"duration = {scene.duration_frames}",
        f"noise_power = {scene.noise_power:g}",
    ]
    for subject in scene.subjects:
        lines.append("")
        lines.append(f"[subject {subject.identity}]")
        tm = subject.torso.modulation
        torso = f"torso = {subject.torso.reflectivity:g}"
        if tm.amplitude_mps > 0:
            torso += f" {tm.amplitude_mps:g} {tm.frequency_hz:g} {tm.phase_rad:g}"
        lines.append(torso)
        for limb in subject.limbs:
            m = limb.modulation
            lines.append(
                f"limb = {limb.reflectivity:g} {m.amplitude_mps:g} {m.frequency_hz:g} {m.phase_rad:g}"
            )
        for t, x, y in subject.torso.path.waypoints:
            lines.append(f"waypoint = {t:g} {x:g} {y:g}")
    for ghost in scene.ghosts:
        lines.append("")
        lines.append("[ghost]")
        lines.append(f"reflectivity = {ghost.reflectivity:g}")
        m = ghost.modulation
        if m.amplitude_mps > 0:
            lines.append(f"modulation = {m.amplitude_mps:g} {m.frequency_hz:g} {m.phase_rad:g}")
        for t, x, y in ghost.path.waypoints:
            lines.append(f"waypoint = {t:g} {x:g} {y:g}")
    return "\n".join(lines) + "\n"
