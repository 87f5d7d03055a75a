"""Simulate a walker and look at its range-Doppler footprint.

Run:  python demos/01_simulate_and_maps.py
"""

import numpy as np

from radarid import RadarParams, make_walker, range_migration_check, synthesize_frame
from radarid.maps import compute_rd, denoise, remove_static
from radarid.scene import Room, SceneScript

params = RadarParams(n_antennas=1)
print("radar:", params.bandwidth_hz / 1e9, "GHz sweep,", params.n_chirps, "chirps/frame")
print(f"range cell {params.range_resolution_m * 100:.1f} cm, "
      f"velocity cell {params.velocity_resolution_mps * 100:.2f} cm/s")

walker = make_walker(
    identity=0,
    waypoints=[(0.0, 4.0, 0.3), (12.0, 14.0, 0.8)],
    gait_freq_hz=1.1,
    leg_amp_mps=1.2,
    arm_amp_mps=0.5,
    torso_bounce_mps=0.1,
    leg_segments=3,
    arm_segments=2,
)
report = range_migration_check(walker, params)
print("range-migration check:", "ok" if report.ok else "exceeded", "-", report.note)

scene = SceneScript(
    subjects=[walker], room=Room(0.5, 18, -2.2, 2.2), duration_frames=30, noise_power=1.0
)
cube = synthesize_frame(scene, params, frame_index=15, seed=0)
print("cube:", cube.samples.shape, "(fast time x antennas x chirps)")

rd = remove_static(compute_rd(cube))
print("RD map:", rd.power.shape, "- range up to", f"{rd.axes.range_m[-1]:.1f} m,",
      "velocities", f"{rd.axes.doppler_mps.min():.2f}..{rd.axes.doppler_mps.max():.2f} m/s")

cloud = denoise(rd)
print(f"{len(cloud)} cells above threshold")
ir, iv = np.unravel_index(np.argmax(rd.power), rd.power.shape)
print(f"peak at range {rd.axes.range_m[ir]:.2f} m, velocity {rd.axes.doppler_mps[iv]:+.2f} m/s")

# a crude look at the Doppler profile: the gait spreads power around the torso line
profile = np.bincount(cloud.doppler_bins, weights=cloud.powers, minlength=rd.power.shape[1])
profile = profile / profile.max()
scale = rd.axes.doppler_mps
bars = "".join(" .:-=+*#"[min(7, int(v * 8))] for v in profile[::4])
print("Doppler profile (", f"{scale[0]:.1f}", "to", f"{scale[-1]:.1f} m/s ):")
print(bars)
