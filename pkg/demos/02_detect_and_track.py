"""Detection and tracking over a short two-subject sequence.

Run:  python demos/02_detect_and_track.py
"""

from radarid import scenarios
from radarid.pipeline import Pipeline
from radarid.scene import Room, SceneScript
from radarid.simulate import synthesize_frame

params = scenarios.desk_radar("rd")
config = scenarios.desk_pipeline_config("rd")

a = scenarios._walker(0, [(0.0, 4.0, 0.3), (20.0, 12.0, 0.3)])
b = scenarios._walker(1, [(0.0, 14.0, -0.4), (20.0, 6.0, -0.4)])
scene = SceneScript(subjects=[a, b], room=Room(0.5, 18, -2.2, 2.2),
                    duration_frames=70, noise_power=1.0)

pipeline = Pipeline(config)
for t in range(scene.duration_frames):
    result = pipeline.process(synthesize_frame(scene, params, t, seed=1))
    for event in result.events:
        if event["event"] in ("created", "confirmed", "deleted", "merged"):
            print(f"frame {event['frame']:3d}: track {event['track']} {event['event']}"
                  + (f" ({event.get('reason')})" if event.get("reason") else ""))

print("\nfinal states:")
for traj in pipeline.tracker.confirmed():
    r, v = traj.kf.x[0], traj.kf.x[1]
    print(f"  track {traj.id}: range {r:5.2f} m, velocity {v:+5.2f} m/s, "
          f"{len(traj.state_history)} recent states")
