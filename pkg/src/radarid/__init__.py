"""Multi-person tracking and gait identification on simulated FMCW radar.

The library covers the full chain: scripted scene simulation, radar cube
synthesis, range-Doppler(-azimuth) map formation, density-based detection,
Kalman tracking with Hungarian association, micro-Doppler window
extraction, a convolutional gait classifier, and the identity-feedback
labeling loop that repairs track swaps online.
"""

from .params import RadarParams
from .scene import (
    DopplerModulation,
    Room,
    Scatterer,
    SceneScript,
    SubjectModel,
    WaypointPath,
    make_walker,
    parse_scene,
)
from .simulate import (
    RadarCube,
    range_migration_check,
    read_cube_file,
    stream_cube_file,
    synthesize_frame,
    synthesize_sequence,
    write_cube_file,
)

__version__ = "0.1.0"
