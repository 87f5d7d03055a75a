"""Per-trajectory micro-Doppler vectors and classifier input windows."""

from __future__ import annotations

import struct
from collections import deque
from dataclasses import dataclass

import numpy as np

from .detect import Cluster
from .fileio import FileFormatError, expect_magic, read_exact, read_struct
from .maps import PointCloud

__all__ = [
    "N_DOPPLER_BINS",
    "WINDOW_FRAMES",
    "TRAIN_STRIDE",
    "MudWindow",
    "MudBuffer",
    "extract_mud",
    "push_and_window",
    "normalize_window",
    "windows_from_series",
    "write_mud_file",
    "read_mud_file",
]

N_DOPPLER_BINS = 200
WINDOW_FRAMES = 30  # 2 s at 15 frames/s; use 45 for external 45-frame data
TRAIN_STRIDE = 5  # training windows overlap by WINDOW_FRAMES - TRAIN_STRIDE frames

MUD_MAGIC = b"MUD1"


def extract_mud(cloud: PointCloud, cluster: Cluster, n_bins: int | None = None) -> np.ndarray:
    """Accumulate the cluster's received power into one value per Doppler bin.

    This is the collapse of the member cells over range (RD) or range and
    angle (RDA); bins with no members stay zero.
    """
    if len(cluster.indices) == 0:
        raise ValueError("cannot extract a micro-Doppler vector from an empty cluster")
    if n_bins is None:
        n_bins = cloud.n_doppler_bins
    return np.bincount(
        cloud.doppler_bins[cluster.indices],
        weights=cloud.powers[cluster.indices],
        minlength=n_bins,
    ).astype(np.float64)


def normalize_window(raw: np.ndarray) -> np.ndarray:
    """Log-compress and min-max scale a window to [0, 1].

    A window with no dynamic range (all zero, or constant) maps to zeros.
    """
    image = np.log1p(np.asarray(raw, dtype=np.float64))
    lo, hi = image.min(), image.max()
    if hi - lo <= 0:
        return np.zeros_like(image)
    return (image - lo) / (hi - lo)


@dataclass
class MudWindow:
    """Normalized spectrogram patch handed to the classifier."""

    image: np.ndarray  # (n_bins, window_frames) in [0, 1]
    trajectory_id: int
    end_frame: int


class MudBuffer:
    """Ring buffer of per-frame micro-Doppler vectors for one trajectory."""

    def __init__(self, n_bins: int = N_DOPPLER_BINS, window_frames: int = WINDOW_FRAMES):
        self.n_bins = n_bins
        self.window_frames = window_frames
        self._vectors: deque = deque(maxlen=window_frames)

    def __len__(self) -> int:
        return len(self._vectors)

    def push(self, vec: np.ndarray | None):
        """Append one frame; ``None`` (a coasted frame) contributes zeros."""
        if vec is None:
            vec = np.zeros(self.n_bins)
        vec = np.asarray(vec, dtype=np.float64)
        if vec.shape != (self.n_bins,):
            raise ValueError(f"expected a ({self.n_bins},) vector, got {vec.shape}")
        self._vectors.append(vec)

    def raw_window(self) -> np.ndarray | None:
        """Most recent ``window_frames`` vectors as (n_bins, frames), oldest first."""
        if len(self._vectors) < self.window_frames:
            return None
        return np.stack(self._vectors, axis=1)


def push_and_window(
    buffer: MudBuffer, vec: np.ndarray | None, trajectory_id: int, end_frame: int
) -> MudWindow | None:
    """Push one vector and emit the sliding window once the buffer is warm."""
    buffer.push(vec)
    raw = buffer.raw_window()
    if raw is None:
        return None
    return MudWindow(image=normalize_window(raw), trajectory_id=trajectory_id, end_frame=end_frame)


def windows_from_series(
    vectors: np.ndarray, window_frames: int = WINDOW_FRAMES, stride: int = TRAIN_STRIDE
) -> np.ndarray:
    """Cut a (n_bins, n_frames) series into normalized overlapping windows.

    Used when building training sets; online inference slides by one frame
    instead.
    """
    vectors = np.asarray(vectors, dtype=np.float64)
    n_frames = vectors.shape[1]
    if n_frames < window_frames:
        return np.zeros((0, vectors.shape[0], window_frames))
    starts = range(0, n_frames - window_frames + 1, stride)
    return np.stack([normalize_window(vectors[:, s : s + window_frames]) for s in starts])


# --- micro-Doppler dataset ("MUD1") -------------------------------------------
#
# magic "MUD1" | u32 n_bins | u32 window_frames | u32 count
# | u16 x count labels | f32 payload, count windows of (n_bins, window_frames)


def write_mud_file(path, windows: np.ndarray, labels):
    windows = np.asarray(windows, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.uint16)
    if windows.ndim != 3:
        raise ValueError("windows must be (count, n_bins, window_frames)")
    if len(labels) != len(windows):
        raise ValueError("one label per window required")
    count, n_bins, frames = windows.shape
    with open(path, "wb") as f:
        f.write(MUD_MAGIC)
        f.write(struct.pack("<III", n_bins, frames, count))
        f.write(labels.astype("<u2").tobytes())
        f.write(windows.astype("<f4").tobytes())


def read_mud_file(path):
    with open(path, "rb") as f:
        expect_magic(f, MUD_MAGIC)
        n_bins, frames, count = read_struct(f, "<III")
        labels = np.frombuffer(read_exact(f, count * 2), dtype="<u2").astype(np.int64)
        payload = np.frombuffer(read_exact(f, count * n_bins * frames * 4), dtype="<f4")
        extra = f.read(1)
        if extra:
            raise FileFormatError("trailing bytes after declared payload")
    windows = payload.astype(np.float64).reshape(count, n_bins, frames)
    return windows, labels
