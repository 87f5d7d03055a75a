"""Range-Doppler and range-Doppler-azimuth map formation and denoising.

Each transformed axis gets a Hanning window and an unnormalized forward
DFT; maps hold magnitude-squared power.  The Doppler axis is centered
(zero velocity in the middle) and later loses its central and outermost
bins to static-clutter removal.  Range is cropped by bin count: with the
default radar parameters 497 bins cover roughly 0-18 m for RD maps and
253 bins roughly 0-10 m for RDA maps.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field, replace

import numpy as np

from .fileio import FileFormatError, expect_magic, read_exact, read_struct
from .params import SPEED_OF_LIGHT, RadarParams
from .simulate import RadarCube

__all__ = [
    "MapAxes",
    "RDMap",
    "RDAMap",
    "MapPoint",
    "PointCloud",
    "DenoiseProfile",
    "compute_rd",
    "compute_rda",
    "remove_static",
    "denoise",
    "estimate_noise_floor",
    "write_map_file",
    "read_map_file",
]

RD_RANGE_BINS = 497
RDA_RANGE_BINS = 253
STATIC_CENTER_BINS = 8
STATIC_EDGE_BINS = 24


@dataclass
class MapAxes:
    """Physical values of each retained map bin."""

    range_m: np.ndarray
    doppler_mps: np.ndarray
    angle_sin: np.ndarray | None = None
    range_bin_m: float = 0.0
    doppler_bin_mps: float = 0.0
    static_removed: bool = False

    @property
    def angle_rad(self) -> np.ndarray | None:
        if self.angle_sin is None:
            return None
        return np.arcsin(np.clip(self.angle_sin, -1.0, 1.0))


@dataclass
class RDMap:
    power: np.ndarray  # (range_bins, doppler_bins), linear power
    axes: MapAxes
    frame_index: int


@dataclass
class RDAMap:
    power: np.ndarray  # (range_bins, angle_bins, doppler_bins)
    axes: MapAxes
    frame_index: int


@dataclass(frozen=True)
class MapPoint:
    """One above-threshold map cell: physical coordinates plus received power."""

    coords: np.ndarray  # (r, v) or (r, v, theta)
    power: float
    range_bin: int
    doppler_bin: int
    angle_bin: int | None = None


@dataclass
class PointCloud:
    """Column-oriented set of above-threshold cells from one frame."""

    coords: np.ndarray  # (n, 2) rd or (n, 3) rda, columns (r, v[, theta])
    powers: np.ndarray  # (n,)
    range_bins: np.ndarray
    doppler_bins: np.ndarray
    angle_bins: np.ndarray | None = None
    n_doppler_bins: int = 0

    def __len__(self) -> int:
        return len(self.powers)

    def point(self, i: int) -> MapPoint:
        return MapPoint(
            coords=self.coords[i].copy(),
            power=float(self.powers[i]),
            range_bin=int(self.range_bins[i]),
            doppler_bin=int(self.doppler_bins[i]),
            angle_bin=None if self.angle_bins is None else int(self.angle_bins[i]),
        )


def _range_axis(params: RadarParams, n_fft: int, n_bins: int):
    bin_m = SPEED_OF_LIGHT * params.sample_rate_hz / (2.0 * params.slope_hz_per_s * n_fft)
    return np.arange(n_bins) * bin_m, bin_m


def _doppler_axis(params: RadarParams, n_fft: int):
    bin_mps = SPEED_OF_LIGHT / (2.0 * params.center_freq_hz * n_fft * params.chirp_rep_s)
    return (np.arange(n_fft) - n_fft // 2) * bin_mps, bin_mps


def _angle_axis(params: RadarParams, n_fft: int):
    bin_sin = SPEED_OF_LIGHT / (params.center_freq_hz * params.antenna_spacing_m * n_fft)
    return (np.arange(n_fft) - n_fft // 2) * bin_sin


def compute_rd(
    cube: RadarCube,
    antenna: int = 0,
    n_fft_range: int = 1024,
    n_fft_doppler: int = 256,
    range_bins: int | None = RD_RANGE_BINS,
) -> RDMap:
    """Form the range-Doppler power map from a single receive channel."""
    params = cube.params
    if not 0 <= antenna < params.n_antennas:
        raise ValueError(f"antenna {antenna} out of range (L={params.n_antennas})")
    if range_bins is None:
        range_bins = n_fft_range
    range_bins = min(range_bins, n_fft_range)

    data = cube.samples[:, antenna, :]
    win_r = np.hanning(params.n_samples)
    spectrum = np.fft.fft(data * win_r[:, None], n=n_fft_range, axis=0)[:range_bins]
    win_d = np.hanning(params.n_chirps)
    spectrum = np.fft.fftshift(np.fft.fft(spectrum * win_d[None, :], n=n_fft_doppler, axis=1), axes=1)
    power = np.abs(spectrum) ** 2

    range_m, bin_m = _range_axis(params, n_fft_range, range_bins)
    doppler, bin_mps = _doppler_axis(params, n_fft_doppler)
    axes = MapAxes(range_m=range_m, doppler_mps=doppler, range_bin_m=bin_m, doppler_bin_mps=bin_mps)
    return RDMap(power=power, axes=axes, frame_index=cube.frame_index)


def compute_rda(
    cube: RadarCube,
    n_fft_range: int = 1024,
    n_fft_doppler: int = 256,
    n_fft_angle: int = 64,
    range_bins: int | None = RDA_RANGE_BINS,
) -> RDAMap:
    """Form the range-Doppler-azimuth power map from the full antenna array."""
    params = cube.params
    if params.n_antennas < 2:
        raise ValueError("azimuth processing needs more than one receive antenna")
    if range_bins is None:
        range_bins = n_fft_range
    range_bins = min(range_bins, n_fft_range)

    win_r = np.hanning(params.n_samples)
    spectrum = np.fft.fft(cube.samples * win_r[:, None, None], n=n_fft_range, axis=0)[:range_bins]
    win_d = np.hanning(params.n_chirps)
    spectrum = np.fft.fftshift(
        np.fft.fft(spectrum * win_d[None, None, :], n=n_fft_doppler, axis=2), axes=2
    )
    win_a = np.hanning(params.n_antennas)
    spectrum = np.fft.fftshift(
        np.fft.fft(spectrum * win_a[None, :, None], n=n_fft_angle, axis=1), axes=1
    )
    power = np.abs(spectrum) ** 2

    range_m, bin_m = _range_axis(params, n_fft_range, range_bins)
    doppler, bin_mps = _doppler_axis(params, n_fft_doppler)
    axes = MapAxes(
        range_m=range_m,
        doppler_mps=doppler,
        angle_sin=_angle_axis(params, n_fft_angle),
        range_bin_m=bin_m,
        doppler_bin_mps=bin_mps,
    )
    return RDAMap(power=power, axes=axes, frame_index=cube.frame_index)


def remove_static(
    m: RDMap | RDAMap,
    center_bins: int = STATIC_CENTER_BINS,
    edge_bins: int = STATIC_EDGE_BINS,
):
    """Drop the central (static clutter) and outermost Doppler bins.

    With 256 Doppler bins and the defaults (8 central, 24 per edge) exactly
    200 bins remain.
    """
    if m.axes.static_removed:
        raise ValueError("static removal already applied to this map")
    nd = m.power.shape[-1]
    mid = nd // 2
    lo, hi = mid - center_bins // 2, mid + (center_bins + 1) // 2
    keep = np.r_[edge_bins:lo, hi : nd - edge_bins]
    axes = replace(
        m.axes,
        doppler_mps=m.axes.doppler_mps[keep],
        range_m=m.axes.range_m.copy(),
        static_removed=True,
    )
    power = m.power[..., keep]
    if isinstance(m, RDMap):
        return RDMap(power=power, axes=axes, frame_index=m.frame_index)
    return RDAMap(power=power, axes=axes, frame_index=m.frame_index)


@dataclass(frozen=True)
class DenoiseProfile:
    """Range-dependent power threshold, linear in the log domain.

    ``near_db``/``far_db`` are read relative to ``reference`` (a linear
    power).  With ``reference=None`` the reference is the map's estimated
    noise floor; the defaults then keep cells 18 dB above the floor at
    minimum range down to 8 dB at maximum range, preserving the 10 dB
    near-to-far span of a calibrated -97 to -107 dBm hardware profile.
    """

    near_db: float = 18.0
    far_db: float = 8.0
    reference: float | None = None
    angle_gate_db: float = 15.0


def estimate_noise_floor(power: np.ndarray) -> float:
    """Median-based noise floor estimate for exponentially distributed cells."""
    med = float(np.median(power))
    if med > 0:
        return med / np.log(2.0)
    mean = float(np.mean(power))
    return mean if mean > 0 else 1.0


def denoise(m: RDMap | RDAMap, profile: DenoiseProfile = DenoiseProfile()) -> PointCloud:
    """Keep cells above the range-interpolated threshold; return them as points.

    For RDA maps, azimuth bins whose strongest cell sits more than
    ``angle_gate_db`` below the map peak are zeroed first, suppressing
    beamforming side lobes.
    """
    if not m.axes.static_removed:
        raise ValueError("denoise expects a static-removed map")
    power = m.power
    ref = profile.reference if profile.reference is not None else estimate_noise_floor(power)
    rng = m.axes.range_m
    if len(rng) > 1:
        frac = (rng - rng[0]) / (rng[-1] - rng[0])
    else:
        frac = np.zeros(1)
    thr_db = profile.near_db + (profile.far_db - profile.near_db) * frac
    threshold = ref * 10.0 ** (thr_db / 10.0)

    is_rda = isinstance(m, RDAMap)
    if is_rda:
        mask = power > threshold[:, None, None]
        angle_profile = power.max(axis=(0, 2))
        peak = angle_profile.max()
        if peak > 0:
            mask &= (angle_profile >= peak * 10.0 ** (-profile.angle_gate_db / 10.0))[None, :, None]
    else:
        mask = power > threshold[:, None]

    idx = np.argwhere(mask)
    powers = power[mask]
    if is_rda:
        ir, ia, iv = idx[:, 0], idx[:, 1], idx[:, 2]
        theta = np.arcsin(np.clip(m.axes.angle_sin[ia], -1.0, 1.0))
        coords = np.column_stack([m.axes.range_m[ir], m.axes.doppler_mps[iv], theta])
        return PointCloud(
            coords=coords,
            powers=powers,
            range_bins=ir,
            doppler_bins=iv,
            angle_bins=ia,
            n_doppler_bins=power.shape[-1],
        )
    ir, iv = idx[:, 0], idx[:, 1]
    coords = np.column_stack([m.axes.range_m[ir], m.axes.doppler_mps[iv]])
    return PointCloud(
        coords=coords,
        powers=powers,
        range_bins=ir,
        doppler_bins=iv,
        n_doppler_bins=power.shape[-1],
    )


# --- optional map dump ("RDM1" / "RDA1") --------------------------------------
#
# magic | u32 version | u32 ndim | u32 dims[ndim] | u32 frame_count
# | f64 range axis | f64 doppler axis | (f64 angle-sine axis if ndim == 3)
# | frames as f32, C order.

MAP_VERSION = 1


def write_map_file(path, maps):
    maps = list(maps)
    if not maps:
        raise ValueError("nothing to write")
    first = maps[0]
    is_rda = isinstance(first, RDAMap)
    magic = b"RDA1" if is_rda else b"RDM1"
    dims = first.power.shape
    with open(path, "wb") as f:
        f.write(magic)
        f.write(struct.pack("<II", MAP_VERSION, len(dims)))
        f.write(struct.pack(f"<{len(dims)}I", *dims))
        f.write(struct.pack("<I", len(maps)))
        f.write(first.axes.range_m.astype("<f8").tobytes())
        f.write(first.axes.doppler_mps.astype("<f8").tobytes())
        if is_rda:
            f.write(first.axes.angle_sin.astype("<f8").tobytes())
        for m in maps:
            if m.power.shape != dims:
                raise ValueError("all maps in a dump must share one shape")
            f.write(np.ascontiguousarray(m.power, dtype="<f4").tobytes())


def read_map_file(path):
    with open(path, "rb") as f:
        magic = read_exact(f, 4)
        if magic not in (b"RDM1", b"RDA1"):
            raise FileFormatError(f"bad magic {magic!r}")
        is_rda = magic == b"RDA1"
        version, ndim = read_struct(f, "<II")
        if version != MAP_VERSION:
            raise FileFormatError(f"unsupported map file version {version}")
        if ndim != (3 if is_rda else 2):
            raise FileFormatError("dimension count does not match magic")
        dims = read_struct(f, f"<{ndim}I")
        (count,) = read_struct(f, "<I")
        range_m = np.frombuffer(read_exact(f, dims[0] * 8), dtype="<f8")
        doppler = np.frombuffer(read_exact(f, dims[-1] * 8), dtype="<f8")
        angle = None
        if is_rda:
            angle = np.frombuffer(read_exact(f, dims[1] * 8), dtype="<f8")
        axes = MapAxes(
            range_m=range_m.copy(),
            doppler_mps=doppler.copy(),
            angle_sin=None if angle is None else angle.copy(),
            range_bin_m=float(range_m[1] - range_m[0]) if len(range_m) > 1 else 0.0,
            doppler_bin_mps=float(doppler[1] - doppler[0]) if len(doppler) > 1 else 0.0,
        )
        out = []
        n_cells = int(np.prod(dims))
        for t in range(count):
            data = np.frombuffer(read_exact(f, n_cells * 4), dtype="<f4")
            power = data.astype(np.float64).reshape(dims)
            cls = RDAMap if is_rda else RDMap
            out.append(cls(power=power, axes=axes, frame_index=t))
    return out
