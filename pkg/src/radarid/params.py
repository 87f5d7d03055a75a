"""LFMCW radar working parameters and derived resolutions."""

from __future__ import annotations

from dataclasses import dataclass, fields

from scipy.constants import c as SPEED_OF_LIGHT

__all__ = ["RadarParams", "SPEED_OF_LIGHT"]


@dataclass(frozen=True)
class RadarParams:
    """Working parameters of a linear FMCW radar.

    Defaults describe a 77 GHz indoor setup: 2 GHz chirps of 180 us swept
    from 76 GHz, repeated every 250 us in bursts of 256 per frame at
    15 frames/s, sampled at 2.857 MHz with 512 points per chirp, received
    on a 16-element half-wavelength linear array.

    ``center_freq_hz`` is the frequency used for Doppler and angle
    conversions (chirp center, not the sweep start), which makes the
    simulator and the map axes mutually consistent.
    """

    start_freq_hz: float = 76e9
    center_freq_hz: float = 77e9
    bandwidth_hz: float = 2e9
    chirp_duration_s: float = 180e-6
    chirp_rep_s: float = 250e-6
    n_samples: int = 512
    n_chirps: int = 256
    n_antennas: int = 16
    antenna_spacing_m: float = 1.948e-3
    sample_rate_hz: float = 2.857e6
    frame_period_s: float = 1.0 / 15.0

    def __post_init__(self):
        if self.bandwidth_hz <= 0 or self.chirp_duration_s <= 0:
            raise ValueError("bandwidth and chirp duration must be positive")
        if self.n_samples / self.sample_rate_hz > self.chirp_duration_s * (1 + 1e-9):
            raise ValueError("fast-time sampling window exceeds the chirp duration")
        if self.n_chirps * self.chirp_rep_s > self.frame_period_s * (1 + 1e-9):
            raise ValueError("chirp burst does not fit in one frame period")
        if self.n_antennas < 1:
            raise ValueError("need at least one receive antenna")
        if self.antenna_spacing_m <= 0:
            raise ValueError("antenna spacing must be positive")

    @property
    def slope_hz_per_s(self) -> float:
        """Chirp frequency slope (bandwidth over sweep duration)."""
        return self.bandwidth_hz / self.chirp_duration_s

    @property
    def range_resolution_m(self) -> float:
        return SPEED_OF_LIGHT / (2.0 * self.bandwidth_hz)

    @property
    def velocity_resolution_mps(self) -> float:
        return SPEED_OF_LIGHT / (
            2.0 * self.center_freq_hz * self.n_chirps * self.chirp_rep_s
        )

    @property
    def sample_period_s(self) -> float:
        return 1.0 / self.sample_rate_hz

    def beat_freq_hz(self, range_m):
        """Beat frequency produced by a reflector at the given range."""
        return 2.0 * self.slope_hz_per_s * range_m / SPEED_OF_LIGHT

    def doppler_freq_hz(self, velocity_mps):
        """Doppler shift produced by the given radial velocity."""
        return 2.0 * self.center_freq_hz * velocity_mps / SPEED_OF_LIGHT

    def field_values(self) -> list[float]:
        """All parameter fields, in declaration order, as floats.

        This is the order used by the cube file header.
        """
        return [float(getattr(self, f.name)) for f in fields(self)]

    @classmethod
    def from_field_values(cls, values) -> "RadarParams":
        names = [f.name for f in fields(cls)]
        if len(values) != len(names):
            raise ValueError(f"expected {len(names)} parameter values, got {len(values)}")
        kwargs = {}
        for name, value in zip(names, values):
            if name in ("n_samples", "n_chirps", "n_antennas"):
                kwargs[name] = int(round(value))
            else:
                kwargs[name] = float(value)
        return cls(**kwargs)
