"""Flat key/value configuration with dotted sections.

Every tunable of the processing chain is a named key with its stock value
as default; a config file (lines of ``key = value``, ``#`` comments) and
``--set key=value`` overrides layer on top.
"""

from __future__ import annotations

from .classifier import ModelConfig
from .detect import DetectParams
from .kalman import KalmanParamsRD, KalmanParamsRDA
from .maps import DenoiseProfile
from .params import RadarParams
from .pipeline import MapConfig, PipelineConfig
from .scene import Room
from .tracks import TrackParams
from .training import TrainConfig

__all__ = [
    "ConfigError",
    "default_config",
    "parse_config_text",
    "load_config",
    "build_radar_params",
    "build_pipeline_config",
    "build_model_config",
    "build_train_config",
    "format_config",
]


class ConfigError(ValueError):
    pass


def default_config() -> dict[str, str]:
    return {
        # radar working parameters
        "radar.start_freq_hz": "76e9",
        "radar.center_freq_hz": "77e9",
        "radar.bandwidth_hz": "2e9",
        "radar.chirp_duration_s": "180e-6",
        "radar.chirp_rep_s": "250e-6",
        "radar.n_samples": "512",
        "radar.n_chirps": "256",
        "radar.n_antennas": "16",
        "radar.antenna_spacing_m": "1.948e-3",
        "radar.sample_rate_hz": "2.857e6",
        "radar.frame_period_s": "0.06666666666666667",
        # map formation
        "maps.n_fft_range": "1024",
        "maps.n_fft_doppler": "256",
        "maps.n_fft_angle": "64",
        "maps.rd_range_bins": "497",
        "maps.rda_range_bins": "253",
        "maps.static_center_bins": "8",
        "maps.static_edge_bins": "24",
        "maps.denoise_near_db": "18.0",
        "maps.denoise_far_db": "8.0",
        "maps.denoise_reference": "auto",
        "maps.angle_gate_db": "15.0",
        # detection
        "detect.eps": "0.04",
        "detect.min_pts": "40",
        # Kalman filters
        "kf_rd.accel_std": "0.6",
        "kf_rd.range_std": "0.1",
        "kf_rd.vel_std": "0.5",
        "kf_rda.accel_std": "8.0",
        "kf_rda.x_std": "0.5",
        "kf_rda.y_std": "0.5",
        # trajectory lifecycle and association
        "track.max_age": "10",
        "track.min_det": "15",
        "track.d_min": "0.5",
        "track.variance_window": "5",
        "track.box_height_m": "2.0",
        "track.box_width_mps": "2.5",
        "track.gate_threshold": "4.605",
        # room bounds for ghost removal ("none" disables)
        "room.x_min": "none",
        "room.x_max": "none",
        "room.y_min": "none",
        "room.y_max": "none",
        # micro-Doppler windows
        "mud.n_doppler_bins": "200",
        "mud.window_frames": "30",
        "mud.train_stride": "5",
        # labeling
        "labeler.smoothing_window": "9",
        "labeler.unknown_threshold": "0.1",
        # classifier architecture
        "model.ib_maps": "16,32,64,16",
        "model.fc_hidden": "128",
        "model.decoder_maps": "32,32,16,1",
        "model.dropout_p": "0.5",
        "model.scale": "1.0",
        # training
        "train.learning_rate": "5e-3",
        "train.momentum": "0.95",
        "train.l2": "3e-3",
        "train.lr_factor": "0.5",
        "train.patience": "5",
        "train.val_fraction": "0.1",
        "train.alpha_rec": "0.6",
        "train.batch_size": "32",
        "train.max_epochs": "60",
        "train.seed": "0",
        # pipeline
        "pipeline.space": "rd",
        "pipeline.mode": "joint",
        "pipeline.antenna": "0",
        "pipeline.match_dist_m": "0.5",
    }


def parse_config_text(text: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        out[key] = value
    return out


def load_config(path=None, overrides=()) -> dict[str, str]:
    """Defaults, then the config file, then ``key=value`` overrides."""
    cfg = default_config()
    if path is not None:
        with open(path) as f:
            file_cfg = parse_config_text(f.read())
        for key, value in file_cfg.items():
            if key not in cfg:
                raise ConfigError(f"unknown config key {key!r}")
            cfg[key] = value
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override must look like key=value, got {item!r}")
        key, value = (part.strip() for part in item.split("=", 1))
        if key not in cfg:
            raise ConfigError(f"unknown config key {key!r}")
        cfg[key] = value
    return cfg


def format_config(cfg: dict[str, str]) -> str:
    return "\n".join(f"{key} = {value}" for key, value in cfg.items()) + "\n"


def _f(cfg, key) -> float:
    try:
        return float(cfg[key])
    except ValueError as exc:
        raise ConfigError(f"{key}: expected a number, got {cfg[key]!r}") from exc


def _i(cfg, key) -> int:
    try:
        return int(cfg[key])
    except ValueError as exc:
        raise ConfigError(f"{key}: expected an integer, got {cfg[key]!r}") from exc


def _ints(cfg, key) -> tuple[int, ...]:
    try:
        return tuple(int(tok) for tok in cfg[key].split(","))
    except ValueError as exc:
        raise ConfigError(f"{key}: expected comma-separated integers") from exc


def build_radar_params(cfg: dict[str, str]) -> RadarParams:
    return RadarParams(
        start_freq_hz=_f(cfg, "radar.start_freq_hz"),
        center_freq_hz=_f(cfg, "radar.center_freq_hz"),
        bandwidth_hz=_f(cfg, "radar.bandwidth_hz"),
        chirp_duration_s=_f(cfg, "radar.chirp_duration_s"),
        chirp_rep_s=_f(cfg, "radar.chirp_rep_s"),
        n_samples=_i(cfg, "radar.n_samples"),
        n_chirps=_i(cfg, "radar.n_chirps"),
        n_antennas=_i(cfg, "radar.n_antennas"),
        antenna_spacing_m=_f(cfg, "radar.antenna_spacing_m"),
        sample_rate_hz=_f(cfg, "radar.sample_rate_hz"),
        frame_period_s=_f(cfg, "radar.frame_period_s"),
    )


def _room(cfg) -> Room | None:
    vals = [cfg[f"room.{k}"] for k in ("x_min", "x_max", "y_min", "y_max")]
    if any(v.lower() == "none" for v in vals):
        return None
    return Room(*(float(v) for v in vals))


def build_pipeline_config(cfg: dict[str, str]) -> PipelineConfig:
    space = cfg["pipeline.space"]
    mode = cfg["pipeline.mode"]
    dt = _f(cfg, "radar.frame_period_s")
    reference = cfg["maps.denoise_reference"]
    denoise = DenoiseProfile(
        near_db=_f(cfg, "maps.denoise_near_db"),
        far_db=_f(cfg, "maps.denoise_far_db"),
        reference=None if reference.lower() == "auto" else float(reference),
        angle_gate_db=_f(cfg, "maps.angle_gate_db"),
    )
    return PipelineConfig(
        space=space,
        mode=mode,
        antenna=_i(cfg, "pipeline.antenna"),
        map_cfg=MapConfig(
            n_fft_range=_i(cfg, "maps.n_fft_range"),
            n_fft_doppler=_i(cfg, "maps.n_fft_doppler"),
            n_fft_angle=_i(cfg, "maps.n_fft_angle"),
            rd_range_bins=_i(cfg, "maps.rd_range_bins"),
            rda_range_bins=_i(cfg, "maps.rda_range_bins"),
            static_center_bins=_i(cfg, "maps.static_center_bins"),
            static_edge_bins=_i(cfg, "maps.static_edge_bins"),
        ),
        denoise=denoise,
        detect=DetectParams(eps=_f(cfg, "detect.eps"), min_pts=_i(cfg, "detect.min_pts")),
        kf_rd=KalmanParamsRD(
            accel_std=_f(cfg, "kf_rd.accel_std"),
            range_std=_f(cfg, "kf_rd.range_std"),
            vel_std=_f(cfg, "kf_rd.vel_std"),
            dt=dt,
        ),
        kf_rda=KalmanParamsRDA(
            accel_std=_f(cfg, "kf_rda.accel_std"),
            x_std=_f(cfg, "kf_rda.x_std"),
            y_std=_f(cfg, "kf_rda.y_std"),
            dt=dt,
        ),
        track=TrackParams(
            max_age=_i(cfg, "track.max_age"),
            min_hits=_i(cfg, "track.min_det"),
            merge_dist_m=_f(cfg, "track.d_min"),
            variance_window=_i(cfg, "track.variance_window"),
            room=_room(cfg),
            box_height_m=_f(cfg, "track.box_height_m"),
            box_width_mps=_f(cfg, "track.box_width_mps"),
            gate_threshold=_f(cfg, "track.gate_threshold"),
        ),
        mud_bins=_i(cfg, "mud.n_doppler_bins"),
        mud_frames=_i(cfg, "mud.window_frames"),
        smoothing_window=_i(cfg, "labeler.smoothing_window"),
        unknown_threshold=_f(cfg, "labeler.unknown_threshold"),
        match_dist=_f(cfg, "pipeline.match_dist_m"),
    )


def build_model_config(cfg: dict[str, str], n_classes: int) -> ModelConfig:
    return ModelConfig(
        n_classes=n_classes,
        n_doppler_bins=_i(cfg, "mud.n_doppler_bins"),
        window_frames=_i(cfg, "mud.window_frames"),
        ib_maps=_ints(cfg, "model.ib_maps"),
        fc_hidden=_i(cfg, "model.fc_hidden"),
        decoder_maps=_ints(cfg, "model.decoder_maps"),
        dropout_p=_f(cfg, "model.dropout_p"),
        scale=_f(cfg, "model.scale"),
    )


def build_train_config(cfg: dict[str, str]) -> TrainConfig:
    return TrainConfig(
        learning_rate=_f(cfg, "train.learning_rate"),
        momentum=_f(cfg, "train.momentum"),
        l2=_f(cfg, "train.l2"),
        lr_factor=_f(cfg, "train.lr_factor"),
        patience=_i(cfg, "train.patience"),
        val_fraction=_f(cfg, "train.val_fraction"),
        alpha_rec=_f(cfg, "train.alpha_rec"),
        batch_size=_i(cfg, "train.batch_size"),
        max_epochs=_i(cfg, "train.max_epochs"),
        seed=_i(cfg, "train.seed"),
    )
