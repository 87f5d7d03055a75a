"""Linear Kalman filtering for RD (range-velocity) and RDA (planar) tracking.

The RD filter tracks [r, v] and observes both components directly.  The
RDA filter tracks [x, vx, y, vy] and observes position only; polar
(range, azimuth) detections are converted to cartesian *before* the
update, which keeps the whole model linear instead of linearizing an
arctangent observation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "KalmanParamsRD",
    "KalmanParamsRDA",
    "KalmanState",
    "Innovation",
    "init_state_rd",
    "init_state_rda",
    "predict",
    "innovation",
    "update",
    "polar_to_cartesian",
    "polar_observation",
]

FRAME_DT = 1.0 / 15.0


@dataclass(frozen=True)
class KalmanParamsRD:
    accel_std: float = 0.6  # m/s^2
    range_std: float = 0.1  # m
    vel_std: float = 0.5  # m/s
    dt: float = FRAME_DT

    def __post_init__(self):
        if min(self.accel_std, self.range_std, self.vel_std, self.dt) < 0 or self.dt == 0:
            raise ValueError("Kalman parameters must be positive")


@dataclass(frozen=True)
class KalmanParamsRDA:
    accel_std: float = 8.0  # m/s^2
    x_std: float = 0.5  # m
    y_std: float = 0.5  # m
    dt: float = FRAME_DT

    def __post_init__(self):
        if min(self.accel_std, self.x_std, self.y_std, self.dt) < 0 or self.dt == 0:
            raise ValueError("Kalman parameters must be positive")


@dataclass
class KalmanState:
    x: np.ndarray  # [r, v] or [x, vx, y, vy]
    cov: np.ndarray
    space: str  # "rd" | "rda"

    def position(self) -> np.ndarray:
        """Observed-space coordinates: (r, v) for RD, (x, y) for RDA."""
        if self.space == "rd":
            return self.x.copy()
        return self.x[[0, 2]].copy()


@dataclass
class Innovation:
    residual: np.ndarray
    covariance: np.ndarray


def _model(params) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Transition, process noise, observation and observation noise matrices."""
    dt = params.dt
    f1 = np.array([[1.0, dt], [0.0, 1.0]])
    g = np.array([0.5 * dt * dt, dt])
    q1 = params.accel_std**2 * np.outer(g, g)
    if isinstance(params, KalmanParamsRD):
        obs = np.eye(2)
        obs_noise = np.diag([params.range_std**2, params.vel_std**2])
        return f1, q1, obs, obs_noise
    trans = np.kron(np.eye(2), f1)
    qn = np.kron(np.eye(2), q1)
    obs = np.array([[1.0, 0.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0]])
    obs_noise = np.diag([params.x_std**2, params.y_std**2])
    return trans, qn, obs, obs_noise


def init_state_rd(z: np.ndarray, params: KalmanParamsRD) -> KalmanState:
    """Start a track from its first (r, v) observation."""
    z = np.asarray(z, dtype=float)
    cov = np.diag([(3.0 * params.range_std) ** 2, 1.0])
    return KalmanState(x=z.copy(), cov=cov, space="rd")


def init_state_rda(z_xy: np.ndarray, params: KalmanParamsRDA) -> KalmanState:
    """Start a track from its first cartesian observation; velocity unknown."""
    z_xy = np.asarray(z_xy, dtype=float)
    x = np.array([z_xy[0], 0.0, z_xy[1], 0.0])
    cov = np.diag([(3.0 * params.x_std) ** 2, 1.0, (3.0 * params.y_std) ** 2, 1.0])
    return KalmanState(x=x, cov=cov, space="rda")


def predict(state: KalmanState, params) -> KalmanState:
    trans, q, _, _ = _model(params)
    x = trans @ state.x
    cov = trans @ state.cov @ trans.T + q
    return KalmanState(x=x, cov=_symmetrize(cov), space=state.space)


def innovation(state: KalmanState, z: np.ndarray, params) -> Innovation:
    """Residual and its covariance for a predicted state and a candidate observation."""
    _, _, obs, obs_noise = _model(params)
    z = np.asarray(z, dtype=float)
    return Innovation(
        residual=z - obs @ state.x,
        covariance=_symmetrize(obs @ state.cov @ obs.T + obs_noise),
    )


def update(state: KalmanState, z: np.ndarray, params) -> tuple[KalmanState, Innovation]:
    """Joseph-form measurement update; returns the posterior and the innovation."""
    z = np.asarray(z, dtype=float)
    if not np.all(np.isfinite(z)):
        raise ValueError(f"non-finite observation {z}")
    _, _, obs, obs_noise = _model(params)
    inno = innovation(state, z, params)
    try:
        gain = state.cov @ obs.T @ np.linalg.inv(inno.covariance)
    except np.linalg.LinAlgError:
        # zero-noise degenerate case; the pseudo-inverse keeps the update defined
        gain = state.cov @ obs.T @ np.linalg.pinv(inno.covariance)
    x = state.x + gain @ inno.residual
    ident = np.eye(len(state.x))
    j = ident - gain @ obs
    cov = j @ state.cov @ j.T + gain @ obs_noise @ gain.T
    return KalmanState(x=x, cov=_symmetrize(cov), space=state.space), inno


def polar_to_cartesian(r: float, theta: float) -> np.ndarray:
    """Map a (range, azimuth) observation to (x, y); the linearizing transform."""
    if r <= 0:
        raise ValueError(f"range must be positive, got {r}")
    return np.array([r * np.cos(theta), r * np.sin(theta)])


def polar_observation(state_x: np.ndarray) -> np.ndarray:
    """Reference nonlinear observation h(x) = (range, azimuth) of an RDA state.

    Kept only as a test oracle; the production path observes cartesian
    coordinates after ``polar_to_cartesian``.
    """
    x, y = state_x[0], state_x[2]
    return np.array([np.hypot(x, y), np.arctan2(y, x)])


def _symmetrize(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + m.T)
