"""Constant-acceleration Kalman (RTS) smoothing of rigid-body trajectories."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._validation import TrajectoryTooShortError, check_positive
from .se3 import TimedTrajectory, project_to_so3, so3_exp, so3_log


@dataclass(frozen=True)
class SmootherConfig:
    """Noise levels for the smoother.

    ``process_accel_std`` is the spectral density of the white jerk driving
    the acceleration state of the position channels, in m/s^2 per sqrt(s);
    ``process_accel_std_rot`` is its orientation counterpart in rad/s^2 per
    sqrt(s); ``None`` reuses the position value.
    """

    meas_std_pos: float = 0.001
    meas_std_rot: float = np.deg2rad(2.0)
    process_accel_std: float = 1.0
    process_accel_std_rot: float | None = None

    def __post_init__(self):
        check_positive(self.meas_std_pos, "meas_std_pos")
        check_positive(self.meas_std_rot, "meas_std_rot")
        check_positive(self.process_accel_std, "process_accel_std")
        if self.process_accel_std_rot is not None:
            check_positive(self.process_accel_std_rot, "process_accel_std_rot")

    @property
    def rot_accel_std(self):
        return self.process_accel_std if self.process_accel_std_rot is None else self.process_accel_std_rot


def _transition(dt):
    return np.array([[1.0, dt, 0.5 * dt * dt], [0.0, 1.0, dt], [0.0, 0.0, 1.0]])


def rts_smooth(t, z, meas_std, accel_std):
    """Forward Kalman filter plus Rauch-Tung-Striebel pass on scalar channels.

    All channels (columns of ``z``) share the same model, so one covariance
    recursion serves every channel.

    Parameters
    ----------
    t : ndarray (N,)
    z : ndarray (N, k)
        Measurements, one column per channel.

    Returns
    -------
    ndarray (N, k)
        Smoothed channel values.
    """
    t = np.asarray(t, dtype=float)
    z = np.asarray(z, dtype=float)
    n, k = z.shape
    r = meas_std**2
    H = np.array([1.0, 0.0, 0.0])

    x_f = np.zeros((n, 3, k))
    P_f = np.zeros((n, 3, 3))
    x_p = np.zeros((n, 3, k))
    P_p = np.zeros((n, 3, 3))
    Fs = np.zeros((n, 3, 3))

    x = np.zeros((3, k))
    x[0] = z[0]
    P = np.diag([r, 1e6, 1e6])
    for i in range(n):
        if i > 0:
            dt = t[i] - t[i - 1]
            F = _transition(dt)
            Q = np.zeros((3, 3))
            Q[2, 2] = accel_std**2 * dt
            x = F @ x
            P = F @ P @ F.T + Q
            Fs[i] = F
        x_p[i], P_p[i] = x, P
        S = P[0, 0] + r
        K = P[:, 0] / S
        x = x + np.outer(K, z[i] - x[0])
        P = P - np.outer(K, H @ P)
        x_f[i], P_f[i] = x, P

    xs = x_f[-1].copy()
    Ps = P_f[-1].copy()
    out = np.zeros((n, k))
    out[-1] = xs[0]
    for i in range(n - 2, -1, -1):
        F = Fs[i + 1]
        C = P_f[i] @ F.T @ np.linalg.inv(P_p[i + 1])
        xs = x_f[i] + C @ (xs - x_p[i + 1])
        Ps = P_f[i] + C @ (Ps - P_p[i + 1]) @ C.T
        out[i] = xs[0]
    return out


def smooth(traj, cfg=None):
    """Smooth positions and orientations of a timed trajectory.

    Positions are filtered per axis. Orientations are filtered on the running
    sum of body-frame rotation increments ``log(R_{i-1}^T R_i)``, whose noise
    does not accumulate; the smoothed increments are re-composed from the
    first sample and the constant orientation offset is removed by a
    least-squares fit against the measurements.
    """
    cfg = SmootherConfig() if cfg is None else cfg
    if len(traj) < 3:
        raise TrajectoryTooShortError("smoothing needs at least 3 samples")
    t = np.asarray(traj.t)
    pos = rts_smooth(t, traj.positions, cfg.meas_std_pos, cfg.process_accel_std)

    R = np.asarray(traj.rotations)
    incr = so3_log(np.swapaxes(R[:-1], -1, -2) @ R[1:])
    z = np.concatenate([np.zeros((1, 3)), np.cumsum(incr, axis=0)])
    z_s = rts_smooth(t, z, cfg.meas_std_rot, cfg.rot_accel_std)
    steps = so3_exp(np.diff(z_s, axis=0))
    R_s = np.empty_like(R)
    R_s[0] = R[0]
    for i, step in enumerate(steps):
        R_s[i + 1] = R_s[i] @ step
    for _ in range(2):
        offset = np.mean(so3_log(R @ np.swapaxes(R_s, -1, -2)), axis=0)
        R_s = so3_exp(offset) @ R_s
    R_s = project_to_so3(R_s)

    poses = np.zeros((len(t), 4, 4))
    poses[:, :3, :3] = R_s
    poses[:, :3, 3] = pos
    poses[:, 3, 3] = 1.0
    return TimedTrajectory(t, poses)

