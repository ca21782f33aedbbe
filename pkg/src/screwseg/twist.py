"""Pose-twist estimation by differentiation in the local SE(3) logarithm chart."""

from __future__ import annotations

import numpy as np

from ._validation import TrajectoryTooShortError
from .se3 import inv_pose, se3_log


def relative_logs(poses):
    """Body-frame twists ``log(T_i^-1 T_{i+1})`` between consecutive samples."""
    poses = np.asarray(poses, dtype=float)
    return se3_log(inv_pose(poses[:-1]) @ poses[1:])


def estimate_twists(traj):
    """Estimate the pose twist ``(omega, v)`` at every sample.

    ``omega`` is the rotational velocity and ``v`` the velocity of the body
    origin, both in world coordinates, per unit of the trajectory parameter
    (time for a :class:`TimedTrajectory`, progress for a geometric one).

    Interior samples use a three-point derivative of the chart
    ``tau -> log(T_i^-1 T(tau))``, which is second-order accurate on
    non-uniform grids and exact for constant-screw motion. The first and last
    samples use one-sided two-point differences.

    Returns
    -------
    omega, v : ndarray of shape (N, 3)
    """
    param = np.asarray(traj.param, dtype=float)
    poses = np.asarray(traj.poses, dtype=float)
    n = len(param)
    if n < 2:
        raise TrajectoryTooShortError("twist estimation needs at least 2 samples")
    y = relative_logs(poses)
    h = np.diff(param)

    body = np.empty((n, 6))
    body[0] = y[0] / h[0]
    body[-1] = y[-1] / h[-1]
    if n > 2:
        hm, hp = h[:-1, None], h[1:, None]
        # backward displacement in frame i is -y[i-1]
        body[1:-1] = (hm**2 * y[1:] + hp**2 * y[:-1]) / (hp * hm * (hp + hm))

    R = poses[:, :3, :3]
    omega = np.einsum("nij,nj->ni", R, body[:, :3])
    v = np.einsum("nij,nj->ni", R, body[:, 3:])
    return omega, v
