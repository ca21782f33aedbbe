"""SO(3)/SE(3) maps, screw linear interpolation and trajectory containers.

Poses are 4x4 homogeneous matrices. Every map accepts stacks of inputs
(leading batch dimensions) so trajectories can be processed without Python
loops. Twist 6-vectors are ordered ``(rotation, translation)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._validation import (
    InvalidArgumentError,
    check_finite,
    check_pose,
    check_rotation,
    check_vector,
)

# so3_log switches to the symmetric-part axis extraction above this angle
NEAR_PI = np.pi - 1e-7
_SMALL = 1e-6


def hat(w):
    """Skew-symmetric matrix of a (stack of) 3-vectors."""
    w = np.asarray(w, dtype=float)
    K = np.zeros(w.shape[:-1] + (3, 3))
    K[..., 0, 1] = -w[..., 2]
    K[..., 0, 2] = w[..., 1]
    K[..., 1, 0] = w[..., 2]
    K[..., 1, 2] = -w[..., 0]
    K[..., 2, 0] = -w[..., 1]
    K[..., 2, 1] = w[..., 0]
    return K


def vee(K):
    K = np.asarray(K, dtype=float)
    return np.stack([K[..., 2, 1], K[..., 0, 2], K[..., 1, 0]], axis=-1)


def make_pose(rotation=None, position=None):
    """Assemble a homogeneous transform from a rotation matrix and a position."""
    T = np.eye(4)
    if rotation is not None:
        T[:3, :3] = check_rotation(rotation)
    if position is not None:
        T[:3, 3] = check_vector(position, 3, "position")
    return T


def inv_pose(T):
    """Inverse of a (stack of) homogeneous transforms."""
    T = np.asarray(T, dtype=float)
    Rt = np.swapaxes(T[..., :3, :3], -1, -2)
    out = np.zeros_like(T)
    out[..., :3, :3] = Rt
    out[..., :3, 3] = -np.einsum("...ij,...j->...i", Rt, T[..., :3, 3])
    out[..., 3, 3] = 1.0
    return out


def project_to_so3(M):
    """Nearest rotation matrix (Frobenius sense) to each 3x3 matrix in ``M``."""
    U, _, Vt = np.linalg.svd(np.asarray(M, dtype=float))
    D = np.ones(U.shape[:-1])
    D[..., 2] = np.sign(np.linalg.det(U @ Vt))
    return (U * D[..., None, :]) @ Vt


def _sin_coeffs(theta):
    """Return sin(t)/t, (1-cos t)/t^2 and (t-sin t)/t^3 with small-angle series."""
    theta = np.asarray(theta, dtype=float)
    t2 = theta * theta
    small = theta < _SMALL
    safe = np.where(small, 1.0, theta)
    A = np.where(small, 1.0 - t2 / 6.0, np.sin(safe) / safe)
    B = np.where(small, 0.5 - t2 / 24.0, (1.0 - np.cos(safe)) / safe**2)
    C = np.where(small, 1.0 / 6.0 - t2 / 120.0, (safe - np.sin(safe)) / safe**3)
    return A, B, C


def so3_exp(rotvec):
    """Rotation matrix for a rotation vector (axis times angle in radians)."""
    w = check_vector(rotvec, 3, "rotvec")
    theta = np.linalg.norm(w, axis=-1)
    A, B, _ = _sin_coeffs(theta)
    K = hat(w)
    return np.eye(3) + A[..., None, None] * K + B[..., None, None] * (K @ K)


def so3_log(R):
    """Rotation vector of a rotation matrix, with angle in [0, pi]."""
    R = check_rotation(R)
    cos_t = np.clip((np.trace(R, axis1=-2, axis2=-1) - 1.0) / 2.0, -1.0, 1.0)
    theta = np.arccos(cos_t)
    skew = vee(R - np.swapaxes(R, -1, -2)) / 2.0  # sin(theta) * axis
    small = theta < _SMALL
    safe = np.where(small | (theta > NEAR_PI), 1.0, theta)
    factor = np.where(small, 1.0 + theta**2 / 6.0, safe / np.sin(safe))
    w = factor[..., None] * skew

    near_pi = theta > NEAR_PI
    if np.any(near_pi):
        Rn = R[near_pi]
        tn = theta[near_pi]
        # (R + R^T)/2 - cos(t) I = (1 - cos t) u u^T
        B = (Rn + np.swapaxes(Rn, -1, -2)) / 2.0 - cos_t[near_pi][:, None, None] * np.eye(3)
        B /= (1.0 - cos_t[near_pi])[:, None, None]
        k = np.argmax(np.diagonal(B, axis1=-2, axis2=-1), axis=-1)
        cols = B[np.arange(len(k)), :, k]
        u = cols / np.linalg.norm(cols, axis=-1, keepdims=True)
        sign = np.sign(np.einsum("ij,ij->i", u, skew[near_pi]))
        u = u * np.where(sign < 0, -1.0, 1.0)[:, None]
        w = np.array(w)
        w[near_pi] = tn[:, None] * u
    return w


def se3_exp(xi):
    """Homogeneous transform for a twist 6-vector ``(omega, v)``."""
    xi = check_vector(xi, 6, "twist")
    w, v = xi[..., :3], xi[..., 3:]
    theta = np.linalg.norm(w, axis=-1)
    A, B, C = _sin_coeffs(theta)
    K = hat(w)
    K2 = K @ K
    eye = np.eye(3)
    R = eye + A[..., None, None] * K + B[..., None, None] * K2
    V = eye + B[..., None, None] * K + C[..., None, None] * K2
    T = np.zeros(xi.shape[:-1] + (4, 4))
    T[..., :3, :3] = R
    T[..., :3, 3] = np.einsum("...ij,...j->...i", V, v)
    T[..., 3, 3] = 1.0
    return T


def se3_log(T):
    """Twist 6-vector ``(omega, v)`` with ``se3_exp(se3_log(T)) == T``."""
    T = check_pose(T)
    w = so3_log(T[..., :3, :3])
    theta = np.linalg.norm(w, axis=-1)
    small = theta < _SMALL
    safe = np.where(small, 1.0, theta)
    # V^-1 = I - K/2 + c K^2
    c = np.where(
        small,
        1.0 / 12.0 + theta**2 / 720.0,
        (1.0 - safe * np.sin(safe) / (2.0 * (1.0 - np.cos(safe)))) / safe**2,
    )
    K = hat(w)
    Vinv = np.eye(3) - 0.5 * K + c[..., None, None] * (K @ K)
    v = np.einsum("...ij,...j->...i", Vinv, T[..., :3, 3])
    return np.concatenate([w, v], axis=-1)


def sclerp(T0, T1, alpha):
    """Screw linear interpolation ``T0 exp(alpha log(T0^-1 T1))``.

    ``alpha`` may be an array broadcasting against the pose stacks. The
    endpoints are returned exactly.
    """
    T0 = check_pose(T0, "T0")
    T1 = check_pose(T1, "T1")
    alpha = check_finite(alpha, "alpha")
    if np.any((alpha < 0.0) | (alpha > 1.0)):
        raise InvalidArgumentError("alpha must lie in [0, 1]")
    xi = se3_log(inv_pose(T0) @ T1)
    out = T0 @ se3_exp(alpha[..., None] * xi)
    at_one = np.broadcast_to(alpha == 1.0, out.shape[:-2])
    if np.any(at_one):
        out = np.array(out)
        out[at_one] = np.broadcast_to(T1, out.shape)[at_one]
    at_zero = np.broadcast_to(alpha == 0.0, out.shape[:-2])
    if np.any(at_zero):
        out = np.array(out)
        out[at_zero] = np.broadcast_to(T0, out.shape)[at_zero]
    return out


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class TimedTrajectory:
    """Pose samples ``poses`` (N, 4, 4) at strictly increasing times ``t`` [s]."""

    t: np.ndarray
    poses: np.ndarray

    def __post_init__(self):
        t = check_finite(self.t, "timestamps")
        poses = check_pose(self.poses, "poses")
        if t.ndim != 1 or poses.shape != (len(t), 4, 4):
            raise InvalidArgumentError("timestamps and poses must have matching lengths")
        if len(t) < 1:
            raise InvalidArgumentError("trajectory must contain at least one sample")
        if np.any(np.diff(t) <= 0):
            raise InvalidArgumentError("timestamps must be strictly increasing")
        object.__setattr__(self, "t", _frozen(t))
        object.__setattr__(self, "poses", _frozen(poses))

    def __len__(self):
        return len(self.t)

    @property
    def param(self):
        return self.t

    @property
    def rotations(self):
        return self.poses[:, :3, :3]

    @property
    def positions(self):
        return self.poses[:, :3, 3]


@dataclass(frozen=True)
class GeometricTrajectory:
    """Pose samples on a uniform progress grid ``s = s[0] + k * step``."""

    s: np.ndarray
    poses: np.ndarray
    step: float

    def __post_init__(self):
        s = check_finite(self.s, "progress")
        poses = check_pose(self.poses, "poses")
        if s.ndim != 1 or poses.shape != (len(s), 4, 4):
            raise InvalidArgumentError("progress values and poses must have matching lengths")
        step = float(self.step)
        if step <= 0:
            raise InvalidArgumentError("step must be positive")
        grid = s[0] + step * np.arange(len(s))
        if np.max(np.abs(s - grid), initial=0.0) > 1e-12 * max(1.0, abs(grid[-1])):
            raise InvalidArgumentError("progress values must form a uniform grid")
        object.__setattr__(self, "s", _frozen(s))
        object.__setattr__(self, "poses", _frozen(poses))
        object.__setattr__(self, "step", step)

    def __len__(self):
        return len(self.s)

    @property
    def param(self):
        return self.s

    @property
    def rotations(self):
        return self.poses[:, :3, :3]

    @property
    def positions(self):
        return self.poses[:, :3, 3]


def change_frames(traj, T_world=None, T_body=None):
    """Replace every sample ``T`` by ``T_world @ T @ T_body``."""
    A = np.eye(4) if T_world is None else check_pose(T_world, "T_world")
    B = np.eye(4) if T_body is None else check_pose(T_body, "T_body")
    poses = A @ traj.poses @ B
    if isinstance(traj, GeometricTrajectory):
        return GeometricTrajectory(traj.s, poses, traj.step)
    return TimedTrajectory(traj.t, poses)
