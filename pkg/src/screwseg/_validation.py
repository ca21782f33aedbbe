"""Input validation helpers shared across the package."""

from __future__ import annotations

import numpy as np

ORTHO_TOL = 1e-8


class InvalidArgumentError(ValueError):
    """Raised when an argument violates a documented precondition."""


class DegenerateTwistError(InvalidArgumentError):
    """Raised when a twist has no well-defined screw axis (zero rotation)."""


class TrajectoryTooShortError(InvalidArgumentError):
    """Raised when a trajectory carries too little progress or too few samples."""


def check_finite(x, name="array"):
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise InvalidArgumentError(f"{name} contains non-finite entries")
    return x


def check_vector(x, size=3, name="vector"):
    x = check_finite(x, name)
    if x.shape[-1:] != (size,):
        raise InvalidArgumentError(f"{name} must have trailing dimension {size}, got shape {x.shape}")
    return x


def check_rotation(R, name="rotation", tol=ORTHO_TOL):
    """Validate a (stack of) 3x3 rotation matrices and return it as float array."""
    R = check_finite(R, name)
    if R.shape[-2:] != (3, 3):
        raise InvalidArgumentError(f"{name} must be 3x3, got shape {R.shape}")
    RtR = np.einsum("...ji,...jk->...ik", R, R)
    if np.max(np.abs(RtR - np.eye(3)), initial=0.0) > tol:
        raise InvalidArgumentError(f"{name} is not orthogonal")
    if np.any(np.linalg.det(R) < 0):
        raise InvalidArgumentError(f"{name} has negative determinant")
    return R


def check_pose(T, name="pose"):
    """Validate a (stack of) 4x4 homogeneous transforms."""
    T = check_finite(T, name)
    if T.shape[-2:] != (4, 4):
        raise InvalidArgumentError(f"{name} must be 4x4, got shape {T.shape}")
    if np.max(np.abs(T[..., 3, :] - [0.0, 0.0, 0.0, 1.0]), initial=0.0) > 1e-12:
        raise InvalidArgumentError(f"{name} bottom row must be (0, 0, 0, 1)")
    check_rotation(T[..., :3, :3], name=f"{name} rotation")
    return T


def check_positive(value, name):
    value = float(value)
    if not np.isfinite(value) or value <= 0:
        raise InvalidArgumentError(f"{name} must be positive, got {value}")
    return value


def check_descriptors(S, name="descriptors"):
    S = check_finite(S, name)
    if S.shape[-2:] != (3, 6):
        raise InvalidArgumentError(f"{name} must have shape (..., 3, 6), got {S.shape}")
    return S
