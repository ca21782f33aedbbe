"""Screw-based progress rate, cumulative progress and geometric reparameterization."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._validation import (
    DegenerateTwistError,
    InvalidArgumentError,
    TrajectoryTooShortError,
    check_positive,
    check_vector,
)
from .se3 import GeometricTrajectory, TimedTrajectory, sclerp
from .twist import estimate_twists, relative_logs

# below this rotational rate the twist is treated as a pure translation
ZERO_OMEGA = 1e-10


@dataclass(frozen=True)
class ScrewState:
    """Regularized screw decomposition of one twist or a stack of twists.

    Attributes
    ----------
    p_tilde : ndarray (..., 3)
        Body origin to the closest screw-axis point, clamped to the sphere of
        radius L.
    nu_tilde : ndarray (..., 3)
        Translational velocity of the body point at ``p_tilde``.
    sdot : ndarray (...)
        Progress rate ``sqrt(L^2 |w|^2 + |nu_tilde|^2)``.
    """

    p_tilde: np.ndarray
    nu_tilde: np.ndarray
    sdot: np.ndarray


@dataclass(frozen=True)
class ProgressProfile:
    """Cumulative progress ``s`` and progress rate ``sdot`` at each timestamp."""

    t: np.ndarray
    s: np.ndarray
    sdot: np.ndarray

    @property
    def total(self):
        return float(self.s[-1])

    def time_at(self, s_query):
        """Earliest time at which the progress reaches ``s_query``."""
        s_query = np.asarray(s_query, dtype=float)
        if np.any(s_query < self.s[0] - 1e-12) or np.any(s_query > self.s[-1] + 1e-12):
            raise InvalidArgumentError("progress value outside the profile range")
        j = np.searchsorted(self.s, s_query, side="left")
        j = np.clip(j, 1, len(self.s) - 1)
        s0, s1 = self.s[j - 1], self.s[j]
        t0, t1 = self.t[j - 1], self.t[j]
        gap = s1 - s0
        frac = np.where(gap > 0, (s_query - s0) / np.where(gap > 0, gap, 1.0), 1.0)
        out = t0 + np.clip(frac, 0.0, 1.0) * (t1 - t0)
        return np.where(s_query <= self.s[0], self.t[0], out)

    def progress_at(self, t_query):
        return np.interp(t_query, self.t, self.s)


def screw_axis_point(w, v):
    """Closest point of the instantaneous screw axis to the reference point."""
    w = check_vector(w, 3, "w")
    v = check_vector(v, 3, "v")
    ww = np.einsum("...i,...i->...", w, w)
    if np.any(np.sqrt(ww) < ZERO_OMEGA):
        raise DegenerateTwistError("screw axis undefined for zero rotational velocity")
    return np.cross(w, v) / ww[..., None]


def regularized_progress(w, v, L):
    """Regularized progress rate with the clamp radius equal to ``L``.

    Works on single twists or stacks; see :class:`ScrewState`.
    """
    L = check_positive(L, "L")
    w = check_vector(w, 3, "w")
    v = check_vector(v, 3, "v")
    w, v = np.broadcast_arrays(w, v)
    ww = np.einsum("...i,...i->...", w, w)
    rotating = np.sqrt(ww) >= ZERO_OMEGA
    p = np.cross(w, v) / np.where(rotating, ww, 1.0)[..., None]
    p = np.where(rotating[..., None], p, 0.0)
    norm_p = np.linalg.norm(p, axis=-1)
    scale = np.where(norm_p > L, L / np.where(norm_p > 0, norm_p, 1.0), 1.0)
    p_tilde = p * scale[..., None]
    nu_tilde = v + np.cross(w, p_tilde)
    sdot = np.sqrt(L * L * ww + np.einsum("...i,...i->...", nu_tilde, nu_tilde))
    return ScrewState(p_tilde, nu_tilde, sdot)


def screw_rate(L):
    """Progress-rate callable ``rate(w, v) -> sdot`` for the regularized screw rate."""

    def rate(w, v):
        return regularized_progress(w, v, L).sdot

    return rate


def progress_profile(traj, L, rate=None):
    """Cumulative progress along a timed trajectory.

    ``sdot`` is evaluated from the estimated pose twists. The cumulative
    progress sums the rate of each exact inter-sample displacement
    ``log(T_i^-1 T_{i+1})``; every progress rate used here is positively
    homogeneous, so each increment equals the integral of ``sdot`` along the
    constant screw joining the two samples.

    Parameters
    ----------
    traj : TimedTrajectory
    L : float
        Rotation weighting length [m].
    rate : callable, optional
        ``rate(w, v)`` mapping twists to progress rates. Defaults to the
        regularized screw rate.
    """
    if len(traj) < 2:
        raise TrajectoryTooShortError("progress needs at least 2 samples")
    rate = screw_rate(L) if rate is None else rate
    omega, v = estimate_twists(traj)
    sdot = np.asarray(rate(omega, v), dtype=float)
    y = relative_logs(traj.poses)
    increments = np.asarray(rate(y[:, :3], y[:, 3:]), dtype=float)
    s = np.concatenate([[0.0], np.cumsum(increments)])
    return ProgressProfile(np.array(traj.t), s, sdot)


def reparameterize(traj, profile, ds):
    """Resample ``traj`` on the uniform progress grid ``0, ds, 2 ds, ...``.

    Each grid pose is the screw interpolation between the two samples
    bracketing it in progress. Standstill plateaus collapse to their last
    sample, so any re-timing of the same path yields the same result.
    """
    ds = check_positive(ds, "ds")
    s = np.asarray(profile.s, dtype=float)
    if len(s) != len(traj):
        raise InvalidArgumentError("profile and trajectory lengths differ")
    total = s[-1]
    if total < 2 * ds:
        raise TrajectoryTooShortError(f"total progress {total:.4g} is shorter than 2 * ds")
    n_grid = int(np.floor(total / ds * (1 + 1e-12))) + 1
    grid = ds * np.arange(n_grid)
    grid[-1] = min(grid[-1], total)

    j = np.searchsorted(s, grid, side="right") - 1
    j = np.clip(j, 0, len(s) - 1)
    last = j == len(s) - 1
    jn = np.where(last, j, j + 1)
    gap = s[jn] - s[j]
    alpha = np.where(gap > 0, (grid - s[j]) / np.where(gap > 0, gap, 1.0), 0.0)
    alpha = np.clip(alpha, 0.0, 1.0)
    poses = sclerp(traj.poses[j], traj.poses[jn], alpha)
    return GeometricTrajectory(ds * np.arange(n_grid), poses, ds)


def geometric_twists(gtraj, L):
    """Unit-speed rotational and regularized translational velocity per sample.

    Twists are differentiated with respect to progress, regularized and then
    scaled jointly by the recomputed rate so that
    ``L^2 |w|^2 + |nu_tilde|^2 == 1`` at every sample. Where the central
    estimate cancels (a motion reversal exactly on a grid point) the forward
    difference is used instead.

    Returns
    -------
    w, nu_tilde : ndarray of shape (N, 3)
    """
    if len(gtraj) < 3:
        raise TrajectoryTooShortError("geometric twists need at least 3 samples")
    L = check_positive(L, "L")
    omega, v = estimate_twists(gtraj)
    sdot = regularized_progress(omega, v, L).sdot
    bad = sdot < 1e-9
    if np.any(bad):
        y = relative_logs(gtraj.poses)
        idx = np.flatnonzero(bad)
        fwd = np.minimum(idx, len(y) - 1)
        R = gtraj.rotations[idx]
        omega[idx] = np.einsum("nij,nj->ni", R, y[fwd, :3]) / gtraj.step
        v[idx] = np.einsum("nij,nj->ni", R, y[fwd, 3:]) / gtraj.step
    state = regularized_progress(omega, v, L)
    if np.any(state.sdot <= 0):
        raise TrajectoryTooShortError("degenerate geometric sample with zero progress rate")
    inv = 1.0 / state.sdot[:, None]
    return omega * inv, state.nu_tilde * inv


def timed_from_geometric(gtraj):
    """View a geometric trajectory as a timed one (progress used as time)."""
    return TimedTrajectory(gtraj.s, gtraj.poses)
