"""Third-order trajectory-shape descriptors and their rotation-aligned distance."""

from __future__ import annotations

import numpy as np

from ._validation import InvalidArgumentError, check_descriptors, check_vector


def build_descriptors(w, nu, L):
    """Stack ``(L w, nu)`` at three consecutive samples into 3x6 matrices.

    Parameters
    ----------
    w, nu : array_like of shape (N, 3)
        Rotational and translational velocity per sample.
    L : float
        Weight applied to the rotational columns.

    Returns
    -------
    ndarray of shape (N - 2, 3, 6)
        Columns ``L w[i-1], L w[i], L w[i+1], nu[i-1], nu[i], nu[i+1]`` for
        every interior sample ``i``.
    """
    w = check_vector(w, 3, "w")
    nu = check_vector(nu, 3, "nu")
    if w.ndim != 2 or w.shape != nu.shape:
        raise InvalidArgumentError("w and nu must both have shape (N, 3)")
    if len(w) < 3:
        raise InvalidArgumentError("descriptors need at least 3 twist samples")
    Lw = float(L) * w
    cols = [Lw[:-2], Lw[1:-1], Lw[2:], nu[:-2], nu[1:-1], nu[2:]]
    return np.stack(cols, axis=-1)


def align(S1, S2):
    """Rotation ``R`` minimising ``||R S1 - S2||_F``.

    ``S1 S2^T = U diag(s) V^T`` gives ``R = V U^T``; when that is a
    reflection the third column of ``U`` is negated first. Broadcasts over
    leading dimensions.
    """
    S1 = check_descriptors(S1, "S1")
    S2 = check_descriptors(S2, "S2")
    return _align(S1, S2)


def _align(S1, S2):
    M = S1 @ np.swapaxes(S2, -1, -2)
    U, _, Vt = np.linalg.svd(M)
    V = np.swapaxes(Vt, -1, -2)
    R = V @ np.swapaxes(U, -1, -2)
    flip = np.linalg.det(R) < 0
    if np.any(flip):
        U = np.array(np.broadcast_to(U, R.shape))
        U[flip, :, 2] *= -1.0
        R = V @ np.swapaxes(U, -1, -2)
    return R


def shape_distance(S1, S2):
    """Frobenius distance between descriptors after optimal rotation alignment."""
    S1 = check_descriptors(S1, "S1")
    S2 = check_descriptors(S2, "S2")
    return _distance(S1, S2)


def _distance(S1, S2):
    R = _align(S1, S2)
    diff = R @ S1 - S2
    return np.sqrt(np.einsum("...ij,...ij->...", diff, diff))
