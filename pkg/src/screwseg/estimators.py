"""scikit-learn style wrappers around the segmentation pipeline.

Inputs are lists of trajectories (or a single trajectory), not 2-D arrays,
so these estimators slot into ``Pipeline``/``clone``/``get_params`` tooling
without pretending trajectories are feature matrices.
"""

from __future__ import annotations

from dataclasses import replace

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import InvalidArgumentError, check_descriptors
from .harness import get_method, method_descriptors, method_profile, prepare
from .progress import reparameterize
from .se3 import GeometricTrajectory, TimedTrajectory
from .segmentation import classify, learn_library, map_segments_to_time, segments_from_labels
from .smoothing import SmootherConfig, smooth


def _as_list(X, kind, name="X"):
    if isinstance(X, kind):
        return [X], True
    try:
        items = list(X)
    except TypeError:
        raise InvalidArgumentError(f"{name} must be a {kind.__name__} or a list of them") from None
    for i, item in enumerate(items):
        if not isinstance(item, kind):
            raise InvalidArgumentError(f"{name}[{i}] is {type(item).__name__}, expected {kind.__name__}")
    if not items:
        raise InvalidArgumentError(f"{name} is empty")
    return items, False


def _unwrap(out, single):
    return out[0] if single else out


def _resolve_method(method, L=None, ds=None, sigma_hat=None, beta=None):
    m = get_method(method)
    overrides = {k: float(v) for k, v in (("L", L), ("ds", ds), ("sigma_hat", sigma_hat), ("beta", beta)) if v is not None}
    return replace(m, **overrides) if overrides else m


class TrajectorySmoother(TransformerMixin, BaseEstimator):
    """RTS smoothing of timed pose trajectories.

    Parameters
    ----------
    meas_std_pos : float
        Position measurement noise [m].
    meas_std_rot_deg : float
        Orientation measurement noise [deg].
    process_accel_std : float
        Jerk spectral density for the position channels.
    process_accel_std_rot : float or None
        Same for the orientation channels; None reuses ``process_accel_std``.
    """

    def __init__(self, meas_std_pos=0.001, meas_std_rot_deg=2.0, process_accel_std=1.0, process_accel_std_rot=None):
        self.meas_std_pos = meas_std_pos
        self.meas_std_rot_deg = meas_std_rot_deg
        self.process_accel_std = process_accel_std
        self.process_accel_std_rot = process_accel_std_rot

    def config(self):
        return SmootherConfig(
            meas_std_pos=self.meas_std_pos,
            meas_std_rot=np.deg2rad(self.meas_std_rot_deg),
            process_accel_std=self.process_accel_std,
            process_accel_std_rot=self.process_accel_std_rot,
        )

    def fit(self, X, y=None):
        _as_list(X, TimedTrajectory)
        self.config_ = self.config()
        return self

    def transform(self, X):
        trajs, single = _as_list(X, TimedTrajectory)
        cfg = self.config()
        return _unwrap([smooth(t, cfg) for t in trajs], single)


class GeometricReparameterizer(TransformerMixin, BaseEstimator):
    """Resample timed trajectories on a uniform progress grid.

    ``L`` and ``ds`` default to the chosen method's preset.
    """

    def __init__(self, method="G", L=None, ds=None):
        self.method = method
        self.L = L
        self.ds = ds

    def _method(self):
        return _resolve_method(self.method, L=self.L, ds=self.ds)

    def fit(self, X, y=None):
        _as_list(X, TimedTrajectory)
        self.method_ = self._method()
        return self

    def profiles(self, X):
        """Progress profile of each trajectory."""
        trajs, single = _as_list(X, TimedTrajectory)
        m = self._method()
        return _unwrap([method_profile(t, m) for t in trajs], single)

    def transform(self, X):
        trajs, single = _as_list(X, TimedTrajectory)
        m = self._method()
        return _unwrap([reparameterize(t, method_profile(t, m), m.ds) for t in trajs], single)


class ShapeDescriptorExtractor(TransformerMixin, BaseEstimator):
    """Map geometric trajectories to stacks of 3x6 shape descriptors."""

    def __init__(self, method="G", L=None):
        self.method = method
        self.L = L

    def fit(self, X, y=None):
        _as_list(X, GeometricTrajectory)
        return self

    def transform(self, X):
        gtrajs, single = _as_list(X, GeometricTrajectory)
        m = _resolve_method(self.method, L=self.L)
        return _unwrap([method_descriptors(g, m) for g in gtrajs], single)


def _descriptor_list(X):
    if isinstance(X, np.ndarray):
        return [check_descriptors(X).reshape(-1, 3, 6)], True
    items = list(X)
    if not items:
        raise InvalidArgumentError("X is empty")
    return [check_descriptors(x).reshape(-1, 3, 6) for x in items], False


class PrimitiveSegmenter(BaseEstimator):
    """Learn trajectory-shape primitives and label descriptors with them.

    ``fit`` accepts one descriptor stack ``(N, 3, 6)`` or a list of stacks,
    which are concatenated in order. ``predict`` returns NON_CLASSIFIED (-1)
    for descriptors outside every cluster's 3-sigma gate.

    Attributes
    ----------
    library_ : ClusterLibrary
    """

    def __init__(self, sigma_hat=0.1, beta=5.0, sigma0_init=None, max_iter=25, rtol=0.01, L=None, ds=None):
        self.sigma_hat = sigma_hat
        self.beta = beta
        self.sigma0_init = sigma0_init
        self.max_iter = max_iter
        self.rtol = rtol
        self.L = L
        self.ds = ds

    def fit(self, X, y=None):
        stacks, _ = _descriptor_list(X)
        self.library_ = learn_library(
            np.concatenate(stacks),
            sigma0_init=self.sigma0_init,
            sigma_hat=self.sigma_hat,
            beta=self.beta,
            L=self.L,
            ds=self.ds,
            max_iter=self.max_iter,
            rtol=self.rtol,
        )
        self.n_clusters_ = len(self.library_)
        return self

    def predict(self, X):
        check_is_fitted(self, "library_")
        stacks, single = _descriptor_list(X)
        return _unwrap([np.atleast_1d(classify(s, self.library_)) for s in stacks], single)

    def fit_predict(self, X, y=None):
        return self.fit(X).predict(X)

    def segment(self, X):
        """Segments (maximal equal-label runs) of each descriptor stack."""
        labels = self.predict(X)
        if isinstance(labels, np.ndarray):
            return segments_from_labels(labels)
        return [segments_from_labels(lab) for lab in labels]


class ScrewTrajectorySegmenter(BaseEstimator):
    """End-to-end segmentation: smooth, reparameterize, describe, cluster.

    Parameters
    ----------
    method : str
        Progress definition, ``"A"`` to ``"G"``; ``L``, ``ds``, ``sigma_hat``
        and ``beta`` default to that method's preset.
    smoother : TrajectorySmoother, None or False
        None uses a default smoother; False disables smoothing.

    Attributes
    ----------
    library_ : ClusterLibrary
    method_ : MethodConfig
    """

    def __init__(self, method="G", L=None, ds=None, sigma_hat=None, beta=None, smoother=None):
        self.method = method
        self.L = L
        self.ds = ds
        self.sigma_hat = sigma_hat
        self.beta = beta
        self.smoother = smoother

    def _prepare(self, trajs, m):
        cfg = False if self.smoother is False else (self.smoother or TrajectorySmoother()).config()
        return [prepare(traj, m, cfg) for traj in trajs]

    def fit(self, X, y=None):
        trajs, _ = _as_list(X, TimedTrajectory)
        m = _resolve_method(self.method, self.L, self.ds, self.sigma_hat, self.beta)
        prepared = self._prepare(trajs, m)
        X_desc = np.concatenate([p.descriptors for p in prepared])
        self.library_ = learn_library(X_desc, sigma_hat=m.sigma_hat, beta=m.beta, L=m.L, ds=m.ds)
        self.method_ = m
        return self

    def predict(self, X):
        """Per-descriptor labels of each trajectory."""
        check_is_fitted(self, "library_")
        trajs, single = _as_list(X, TimedTrajectory)
        prepared = self._prepare(trajs, self.method_)
        return _unwrap([np.atleast_1d(classify(p.descriptors, self.library_)) for p in prepared], single)

    def segment(self, X, time_domain=True, standstill_threshold=0.01):
        """Segments of each trajectory, mapped back to time by default."""
        check_is_fitted(self, "library_")
        trajs, single = _as_list(X, TimedTrajectory)
        out = []
        for p in self._prepare(trajs, self.method_):
            labels = np.atleast_1d(classify(p.descriptors, self.library_))
            segs = segments_from_labels(labels, p.s)
            if time_domain:
                threshold = 0.0 if p.method.progress_kind == "TIME" else standstill_threshold
                segs = map_segments_to_time(segs, p.profile, p.grid.step, standstill_threshold=threshold)
            out.append(segs)
        return _unwrap(out, single)


__all__ = [
    "GeometricReparameterizer",
    "PrimitiveSegmenter",
    "ScrewTrajectorySegmenter",
    "ShapeDescriptorExtractor",
    "TrajectorySmoother",
]
