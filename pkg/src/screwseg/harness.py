"""Method comparison (progress definitions A-G) and segmentation metrics."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._validation import InvalidArgumentError
from .descriptor import build_descriptors
from .progress import (
    ProgressProfile,
    geometric_twists,
    progress_profile,
    regularized_progress,
    reparameterize,
)
from .segmentation import (
    NON_CLASSIFIED,
    STATIONARY,
    label_sequence,
    learn_library,
    map_segments_to_time,
    segment_trajectory,
)
from .se3 import GeometricTrajectory
from .simulation import ScenarioConfig, simulate
from .smoothing import smooth
from .twist import estimate_twists

# segments shorter than this many descriptors are treated as noise when
# reading off label sequences
MIN_SEGMENT_SAMPLES = 3

PROGRESS_KINDS = ("TIME", "ARCLENGTH", "ANGLE", "COMBINED", "SCREW_UNREG", "SCREW_REG")


@dataclass(frozen=True)
class MethodConfig:
    """Progress definition and tuning parameters of one compared method.

    Units are SI: ``L`` [m]; ``ds`` in the progress unit (s for TIME, rad
    for ANGLE, m otherwise); ``sigma_hat`` in descriptor units (m/s for TIME,
    m otherwise); ``beta`` in percent.
    """

    id: str
    progress_kind: str
    L: float
    ds: float
    sigma_hat: float
    beta: float

    def __post_init__(self):
        if self.progress_kind not in PROGRESS_KINDS:
            raise InvalidArgumentError(f"unknown progress kind {self.progress_kind!r}")


METHODS = {
    "A": MethodConfig("A", "TIME", 0.0, 0.1, 0.10, 2.0),
    "B": MethodConfig("B", "ARCLENGTH", 0.0, 0.02, 0.02, 5.0),
    "C": MethodConfig("C", "ARCLENGTH", 0.30, 0.02, 0.10, 5.0),
    "D": MethodConfig("D", "ANGLE", 0.30, np.deg2rad(3.0), 0.10, 5.0),
    "E": MethodConfig("E", "COMBINED", 0.30, 0.02, 0.10, 5.0),
    "F": MethodConfig("F", "SCREW_UNREG", 0.30, 0.02, 0.10, 5.0),
    "G": MethodConfig("G", "SCREW_REG", 0.30, 0.02, 0.10, 5.0),
}


def get_method(method):
    if isinstance(method, MethodConfig):
        return method
    try:
        return METHODS[str(method).upper()]
    except KeyError:
        raise InvalidArgumentError(f"unknown method {method!r}") from None


def _norm(x):
    return np.linalg.norm(x, axis=-1)


def screw_translation(w, v):
    """Unregularized translational velocity along the screw axis.

    Equals ``v`` when ``w`` is exactly zero (the removable singularity);
    otherwise the projection of ``v`` on ``w``, however small ``w`` is.
    """
    w = np.asarray(w, dtype=float)
    v = np.asarray(v, dtype=float)
    ww = np.einsum("...i,...i->...", w, w)
    zero = ww == 0.0
    proj = np.einsum("...i,...i->...", w, v) / np.where(zero, 1.0, ww)
    return np.where(zero[..., None], v, proj[..., None] * w)


def progress_rate_for(method, w, v):
    """Progress rate of ``method`` for twist(s) ``(w, v)``."""
    m = get_method(method)
    w = np.asarray(w, dtype=float)
    v = np.asarray(v, dtype=float)
    kind = m.progress_kind
    if kind == "TIME":
        return np.ones(np.broadcast_shapes(w.shape, v.shape)[:-1])
    if kind == "ARCLENGTH":
        return _norm(v)
    if kind == "ANGLE":
        return _norm(w)
    if kind == "COMBINED":
        return np.sqrt(m.L**2 * _norm(w) ** 2 + _norm(v) ** 2)
    if kind == "SCREW_UNREG":
        return m.L * _norm(w) + _norm(screw_translation(w, v))
    return regularized_progress(w, v, m.L).sdot


def _translational(m, w, v):
    if m.progress_kind == "SCREW_UNREG":
        return screw_translation(w, v)
    if m.progress_kind == "SCREW_REG":
        return regularized_progress(w, v, m.L).nu_tilde
    return v


def method_descriptors(gtraj, method):
    """Shape descriptors of a resampled trajectory under ``method``.

    Velocities are taken with respect to the method's own progress and
    normalised by its rate (unit speed), except for TIME, which keeps raw
    magnitudes.
    """
    m = get_method(method)
    if m.progress_kind == "SCREW_REG":
        return build_descriptors(*geometric_twists(gtraj, m.L), m.L)
    w, v = estimate_twists(gtraj)
    trans = _translational(m, w, v)
    if m.progress_kind != "TIME":
        rate = np.asarray(progress_rate_for(m, w, v))
        scale = np.where(rate > 1e-9, 1.0 / np.where(rate > 1e-9, rate, 1.0), 1.0)
        w = w * scale[:, None]
        trans = trans * scale[:, None]
    return build_descriptors(w, trans, m.L)


def method_profile(traj, method):
    m = get_method(method)
    if m.progress_kind == "TIME":
        t = np.array(traj.t)
        return ProgressProfile(t, t - t[0], np.ones(len(t)))
    return progress_profile(traj, m.L, rate=lambda w, v: progress_rate_for(m, w, v))


@dataclass
class Prepared:
    """Per-trial intermediates of the segmentation pipeline."""

    method: MethodConfig
    traj: object
    profile: ProgressProfile
    grid: GeometricTrajectory
    descriptors: np.ndarray

    @property
    def s(self):
        """Progress of each descriptor's centre sample."""
        return np.asarray(self.grid.s[1:-1])


def prepare(traj, method, smoother=None):
    """Smooth (unless ``smoother`` is False), resample and describe one trial."""
    m = get_method(method)
    if smoother is not False:
        traj = smooth(traj, smoother)
    profile = method_profile(traj, m)
    grid = reparameterize(traj, profile, m.ds)
    return Prepared(m, traj, profile, grid, method_descriptors(grid, m))


def learn_from(prepared):
    """Learn one library from the concatenated descriptors of several trials."""
    m = prepared[0].method
    X = np.concatenate([p.descriptors for p in prepared])
    return learn_library(X, sigma_hat=m.sigma_hat, beta=m.beta, L=m.L, ds=m.ds)


def segment_prepared(prep, library, time_domain=True, standstill_threshold=0.01):
    segments = segment_trajectory(prep.descriptors, library, s=prep.s)
    if not time_domain:
        return segments
    threshold = 0.0 if prep.method.progress_kind == "TIME" else standstill_threshold
    return map_segments_to_time(segments, prep.profile, prep.grid.step, standstill_threshold=threshold)


def run_method(traj, method, library=None, smoother=None):
    """Full pipeline on one trial; learns a library from it when none is given.

    Returns
    -------
    library : ClusterLibrary
    segments : list of Segment
        Time-mapped segments, including inserted standstills.
    """
    prep = prepare(traj, method, smoother)
    if library is None:
        library = learn_from([prep])
    return library, segment_prepared(prep, library)


@dataclass
class EvaluationReport:
    """Detection and consistency counts over aligned trials."""

    detected: int
    consistent: int
    n_submotions: int
    matches: list = field(default_factory=list)  # per trial: matched label per sub-motion or None
    submotions: list = field(default_factory=list)

    def to_dict(self):
        return {
            "detected_submotions": self.detected,
            "consistent_submotions": self.consistent,
            "n_submotions": self.n_submotions,
            "submotions": self.submotions,
            "matches": [[None if x is None else int(x) for x in row] for row in self.matches],
        }


def match_submotions(segments, truth, min_overlap=0.5):
    """Label of the classified segment covering each sub-motion, or None.

    A sub-motion matches when a single classified segment overlaps at least
    ``min_overlap`` of its duration.
    """
    out = []
    for ph in truth.submotions:
        best, best_label = 0.0, None
        for g in segments:
            if g.label < 0 or g.start_t is None:
                continue
            overlap = min(g.end_t, ph.end_t) - max(g.start_t, ph.start_t)
            if overlap > best:
                best, best_label = overlap, g.label
        dur = ph.end_t - ph.start_t
        out.append(best_label if best >= min_overlap * dur else None)
    return out


def evaluate(results, min_overlap=0.5):
    """Count sub-motions detected in every trial and those labelled consistently.

    Parameters
    ----------
    results : list of (segments, GroundTruth)
        Time-mapped segments of each trial with its ground truth.
    """
    if not results:
        raise InvalidArgumentError("nothing to evaluate")
    matches = [match_submotions(segs, truth, min_overlap) for segs, truth in results]
    names = [p.label for p in results[0][1].submotions]
    if any(len(m) != len(names) for m in matches):
        raise InvalidArgumentError("trials have different numbers of sub-motions")
    detected = consistent = 0
    for k in range(len(names)):
        column = [m[k] for m in matches]
        if all(x is not None for x in column):
            detected += 1
            if len(set(column)) == 1:
                consistent += 1
    return EvaluationReport(detected, consistent, len(names), matches, names)


@dataclass
class MethodOutcome:
    method: MethodConfig
    library: object
    prepared: list
    segments: list
    report: EvaluationReport

    @property
    def label_sequences(self):
        return [label_sequence(s, MIN_SEGMENT_SAMPLES) for s in self.segments]

    def descriptor_labels(self):
        from .segmentation import classify

        return [np.atleast_1d(classify(p.descriptors, self.library)) for p in self.prepared]


def _phase_mask(t, truth, kinds):
    mask = np.zeros(len(t), dtype=bool)
    for ph in truth.phases:
        if ph.label in kinds:
            mask |= (t >= ph.start_t) & (t <= ph.end_t)
    return mask


def nonclassified_fraction(outcome, truths, kinds=("tilt+", "tilt-")):
    """Fraction of descriptors falling in ``kinds`` phases that are NON_CLASSIFIED.

    Pooled over trials; a descriptor is placed in time at its centre sample.
    Returns 1.0 when no descriptor falls in those phases at all.
    """
    hit = total = 0
    for prep, labels, truth in zip(outcome.prepared, outcome.descriptor_labels(), truths):
        t = prep.profile.time_at(prep.s)
        mask = _phase_mask(t, truth, kinds)
        total += int(mask.sum())
        hit += int(np.sum(labels[mask] == NON_CLASSIFIED))
    return 1.0 if total == 0 else hit / total


def progress_fraction(prepared, truths, kinds=("slide+", "slide-")):
    """Share of total progress accumulated during ``kinds`` phases, pooled over trials."""
    part = total = 0.0
    for prep, truth in zip(prepared, truths):
        prof = prep.profile
        for ph in truth.phases:
            if ph.label in kinds:
                part += float(prof.progress_at(ph.end_t) - prof.progress_at(ph.start_t))
        total += prof.total
    return part / total


def simulate_trials(scenario="kettle", refs=("P1", "P2", "P3"), seed=0, **overrides):
    """Simulate one trial per reference point with consecutive seeds."""
    trials = []
    for i, ref in enumerate(refs):
        cfg = ScenarioConfig(object=scenario, ref_point=ref, seed=seed + i, **overrides)
        trials.append(simulate(cfg))
    return trials


def run_trials(trials, method, library=None, smoother=None):
    """Learn one library over all trials (unless given) and segment each."""
    m = get_method(method)
    prepared = [prepare(traj, m, smoother) for traj, _ in trials]
    if library is None:
        library = learn_from(prepared)
    segments = [segment_prepared(p, library) for p in prepared]
    report = evaluate([(s, truth) for s, (_, truth) in zip(segments, trials)])
    return MethodOutcome(m, library, prepared, segments, report)


def compare(scenario="kettle", methods="ABCDEFG", seed=0, smoother=None, trials=None):
    """Run every method on the same three-trial scenario."""
    trials = simulate_trials(scenario, seed=seed) if trials is None else trials
    return {get_method(m).id: run_trials(trials, m, smoother=smoother) for m in methods}


__all__ = [
    "METHODS",
    "NON_CLASSIFIED",
    "STATIONARY",
    "EvaluationReport",
    "MethodConfig",
    "MethodOutcome",
    "compare",
    "evaluate",
    "get_method",
    "match_submotions",
    "nonclassified_fraction",
    "progress_fraction",
    "method_descriptors",
    "prepare",
    "progress_rate_for",
    "run_method",
    "run_trials",
    "screw_translation",
    "simulate_trials",
]
