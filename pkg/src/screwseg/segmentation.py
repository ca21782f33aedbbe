"""Self-supervised segmentation by incremental clustering of shape descriptors."""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace

import numpy as np

from ._validation import InvalidArgumentError, check_descriptors, check_positive
from .descriptor import _align, _distance

logger = logging.getLogger(__name__)

NON_CLASSIFIED = -1
STATIONARY = -2

LIBRARY_VERSION = 1

# absolute slack on the 3-sigma gate so exact repeats join a zero-spread cluster
GATE_ATOL = 1e-9
TIE_ATOL = 1e-12


@dataclass
class Cluster:
    """A trajectory-shape primitive: aligned running mean and spread."""

    mean: np.ndarray
    sigma: float
    count: int = 1
    sum_sq: float = 0.0


@dataclass
class ClusterLibrary:
    """Learned primitives plus the parameters used to learn them."""

    clusters: list
    sigma0: float
    sigma_hat: float
    beta: float
    L: float | None = None
    ds: float | None = None
    converged: bool = True
    n_iter: int = 0
    n_samples: int = 0

    def __len__(self):
        return len(self.clusters)

    @property
    def means(self):
        return np.stack([c.mean for c in self.clusters])

    @property
    def sigmas(self):
        return np.array([c.sigma for c in self.clusters])

    @property
    def counts(self):
        return np.array([c.count for c in self.clusters])

    def to_dict(self):
        return {
            "version": LIBRARY_VERSION,
            "params": {
                "L_m": self.L,
                "ds_m": self.ds,
                "sigma_hat_m": self.sigma_hat,
                "beta_pct": self.beta,
            },
            "sigma0_m": self.sigma0,
            "converged": self.converged,
            "n_iter": self.n_iter,
            "n_samples": self.n_samples,
            "clusters": [
                {
                    "id": i,
                    "mean": [float(x) for x in c.mean.ravel()],
                    "sigma_m": float(c.sigma),
                    "count": int(c.count),
                }
                for i, c in enumerate(self.clusters)
            ],
        }

    @classmethod
    def from_dict(cls, doc):
        if doc.get("version") != LIBRARY_VERSION:
            raise InvalidArgumentError(f"unsupported library version {doc.get('version')!r}")
        params = doc["params"]
        clusters = []
        for i, c in enumerate(doc["clusters"]):
            mean = np.asarray(c["mean"], dtype=float)
            if mean.shape != (18,):
                raise InvalidArgumentError(f"cluster {i}: mean must have 18 entries")
            clusters.append(Cluster(mean.reshape(3, 6), float(c["sigma_m"]), int(c["count"])))
        return cls(
            clusters=clusters,
            sigma0=float(doc["sigma0_m"]),
            sigma_hat=float(params["sigma_hat_m"]),
            beta=float(params["beta_pct"]),
            L=params.get("L_m"),
            ds=params.get("ds_m"),
            converged=bool(doc.get("converged", True)),
            n_iter=int(doc.get("n_iter", 0)),
            n_samples=int(doc.get("n_samples", 0)),
        )


@dataclass
class Segment:
    """A maximal run of equally labelled samples.

    ``start_index``/``end_index`` are inclusive indices into the descriptor
    sequence; they are ``None`` for inserted standstill segments.
    """

    start_index: int | None
    end_index: int | None
    label: int
    start_s: float
    end_s: float
    start_t: float | None = None
    end_t: float | None = None

    @property
    def duration(self):
        if self.start_t is None or self.end_t is None:
            return None
        return self.end_t - self.start_t

    @property
    def classified(self):
        return self.label >= 0


def _cluster_sigma(count, sum_sq, sigma0):
    return sigma0 if count < 2 else float(np.sqrt(sum_sq / count))


def _nearest(d):
    dmin = d.min()
    return int(np.flatnonzero(d <= dmin + TIE_ATOL)[0])


def _cluster_pass(X, sigma0):
    """One incremental clustering pass over ``X`` with new-cluster spread ``sigma0``."""
    means = np.empty((0, 3, 6))
    counts = []
    sum_sq = []
    sigmas = []
    trace = []
    for x in X:
        if len(counts):
            d = _distance(x[None], means)
            k = _nearest(d)
            if d[k] <= 3.0 * sigmas[k] + GATE_ATOL:
                xa = _align(x, means[k]) @ x
                delta = xa - means[k]
                counts[k] += 1
                new_mean = means[k] + delta / counts[k]
                sum_sq[k] += float(np.sum(delta * (xa - new_mean)))
                means[k] = new_mean
                sigmas[k] = _cluster_sigma(counts[k], sum_sq[k], sigma0)
                trace.append(len(counts))
                continue
        means = np.concatenate([means, x[None]])
        counts.append(1)
        sum_sq.append(0.0)
        sigmas.append(sigma0)
        trace.append(len(counts))
    clusters = [Cluster(m.copy(), s, c, q) for m, s, c, q in zip(means, sigmas, counts, sum_sq)]
    return clusters, trace


def learn_library(
    descriptors,
    sigma0_init=None,
    sigma_hat=0.1,
    beta=5.0,
    *,
    L=None,
    ds=None,
    max_iter=25,
    rtol=0.01,
):
    """Learn trajectory-shape primitives by iterated incremental clustering.

    Each pass seeds a cluster with the first descriptor and assigns every
    following descriptor to its nearest cluster when the aligned distance is
    within three times that cluster's spread, otherwise opens a new cluster
    with spread ``sigma0``. After a pass ``sigma0`` becomes the mean cluster
    spread plus ``sigma_hat``; passes repeat until ``sigma0`` changes by less
    than ``rtol`` (relative). Clusters holding fewer than ``beta`` percent of
    the descriptors are then discarded.

    Returns
    -------
    ClusterLibrary
        ``converged`` is False when ``max_iter`` passes did not settle.
    """
    X = check_descriptors(descriptors)
    if X.ndim == 2:
        X = X[None]
    if len(X) == 0:
        raise InvalidArgumentError("need at least one descriptor")
    sigma_hat = check_positive(sigma_hat, "sigma_hat")
    sigma0 = sigma_hat if sigma0_init is None else check_positive(sigma0_init, "sigma0_init")
    beta = float(beta)
    if not 0 < beta < 100:
        raise InvalidArgumentError("beta must lie in (0, 100)")

    converged = False
    for it in range(1, max_iter + 1):
        clusters, _ = _cluster_pass(X, sigma0)
        sigma_next = float(np.mean([c.sigma for c in clusters])) + sigma_hat
        logger.debug("pass %d: sigma0=%.5f clusters=%d next=%.5f", it, sigma0, len(clusters), sigma_next)
        if abs(sigma_next - sigma0) / sigma0 < rtol:
            converged = True
            break
        if it < max_iter:
            sigma0 = sigma_next
    if not converged:
        logger.warning("sigma0 did not converge after %d passes", max_iter)

    min_count = beta / 100.0 * len(X)
    kept = [c for c in clusters if c.count >= min_count]
    return ClusterLibrary(
        clusters=kept,
        sigma0=sigma0,
        sigma_hat=sigma_hat,
        beta=beta,
        L=L,
        ds=ds,
        converged=converged,
        n_iter=it,
        n_samples=len(X),
    )


def classify(descriptor, library):
    """1-nearest-neighbour label within the 3-sigma gate, else NON_CLASSIFIED.

    Accepts one (3, 6) descriptor, returning an int, or a stack (N, 3, 6),
    returning an int array.
    """
    if library is None or len(library) == 0:
        raise InvalidArgumentError("library has no clusters")
    X = check_descriptors(descriptor)
    single = X.ndim == 2
    X = X.reshape(-1, 3, 6)
    means = library.means
    sigmas = library.sigmas
    d = _distance(X[:, None], means[None])
    labels = np.full(len(X), NON_CLASSIFIED, dtype=int)
    for i, row in enumerate(d):
        k = _nearest(row)
        if row[k] <= 3.0 * sigmas[k] + GATE_ATOL:
            labels[i] = k
    return int(labels[0]) if single else labels


def segments_from_labels(labels, s=None):
    """Group consecutive equal labels into segments covering every sample."""
    labels = np.asarray(labels, dtype=int)
    n = len(labels)
    if n == 0:
        return []
    s = np.arange(n, dtype=float) if s is None else np.asarray(s, dtype=float)
    breaks = np.flatnonzero(np.diff(labels)) + 1
    starts = np.concatenate([[0], breaks])
    ends = np.concatenate([breaks - 1, [n - 1]])
    return [Segment(int(a), int(b), int(labels[a]), float(s[a]), float(s[b])) for a, b in zip(starts, ends)]


def segment_trajectory(descriptors, library, s=None):
    """Label each descriptor and form segments from maximal equal-label runs."""
    labels = np.atleast_1d(classify(descriptors, library))
    return segments_from_labels(labels, s)


def standstill_intervals(profile, threshold=0.01, min_duration=0.1):
    """Time intervals where the progress rate stays below ``threshold``."""
    still = np.asarray(profile.sdot) < threshold
    t = np.asarray(profile.t)
    out = []
    for seg in segments_from_labels(still.astype(int)):
        if seg.label == 1:
            a, b = t[seg.start_index], t[seg.end_index]
            if b - a >= min_duration:
                out.append((float(a), float(b)))
    return out


def map_segments_to_time(segments, profile, step=None, *, standstill_threshold=0.01, min_standstill=0.1):
    """Attach time bounds to progress-domain segments and insert standstills.

    Each segment spans the progress cell ``[start_s - step/2, end_s + step/2]``
    which is mapped through the inverse of ``s(t)``; the first and last
    segment are stretched to the trajectory's time range. Standstill
    intervals are cut out of the segments they fall into and returned as
    STATIONARY segments.
    """
    if not segments:
        return []
    s_total = profile.total
    for seg in segments:
        if seg.start_s < -1e-9 or seg.end_s > s_total + 1e-9:
            raise InvalidArgumentError("segment progress lies outside the profile range")
    if step is None:
        step = _infer_step(segments)
    half = 0.5 * step
    sa = np.clip([seg.start_s - half for seg in segments], 0.0, s_total)
    sb = np.clip([seg.end_s + half for seg in segments], 0.0, s_total)
    ta = profile.time_at(sa)
    tb = profile.time_at(sb)
    ta[0] = profile.t[0]
    tb[-1] = profile.t[-1]
    tb[:-1] = np.maximum(tb[:-1], ta[:-1])
    ta[1:] = tb[:-1]

    timed = [replace(seg, start_t=float(a), end_t=float(b)) for seg, a, b in zip(segments, ta, tb)]
    stills = standstill_intervals(profile, standstill_threshold, min_standstill)
    out = []
    for seg in timed:
        pieces = [(seg.start_t, seg.end_t)]
        for a, b in stills:
            nxt = []
            for p, q in pieces:
                if b <= p or a >= q:
                    nxt.append((p, q))
                    continue
                if a > p:
                    nxt.append((p, a))
                if b < q:
                    nxt.append((b, q))
            pieces = nxt
        out.extend(replace(seg, start_t=p, end_t=q) for p, q in pieces if q > p)
    # slivers shorter than a standstill that touch one are absorbed by it
    if stills:
        kept = []
        for g in out:
            touching = [k for k, (a, b) in enumerate(stills) if g.end_t == a or g.start_t == b]
            if touching and g.end_t - g.start_t < min_standstill:
                k = touching[0]
                a, b = stills[k]
                stills[k] = (min(a, g.start_t), max(b, g.end_t))
                continue
            kept.append(g)
        out = kept
    for a, b in stills:
        s_here = float(profile.progress_at(a))
        out.append(Segment(None, None, STATIONARY, s_here, s_here, a, b))
    out.sort(key=lambda g: (g.start_t, g.end_t))
    return out


def _infer_step(segments):
    for seg in segments:
        if seg.end_index is not None and seg.end_index > seg.start_index:
            return (seg.end_s - seg.start_s) / (seg.end_index - seg.start_index)
    if len(segments) > 1:
        return segments[1].start_s - segments[0].end_s
    return 0.0


def label_sequence(segments, min_length=1):
    """Labels of the classified segments, in order.

    Time pieces of one progress-domain segment (split by a standstill) count
    once; runs shorter than ``min_length`` descriptors are skipped.
    """
    out = []
    last = None
    for g in segments:
        if g.label < 0:
            continue
        if g.start_index is not None and g.end_index - g.start_index + 1 < min_length:
            continue
        key = (g.start_index, g.label)
        if key != last:
            out.append(g.label)
        last = key
    return out


__all__ = [
    "NON_CLASSIFIED",
    "STATIONARY",
    "Cluster",
    "ClusterLibrary",
    "Segment",
    "classify",
    "label_sequence",
    "learn_library",
    "map_segments_to_time",
    "segment_trajectory",
    "segments_from_labels",
    "standstill_intervals",
]
