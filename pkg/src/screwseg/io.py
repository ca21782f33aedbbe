"""File formats: trajectory/profile/label CSVs and library/segment/report JSON."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np
from scipy.spatial.transform import Rotation

from ._validation import InvalidArgumentError
from .progress import ProgressProfile
from .se3 import GeometricTrajectory, TimedTrajectory
from .segmentation import ClusterLibrary, Segment
from .simulation import GroundTruth

TRAJECTORY_HEADER = ("t", "px", "py", "pz", "qw", "qx", "qy", "qz")
GEOMETRIC_HEADER = ("s", "px", "py", "pz", "qw", "qx", "qy", "qz")
PROFILE_HEADER = ("t", "s", "sdot")
LABELS_HEADER = ("sample", "s_or_t", "label")

QUAT_NORM_TOL = 1e-6


class FileFormatError(InvalidArgumentError):
    """Malformed input file; the message names the file, row and field."""


def _fmt(x):
    return repr(float(x))


def _read_table(path, header):
    path = Path(path)
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise FileFormatError(f"{path}: cannot open ({exc.strerror})") from None
    with fh:
        reader = csv.reader(fh)
        try:
            got = next(reader)
        except StopIteration:
            raise FileFormatError(f"{path}: empty file, expected header {','.join(header)}") from None
        got = tuple(h.strip() for h in got)
        if got != tuple(header):
            raise FileFormatError(f"{path}: row 1: header {','.join(got)!r}, expected {','.join(header)!r}")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise FileFormatError(f"{path}: row {lineno}: expected {len(header)} fields, got {len(row)}")
            vals = []
            for name, cell in zip(header, row):
                try:
                    v = float(cell)
                except ValueError:
                    raise FileFormatError(f"{path}: row {lineno}: field {name!r}: not a number: {cell!r}") from None
                if not math.isfinite(v):
                    raise FileFormatError(f"{path}: row {lineno}: field {name!r}: not finite")
                vals.append(v)
            rows.append(vals)
    if not rows:
        raise FileFormatError(f"{path}: no data rows")
    return np.array(rows)


def _write_table(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(x) for x in row])


def _poses_to_rows(param, poses):
    poses = np.asarray(poses)
    q = Rotation.from_matrix(poses[:, :3, :3]).as_quat(scalar_first=True)
    return np.column_stack([param, poses[:, :3, 3], q])


def _rows_to_poses(path, data):
    q = data[:, 4:8]
    norms = np.linalg.norm(q, axis=1)
    bad = np.flatnonzero(norms < 1e-12)
    if len(bad):
        raise FileFormatError(f"{path}: row {bad[0] + 2}: field 'qw..qz': zero quaternion")
    poses = np.zeros((len(data), 4, 4))
    poses[:, :3, :3] = Rotation.from_quat(q / norms[:, None], scalar_first=True).as_matrix()
    poses[:, :3, 3] = data[:, 1:4]
    poses[:, 3, 3] = 1.0
    return poses


def _check_increasing(path, x, name):
    d = np.diff(x)
    bad = np.flatnonzero(d <= 0)
    if len(bad):
        raise FileFormatError(f"{path}: row {bad[0] + 3}: field {name!r}: not strictly increasing")


def save_trajectory(path, traj):
    """Write a timed trajectory as ``t,px,py,pz,qw,qx,qy,qz`` (scalar-first quaternions)."""
    _write_table(path, TRAJECTORY_HEADER, _poses_to_rows(traj.t, traj.poses))


def load_trajectory(path):
    """Read a trajectory CSV; quaternions are renormalised."""
    data = _read_table(path, TRAJECTORY_HEADER)
    _check_increasing(path, data[:, 0], "t")
    return TimedTrajectory(data[:, 0], _rows_to_poses(path, data))


def save_geometric(path, gtraj):
    _write_table(path, GEOMETRIC_HEADER, _poses_to_rows(gtraj.s, gtraj.poses))


def load_geometric(path):
    data = _read_table(path, GEOMETRIC_HEADER)
    if len(data) < 2:
        raise FileFormatError(f"{path}: a geometric trajectory needs at least 2 rows")
    _check_increasing(path, data[:, 0], "s")
    step = float(np.mean(np.diff(data[:, 0])))
    s = data[0, 0] + step * np.arange(len(data))
    if np.max(np.abs(s - data[:, 0])) > 1e-9 * max(1.0, abs(s[-1])):
        raise FileFormatError(f"{path}: field 's': grid is not uniform")
    return GeometricTrajectory(data[:, 0], _rows_to_poses(path, data), step)


def save_profile(path, profile):
    _write_table(path, PROFILE_HEADER, np.column_stack([profile.t, profile.s, profile.sdot]))


def load_profile(path):
    data = _read_table(path, PROFILE_HEADER)
    _check_increasing(path, data[:, 0], "t")
    bad = np.flatnonzero(np.diff(data[:, 1]) < 0)
    if len(bad):
        raise FileFormatError(f"{path}: row {bad[0] + 3}: field 's': progress decreases")
    return ProgressProfile(data[:, 0], data[:, 1], data[:, 2])


def _read_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise FileFormatError(f"{path}: cannot open ({exc.strerror})") from None
    except json.JSONDecodeError as exc:
        raise FileFormatError(f"{path}: row {exc.lineno}: invalid JSON ({exc.msg})") from None


def _write_json(path, doc):
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def save_library(path, library):
    _write_json(path, library.to_dict())


def load_library(path):
    doc = _read_json(path)
    if not isinstance(doc, dict):
        raise FileFormatError(f"{path}: expected a JSON object")
    try:
        return ClusterLibrary.from_dict(doc)
    except KeyError as exc:
        raise FileFormatError(f"{path}: field {exc.args[0]!r}: missing") from None
    except InvalidArgumentError as exc:
        raise FileFormatError(f"{path}: {exc}") from None


def segments_to_dict(segments, trial_id=None, kind="s", step=None):
    """SegmentsFile document; ``kind`` is ``"s"`` (progress grid) or ``"t"`` (time grid)."""
    if kind not in ("s", "t"):
        raise InvalidArgumentError(f"grid kind must be 's' or 't', got {kind!r}")
    out = []
    for g in segments:
        item = {"start": g.start_index, "end": g.end_index, "label": int(g.label), "start_s": g.start_s, "end_s": g.end_s}
        if g.start_t is not None:
            item["start_t"] = g.start_t
            item["end_t"] = g.end_t
        out.append(item)
    return {"trial_id": trial_id, "grid": {"kind": kind, "step": step}, "segments": out}


def segments_from_dict(doc, path="<segments>"):
    try:
        items = doc["segments"]
        segs = [
            Segment(
                None if it["start"] is None else int(it["start"]),
                None if it["end"] is None else int(it["end"]),
                int(it["label"]),
                float(it.get("start_s", np.nan)),
                float(it.get("end_s", np.nan)),
                it.get("start_t"),
                it.get("end_t"),
            )
            for it in items
        ]
    except KeyError as exc:
        raise FileFormatError(f"{path}: field {exc.args[0]!r}: missing") from None
    except (TypeError, ValueError) as exc:
        raise FileFormatError(f"{path}: malformed segment entry ({exc})") from None
    return segs


def save_segments(path, segments, trial_id=None, kind="s", step=None):
    _write_json(path, segments_to_dict(segments, trial_id, kind, step))


def load_segments(path):
    doc = _read_json(path)
    return doc.get("trial_id"), segments_from_dict(doc, path)


def save_truth(path, truth):
    _write_json(path, truth.to_dict())


def load_truth(path):
    doc = _read_json(path)
    try:
        return GroundTruth.from_dict(doc)
    except (KeyError, TypeError, ValueError) as exc:
        raise FileFormatError(f"{path}: malformed ground truth ({exc})") from None


def save_labels(path, rows):
    """Write ``sample,s_or_t,label`` rows (one per descriptor)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(LABELS_HEADER)
        for sample, x, label in rows:
            w.writerow([int(sample), _fmt(x), int(label)])


def save_report(path, doc):
    _write_json(path, doc)


__all__ = [
    "FileFormatError",
    "load_geometric",
    "load_library",
    "load_profile",
    "load_segments",
    "load_trajectory",
    "load_truth",
    "save_geometric",
    "save_labels",
    "save_library",
    "save_profile",
    "save_report",
    "save_segments",
    "save_trajectory",
    "save_truth",
    "segments_from_dict",
    "segments_to_dict",
]
