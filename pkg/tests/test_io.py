import json

import numpy as np
import pytest

from _helpers import random_descriptor
from screwseg import ScenarioConfig, learn_library, progress_profile, reparameterize, segment_trajectory, simulate
from screwseg.io import (
    FileFormatError,
    load_geometric,
    load_library,
    load_profile,
    load_segments,
    load_trajectory,
    load_truth,
    save_geometric,
    save_labels,
    save_library,
    save_profile,
    save_segments,
    save_trajectory,
    save_truth,
)

L = 0.3


@pytest.fixture(scope="module")
def trial():
    return simulate(ScenarioConfig(seed=5))


def _write(path, text):
    path.write_text(text)
    return path


def test_trajectory_round_trip(tmp_path, trial):
    traj, _ = trial
    save_trajectory(tmp_path / "a.csv", traj)
    back = load_trajectory(tmp_path / "a.csv")
    np.testing.assert_array_equal(back.t, traj.t)
    np.testing.assert_allclose(back.poses, traj.poses, atol=1e-12)


def test_geometric_and_profile_round_trip(tmp_path, trial):
    traj, _ = trial
    prof = progress_profile(traj, L)
    grid = reparameterize(traj, prof, 0.02)
    save_geometric(tmp_path / "g.csv", grid)
    save_profile(tmp_path / "p.csv", prof)
    g2 = load_geometric(tmp_path / "g.csv")
    p2 = load_profile(tmp_path / "p.csv")
    np.testing.assert_allclose(g2.poses, grid.poses, atol=1e-12)
    np.testing.assert_array_equal(g2.s, grid.s)
    assert g2.step == pytest.approx(grid.step, rel=1e-12)
    for name in ("t", "s", "sdot"):
        np.testing.assert_array_equal(getattr(p2, name), getattr(prof, name))


def test_library_segments_truth_round_trip(tmp_path, trial):
    _, truth = trial
    rng = np.random.default_rng(0)
    X = np.concatenate([random_descriptor(rng)[None] + 0.01 * rng.normal(size=(20, 3, 6)) for _ in range(2)])
    lib = learn_library(X, sigma_hat=0.1, beta=5.0, L=L, ds=0.02)
    save_library(tmp_path / "lib.json", lib)
    lib2 = load_library(tmp_path / "lib.json")
    assert lib2.to_dict() == lib.to_dict()

    segs = segment_trajectory(X, lib, s=0.02 * np.arange(len(X)))
    save_segments(tmp_path / "seg.json", segs, trial_id="x", step=0.02)
    tid, segs2 = load_segments(tmp_path / "seg.json")
    assert tid == "x" and segs2 == segs

    save_truth(tmp_path / "truth.json", truth)
    assert load_truth(tmp_path / "truth.json") == truth


def test_labels_file(tmp_path):
    save_labels(tmp_path / "l.csv", [(1, 0.02, 0), (2, 0.04, -1)])
    lines = (tmp_path / "l.csv").read_text().splitlines()
    assert lines == ["sample,s_or_t,label", "1,0.02,0", "2,0.04,-1"]


HEADER = "t,px,py,pz,qw,qx,qy,qz\n"


@pytest.mark.parametrize(
    "body, needle",
    [
        ("t,x,y,z,qw,qx,qy,qz\n0,0,0,0,1,0,0,0\n", "row 1: header"),
        (HEADER + "0,0,0,0,1,0,0,0\n0.1,0,zero,0,1,0,0,0\n", "row 3: field 'py': not a number"),
        (HEADER + "0,0,0,0,0,0,0,0\n", "row 2: field 'qw..qz': zero quaternion"),
        (HEADER + "0,0,0,0,1,0,0,0\n0.1,0,0,0,1,0,0,0\n0.1,0,0,0,1,0,0,0\n", "row 4: field 't': not strictly increasing"),
        (HEADER + "0,0,0,0,1,0,0\n", "row 2: expected 8 fields"),
        (HEADER + "0,0,nan,0,1,0,0,0\n", "row 2: field 'py': not finite"),
        (HEADER, "no data rows"),
        ("", "empty file"),
    ],
)
def test_trajectory_errors_name_location(tmp_path, body, needle):
    path = _write(tmp_path / "bad.csv", body)
    with pytest.raises(FileFormatError) as err:
        load_trajectory(path)
    assert str(path) in str(err.value)
    assert needle in str(err.value)


def test_quaternion_renormalised(tmp_path):
    path = _write(tmp_path / "q.csv", HEADER + "0,1,2,3,2,0,0,0\n")
    np.testing.assert_allclose(load_trajectory(path).poses[0, :3, :3], np.eye(3), atol=1e-15)


def test_missing_file(tmp_path):
    with pytest.raises(FileFormatError, match="cannot open"):
        load_trajectory(tmp_path / "nope.csv")


def test_non_uniform_geometric_grid(tmp_path):
    body = "s,px,py,pz,qw,qx,qy,qz\n0,0,0,0,1,0,0,0\n0.1,0,0,0,1,0,0,0\n0.3,0,0,0,1,0,0,0\n"
    with pytest.raises(FileFormatError, match="not uniform"):
        load_geometric(_write(tmp_path / "g.csv", body))


def test_profile_decreasing(tmp_path):
    body = "t,s,sdot\n0,0,1\n0.1,0.2,1\n0.2,0.1,1\n"
    with pytest.raises(FileFormatError, match="row 4: field 's'"):
        load_profile(_write(tmp_path / "p.csv", body))


def test_library_errors(tmp_path):
    rng = np.random.default_rng(1)
    lib = learn_library(random_descriptor(rng)[None] + 0.01 * rng.normal(size=(10, 3, 6)), sigma_hat=0.1, beta=5.0)
    doc = lib.to_dict()
    doc["version"] = 99
    path = tmp_path / "lib.json"
    path.write_text(json.dumps(doc))
    with pytest.raises(FileFormatError, match="version"):
        load_library(path)
    path.write_text("{ not json")
    with pytest.raises(FileFormatError, match="row 1: invalid JSON"):
        load_library(path)
    path.write_text("[]")
    with pytest.raises(FileFormatError, match="JSON object"):
        load_library(path)


def test_segments_errors(tmp_path):
    path = tmp_path / "s.json"
    path.write_text(json.dumps({"segments": [{"start": 0, "end": 3}]}))
    with pytest.raises(FileFormatError, match="field 'label': missing"):
        load_segments(path)
