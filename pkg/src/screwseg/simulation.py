"""Simulated pouring motions with ground-truth sub-motion boundaries.

Every sub-motion is a constant screw expressed in the object frame at the
start of that sub-motion, executed with a smooth rest-to-rest time scaling.
The recorded pose is the object's orientation together with the world
position of a chosen body reference point.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._validation import InvalidArgumentError, check_positive, check_vector
from .se3 import TimedTrajectory, make_pose, se3_exp, so3_exp

KINDS = ("slide+", "lift+", "tilt+", "tilt-", "lift-", "slide-", "dwell")

# Compact kettle frame: origin at the centre of mass, z up, x towards the
# spout. Tilts turn about the spout axis (parallel to y through the spout
# tip); every reference point lies within 8 cm of it. Metres.
KETTLE_SPOUT_TIP = (0.06, 0.0, 0.06)
KETTLE_REF_POINTS = {
    "P1": (0.05, 0.0, 0.05),  # near the spout
    "P2": (0.04, 0.0, 0.10),  # near the top handle
    "P3": (0.0, 0.0, 0.01),  # near the centre of mass
}
KETTLE_TILT_PIVOT = KETTLE_SPOUT_TIP
BOTTLE_OPENING = (0.0, 0.0, 0.12)
KETTLE_START = (0.2, 0.1, 0.1)
SLIDE_LENGTH = 0.4
LIFT_HEIGHT = 0.25


def minimum_jerk(tau):
    return tau**3 * (10.0 - 15.0 * tau + 6.0 * tau**2)


def cubic(tau):
    return tau**2 * (3.0 - 2.0 * tau)


def septic(tau):
    return tau**4 * (35.0 - 84.0 * tau + 70.0 * tau**2 - 20.0 * tau**3)


TIME_SCALINGS = {"minimum_jerk": minimum_jerk, "cubic": cubic, "septic": septic}


@dataclass(frozen=True)
class SubMotionSpec:
    """One sub-motion: a constant screw in the object frame at its start.

    The rotation is ``angle`` [rad] about ``axis`` through ``point``; the
    translation [m] is added on top (along the axis for a proper screw).
    """

    kind: str
    duration: float
    translation: tuple = (0.0, 0.0, 0.0)
    axis: tuple | None = None
    angle: float = 0.0
    point: tuple = (0.0, 0.0, 0.0)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidArgumentError(f"unknown sub-motion kind {self.kind!r}")
        check_positive(self.duration, "duration")
        check_vector(self.translation, 3, "translation")
        check_vector(self.point, 3, "point")
        if self.axis is not None and np.linalg.norm(self.axis) == 0:
            raise InvalidArgumentError("rotation axis must be non-zero")

    def twist(self):
        """Body-frame displacement twist ``(omega, v)`` of the whole sub-motion."""
        if self.kind == "dwell":
            return np.zeros(6)
        w = np.zeros(3)
        if self.axis is not None:
            axis = np.asarray(self.axis, dtype=float)
            w = axis / np.linalg.norm(axis) * self.angle
        v = np.asarray(self.translation, dtype=float) + np.cross(np.asarray(self.point, dtype=float), w)
        return np.concatenate([w, v])

    def reversed(self, kind):
        """The sub-motion that undoes this one, started from its end pose."""
        xi = self.twist()
        return _from_twist(kind, self.duration, -xi)


def _from_twist(kind, duration, xi):
    # a point-free encoding: pure translation part, rotation about the origin
    w = xi[:3]
    angle = float(np.linalg.norm(w))
    axis = tuple(w / angle) if angle > 0 else None
    return SubMotionSpec(kind, duration, tuple(xi[3:]), axis, angle)


@dataclass(frozen=True)
class ScenarioConfig:
    """Scenario for :func:`simulate`.

    ``ref_point`` is a preset name (``"P1"``, ``"P2"``, ``"P3"``, or
    ``"opening"`` for the bottle) or a body-frame 3-vector [m]. Noise is
    white, per axis: rotation in degrees applied in the body frame and
    reference-point position in millimetres. ``noise_phases`` restricts the
    noise to sub-motions of the listed kinds.
    """

    object: str = "kettle"
    ref_point: object = "P1"
    noise_rot_std: float = 2.0
    noise_pos_std: float = 1.0
    sample_rate: float = 60.0
    seed: int = 0
    time_scaling: str = "minimum_jerk"
    speed: float = 1.0
    noise_phases: tuple | None = None
    start: tuple = KETTLE_START

    def __post_init__(self):
        if self.object not in ("kettle", "bottle"):
            raise InvalidArgumentError(f"unknown object {self.object!r}")
        check_positive(self.sample_rate, "sample_rate")
        check_positive(self.speed, "speed")
        if self.time_scaling not in TIME_SCALINGS:
            raise InvalidArgumentError(f"unknown time scaling {self.time_scaling!r}")
        if self.noise_rot_std < 0 or self.noise_pos_std < 0:
            raise InvalidArgumentError("noise levels must be non-negative")

    def ref_offset(self):
        if isinstance(self.ref_point, str):
            if self.ref_point == "opening":
                return np.array(BOTTLE_OPENING)
            if self.ref_point not in KETTLE_REF_POINTS:
                raise InvalidArgumentError(f"unknown reference point {self.ref_point!r}")
            if self.object == "bottle":
                return np.array(BOTTLE_OPENING)
            return np.array(KETTLE_REF_POINTS[self.ref_point])
        return check_vector(self.ref_point, 3, "ref_point")


@dataclass(frozen=True)
class Phase:
    label: str
    start_t: float
    end_t: float


@dataclass(frozen=True)
class GroundTruth:
    phases: tuple = field(default_factory=tuple)

    @property
    def boundaries(self):
        """``(time, label)`` at each join, labelled by the phase that starts there."""
        return [(p.start_t, p.label) for p in self.phases[1:]]

    @property
    def submotions(self):
        return [p for p in self.phases if p.label != "dwell"]

    def to_dict(self):
        return {
            "phases": [{"label": p.label, "start_t": p.start_t, "end_t": p.end_t} for p in self.phases],
            "boundaries": [{"t": t, "label": lab} for t, lab in self.boundaries],
        }

    @classmethod
    def from_dict(cls, doc):
        return cls(tuple(Phase(p["label"], float(p["start_t"]), float(p["end_t"])) for p in doc["phases"]))


def pouring_plan(
    tilt_deg=70.0,
    pivot=None,
    dwell=0.5,
    durations=(2.0, 2.0, 2.0),
    slide_length=SLIDE_LENGTH,
    lift_height=LIFT_HEIGHT,
):
    """Six-phase pouring plan with dwells: slide, lift (screw), tilt, then mirrored."""
    pivot = KETTLE_TILT_PIVOT if pivot is None else pivot
    t_slide, t_lift, t_tilt = durations
    slide = SubMotionSpec("slide+", t_slide, translation=(slide_length, 0.0, 0.0))
    lift = SubMotionSpec("lift+", t_lift, translation=(0.0, 0.0, lift_height), axis=(0, 0, 1), angle=np.deg2rad(30.0))
    tilt = SubMotionSpec("tilt+", t_tilt, axis=(0, 1, 0), angle=np.deg2rad(tilt_deg), point=pivot)
    moves = [slide, lift, tilt, tilt.reversed("tilt-"), lift.reversed("lift-"), slide.reversed("slide-")]
    plan = [SubMotionSpec("dwell", dwell)]
    for m in moves:
        plan += [m, SubMotionSpec("dwell", dwell)]
    return plan


def kettle_plan():
    return pouring_plan()


def bottle_plan():
    return pouring_plan(tilt_deg=90.0, pivot=BOTTLE_OPENING)


def object_poses(plan, t, start_pose, scaling):
    """Object poses at times ``t`` along ``plan`` and the phase index of each time."""
    ends = np.cumsum([m.duration for m in plan])
    starts = ends - np.array([m.duration for m in plan])
    phase = np.clip(np.searchsorted(ends, t, side="right"), 0, len(plan) - 1)
    bases = [start_pose]
    for m in plan:
        bases.append(bases[-1] @ se3_exp(m.twist()))
    twists = np.array([m.twist() for m in plan])
    tau = np.clip((t - starts[phase]) / np.array([m.duration for m in plan])[phase], 0.0, 1.0)
    sigma = scaling(tau)
    poses = np.stack(bases[:-1])[phase] @ se3_exp(sigma[:, None] * twists[phase])
    return poses, phase, starts, ends


def simulate(scenario, plan=None):
    """Simulate a pouring motion.

    Returns
    -------
    traj : TimedTrajectory
        Object orientation with the reference point's world position.
    truth : GroundTruth
        Phase intervals in time, one per plan entry.
    """
    if plan is None:
        plan = kettle_plan() if scenario.object == "kettle" else bottle_plan()
    if not plan:
        raise InvalidArgumentError("plan must not be empty")
    plan = [
        SubMotionSpec(m.kind, m.duration / scenario.speed, m.translation, m.axis, m.angle, m.point) for m in plan
    ]
    total = sum(m.duration for m in plan)
    n = int(np.floor(total * scenario.sample_rate + 1e-9)) + 1
    t = np.arange(n) / scenario.sample_rate
    start_pose = make_pose(position=scenario.start)
    obj, phase, starts, ends = object_poses(plan, t, start_pose, TIME_SCALINGS[scenario.time_scaling])
    poses = obj @ make_pose(position=scenario.ref_offset())

    rng = np.random.default_rng(scenario.seed)
    rot_noise = rng.normal(0.0, np.deg2rad(scenario.noise_rot_std), size=(n, 3))
    pos_noise = rng.normal(0.0, scenario.noise_pos_std * 1e-3, size=(n, 3))
    if scenario.noise_phases is not None:
        mask = np.array([plan[k].kind in scenario.noise_phases for k in phase])
        rot_noise[~mask] = 0.0
        pos_noise[~mask] = 0.0
    if scenario.noise_rot_std > 0:
        poses[:, :3, :3] = poses[:, :3, :3] @ so3_exp(rot_noise)
    poses[:, :3, 3] += pos_noise

    truth = GroundTruth(tuple(Phase(m.kind, float(a), float(b)) for m, a, b in zip(plan, starts, ends)))
    return TimedTrajectory(t, poses), truth
