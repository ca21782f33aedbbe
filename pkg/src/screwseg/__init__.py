"""Time- and reference-point-invariant segmentation of rigid-body trajectories.

Trajectories are reparameterized by a screw-based geometric progress,
described by local trajectory-shape descriptors and segmented by
self-supervised incremental clustering of those descriptors.
"""

from ._validation import DegenerateTwistError, InvalidArgumentError, TrajectoryTooShortError
from .descriptor import align, build_descriptors, shape_distance
from .estimators import (
    GeometricReparameterizer,
    PrimitiveSegmenter,
    ScrewTrajectorySegmenter,
    ShapeDescriptorExtractor,
    TrajectorySmoother,
)
from .harness import METHODS, MethodConfig, compare, evaluate, progress_rate_for, run_method
from .progress import (
    ProgressProfile,
    ScrewState,
    geometric_twists,
    progress_profile,
    regularized_progress,
    reparameterize,
    screw_axis_point,
)
from .se3 import (
    GeometricTrajectory,
    TimedTrajectory,
    change_frames,
    make_pose,
    sclerp,
    se3_exp,
    se3_log,
    so3_exp,
    so3_log,
)
from .segmentation import (
    NON_CLASSIFIED,
    STATIONARY,
    ClusterLibrary,
    Segment,
    classify,
    learn_library,
    map_segments_to_time,
    segment_trajectory,
)
from .simulation import ScenarioConfig, SubMotionSpec, simulate
from .smoothing import SmootherConfig, smooth
from .twist import estimate_twists

__version__ = "0.1.0"

__all__ = [
    "METHODS",
    "NON_CLASSIFIED",
    "STATIONARY",
    "ClusterLibrary",
    "DegenerateTwistError",
    "GeometricReparameterizer",
    "GeometricTrajectory",
    "InvalidArgumentError",
    "MethodConfig",
    "PrimitiveSegmenter",
    "ProgressProfile",
    "ScenarioConfig",
    "ScrewState",
    "ScrewTrajectorySegmenter",
    "Segment",
    "ShapeDescriptorExtractor",
    "SmootherConfig",
    "SubMotionSpec",
    "TimedTrajectory",
    "TrajectorySmoother",
    "TrajectoryTooShortError",
    "align",
    "build_descriptors",
    "change_frames",
    "classify",
    "compare",
    "estimate_twists",
    "evaluate",
    "geometric_twists",
    "learn_library",
    "make_pose",
    "map_segments_to_time",
    "progress_profile",
    "progress_rate_for",
    "regularized_progress",
    "reparameterize",
    "run_method",
    "sclerp",
    "screw_axis_point",
    "se3_exp",
    "se3_log",
    "segment_trajectory",
    "shape_distance",
    "simulate",
    "smooth",
    "so3_exp",
    "so3_log",
]
