"""Command-line interface: ``screwseg <subcommand> ...``.

Exit status is 0 on success, 2 when the input fails validation and 1 on any
other failure. Flags use cm and degrees where the method presets do; every
value is converted to SI at this boundary.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import io
from ._validation import InvalidArgumentError
from .harness import (
    MIN_SEGMENT_SAMPLES,
    evaluate,
    get_method,
    method_descriptors,
    method_profile,
    run_trials,
    simulate_trials,
)
from .progress import reparameterize
from .segmentation import classify, label_sequence, learn_library, map_segments_to_time, segments_from_labels
from .simulation import TIME_SCALINGS, ScenarioConfig, simulate
from .smoothing import SmootherConfig, smooth

logger = logging.getLogger("screwseg")

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_INVALID = 2


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise InvalidArgumentError(message)


def _paths(value):
    return [p for p in value.split(",") if p]


def _method_with_overrides(args):
    m = get_method(args.method)
    kw = {}
    if getattr(args, "L_cm", None) is not None:
        kw["L"] = args.L_cm / 100.0
    if getattr(args, "ds", None) is not None:
        kw["ds"] = _ds_from_flag(m, args.ds)
    if getattr(args, "sigma_hat", None) is not None:
        kw["sigma_hat"] = args.sigma_hat / 100.0
    if getattr(args, "beta", None) is not None:
        kw["beta"] = args.beta
    return replace(m, **kw) if kw else m


def _ds_from_flag(m, value):
    # preset units: seconds for TIME, degrees for ANGLE, cm otherwise
    if m.progress_kind == "TIME":
        return float(value)
    if m.progress_kind == "ANGLE":
        return float(np.deg2rad(value))
    return value / 100.0


def _grid_kind(m):
    return "t" if m.progress_kind == "TIME" else "s"


def cmd_simulate(args):
    cfg = ScenarioConfig(
        object=args.scenario,
        ref_point="opening" if args.scenario == "bottle" else args.ref,
        noise_rot_std=args.noise_rot_deg,
        noise_pos_std=args.noise_pos_mm,
        sample_rate=args.rate,
        seed=args.seed,
        time_scaling=args.time_scaling,
        speed=args.speed,
    )
    traj, truth = simulate(cfg)
    io.save_trajectory(args.out, traj)
    if args.truth:
        io.save_truth(args.truth, truth)
    logger.info("wrote %d samples to %s", len(traj), args.out)


def cmd_smooth(args):
    traj = io.load_trajectory(args.inp)
    cfg = SmootherConfig(
        meas_std_pos=args.pos_std,
        meas_std_rot=np.deg2rad(args.rot_std_deg),
        process_accel_std=args.accel_std,
        process_accel_std_rot=args.accel_std_rot,
    )
    io.save_trajectory(args.out, smooth(traj, cfg))


def cmd_reparam(args):
    m = _method_with_overrides(args)
    traj = io.load_trajectory(args.inp)
    profile = method_profile(traj, m)
    grid = reparameterize(traj, profile, m.ds)
    io.save_geometric(args.out, grid)
    if args.profile:
        io.save_profile(args.profile, profile)
    logger.info("method %s: %d grid samples, total progress %.6g", m.id, len(grid), profile.total)


def cmd_learn(args):
    m = _method_with_overrides(args)
    stacks = []
    for path in _paths(args.inp):
        grid = io.load_geometric(path)
        _check_step(path, grid.step, m.ds)
        stacks.append(method_descriptors(grid, m))
    lib = learn_library(np.concatenate(stacks), sigma_hat=m.sigma_hat, beta=m.beta, L=m.L, ds=m.ds)
    io.save_library(args.out, lib)
    logger.info("learned %d primitives from %d descriptors", len(lib), lib.n_samples)


def _check_step(path, step, ds):
    if abs(step - ds) > 1e-9 * max(1.0, ds):
        raise io.FileFormatError(f"{path}: field 's': grid step {step:.6g} does not match ds {ds:.6g}")


def cmd_segment(args):
    lib = io.load_library(args.library)
    m = get_method(args.method)
    if lib.L is not None and lib.ds is not None:
        m = replace(m, L=float(lib.L), ds=float(lib.ds))
    grid = io.load_geometric(args.inp)
    _check_step(args.inp, grid.step, m.ds)
    if len(lib) == 0:
        raise InvalidArgumentError(f"{args.library}: library has no clusters")
    desc = method_descriptors(grid, m)
    labels = np.atleast_1d(classify(desc, lib))
    s = np.asarray(grid.s[1:-1])
    segs = segments_from_labels(labels, s)
    if args.time_domain:
        if not args.profile:
            raise InvalidArgumentError("--time-domain needs --profile")
        profile = io.load_profile(args.profile)
        threshold = 0.0 if m.progress_kind == "TIME" else args.standstill
        segs = map_segments_to_time(segs, profile, grid.step, standstill_threshold=threshold)
    io.save_segments(args.out, segs, trial_id=args.trial_id or Path(args.inp).stem, kind=_grid_kind(m), step=grid.step)
    if args.labels:
        io.save_labels(args.labels, zip(range(len(labels)), s, labels))
    logger.info("%d segments, label sequence %s", len(segs), label_sequence(segs, MIN_SEGMENT_SAMPLES))


def cmd_evaluate(args):
    seg_paths = _paths(args.segments)
    truth_paths = _paths(args.truth)
    if len(seg_paths) != len(truth_paths):
        raise InvalidArgumentError(f"{len(seg_paths)} segment files but {len(truth_paths)} ground-truth files")
    results = []
    for sp, tp in zip(seg_paths, truth_paths):
        _, segs = io.load_segments(sp)
        if any(g.start_t is None for g in segs):
            raise io.FileFormatError(f"{sp}: field 'start_t': segments must be mapped to time")
        results.append((segs, io.load_truth(tp)))
    report = evaluate(results).to_dict()
    report["trials"] = [Path(p).stem for p in seg_paths]
    report["label_sequences"] = [label_sequence(s, MIN_SEGMENT_SAMPLES) for s, _ in results]
    io.save_report(args.out, report)
    print(f"detected {report['detected_submotions']}/{report['n_submotions']}, "
          f"consistent {report['consistent_submotions']}/{report['n_submotions']}")


def cmd_compare(args):
    methods = [get_method(m).id for m in _paths(args.methods)]
    if not methods:
        raise InvalidArgumentError("--methods is empty")
    refs = ("P1", "P2", "P3")
    trials = simulate_trials(args.scenario, refs=refs, seed=args.seed)
    doc = {"scenario": args.scenario, "seed": args.seed, "trials": list(refs), "methods": {}}
    library = io.load_library(args.library) if args.library else None
    for mid in methods:
        out = run_trials(trials, mid, library=library)
        entry = out.report.to_dict()
        entry["label_sequences"] = out.label_sequences
        entry["n_clusters"] = len(out.library)
        doc["methods"][mid] = entry
        print(f"{mid}: detected {out.report.detected}/{out.report.n_submotions}, "
              f"consistent {out.report.consistent}/{out.report.n_submotions}")
        if args.labels:
            stem = Path(args.labels)
            for ref, prep, labels in zip(refs, out.prepared, out.descriptor_labels()):
                path = stem.with_name(f"{stem.stem}_{mid}_{ref}{stem.suffix or '.csv'}")
                io.save_labels(path, zip(range(len(labels)), prep.s, labels))
    if len(methods) == 1:
        doc.update({k: v for k, v in doc["methods"][methods[0]].items() if k not in doc})
    io.save_report(args.out, doc)


def build_parser():
    p = _ArgumentParser(prog="screwseg", description="Screw-based trajectory segmentation.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_ArgumentParser)

    s = sub.add_parser("simulate", help="simulate a pouring trial")
    s.add_argument("--scenario", choices=("kettle", "bottle"), default="kettle")
    s.add_argument("--ref", choices=("P1", "P2", "P3"), default="P1")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--noise-rot-deg", type=float, default=2.0)
    s.add_argument("--noise-pos-mm", type=float, default=1.0)
    s.add_argument("--rate", type=float, default=60.0, help="sample rate [Hz]")
    s.add_argument("--time-scaling", choices=sorted(TIME_SCALINGS), default="minimum_jerk")
    s.add_argument("--speed", type=float, default=1.0)
    s.add_argument("--out", required=True)
    s.add_argument("--truth")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("smooth", help="RTS-smooth a trajectory")
    s.add_argument("--in", dest="inp", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--pos-std", type=float, default=0.001, help="position noise [m]")
    s.add_argument("--rot-std-deg", type=float, default=2.0, help="orientation noise [deg]")
    s.add_argument("--accel-std", type=float, default=1.0)
    s.add_argument("--accel-std-rot", type=float, default=None)
    s.set_defaults(func=cmd_smooth)

    def method_flags(sp, tuning=False):
        sp.add_argument("--method", default="G", help="A..G")
        sp.add_argument("--L-cm", dest="L_cm", type=float)
        sp.add_argument("--ds", type=float, help="grid step in the method's unit (cm, deg or s)")
        if tuning:
            sp.add_argument("--sigma-hat", type=float, help="[cm], or cm/s for method A")
            sp.add_argument("--beta", type=float, help="[%%]")

    s = sub.add_parser("reparam", help="resample on the method's progress grid")
    s.add_argument("--in", dest="inp", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--profile")
    method_flags(s)
    s.set_defaults(func=cmd_reparam)

    s = sub.add_parser("learn", help="learn a primitive library")
    s.add_argument("--in", dest="inp", required=True, help="comma-separated geometric CSVs")
    s.add_argument("--out", required=True)
    method_flags(s, tuning=True)
    s.set_defaults(func=cmd_learn)

    s = sub.add_parser("segment", help="segment a geometric trajectory with a library")
    s.add_argument("--in", dest="inp", required=True)
    s.add_argument("--library", required=True)
    s.add_argument("--method", default="G")
    s.add_argument("--profile")
    s.add_argument("--time-domain", action="store_true")
    s.add_argument("--standstill", type=float, default=0.01, help="progress-rate threshold for standstill")
    s.add_argument("--trial-id")
    s.add_argument("--labels")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_segment)

    s = sub.add_parser("evaluate", help="score time-domain segmentations against ground truth")
    s.add_argument("--segments", required=True)
    s.add_argument("--truth", required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_evaluate)

    s = sub.add_parser("compare", help="run methods A..G on the simulated scenario")
    s.add_argument("--scenario", choices=("kettle", "bottle"), default="kettle")
    s.add_argument("--methods", default="A,B,C,D,E,F,G")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--library", help="segment with this library instead of learning one")
    s.add_argument("--out", required=True)
    s.add_argument("--labels")
    s.set_defaults(func=cmd_compare)
    return p


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
    except InvalidArgumentError as exc:
        print(f"screwseg: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        args.func(args)
    except InvalidArgumentError as exc:
        print(f"screwseg: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except Exception as exc:  # noqa: BLE001
        logger.debug("failure", exc_info=True)
        print(f"screwseg: failed: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def run():
    sys.exit(main())


if __name__ == "__main__":
    run()
