"""Command-line front end: simulate, track, train, eval, sweep.

Exit codes: 0 success, 1 usage error, 2 data/format error, 3 numeric
failure.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import config as cfgmod
from .classifier import GaitClassifier
from .fileio import FileFormatError
from .labeler import compute_metrics
from .mud import read_mud_file, windows_from_series, write_mud_file
from .pipeline import (
    Pipeline,
    ground_truth,
    override_config,
    read_records_csv,
    read_truth_csv,
    write_events_jsonl,
    write_records_csv,
    write_truth_csv,
)
from .scene import parse_scene
from .simulate import (
    range_migration_check,
    stream_cube_file,
    synthesize_frame,
    write_cube_file,
)
from .training import train as train_model

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3


class _UsageError(Exception):
    pass


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _add_config_args(p):
    p.add_argument("--config", help="config file of 'key = value' lines")
    p.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override a config key (repeatable)",
    )


def build_parser() -> _ArgumentParser:
    parser = _ArgumentParser(prog="radarid", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="synthesize radar cubes from a scene script")
    p.add_argument("--scene", required=True, help="scene script file")
    p.add_argument("--out", required=True, help="output cube file (RDC1)")
    p.add_argument("--truth", help="also write per-frame ground truth CSV")
    p.add_argument("--mud", help="also build a labeled micro-Doppler dataset (MUD1)")
    p.add_argument("--seed", type=int, default=0)
    _add_config_args(p)

    p = sub.add_parser("track", help="run the online pipeline over a cube file")
    p.add_argument("--cubes", required=True, help="input cube file (RDC1)")
    p.add_argument("--checkpoint", help="classifier checkpoint; omit to track without labels")
    p.add_argument("--mode", choices=["joint", "separate"], help="labeling mode override")
    p.add_argument("--out", required=True, help="per-frame records CSV")
    p.add_argument("--events", help="lifecycle event log (JSON lines)")
    p.add_argument("--truth", help="ground truth CSV; prints metrics when given")
    p.add_argument("--chunk-frames", type=int, default=1, help="stream granularity (no effect on output)")
    p.add_argument("--timing", action="store_true", help="print per-stage timing summary")
    _add_config_args(p)

    p = sub.add_parser("train", help="train the classifier on a MUD1 dataset")
    p.add_argument("--dataset", required=True, help="labeled micro-Doppler windows (MUD1)")
    p.add_argument("--out", required=True, help="output checkpoint")
    p.add_argument("--history", help="training history CSV")
    _add_config_args(p)

    p = sub.add_parser("eval", help="score a records CSV against ground truth")
    p.add_argument("--records", required=True)
    p.add_argument("--truth", required=True)
    p.add_argument("--out", help="write the metrics table to a CSV")
    _add_config_args(p)

    p = sub.add_parser("sweep", help="rerun tracking over a range of one parameter")
    p.add_argument("--cubes", required=True)
    p.add_argument("--truth", required=True)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--param", required=True, help="config key, e.g. track.box_width_mps")
    p.add_argument("--values", required=True, help="comma-separated values")
    p.add_argument("--out", required=True, help="sweep CSV")
    _add_config_args(p)
    return parser


def _load(args):
    cfg = cfgmod.load_config(args.config, args.overrides)
    return cfg


def _cmd_simulate(args) -> int:
    cfg = _load(args)
    params = cfgmod.build_radar_params(cfg)
    with open(args.scene) as f:
        scene = parse_scene(f.read())
    for subject in scene.subjects:
        report = range_migration_check(subject, params)
        if not report.ok:
            print(f"note: subject {subject.identity}: {report.note}", file=sys.stderr)
    cubes = [synthesize_frame(scene, params, t, seed=args.seed) for t in range(scene.duration_frames)]
    write_cube_file(args.out, cubes, params)
    print(f"wrote {len(cubes)} frames to {args.out}")
    if args.truth:
        write_truth_csv(args.truth, ground_truth(scene, params.frame_period_s))
        print(f"wrote ground truth to {args.truth}")
    if args.mud:
        _write_mud_dataset(args.mud, scene, cubes, cfg)
    return EXIT_OK


def _write_mud_dataset(path, scene, cubes, cfg):
    """Labeled training windows from a simulated sequence, one series per subject.

    Detected clusters are attributed to the nearest subject's ground-truth
    state; solo recordings (the intended use) make this unambiguous.
    """
    from .detect import detect_frame
    from .maps import compute_rd, denoise, remove_static
    from .mud import extract_mud

    pipe_cfg = cfgmod.build_pipeline_config(cfg)
    mc = pipe_cfg.map_cfg
    stride = int(cfg["mud.train_stride"])
    params = cubes[0].params
    series = {s.identity: np.zeros((pipe_cfg.mud_bins, len(cubes))) for s in scene.subjects}
    for t, cube in enumerate(cubes):
        m = compute_rd(cube, pipe_cfg.antenna, mc.n_fft_range, mc.n_fft_doppler, mc.rd_range_bins)
        m = remove_static(m, mc.static_center_bins, mc.static_edge_bins)
        cloud = denoise(m, pipe_cfg.denoise)
        detections = detect_frame(cloud, pipe_cfg.detect, t)
        ts = t * params.frame_period_s
        for cluster in detections.clusters:
            best, best_dist = None, np.inf
            for subject in scene.subjects:
                x, y = subject.torso.path.position(ts)
                dist = abs(float(np.hypot(x, y)) - cluster.centroid[0])
                if dist < best_dist:
                    best, best_dist = subject.identity, dist
            if best is not None and best_dist <= 1.0:
                series[best][:, t] += extract_mud(cloud, cluster, pipe_cfg.mud_bins)
    all_windows, all_labels = [], []
    for identity, s in series.items():
        w = windows_from_series(s, pipe_cfg.mud_frames, stride)
        keep = w.reshape(len(w), -1).max(axis=1) > 0
        all_windows.append(w[keep])
        all_labels.append(np.full(int(keep.sum()), identity))
    windows = np.concatenate(all_windows) if all_windows else np.zeros((0, pipe_cfg.mud_bins, pipe_cfg.mud_frames))
    labels = np.concatenate(all_labels) if all_labels else np.zeros(0, dtype=int)
    write_mud_file(path, windows, labels)
    print(f"wrote {len(windows)} labeled windows to {path}")


def _run_tracking(cfg_dict, pipe_cfg, cubes_path, checkpoint, chunk_frames):
    model = GaitClassifier.load(checkpoint) if checkpoint else None
    pipeline = Pipeline(pipe_cfg, model)
    results = []
    for cube in stream_cube_file(cubes_path, chunk_frames):
        results.append(pipeline.process(cube))
    n_classes = model.config.n_classes if model else 0
    return results, n_classes


def _cmd_track(args) -> int:
    cfg = _load(args)
    if args.mode:
        cfg["pipeline.mode"] = args.mode
    pipe_cfg = cfgmod.build_pipeline_config(cfg)
    results, n_classes = _run_tracking(cfg, pipe_cfg, args.cubes, args.checkpoint, args.chunk_frames)
    write_records_csv(args.out, results, n_classes)
    print(f"wrote {sum(len(r.records) for r in results)} records over {len(results)} frames to {args.out}")
    if args.events:
        write_events_jsonl(args.events, results)
    if args.timing:
        stages = sorted({k for r in results for k in r.timing})
        for stage in stages:
            total = sum(r.timing.get(stage, 0.0) for r in results)
            print(f"timing {stage}: {total / len(results) * 1000:.1f} ms/frame", file=sys.stderr)
    if args.truth:
        truth = read_truth_csv(args.truth, pipe_cfg.space)
        records = {
            r.frame_index: [(rec.track_id, rec.coords, rec.final_label) for rec in r.records]
            for r in results
        }
        metrics = compute_metrics(truth, records, pipe_cfg.match_dist, pipe_cfg.warmup_frames)
        print(metrics.table())
    return EXIT_OK


def _cmd_train(args) -> int:
    cfg = _load(args)
    windows, labels = read_mud_file(args.dataset)
    if len(windows) == 0:
        raise FileFormatError("dataset contains no windows")
    n_classes = int(labels.max()) + 1
    model_cfg = cfgmod.build_model_config(cfg, n_classes)
    if (windows.shape[1], windows.shape[2]) != (model_cfg.n_doppler_bins, model_cfg.window_frames):
        raise FileFormatError(
            f"dataset windows are {windows.shape[1:]} but the model expects "
            f"({model_cfg.n_doppler_bins}, {model_cfg.window_frames})"
        )
    train_cfg = cfgmod.build_train_config(cfg)
    model, history = train_model(windows, labels, model_cfg, train_cfg)
    model.save(args.out)
    last = history.rows[-1]
    print(
        f"trained {len(history.rows)} epochs; final val loss {last['val_loss']:.4f}, "
        f"val accuracy {last['val_accuracy']:.3f}; checkpoint at {args.out}"
    )
    if args.history:
        history.to_csv(args.history)
    return EXIT_OK


def _cmd_eval(args) -> int:
    cfg = _load(args)
    pipe_cfg = cfgmod.build_pipeline_config(cfg)
    truth = read_truth_csv(args.truth, pipe_cfg.space)
    records = read_records_csv(args.records)
    metrics = compute_metrics(truth, records, pipe_cfg.match_dist, pipe_cfg.warmup_frames)
    print(metrics.table())
    if args.out:
        with open(args.out, "w") as f:
            f.write("subject,accuracy,r_und,r_unk,frames\n")
            for sid in sorted(metrics.per_subject):
                m = metrics.per_subject[sid]
                f.write(f"{sid},{m.accuracy:.6f},{m.r_und:.6f},{m.r_unk:.6f},{m.scored}\n")
            f.write(f"average,{metrics.accuracy:.6f},{metrics.r_und:.6f},{metrics.r_unk:.6f},\n")
    return EXIT_OK


def _cmd_sweep(args) -> int:
    cfg = _load(args)
    values = [v.strip() for v in args.values.split(",") if v.strip()]
    if not values:
        raise _UsageError("no sweep values given")
    rows = []
    for value in values:
        cfg_v = dict(cfg)
        if args.param not in cfg_v:
            raise cfgmod.ConfigError(f"unknown config key {args.param!r}")
        cfg_v[args.param] = value
        pipe_cfg = cfgmod.build_pipeline_config(cfg_v)
        results, _ = _run_tracking(cfg_v, pipe_cfg, args.cubes, args.checkpoint, 1)
        truth = read_truth_csv(args.truth, pipe_cfg.space)
        records = {
            r.frame_index: [(rec.track_id, rec.coords, rec.final_label) for rec in r.records]
            for r in results
        }
        metrics = compute_metrics(truth, records, pipe_cfg.match_dist, pipe_cfg.warmup_frames)
        rows.append((value, metrics))
        print(f"{args.param} = {value}: accuracy {metrics.accuracy:.4f}")
    with open(args.out, "w") as f:
        f.write(f"{args.param},accuracy,r_und,r_unk\n")
        for value, metrics in rows:
            f.write(f"{value},{metrics.accuracy:.6f},{metrics.r_und:.6f},{metrics.r_unk:.6f}\n")
    print(f"wrote sweep to {args.out}")
    return EXIT_OK


_COMMANDS = {
    "simulate": _cmd_simulate,
    "track": _cmd_track,
    "train": _cmd_train,
    "eval": _cmd_eval,
    "sweep": _cmd_sweep,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return _COMMANDS[args.command](args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except cfgmod.ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FileFormatError, FileNotFoundError, ValueError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
