"""``hfdkit`` command-line entry point.

Exit codes: 0 success, 1 validation failure (bad input or config), 2 runtime error.
Errors are reported on stderr as one JSON object.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import io as hio
from .config import load_config
from .errors import HfdkitError, ValidationError
from .hfd import HfdParams, compute_features
from .kmax import KmaxGrid, tune_kmax
from .ml.cv import accuracy_table, grid_search
from .ml.dataset import Mode, build_dataset, build_presentation_datasets
from .ml.splits import Strategy
from .pipeline import run_pipeline
from .signal import ChannelRegistry, Style
from .stats import (Direction, delta_table, export_heatmap, group_delta, split_by_group, style_contrast_table, style_delta,
                    style_split_group_delta, style_split_table, top_n_channels, ttest_table)
from .synth import Kind, SynthSpec, make_cohort

log = logging.getLogger("hfdkit")

_UNHASHED = {"func", "output", "out_dir", "n_jobs", "verbose", "command"}


def _provenance(args) -> dict:
    d = {k: (str(v) if isinstance(v, Path) else v) for k, v in sorted(vars(args).items()) if k not in _UNHASHED}
    h = hashlib.sha256(json.dumps({"command": args.command, **d}, sort_keys=True, default=str).encode()).hexdigest()
    seeds = getattr(args, "seeds", None)
    return {"config_hash": h[:16], "seeds": seeds if seeds is not None else "none"}


def _registry(args) -> ChannelRegistry:
    return ChannelRegistry.from_file(args.registry) if args.registry else ChannelRegistry.default()


def _load(args):
    if args.recording:
        if not args.manifest:
            raise ValidationError("--recording needs --manifest (its sidecar JSON)")
        entry = hio.parse_sidecar(args.manifest, args.recording)
        manifest = hio.DatasetManifest((entry,))
    elif args.dataset:
        manifest = hio.DatasetManifest.from_directory(args.dataset)
    else:
        raise ValidationError("give --dataset DIR or --recording CSV --manifest JSON")
    return hio.load_dataset(manifest, _registry(args))


def _emit(text: str, path) -> None:
    if path is None or str(path) == "-":
        sys.stdout.write(text)
    else:
        hio.write_text(path, text)


def cmd_hfd(args) -> int:
    recs = _load(args)
    feats = compute_features(recs, HfdParams(args.k_max), args.window_seconds, n_jobs=args.n_jobs)
    prov = {**_provenance(args), "k_max": args.k_max}
    if args.window_seconds is not None:
        prov["window_seconds"] = args.window_seconds
    _emit(hio.features_csv(feats, prov), args.output)
    return 0


def cmd_tune(args) -> int:
    recs = _load(args)
    report = tune_kmax(recs, KmaxGrid.parse(args.grid), n_jobs=args.n_jobs)
    _emit(hio.dumps_json({"provenance": _provenance(args), **report.to_dict()}), args.output)
    if args.output not in (None, "-"):
        print(f"chosen k_max = {report.chosen}")
    return 0


def _features(args):
    grouping = hio.read_grouping(args.grouping)
    order = _registry(args).labels if args.registry else None
    return hio.read_features(args.features, grouping, order)


def cmd_analyze(args) -> int:
    feats = _features(args)
    if not all(isinstance(f, hio.HfdVector) for f in feats):
        raise ValidationError("analyze needs whole-recording features (window_index 'full')")
    experts, novices = split_by_group(feats)
    if not experts or not novices:
        raise ValidationError("both expert and novice recordings are required")
    delta = group_delta(experts, novices, args.direction)
    prov = _provenance(args)
    head = hio.header_lines(prov)
    out = Path(args.out_dir)
    hio.write_text(out / "delta.csv", head + delta_table(delta))
    hio.write_text(out / "ttest.csv", head + ttest_table(delta))
    hio.write_text(out / "heatmap.csv", head + export_heatmap(delta))
    styles = {f.style for f in feats}
    if {Style.ALGEBRAIC, Style.GEOMETRIC} <= styles:
        hio.write_text(out / "style_split.csv",
                       head + style_split_table(style_split_group_delta(experts, novices, args.direction)))
        hio.write_text(out / "style_contrast.csv",
                       head + style_contrast_table(style_delta(experts), style_delta(novices)))
    top = top_n_channels(delta, min(args.top_n, len(delta.channels)), args.rank_by)
    hio.write_text(out / "top_n.json", hio.dumps_json({
        "provenance": prov, "direction": delta.direction.value, "rank_by": args.rank_by,
        "top_channels": [{"channel": c, "delta": v} for c, v in top],
    }))
    return 0


def cmd_classify(args) -> int:
    feats = _features(args)
    windowed = [f for f in feats if not isinstance(f, hio.HfdVector)]
    if windowed and len(windowed) != len(feats):
        raise ValidationError("feature file mixes whole-recording and windowed rows")
    mode = Mode.WINDOWED if windowed else Mode.WHOLE
    if args.window_seconds is not None:
        if mode is not Mode.WINDOWED:
            raise ValidationError("--window-seconds given but the feature file holds whole-recording HFD")
        found = {f.window_seconds for f in feats}
        if found != {args.window_seconds}:
            raise ValidationError(f"feature file was computed with window(s) {sorted(found)}, not {args.window_seconds}")
    order = _registry(args).labels if args.registry else None
    if mode is Mode.WINDOWED and args.strategy == Strategy.PRESENTATION.value:
        matrix = build_presentation_datasets(feats, mode, order)
        n_features = {pid: m.shape[1] for pid, m in matrix.items()}
    else:
        matrix = build_dataset(feats, mode, order)
        n_features = matrix.shape[1]
    seeds = [int(s) for s in args.seeds.split(",")]
    grid = [float(g) for g in args.grid.split(",")] if args.grid else None
    prov = _provenance(args)
    reports, payload = [], {}
    for fam in args.family.split(","):
        spec, rep = grid_search(matrix, fam, args.strategy, seeds, grid, args.folds, args.n_jobs)
        reports.append(rep)
        payload[spec.family.value] = {**rep.to_dict(), "feature_mode": mode.value, "n_features": n_features}
    _emit(hio.dumps_json({"provenance": prov, "reports": payload}), args.output)
    table = hio.header_lines(prov) + accuracy_table(reports) + "\n"
    if args.output not in (None, "-"):
        hio.write_text(Path(args.output).with_suffix(".txt"), table)
    sys.stderr.write(table)
    return 0


def cmd_synth(args) -> int:
    base = SynthSpec(Kind(args.kind), args.length, args.seed, args.sample_rate, args.amplitude,
                     args.frequency, args.hurst, args.a, args.b)
    expert = base if args.expert_hurst is None else replace(base, hurst=args.expert_hurst)
    novice = base if args.novice_hurst is None else replace(base, hurst=args.novice_hurst)
    registry = _registry(args)
    if args.n_channels is not None:
        if not 1 <= args.n_channels <= len(registry):
            raise ValidationError(f"--n-channels must lie in [1, {len(registry)}]")
        registry = ChannelRegistry(registry.labels[: args.n_channels])
    out = Path(args.out_dir)
    recs = make_cohort(args.subjects, args.presentations, expert, novice, registry, root_seed=args.seed)
    for r in recs:
        hio.write_recording(r, out)
    hio.write_text(out / "channels.txt", "\n".join(registry.labels) + "\n")
    print(f"wrote {len(recs)} recordings to {out}")
    return 0


def cmd_run(args) -> int:
    overrides = {
        "dataset_root": args.dataset, "output_dir": args.out_dir, "k_max": args.k_max, "kmax_grid": args.grid,
        "window_seconds": args.window_seconds, "strategy": args.strategy, "families": args.family,
        "seeds": args.seeds, "folds": args.folds, "n_jobs": args.n_jobs, "registry": args.registry,
        "direction": args.direction, "top_n": args.top_n,
    }
    if args.no_tune:
        overrides["tune"] = False
    cfg = load_config(args.config, overrides)
    written = run_pipeline(cfg)
    print(f"config {cfg.config_hash()}: wrote {len(written)} artifacts to {cfg.output_dir}")
    return 0


def _common(p, data=True):
    if data:
        p.add_argument("--dataset", type=Path, help="directory of recording CSVs with JSON sidecars")
        p.add_argument("--recording", type=Path, help="single recording CSV")
        p.add_argument("--manifest", type=Path, help="sidecar JSON for --recording")
    p.add_argument("--registry", type=Path, help="channel registry file (one label per line)")
    p.add_argument("--n-jobs", type=int, default=1)


def _feature_inputs(p):
    p.add_argument("--features", type=Path, required=True, help="feature CSV written by `hfdkit hfd`")
    p.add_argument("--grouping", type=Path, required=True,
                   help="dataset directory or CSV with subject_id, presentation_id, group[, style]")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hfdkit", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("hfd", help="per-channel HFD features")
    _common(p)
    p.add_argument("--k-max", type=int, default=100)
    p.add_argument("--window-seconds", type=float)
    p.add_argument("-o", "--output", help="feature CSV (default stdout)")
    p.set_defaults(func=cmd_hfd)

    p = sub.add_parser("tune-kmax", help="choose k_max by mean channel spread")
    _common(p)
    p.add_argument("--grid", default="2,5,20,100,150,200,400")
    p.add_argument("-o", "--output", help="TuningReport JSON (default stdout)")
    p.set_defaults(func=cmd_tune)

    p = sub.add_parser("analyze", help="expert-vs-novice channel deltas and t-tests")
    _common(p, data=False)
    _feature_inputs(p)
    p.add_argument("--direction", choices=[d.value for d in Direction], default="less")
    p.add_argument("--top-n", type=int, default=10)
    p.add_argument("--rank-by", choices=["abs_delta", "signed_delta"], default="abs_delta")
    p.add_argument("--out-dir", type=Path, required=True)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("classify", help="grid-searched cross-validation")
    _common(p, data=False)
    _feature_inputs(p)
    p.add_argument("--strategy", choices=[s.value for s in Strategy], default="subject")
    p.add_argument("--family", default="knn,svm,tree,adaboost", help="comma list")
    p.add_argument("--grid", help="comma list overriding the family's default grid (single family only)")
    p.add_argument("--seeds", default="0,1,2")
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--window-seconds", type=float)
    p.add_argument("-o", "--output", help="CvReport JSON (table goes next to it as .txt)")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("synth", help="write a synthetic labelled cohort")
    p.add_argument("--registry", type=Path)
    p.add_argument("--kind", choices=[k.value for k in Kind], default="fbm")
    p.add_argument("--length", type=int, default=1024)
    p.add_argument("--seed", type=int, default=0, help="root seed for all per-channel seeds")
    p.add_argument("--sample-rate", type=float, default=256.0)
    p.add_argument("--amplitude", type=float, default=1.0)
    p.add_argument("--frequency", type=float, default=10.0)
    p.add_argument("--hurst", type=float, default=0.5)
    p.add_argument("--a", type=float, default=0.5)
    p.add_argument("--b", type=float, default=3.0)
    p.add_argument("--expert-hurst", type=float)
    p.add_argument("--novice-hurst", type=float)
    p.add_argument("--subjects", type=int, default=1)
    p.add_argument("--presentations", type=int, default=1)
    p.add_argument("--n-channels", type=int, help="use the first N registry labels")
    p.add_argument("--out-dir", type=Path, required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("run", help="full pipeline from a config file")
    p.add_argument("--config", type=Path)
    p.add_argument("--dataset", type=Path)
    p.add_argument("--out-dir", type=Path)
    p.add_argument("--k-max", type=int)
    p.add_argument("--grid", help="k_max candidates for the tuner")
    p.add_argument("--no-tune", action="store_true", help="use --k-max as is")
    p.add_argument("--window-seconds", type=float)
    p.add_argument("--strategy", choices=[s.value for s in Strategy])
    p.add_argument("--family")
    p.add_argument("--seeds")
    p.add_argument("--folds", type=int)
    p.add_argument("--direction", choices=[d.value for d in Direction])
    p.add_argument("--top-n", type=int)
    p.add_argument("--registry", type=Path)
    p.add_argument("--n-jobs", type=int)
    p.set_defaults(func=cmd_run)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ValidationError as exc:
        code = 1
        err = exc
    except (HfdkitError, OSError, RuntimeError, ArithmeticError, MemoryError) as exc:
        code = 2
        err = exc
    detail = {"error": type(err).__name__, "message": str(err), "exit_code": code}
    for attr in ("path", "line"):
        if hasattr(err, attr):
            detail[attr] = str(getattr(err, attr))
    if hasattr(err, "errors"):
        detail["errors"] = [str(e) for e in err.errors]
    sys.stderr.write(json.dumps(detail, sort_keys=True) + "\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
