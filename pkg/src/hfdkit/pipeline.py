"""End-to-end run: load -> (tune k_max) -> features -> group analysis -> classification.

``run_artifacts`` does the work in memory and returns ``{filename: text}``;
``run_pipeline`` validates the config, stages the files in a temporary
directory and only moves them into ``output_dir`` once everything succeeded.
Every artifact carries the config hash and the seed set.
"""

from __future__ import annotations

import logging
import shutil
import tempfile
from pathlib import Path

from . import io as hio
from .config import RunConfig
from .errors import ValidationError
from .hfd import HfdParams, compute_features
from .kmax import KmaxGrid, tune_kmax
from .ml.cv import accuracy_table, grid_search
from .ml.dataset import Mode, build_dataset, build_presentation_datasets
from .ml.splits import Strategy
from .signal import ChannelRegistry, Style
from .stats import (delta_table, export_heatmap, group_delta, split_by_group, style_contrast_table, style_delta,
                    style_split_group_delta, style_split_table, top_n_channels)

log = logging.getLogger(__name__)


def provenance(config: RunConfig) -> dict:
    return {"config_hash": config.config_hash(), "seeds": ",".join(map(str, config.seeds))}


def _registry(config: RunConfig) -> ChannelRegistry:
    return ChannelRegistry.from_file(config.registry) if config.registry else ChannelRegistry.default()


def _json(obj: dict, prov: dict) -> str:
    return hio.dumps_json({"provenance": prov, **obj})


def run_artifacts(config: RunConfig) -> dict[str, str]:
    """All run outputs as text, keyed by file name. Deterministic in config + data."""
    prov = provenance(config)
    registry = _registry(config)
    manifest = hio.DatasetManifest.from_directory(config.dataset_root)
    recordings = hio.load_dataset(manifest, registry)
    if not recordings:
        raise ValidationError(f"no recordings found under {config.dataset_root}")
    out: dict[str, str] = {}

    k_max = config.k_max
    if config.tune:
        report = tune_kmax(recordings, KmaxGrid(config.kmax_grid), n_jobs=config.n_jobs)
        k_max = report.chosen
        out["tuning_report.json"] = _json(report.to_dict(), prov)
    params = HfdParams(k_max)
    prov_k = {**prov, "k_max": k_max}

    whole = compute_features(recordings, params, n_jobs=config.n_jobs)
    out["features.csv"] = hio.features_csv(whole, prov_k)
    windowed = None
    if config.window_seconds is not None:
        windowed = compute_features(recordings, params, config.window_seconds, n_jobs=config.n_jobs)
        out["features_windowed.csv"] = hio.features_csv(windowed, {**prov_k, "window_seconds": config.window_seconds})

    experts, novices = split_by_group(whole)
    header = hio.header_lines(prov_k)
    analysis: dict = {"direction": config.direction.value, "k_max": k_max}
    if experts and novices:
        delta = group_delta(experts, novices, config.direction)
        out["group_delta.csv"] = header + delta_table(delta)
        out["heatmap.csv"] = header + export_heatmap(delta, registry.labels)
        n = min(config.top_n, len(delta.channels))
        analysis["top_channels"] = [{"channel": c, "delta": v} for c, v in top_n_channels(delta, n, registry_order=registry.labels)]
        styles = {v.style for v in whole}
        if {Style.ALGEBRAIC, Style.GEOMETRIC} <= styles:
            try:
                per_style = style_split_group_delta(experts, novices, config.direction)
                out["style_split.csv"] = header + style_split_table(per_style, registry.labels)
                # the within-group reading of the style contrast, exported alongside
                out["style_contrast.csv"] = header + style_contrast_table(style_delta(experts), style_delta(novices),
                                                                          registry.labels)
                analysis["per_style_top_channels"] = {
                    s.value: [{"channel": c, "delta": v} for c, v in top_n_channels(d, n, registry_order=registry.labels)]
                    for s, d in per_style.items()
                }
            except ValidationError as exc:
                analysis["notes"] = [f"style split skipped: {exc}"]
    else:
        analysis["notes"] = ["only one group present; group analysis skipped"]
    out["analysis.json"] = _json(analysis, prov)

    if config.families:
        # Whole-recording features for pairs/subject splits; windowed features
        # (one width per presentation) for the presentation split when requested.
        if windowed is not None and config.strategy is Strategy.PRESENTATION:
            mode = Mode.WINDOWED
            data = build_presentation_datasets(windowed, mode, registry.labels)
            n_features = {pid: m.shape[1] for pid, m in data.items()}
        else:
            mode = Mode.WHOLE
            data = build_dataset(whole, mode, registry.labels)
            n_features = data.shape[1]
        reports = []
        summary = {}
        for fam in config.families:
            spec, rep = grid_search(data, fam, config.strategy, config.seeds, folds=config.folds, n_jobs=config.n_jobs)
            reports.append(rep)
            out[f"cv_{fam.value}.json"] = _json({**rep.to_dict(), "feature_mode": mode.value,
                                                 "n_features": n_features}, prov)
            summary[fam.value] = {"best": spec.to_dict(), "mean_accuracy": rep.mean}
        out["accuracy_table.txt"] = header + accuracy_table(reports) + "\n"
        out["classification.json"] = _json({"strategy": config.strategy.value, "feature_mode": mode.value,
                                            "families": summary}, prov)

    out["run.json"] = _json({"config": {k: v for k, v in config.to_dict().items() if k not in ("n_jobs", "output_dir")},
                             "k_max_used": k_max, "n_recordings": len(recordings),
                             "artifacts": sorted(out)}, prov)
    return out


def run_pipeline(config: RunConfig) -> dict[str, Path]:
    """Validate, run, and publish artifacts atomically into ``config.output_dir``.

    On failure nothing is written to the output directory.
    """
    config.check_paths()
    artifacts = run_artifacts(config)
    dest = Path(config.output_dir)
    dest.parent.mkdir(parents=True, exist_ok=True)
    staging = Path(tempfile.mkdtemp(prefix=".hfdkit-", dir=dest.parent))
    try:
        files = [hio.write_text(staging / name, text) for name, text in artifacts.items()]
        published = hio.atomic_move(files, dest)
    finally:
        shutil.rmtree(staging, ignore_errors=True)
    log.info("wrote %d artifacts to %s", len(published), dest)
    return {p.name: p for p in published}
