# cli_module/commands.py

import json
import logging
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

from adaptor_module.checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from adaptor_module.models import TrainingDivergence
from adaptor_module.params import init_params
from adaptor_module.trainer import (
    build_vocabulary,
    fit_normalization,
    predict,
    prepare_categorical,
    prepare_intermediate,
    train,
    write_loss_csv,
)
from alignment_module.aligner import (
    phoneme_average,
    read_alignment,
    read_phoneme_features,
    read_textgrid_tier,
    write_phoneme_features,
)
from alignment_module.models import AlignmentError, PhonemeFeatures
from metrics_module.metrics import compare_utterances, intensity_ordering
from metrics_module.models import MetricError, MetricRow
from metrics_module.reports import (
    expand_to_frames,
    export_pitch_contour,
    mean_pitch_by_intensity,
    write_emotion_summary,
    write_metric_reports,
)
from mixer_module.enums import EmotionLabel
from mixer_module.mixer import generate_pseudo_dataset, read_pseudo_dataset, write_pseudo_dataset, write_skip_report
from mixer_module.models import CorpusIndex, UtteranceRecord
from signal_features_module.codec import (
    atomic_write_text,
    read_prosody_text,
    read_track_binary,
    write_prosody_text,
    write_track_binary,
)
from signal_features_module.extractor import (
    compute_energy,
    compute_log_mel,
    compute_mel_cepstra,
    estimate_f0,
    load_waveform,
)
from signal_features_module.models import AnalysisConfig, F0Track, FeatureExtractionError

from .manifest import Manifest, ManifestRow, read_manifest, rebase, relative_to, scan_corpus_tree, write_manifest
from .models import ConfigError, ExitCode, ManifestError, ToolConfig
from .toy_corpus import write_toy_corpus

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

PHONEME_FEATURES_SUFFIX = ".phon.tsv"


def _require(path: PathLike, what: str) -> Path:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"{what} {path} does not exist")
    return path


def _output_dir(cfg: ToolConfig) -> Path:
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _run_parallel(fn: Callable[[Any], Any], tasks: Sequence[Any], jobs: int) -> List[Any]:
    """Order-preserving map; results never depend on the worker count."""
    if jobs <= 1 or len(tasks) <= 1:
        return [fn(task) for task in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, tasks))


def _status(n_ok: int, n_total: int) -> ExitCode:
    if n_ok == 0:
        return ExitCode.FAILED
    return ExitCode.OK if n_ok == n_total else ExitCode.PARTIAL


def _read_alignment_file(path: Path):
    if path.suffix.lower() == ".textgrid":
        return read_textgrid_tier(path)
    return read_alignment(path)


def features_path(manifest: Manifest, row: ManifestRow) -> Path:
    if not row.features:
        raise ManifestError(f"{row.utterance_id} has no extracted features; run extract first")
    return Path(str(manifest.resolve(row.features)) + PHONEME_FEATURES_SUFFIX)


# --- extract ---

def _extract_one(task: Tuple[Dict[str, Any], str, str, Dict[str, Any]]) -> Tuple[Optional[Dict], Optional[Dict]]:
    row_data, base_dir, out_dir, analysis = task
    row = ManifestRow.model_validate(row_data)
    manifest = Manifest(rows=[row], base_dir=Path(base_dir))
    cfg = AnalysisConfig.model_validate(analysis)
    out = Path(out_dir)
    stem = out / "features" / row.speaker / row.emotion.value / row.sentence
    try:
        waveform = load_waveform(manifest.resolve(row.audio))
        cfg.check_sample_rate(waveform.sample_rate)
        f0 = estimate_f0(waveform, cfg)
        energy = compute_energy(waveform, cfg)
        cepstra = compute_mel_cepstra(waveform, cfg)
        alignment = _read_alignment_file(manifest.resolve(row.alignment))
        features = phoneme_average(f0, energy, alignment, cfg)

        write_track_binary(f0, f"{stem}.f0.imx")
        write_track_binary(energy, f"{stem}.energy.imx")
        write_track_binary(cepstra, f"{stem}.mcep.imx")
        write_prosody_text(f0, energy, f"{stem}.prosody.txt")
        write_phoneme_features(features, f"{stem}{PHONEME_FEATURES_SUFFIX}")
    except (FeatureExtractionError, AlignmentError, OSError, ValueError) as e:
        logger.exception(f"Extraction failed for {row.utterance_id}")
        return None, {"utterance_id": row.utterance_id, "error": type(e).__name__, "message": str(e)}

    updated = rebase(row, manifest, out).model_copy(update={"features": relative_to(stem, out)})
    return updated.model_dump(mode="json"), None


def cmd_extract(manifest_path: PathLike, cfg: ToolConfig) -> ExitCode:
    """Per-utterance tracks and phoneme features, an updated manifest and an error report."""
    manifest = read_manifest(_require(manifest_path, "manifest"))
    out = _output_dir(cfg)
    tasks = [
        (row.model_dump(mode="json"), str(manifest.base_dir), str(out), cfg.analysis.model_dump())
        for row in manifest.rows
    ]
    results = _run_parallel(_extract_one, tasks, cfg.jobs)

    rows = [ManifestRow.model_validate(r) for r, _ in results if r is not None]
    errors = [e for _, e in results if e is not None]
    write_manifest(rows, out / "manifest.tsv")
    atomic_write_text(out / "extract_errors.jsonl", "".join(json.dumps(e, sort_keys=True) + "\n" for e in errors))
    logger.info(f"Extracted {len(rows)}/{len(manifest.rows)} utterances ({len(errors)} failed)")
    return _status(len(rows), len(manifest.rows))


# --- mix ---

def load_corpus_index(manifest: Manifest) -> CorpusIndex:
    records = [
        UtteranceRecord(
            speaker=row.speaker,
            sentence=row.sentence,
            emotion=row.emotion,
            features=read_phoneme_features(features_path(manifest, row)),
        )
        for row in manifest.rows
    ]
    return CorpusIndex.from_records(records)


def cmd_mix(manifest_path: PathLike, cfg: ToolConfig) -> ExitCode:
    manifest = read_manifest(_require(manifest_path, "manifest"))
    out = _output_dir(cfg)
    index = load_corpus_index(manifest)
    dataset = generate_pseudo_dataset(index, cfg.mixer.count, cfg.mixer.distribution, cfg.seed)
    write_pseudo_dataset(dataset, out / "pseudo_labels.jsonl")
    write_skip_report(dataset.skip_report, out / "skip_report.json")
    return ExitCode.OK


# --- train ---

def cmd_train(manifest_path: PathLike, pseudo_path: PathLike, cfg: ToolConfig) -> ExitCode:
    """Two-phase training; writes the checkpoint and the per-step loss CSV."""
    manifest = read_manifest(_require(manifest_path, "manifest"))
    labels = read_pseudo_dataset(_require(pseudo_path, "pseudo-label dataset"))
    if not labels:
        raise ConfigError(f"{pseudo_path} holds no pseudo-labels")
    out = _output_dir(cfg)

    index = load_corpus_index(manifest)
    vocabulary = build_vocabulary(index)
    stats = fit_normalization(index)
    settings = cfg.adaptor
    adaptor_cfg = settings.to_adaptor_config(len(vocabulary.phonemes), len(vocabulary.speakers), cfg.seed, stats)
    params, disc = init_params(adaptor_cfg)
    categorical = prepare_categorical(index, vocabulary, stats)
    intermediate = prepare_intermediate(labels, index, vocabulary, stats)

    try:
        result = train(
            params, disc, categorical, intermediate, adaptor_cfg,
            steps=settings.steps, log_every=settings.log_every,
        )
    except TrainingDivergence as e:
        logger.error(str(e))
        atomic_write_text(out / "divergence.json", json.dumps(e.report(), sort_keys=True, indent=2) + "\n")
        return ExitCode.DIVERGED

    save_checkpoint(
        Checkpoint(config=adaptor_cfg, vocabulary=vocabulary, params=result.params,
                   disc=result.disc, step=settings.steps),
        out / "adaptor.imxc",
    )
    write_loss_csv(result.reports, out / "losses.csv", include_adversarial=adaptor_cfg.use_discriminator)
    return ExitCode.OK


# --- eval ---

def _evaluate_one(task: Tuple[Dict[str, Any], str, str, str, Dict[str, Any]]) -> Dict[str, Any]:
    row_data, ref_audio, cand_audio, analysis_data = task[0], task[1], task[2], task[3]
    row = ManifestRow.model_validate(row_data)
    cfg = AnalysisConfig.model_validate(analysis_data)
    try:
        tracks = []
        for audio in (ref_audio, cand_audio):
            waveform = load_waveform(audio)
            cfg.check_sample_rate(waveform.sample_rate)
            tracks.append((compute_mel_cepstra(waveform, cfg), estimate_f0(waveform, cfg), compute_log_mel(waveform, cfg)))
        (ref_mcep, ref_f0, ref_mel), (cand_mcep, cand_f0, cand_mel) = tracks
        report = compare_utterances(ref_mcep, cand_mcep, ref_f0, cand_f0, ref_mel, cand_mel)
        metric_row = MetricRow.from_report(row.utterance_id, row.speaker, row.sentence, row.emotion, report)
    except (FeatureExtractionError, MetricError, OSError, ValueError) as e:
        logger.exception(f"Evaluation failed for {row.utterance_id}")
        metric_row = MetricRow(
            utterance_id=row.utterance_id, speaker=row.speaker, sentence=row.sentence,
            emotion=row.emotion, status="error", detail=str(e),
        )
    return metric_row.model_dump(mode="json", by_alias=True)


def cmd_eval(ref_manifest_path: PathLike, cand_manifest_path: PathLike, cfg: ToolConfig) -> ExitCode:
    """Per-utterance metrics for ids present in both manifests, plus per-emotion means."""
    ref = read_manifest(_require(ref_manifest_path, "reference manifest"))
    cand = read_manifest(_require(cand_manifest_path, "candidate manifest"))
    out = _output_dir(cfg)
    cand_rows = cand.by_id()
    shared = [row for row in ref.rows if row.utterance_id in cand_rows]
    if not shared:
        logger.error("Reference and candidate manifests share no utterance ids")
        return ExitCode.FAILED

    tasks = [
        (row.model_dump(mode="json"), str(ref.resolve(row.audio)),
         str(cand.resolve(cand_rows[row.utterance_id].audio)), cfg.analysis.model_dump())
        for row in shared
    ]
    evaluated = {r["utterance_id"]: MetricRow.model_validate(r) for r in _run_parallel(_evaluate_one, tasks, cfg.jobs)}

    ref_ids = {row.utterance_id for row in ref.rows}
    rows: List[MetricRow] = []
    for row in ref.rows + [r for r in cand.rows if r.utterance_id not in ref_ids]:
        if row.utterance_id in evaluated:
            rows.append(evaluated[row.utterance_id])
        else:
            rows.append(MetricRow(
                utterance_id=row.utterance_id, speaker=row.speaker, sentence=row.sentence,
                emotion=row.emotion, status="missing", detail="present in only one manifest",
            ))

    write_metric_reports(rows, out / "metrics.jsonl", out / "metrics_summary.csv")
    write_emotion_summary(rows, out / "metrics_by_emotion.csv")
    n_ok = sum(r.status == "ok" for r in rows)
    logger.info(f"Evaluated {n_ok}/{len(rows)} utterances")
    return _status(n_ok, len(rows))


# --- plot ---

def load_f0_for_plot(path: Path, cfg: ToolConfig) -> F0Track:
    name = path.name
    if name.endswith(".imx"):
        track = read_track_binary(path)
        if not isinstance(track, F0Track):
            raise ConfigError(f"{path} is not an F0 track")
        return track
    if name.endswith(".tsv"):
        return expand_to_frames(read_phoneme_features(path), cfg.analysis.hop_length, cfg.predict.sample_rate)
    if name.endswith(".txt"):
        return read_prosody_text(path)[0]
    raise ConfigError(f"cannot plot {path}: expected .imx, .tsv or .txt")


def cmd_plot(inputs: Sequence[PathLike], labels: Optional[Sequence[str]], out: PathLike, cfg: ToolConfig) -> ExitCode:
    if not inputs:
        raise ConfigError("plot needs at least one input")
    if labels and len(labels) != len(inputs):
        raise ConfigError(f"{len(labels)} labels for {len(inputs)} inputs")
    names = list(labels) if labels else [Path(p).name.split(".")[0] for p in inputs]
    tracks = {name: load_f0_for_plot(_require(path, "input"), cfg) for name, path in zip(names, inputs)}
    export_pitch_contour(tracks, out)
    return ExitCode.OK


# --- manifest ---

def cmd_manifest(root: PathLike, out: PathLike) -> ExitCode:
    """Manifest for an ESD-style `<root>/<speaker>/<Emotion>/<sentence>.wav` tree."""
    out = Path(out)
    rows = scan_corpus_tree(_require(root, "corpus root"), out.parent)
    if not rows:
        raise ManifestError(f"no usable utterances under {root}")
    write_manifest(rows, out)
    logger.info(f"Wrote {len(rows)} manifest rows to {out}")
    return ExitCode.OK


# --- predict ---

def cmd_predict(checkpoint_path: PathLike, manifest_path: PathLike, cfg: ToolConfig) -> ExitCode:
    """
    Predicted phoneme features over an intensity grid for every neutral
    utterance, the frame contours and the mean-pitch ordering summary.
    """
    checkpoint = load_checkpoint(_require(checkpoint_path, "checkpoint"))
    manifest = read_manifest(_require(manifest_path, "manifest"))
    out = _output_dir(cfg)
    emotion = cfg.predict.emotion
    grid = cfg.predict.intensity_grid()

    by_intensity: Dict[float, List[PhonemeFeatures]] = {t: [] for t in grid}
    tracks: Dict[str, F0Track] = {}
    for row in manifest.rows:
        if row.emotion != EmotionLabel.NEUTRAL:
            continue
        phonemes = read_phoneme_features(features_path(manifest, row)).phonemes
        for t in grid:
            features = predict(checkpoint.params, checkpoint.vocabulary, phonemes, row.speaker, emotion, t)
            by_intensity[t].append(features)
            label = f"{row.speaker}_{row.sentence}_{emotion.value}_{t:.2f}"
            write_phoneme_features(features, out / "predictions" / f"{label}{PHONEME_FEATURES_SUFFIX}")
            tracks[label] = expand_to_frames(features, cfg.analysis.hop_length, cfg.predict.sample_rate)
    if not tracks:
        raise ManifestError("manifest has no neutral utterances to condition on")

    export_pitch_contour(tracks, out / "predicted_contours.csv")
    mean_pitch = mean_pitch_by_intensity(by_intensity)
    baseline = mean_pitch[grid[0]]
    lines = ["intensity,mean_pitch_hz,offset_hz"]
    lines += [f"{t!r},{mean_pitch[t]!r},{mean_pitch[t] - baseline!r}" for t in grid]
    atomic_write_text(out / "intensity_summary.csv", "\n".join(lines) + "\n")
    if len(grid) > 1:
        ordering = intensity_ordering(mean_pitch)
        atomic_write_text(
            out / "intensity_ordering.json",
            json.dumps({"emotion": emotion.value, "ordering": ordering, "levels": grid}, sort_keys=True) + "\n",
        )
        logger.info(f"Mean pitch increases across {ordering:.0%} of adjacent intensity pairs")
    return ExitCode.OK


# --- toy-corpus ---

def cmd_synth_corpus(out: PathLike, cfg: ToolConfig) -> ExitCode:
    write_toy_corpus(out, cfg.analysis, cfg.predict.sample_rate, cfg.seed)
    return ExitCode.OK
