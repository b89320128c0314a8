# cli_module/toy_corpus.py

import io
import logging
from pathlib import Path
from typing import List, Tuple, Union

import numpy as np
from scipy.io import wavfile

from alignment_module.aligner import serialize_alignment
from alignment_module.models import PhonemeAlignment, PhonemeFeatures, PhonemeInterval
from mixer_module.mixer import build_synthetic_corpus
from signal_features_module.codec import atomic_write_bytes, atomic_write_text
from signal_features_module.models import AnalysisConfig

from .manifest import ManifestRow, relative_to, write_manifest

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

ENERGY_TO_AMPLITUDE = 1.0 / 40.0


def render_utterance(
    features: PhonemeFeatures, cfg: AnalysisConfig, sample_rate: int
) -> Tuple[np.ndarray, PhonemeAlignment]:
    """
    Phase-continuous sine per phoneme at its pitch, held for its frame
    duration, with one frame of trailing silence so the frame track covers
    the last boundary. Zero-duration phonemes produce no samples and no
    alignment entry.
    """
    pieces: List[np.ndarray] = []
    entries: List[PhonemeInterval] = []
    phase, cursor = 0.0, 0
    for phoneme, pitch, duration, energy in zip(features.phonemes, features.pitch, features.duration, features.energy):
        n = duration * cfg.hop_length
        if n == 0:
            logger.debug(f"Skipping zero-duration phoneme {phoneme} at sample {cursor}")
            continue
        increments = np.full(n, 2.0 * np.pi * pitch / sample_rate)
        phases = phase + np.cumsum(increments) - increments[0]
        amplitude = float(np.clip(energy * ENERGY_TO_AMPLITUDE, 0.05, 0.9))
        pieces.append(amplitude * np.sin(phases))
        phase = float(phases[-1] + increments[0])
        entries.append(PhonemeInterval(
            phoneme=phoneme, start=cursor / sample_rate, end=(cursor + n) / sample_rate
        ))
        cursor += n
    pieces.append(np.zeros(cfg.frame_length))
    return np.concatenate(pieces), PhonemeAlignment(entries=entries)


def wav_bytes(samples: np.ndarray, sample_rate: int) -> bytes:
    buffer = io.BytesIO()
    wavfile.write(buffer, sample_rate, np.round(np.clip(samples, -1.0, 1.0) * 32767.0).astype(np.int16))
    return buffer.getvalue()


def write_toy_corpus(out_dir: PathLike, cfg: AnalysisConfig, sample_rate: int, seed: int) -> Path:
    """ESD-style tree of WAV files with TSV alignments plus `manifest.tsv`; returns the manifest path."""
    out_dir = Path(out_dir)
    cfg.check_sample_rate(sample_rate)
    index = build_synthetic_corpus(seed=seed)
    rows: List[ManifestRow] = []
    for record in index.sorted_records():
        samples, alignment = render_utterance(record.features, cfg, sample_rate)
        folder = out_dir / record.speaker / record.emotion.value.capitalize()
        wav_path = folder / f"{record.sentence}.wav"
        tsv_path = folder / f"{record.sentence}.tsv"
        atomic_write_bytes(wav_path, wav_bytes(samples, sample_rate))
        atomic_write_text(tsv_path, serialize_alignment(alignment))
        rows.append(ManifestRow(
            speaker=record.speaker,
            sentence=record.sentence,
            emotion=record.emotion,
            audio=relative_to(wav_path, out_dir),
            alignment=relative_to(tsv_path, out_dir),
        ))
    manifest_path = out_dir / "manifest.tsv"
    write_manifest(rows, manifest_path)
    logger.info(f"Wrote toy corpus of {len(rows)} utterances to {out_dir}")
    return manifest_path
