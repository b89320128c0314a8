# alignment_module/aligner.py

import logging
from pathlib import Path
from typing import List, Union

import numpy as np
from pydantic import ValidationError

from signal_features_module.codec import atomic_write_text
from signal_features_module.models import AnalysisConfig, EnergyTrack, F0Track

from .models import AlignmentError, PhonemeAlignment, PhonemeFeatures, PhonemeInterval

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def _round_half_up(value: float) -> int:
    return int(np.floor(value + 0.5))


def parse_alignment(text: str) -> PhonemeAlignment:
    """
    Parse `phoneme<TAB>start<TAB>end` lines; '#' lines and blank lines are skipped.
    """
    entries: List[PhonemeInterval] = []
    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = raw.rstrip("\r\n").split("\t")
        if len(parts) != 3:
            raise AlignmentError(f"expected 3 tab-separated fields, got {len(parts)}", line_number)
        try:
            start, end = float(parts[1]), float(parts[2])
        except ValueError as e:
            raise AlignmentError(f"bad time value ({e})", line_number) from e
        if not (np.isfinite(start) and np.isfinite(end)):
            raise AlignmentError(f"times must be finite, got {parts[1]!r} and {parts[2]!r}", line_number)
        try:
            entry = PhonemeInterval(phoneme=parts[0].strip(), start=start, end=end)
        except ValidationError as e:
            raise AlignmentError(e.errors()[0]["msg"], line_number) from e
        if entries and entry.start < entries[-1].end:
            raise AlignmentError("interval overlaps or is out of order", line_number)
        entries.append(entry)

    if not entries:
        raise AlignmentError("alignment document has no entries")
    return PhonemeAlignment(entries=entries)


def serialize_alignment(alignment: PhonemeAlignment) -> str:
    return "".join(f"{e.phoneme}\t{e.start!r}\t{e.end!r}\n" for e in alignment.entries)


def read_alignment(path: PathLike) -> PhonemeAlignment:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise AlignmentError(f"cannot read {path}: {e}") from e
    return parse_alignment(text)


def read_textgrid_tier(path: PathLike, tier_name: str = "phones") -> PhonemeAlignment:
    """Convert a Praat TextGrid interval tier (e.g. aligner output) into an alignment."""
    from praatio import textgrid

    try:
        grid = textgrid.openTextgrid(str(path), includeEmptyIntervals=False)
        tier = grid.getTier(tier_name)
    except Exception as e:
        logger.error(f"Could not read tier '{tier_name}' from {path}: {e}")
        raise AlignmentError(f"cannot read tier '{tier_name}' from {path}: {e}") from e

    entries = [
        PhonemeInterval(phoneme=entry.label.strip(), start=float(entry.start), end=float(entry.end))
        for entry in tier.entries
        if entry.label.strip()
    ]
    if not entries:
        raise AlignmentError(f"tier '{tier_name}' in {path} has no labelled intervals")
    return PhonemeAlignment(entries=entries)


def _frame_bounds(alignment: PhonemeAlignment, frame_rate: float) -> np.ndarray:
    return np.array(
        [(_round_half_up(e.start * frame_rate), _round_half_up(e.end * frame_rate)) for e in alignment.entries],
        dtype=np.int64,
    )


def durations_in_frames(alignment: PhonemeAlignment, cfg: AnalysisConfig, sample_rate: int) -> List[int]:
    """Per-phoneme frame counts from rounded boundary frames (end-exclusive)."""
    bounds = _frame_bounds(alignment, sample_rate / cfg.hop_length)
    return [int(d) for d in bounds[:, 1] - bounds[:, 0]]


def continuous_pitch(f0: F0Track) -> np.ndarray:
    """Linear interpolation across unvoiced frames; edges take the nearest voiced value."""
    voiced_idx = np.nonzero(f0.voiced)[0]
    if voiced_idx.size == 0:
        return np.zeros(len(f0))
    return np.interp(np.arange(len(f0)), voiced_idx, f0.values[voiced_idx])


def phoneme_average(
    f0: F0Track,
    energy: EnergyTrack,
    alignment: PhonemeAlignment,
    cfg: AnalysisConfig,
) -> PhonemeFeatures:
    """Reduce frame tracks to one pitch/energy mean and a frame duration per phoneme."""
    if f0.hop_length != energy.hop_length or f0.hop_length != cfg.hop_length:
        raise AlignmentError(
            f"hop mismatch: f0 {f0.hop_length}, energy {energy.hop_length}, config {cfg.hop_length}"
        )
    if f0.sample_rate != energy.sample_rate or len(f0) != len(energy):
        raise AlignmentError("F0 and energy tracks are not frame-parallel")

    n_frames = len(f0)
    frame_rate = f0.sample_rate / f0.hop_length
    last_end = alignment.entries[-1].end
    if last_end * frame_rate > n_frames + 1 + 1e-9:
        raise AlignmentError(
            f"alignment ends at {last_end:.3f}s, past the {n_frames}-frame track"
        )

    pitch_track = continuous_pitch(f0)
    bounds = _frame_bounds(alignment, frame_rate)
    pitch, energies, durations = [], [], []
    for start, end in bounds:
        duration = int(end - start)
        durations.append(duration)
        if duration == 0:
            pitch.append(0.0)
            energies.append(0.0)
            continue
        lo, hi = min(start, n_frames - 1), min(end, n_frames)
        if hi <= lo:
            hi = lo + 1
        pitch.append(float(np.mean(pitch_track[lo:hi])))
        energies.append(float(np.mean(energy.values[lo:hi])))

    return PhonemeFeatures(
        phonemes=alignment.phonemes,
        pitch=pitch,
        duration=durations,
        energy=energies,
    )


def write_phoneme_features(features: PhonemeFeatures, path: PathLike) -> None:
    lines = ["# phoneme\tpitch\tduration\tenergy"]
    for p, pitch, duration, energy in zip(features.phonemes, features.pitch, features.duration, features.energy):
        lines.append(f"{p}\t{pitch!r}\t{duration}\t{energy!r}")
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_phoneme_features(path: PathLike) -> PhonemeFeatures:
    phonemes, pitch, duration, energy = [], [], [], []
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise AlignmentError(f"cannot read {path}: {e}") from e
    for line_number, line in enumerate(text.splitlines(), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 4:
            raise AlignmentError(f"{path}: expected 4 fields", line_number)
        phonemes.append(parts[0])
        pitch.append(float(parts[1]))
        duration.append(int(parts[2]))
        energy.append(float(parts[3]))
    try:
        return PhonemeFeatures(phonemes=phonemes, pitch=pitch, duration=duration, energy=energy)
    except ValidationError as e:
        raise AlignmentError(f"{path}: {e}") from e
