# mixer_module/mixer.py

import logging
from pathlib import Path
from typing import List, Tuple, Union

import numpy as np

from alignment_module.models import PhonemeFeatures
from signal_features_module.codec import atomic_write_text

from .enums import EmotionLabel, LambdaDistribution, NON_NEUTRAL_EMOTIONS
from .models import (
    CorpusIndex,
    MixedProsody,
    MixerError,
    NoEligiblePairError,
    PhonemeMismatchError,
    PseudoDataset,
    PseudoLabel,
    SkippedPair,
    SkipReport,
    UtteranceRecord,
)

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

DISCRETE_LAMBDAS = (0.0, 0.5, 1.0)


def sample_pair(index: CorpusIndex, rng: np.random.Generator) -> Tuple[UtteranceRecord, UtteranceRecord]:
    """
    Draw a (speaker, sentence) group, one of its emotional renditions, and
    pair it with the neutral rendition; neutral goes first with probability 1/2.
    """
    groups = index.eligible_groups()
    if not groups:
        raise NoEligiblePairError("corpus index has no emotional utterance with a neutral counterpart")

    speaker, sentence, emotions = groups[int(rng.integers(len(groups)))]
    emotion = emotions[int(rng.integers(len(emotions)))]
    neutral = index.get(speaker, sentence, EmotionLabel.NEUTRAL)
    emotional = index.get(speaker, sentence, emotion)
    if rng.random() < 0.5:
        return neutral, emotional
    return emotional, neutral


def sample_lambda(dist: LambdaDistribution, rng: np.random.Generator) -> float:
    u = float(rng.random())
    if dist == LambdaDistribution.BETA:
        # inverse CDF of Beta(0.5, 0.5)
        return float(np.sin(np.pi * u / 2.0) ** 2)
    if dist == LambdaDistribution.UNIFORM:
        return u
    if dist == LambdaDistribution.DISCRETE:
        return DISCRETE_LAMBDAS[min(int(u * 3.0), 2)]
    raise MixerError(f"unknown lambda distribution {dist!r}")


def _interpolate(a: np.ndarray, b: np.ndarray, lam: float) -> np.ndarray:
    if lam == 1.0:
        return a.copy()
    if lam == 0.0:
        return b.copy()
    mixed = b + lam * (a - b)
    return np.clip(mixed, np.minimum(a, b), np.maximum(a, b))


def check_parallel(a: PhonemeFeatures, b: PhonemeFeatures) -> None:
    if len(a) != len(b):
        raise PhonemeMismatchError(f"phoneme sequences differ in length ({len(a)} vs {len(b)})")
    if a.phonemes != b.phonemes:
        position = next(k for k, (x, y) in enumerate(zip(a.phonemes, b.phonemes)) if x != y)
        raise PhonemeMismatchError(
            f"phoneme sequences differ at position {position} ({a.phonemes[position]} vs {b.phonemes[position]})"
        )


def mix(a: PhonemeFeatures, b: PhonemeFeatures, lam: float) -> MixedProsody:
    """lam * a + (1 - lam) * b elementwise; durations are floored to integers."""
    if not 0.0 <= lam <= 1.0:
        raise MixerError(f"lambda {lam} outside [0, 1]")
    check_parallel(a, b)
    pitch_a, duration_a, energy_a = a.arrays()
    pitch_b, duration_b, energy_b = b.arrays()
    return MixedProsody(
        pitch=_interpolate(pitch_a, pitch_b, lam),
        duration=np.floor(_interpolate(duration_a, duration_b, lam)).astype(np.int64),
        energy=_interpolate(energy_a, energy_b, lam),
    )


def _mismatched_pairs(index: CorpusIndex) -> SkipReport:
    report = SkipReport()
    for speaker, sentence, emotions in index.eligible_groups():
        neutral = index.get(speaker, sentence, EmotionLabel.NEUTRAL)
        for emotion in emotions:
            try:
                check_parallel(neutral.features, index.get(speaker, sentence, emotion).features)
            except PhonemeMismatchError as e:
                logger.warning(f"Skipping {speaker}/{sentence}/{emotion.value}: {e}")
                report.skipped.append(
                    SkippedPair(speaker=speaker, sentence=sentence, emotion=emotion, reason="phoneme_mismatch")
                )
    return report


def record_rng(seed: int, record_index: int) -> np.random.Generator:
    """Independent substream per record, so output does not depend on scheduling."""
    return np.random.default_rng([seed, record_index])


def generate_pseudo_dataset(
    index: CorpusIndex,
    count: int,
    dist: LambdaDistribution,
    seed: int,
) -> PseudoDataset:
    """Sample `count` pseudo-labels; pairs with differing phoneme sequences never enter the pool."""
    if count < 1:
        raise MixerError(f"count must be positive, got {count}")
    if seed < 0:
        raise MixerError(f"seed must be non-negative, got {seed}")

    skip_report = _mismatched_pairs(index)
    pool = index.without((s.speaker, s.sentence, s.emotion) for s in skip_report.skipped)
    if not pool.eligible_groups():
        raise NoEligiblePairError(
            f"no mixable pairs: {skip_report.count} skipped, {len(index)} records in index"
        )

    labels: List[PseudoLabel] = []
    for i in range(count):
        rng = record_rng(seed, i)
        first, second = sample_pair(pool, rng)
        lam = sample_lambda(dist, rng)
        mixed = mix(first.features, second.features, lam)
        labels.append(
            PseudoLabel(
                speaker=first.speaker,
                sentence=first.sentence,
                emo_i=first.emotion,
                emo_j=second.emotion,
                lambda_=lam,
                pitch=mixed.pitch.tolist(),
                duration=mixed.duration.tolist(),
                energy=mixed.energy.tolist(),
            )
        )

    logger.info(
        f"Generated {len(labels)} pseudo-labels ({dist.value}, seed={seed}); "
        f"{skip_report.count} pairs skipped"
    )
    return PseudoDataset(labels=labels, skip_report=skip_report)


def intensity_condition(emotion: EmotionLabel, intensity: float) -> Tuple[EmotionLabel, EmotionLabel, float]:
    """Intensity t means weight t on the emotion and 1 - t on neutral."""
    if not 0.0 <= intensity <= 1.0:
        raise MixerError(f"intensity {intensity} outside [0, 1]")
    return emotion, EmotionLabel.NEUTRAL, float(intensity)


SYNTHETIC_PHONEMES = ("AA", "AE", "AH", "B", "D", "IY", "K", "M", "N", "S", "T", "UW")


def build_synthetic_corpus(
    n_speakers: int = 2,
    n_sentences: int = 4,
    pitch_offset: float = 50.0,
    energy_scale: float = 1.5,
    seed: int = 0,
) -> CorpusIndex:
    """
    Parallel toy corpus: every emotional rendition repeats the neutral one
    with pitch shifted by `pitch_offset` Hz and energy scaled by `energy_scale`.

    Neutral prosody depends only on speaker and phoneme identity: each
    phoneme has an intrinsic duration, pitch deviation and energy factor.
    """
    rng = np.random.default_rng(seed)
    n_symbols = len(SYNTHETIC_PHONEMES)
    duration_of = rng.integers(3, 12, size=n_symbols)
    pitch_of = rng.normal(0.0, 5.0, size=n_symbols)
    energy_of = rng.uniform(0.95, 1.05, size=n_symbols)

    sentences = []
    for s in range(n_sentences):
        sentences.append(rng.integers(n_symbols, size=int(rng.integers(4, 8))))

    records: List[UtteranceRecord] = []
    for spk in range(n_speakers):
        speaker = f"spk{spk + 1:02d}"
        base_pitch = 120.0 + 80.0 * spk
        base_energy = 8.0 + 4.0 * spk
        for s, ids in enumerate(sentences):
            sentence = f"s{s + 1:03d}"
            phonemes = [SYNTHETIC_PHONEMES[int(k)] for k in ids]
            pitch = base_pitch + pitch_of[ids]
            duration = duration_of[ids]
            energy = base_energy * energy_of[ids]
            records.append(UtteranceRecord(
                speaker=speaker, sentence=sentence, emotion=EmotionLabel.NEUTRAL,
                features=PhonemeFeatures(phonemes=phonemes, pitch=pitch.tolist(),
                                         duration=duration.tolist(), energy=energy.tolist()),
            ))
            for emotion in NON_NEUTRAL_EMOTIONS:
                records.append(UtteranceRecord(
                    speaker=speaker, sentence=sentence, emotion=emotion,
                    features=PhonemeFeatures(phonemes=phonemes, pitch=(pitch + pitch_offset).tolist(),
                                             duration=duration.tolist(), energy=(energy * energy_scale).tolist()),
                ))
    return CorpusIndex.from_records(records)


def write_pseudo_dataset(dataset: PseudoDataset, path: PathLike) -> None:
    """JSON lines, one pseudo-label per line."""
    lines = [label.model_dump_json(by_alias=True) for label in dataset.labels]
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_pseudo_dataset(path: PathLike) -> List[PseudoLabel]:
    labels = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.strip():
            labels.append(PseudoLabel.model_validate_json(line))
    return labels


def write_skip_report(report: SkipReport, path: PathLike) -> None:
    atomic_write_text(path, report.model_dump_json(indent=2) + "\n")
