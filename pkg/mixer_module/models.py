# mixer_module/models.py

from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, NamedTuple, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from alignment_module.models import PhonemeFeatures

from .enums import EmotionLabel

RecordKey = Tuple[str, str, EmotionLabel]


class MixerError(Exception):
    """Base error for pair sampling and pseudo-label generation."""
    pass


class NoEligiblePairError(MixerError):
    """Raised when no neutral/emotional parallel pair can be drawn."""
    pass


class PhonemeMismatchError(MixerError):
    """Raised when two parallel utterances disagree on their phoneme sequence."""

    def __init__(self, detail: str, speaker: Optional[str] = None, sentence: Optional[str] = None) -> None:
        self.speaker = speaker
        self.sentence = sentence
        prefix = f"{speaker}/{sentence}: " if speaker else ""
        super().__init__(f"{prefix}{detail}")


class UtteranceRecord(BaseModel):
    """One utterance of the parallel corpus reduced to phoneme-level prosody."""
    speaker: str = Field(..., min_length=1)
    sentence: str = Field(..., min_length=1)
    emotion: EmotionLabel
    features: PhonemeFeatures

    @property
    def key(self) -> RecordKey:
        return (self.speaker, self.sentence, self.emotion)


@dataclass
class CorpusIndex:
    """
    Parallel utterances keyed by (speaker, sentence, emotion).

    Every (speaker, sentence) that has an emotional rendition must also
    have a neutral one.
    """
    records: Dict[RecordKey, UtteranceRecord] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for speaker, sentence, emotion in self.records:
            if emotion != EmotionLabel.NEUTRAL and (speaker, sentence, EmotionLabel.NEUTRAL) not in self.records:
                raise MixerError(f"{speaker}/{sentence} has {emotion.value} but no neutral rendition")

    @classmethod
    def from_records(cls, records: Iterable[UtteranceRecord]) -> "CorpusIndex":
        table: Dict[RecordKey, UtteranceRecord] = {}
        for record in records:
            if record.key in table:
                raise MixerError(f"duplicate record {record.speaker}/{record.sentence}/{record.emotion.value}")
            table[record.key] = record
        return cls(records=table)

    def __len__(self) -> int:
        return len(self.records)

    def get(self, speaker: str, sentence: str, emotion: EmotionLabel) -> UtteranceRecord:
        try:
            return self.records[(speaker, sentence, emotion)]
        except KeyError:
            raise MixerError(f"no record for {speaker}/{sentence}/{emotion.value}") from None

    def sorted_records(self) -> List[UtteranceRecord]:
        return [self.records[key] for key in sorted(self.records, key=lambda k: (k[0], k[1], k[2].value))]

    def speakers(self) -> List[str]:
        return sorted({speaker for speaker, _, _ in self.records})

    def eligible_groups(self) -> List[Tuple[str, str, List[EmotionLabel]]]:
        """(speaker, sentence, non-neutral emotions) for groups that can be mixed."""
        emotions: Dict[Tuple[str, str], List[EmotionLabel]] = {}
        for speaker, sentence, emotion in self.records:
            if emotion != EmotionLabel.NEUTRAL:
                emotions.setdefault((speaker, sentence), []).append(emotion)
        return [
            (speaker, sentence, sorted(found, key=lambda e: e.value))
            for (speaker, sentence), found in sorted(emotions.items())
        ]

    def without(self, keys: Iterable[RecordKey]) -> "CorpusIndex":
        dropped = set(keys)
        return CorpusIndex(records={k: v for k, v in self.records.items() if k not in dropped})


class MixedProsody(NamedTuple):
    pitch: np.ndarray
    duration: np.ndarray
    energy: np.ndarray


class PseudoLabel(BaseModel):
    """
    Mixed prosody for an intermediate intensity.

    `lambda_` weights `emo_i`: x = lambda * x_i + (1 - lambda) * x_j, with
    durations floored.
    """
    model_config = ConfigDict(populate_by_name=True)

    speaker: str
    sentence: str
    emo_i: EmotionLabel
    emo_j: EmotionLabel
    lambda_: float = Field(..., alias="lambda", ge=0.0, le=1.0, description="Weight on emo_i")
    pitch: List[float]
    duration: List[int]
    energy: List[float]

    @model_validator(mode="after")
    def _check_pair(self) -> "PseudoLabel":
        if (self.emo_i == EmotionLabel.NEUTRAL) == (self.emo_j == EmotionLabel.NEUTRAL):
            raise ValueError("exactly one of emo_i, emo_j must be neutral")
        if not (len(self.pitch) == len(self.duration) == len(self.energy) >= 1):
            raise ValueError("mixed sequences must be non-empty and of equal length")
        return self

    @property
    def emotion(self) -> EmotionLabel:
        """The non-neutral side of the pair."""
        return self.emo_j if self.emo_i == EmotionLabel.NEUTRAL else self.emo_i

    @property
    def intensity(self) -> float:
        """Weight on the non-neutral emotion."""
        return self.lambda_ if self.emo_i != EmotionLabel.NEUTRAL else 1.0 - self.lambda_

    def arrays(self):
        return (
            np.asarray(self.pitch, dtype=np.float64),
            np.asarray(self.duration, dtype=np.float64),
            np.asarray(self.energy, dtype=np.float64),
        )


class SkippedPair(BaseModel):
    speaker: str
    sentence: str
    emotion: EmotionLabel
    reason: str


class SkipReport(BaseModel):
    """Pairs excluded from mixing, with the reason."""
    skipped: List[SkippedPair] = Field(default_factory=list)

    @property
    def count(self) -> int:
        return len(self.skipped)

    def counts_by_reason(self) -> Dict[str, int]:
        return dict(sorted(Counter(s.reason for s in self.skipped).items()))


class PseudoDataset(BaseModel):
    labels: List[PseudoLabel]
    skip_report: SkipReport
