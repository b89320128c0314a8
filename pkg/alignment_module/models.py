# alignment_module/models.py

from typing import List, Optional

import numpy as np
from pydantic import BaseModel, Field, model_validator


class AlignmentError(Exception):
    """Raised for malformed alignments or alignments that do not fit a track."""

    def __init__(self, message: str, line_number: Optional[int] = None) -> None:
        self.line_number = line_number
        prefix = f"line {line_number}: " if line_number is not None else ""
        super().__init__(f"{prefix}{message}")


class PhonemeInterval(BaseModel):
    """One aligned phoneme; times in seconds."""
    phoneme: str = Field(..., min_length=1, description="Phoneme symbol")
    start: float = Field(..., ge=0, description="Onset in seconds")
    end: float = Field(..., description="Offset in seconds")

    @model_validator(mode="after")
    def _check_order(self) -> "PhonemeInterval":
        if not self.start < self.end:
            raise ValueError(f"start {self.start} must be before end {self.end}")
        return self


class PhonemeAlignment(BaseModel):
    """Sorted, non-overlapping phoneme intervals for one utterance."""
    entries: List[PhonemeInterval] = Field(..., min_length=1)

    @model_validator(mode="after")
    def _check_sorted(self) -> "PhonemeAlignment":
        for previous, current in zip(self.entries, self.entries[1:]):
            if current.start < previous.end:
                raise ValueError(
                    f"interval {current.phoneme}@{current.start} overlaps or precedes "
                    f"{previous.phoneme}@{previous.start}-{previous.end}"
                )
        return self

    @property
    def phonemes(self) -> List[str]:
        return [entry.phoneme for entry in self.entries]


class PhonemeFeatures(BaseModel):
    """Phoneme-level pitch (Hz), duration (frames) and energy."""
    phonemes: List[str] = Field(..., min_length=1)
    pitch: List[float]
    duration: List[int]
    energy: List[float]

    @model_validator(mode="after")
    def _check_shapes(self) -> "PhonemeFeatures":
        n = len(self.phonemes)
        if not (len(self.pitch) == len(self.duration) == len(self.energy) == n):
            raise ValueError("phonemes, pitch, duration and energy must have equal length")
        if any(d < 0 for d in self.duration):
            raise ValueError("durations must be non-negative")
        for name in ("pitch", "energy"):
            values = np.asarray(getattr(self, name), dtype=np.float64)
            if not np.all(np.isfinite(values)) or np.any(values < 0):
                raise ValueError(f"{name} must be finite and non-negative")
        return self

    def __len__(self) -> int:
        return len(self.phonemes)

    def arrays(self):
        """(pitch, duration, energy) as float64 arrays."""
        return (
            np.asarray(self.pitch, dtype=np.float64),
            np.asarray(self.duration, dtype=np.float64),
            np.asarray(self.energy, dtype=np.float64),
        )
