# metrics_module/models.py

import math
from dataclasses import dataclass
from typing import List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from mixer_module.enums import EmotionLabel


class MetricError(Exception):
    """Raised for inputs the objective metrics cannot compare."""
    pass


@dataclass
class DtwPath:
    """Monotone (reference, candidate) frame pairs from (0, 0) to the last frames."""
    pairs: np.ndarray

    def __post_init__(self) -> None:
        self.pairs = np.asarray(self.pairs, dtype=np.int64).reshape(-1, 2)
        if self.pairs.shape[0] == 0:
            raise MetricError("DTW path is empty")
        if tuple(self.pairs[0]) != (0, 0):
            raise MetricError("DTW path must start at (0, 0)")
        steps = np.diff(self.pairs, axis=0)
        if steps.size and (np.any(steps < 0) or np.any(steps > 1) or np.any(steps.sum(axis=1) == 0)):
            raise MetricError("DTW path steps must advance i, j or both by exactly one")

    def __len__(self) -> int:
        return int(self.pairs.shape[0])

    @property
    def ref_index(self) -> np.ndarray:
        return self.pairs[:, 0]

    @property
    def cand_index(self) -> np.ndarray:
        return self.pairs[:, 1]

    @property
    def end(self) -> Tuple[int, int]:
        return int(self.pairs[-1, 0]), int(self.pairs[-1, 1])

    def as_list(self) -> List[Tuple[int, int]]:
        return [(int(i), int(j)) for i, j in self.pairs]


class MetricReport(BaseModel):
    """Objective distances between one reference and one candidate utterance."""
    mcd_db: float = Field(..., ge=0, description="Mel cepstral distortion in dB")
    f0_rmse_hz: float = Field(..., ge=0, description="F0 RMSE over mutually voiced frames")
    mel_mae: float = Field(..., ge=0, description="Mean absolute log-mel difference along the DTW path")
    frames_compared: int = Field(..., ge=0)
    voiced_frames_compared: int = Field(..., ge=0)

    @model_validator(mode="after")
    def _finite(self) -> "MetricReport":
        for name in ("mcd_db", "f0_rmse_hz", "mel_mae"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} is not finite")
        return self


class MetricRow(BaseModel):
    """One line of the evaluation report; metric fields are empty unless status is ok."""
    model_config = ConfigDict(populate_by_name=True)

    utterance_id: str
    speaker: str
    sentence: str
    emotion: EmotionLabel
    lambda_: Optional[float] = Field(None, alias="lambda")
    status: Literal["ok", "missing", "error"] = "ok"
    detail: Optional[str] = None
    mcd_db: Optional[float] = None
    f0_rmse_hz: Optional[float] = None
    mel_mae: Optional[float] = None
    frames_compared: Optional[int] = None
    voiced_frames_compared: Optional[int] = None

    @classmethod
    def from_report(cls, utterance_id: str, speaker: str, sentence: str, emotion: EmotionLabel,
                    report: MetricReport, lambda_: Optional[float] = None) -> "MetricRow":
        return cls(
            utterance_id=utterance_id, speaker=speaker, sentence=sentence, emotion=emotion,
            lambda_=lambda_, **report.model_dump(),
        )
