# adaptor_module/models.py

import math
from dataclasses import dataclass
from typing import Any, Dict, List, Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from mixer_module.enums import EmotionLabel

Element = Literal["duration", "pitch", "energy"]
ELEMENTS = ("duration", "pitch", "energy")
ADVERSARIAL_COLUMNS = ("L_adv_p", "L_adv_d", "L_adv_e", "L_disc_p", "L_disc_d", "L_disc_e")


class AdaptorError(Exception):
    """Base error for the variance adaptor and its trainer."""
    pass


class TrainingDivergence(AdaptorError):
    """Raised when a loss term stops being finite; carries the offending term."""

    def __init__(self, step: int, term: str, value: float) -> None:
        self.step = step
        self.term = term
        self.value = value
        super().__init__(f"training diverged at step {step}: {term} = {value}")

    def report(self) -> Dict[str, Any]:
        return {"status": "diverged", "step": self.step, "term": self.term, "value": repr(self.value)}


class CheckpointFormatError(AdaptorError):
    """Raised when a checkpoint container is malformed."""
    pass


class NormalizationStats(BaseModel):
    """Corpus statistics; pitch and energy heads regress z-scores."""
    pitch_mean: float = 0.0
    pitch_std: float = Field(1.0, gt=0)
    energy_mean: float = 0.0
    energy_std: float = Field(1.0, gt=0)


class AdaptorConfig(BaseModel):
    """Sizes, learning rates and switches of the desk-scale adaptor."""
    embedding_dim: int = Field(8, ge=1, description="Width of phoneme, speaker and emotion embeddings")
    hidden_dim: int = Field(16, ge=1, description="Hidden width of each predictor head")
    vocab_size: int = Field(..., ge=1, description="Phoneme vocabulary size")
    n_speakers: int = Field(..., ge=1, description="Number of speakers")
    generator_lr: float = Field(0.1, ge=0, description="Gradient-descent rate for the adaptor")
    discriminator_lr: float = Field(0.05, ge=0, description="Gradient-descent rate for the discriminators")
    batch_size: int = Field(16, ge=1, description="Utterances per phase and step")
    seed: int = Field(0, ge=0)
    disc_hidden_dim: int = Field(8, ge=1, description="Hidden width of each discriminator")
    disc_window: int = Field(3, ge=1, description="Sliding-window width scored by the discriminators")
    use_discriminator: bool = Field(True, description="False reproduces the no-discriminator ablation")
    fake_source: Literal["prediction", "pseudo_label"] = Field(
        "prediction", description="What the discriminators see as fake"
    )
    normalization: NormalizationStats = Field(default_factory=NormalizationStats)

    @field_validator("fake_source")
    @classmethod
    def _only_predictions(cls, value: str) -> str:
        if value != "prediction":
            raise ValueError("fake_source 'pseudo_label' is not implemented; use 'prediction'")
        return value


class EmotionCondition(BaseModel):
    """Embedding lambda * emb(emo_i) + (1 - lambda) * emb(emo_j)."""
    model_config = ConfigDict(populate_by_name=True, frozen=True)

    emo_i: EmotionLabel
    emo_j: EmotionLabel
    lambda_: float = Field(..., alias="lambda", ge=0.0, le=1.0)

    @classmethod
    def categorical(cls, emotion: EmotionLabel) -> "EmotionCondition":
        return cls(emo_i=emotion, emo_j=EmotionLabel.NEUTRAL, lambda_=1.0)


class Vocabulary(BaseModel):
    """Symbol tables that map corpus tokens to embedding rows."""
    phonemes: List[str] = Field(..., min_length=1)
    speakers: List[str] = Field(..., min_length=1)

    def phoneme_ids(self, symbols: List[str]) -> List[int]:
        lookup = {p: i for i, p in enumerate(self.phonemes)}
        try:
            return [lookup[s] for s in symbols]
        except KeyError as e:
            raise AdaptorError(f"phoneme {e.args[0]!r} not in vocabulary") from None

    def speaker_id(self, speaker: str) -> int:
        try:
            return self.speakers.index(speaker)
        except ValueError:
            raise AdaptorError(f"speaker {speaker!r} not in vocabulary") from None


@dataclass
class Prediction:
    """Adaptor output for one utterance: log(d+1) durations, pitch in Hz, energy."""
    log_duration: np.ndarray
    pitch: np.ndarray
    energy: np.ndarray

    def __len__(self) -> int:
        return int(self.log_duration.size)


class LossReport(BaseModel):
    """
    Every loss term of one training step, measured before the update.

    L_categorical covers the regression terms only: the mel-spectrogram term
    has no decoder to train at this scale. L_adv_* are the generator-side
    least-squares terms; L_disc_* are the discriminator objectives.
    """
    step: int = 0
    L_d: float
    L_p: float
    L_e: float
    L_d_tilde: float
    L_p_tilde: float
    L_e_tilde: float
    L_adv_p: float = 0.0
    L_adv_d: float = 0.0
    L_adv_e: float = 0.0
    L_disc_p: float = 0.0
    L_disc_d: float = 0.0
    L_disc_e: float = 0.0
    L_categorical: float = 0.0
    L_intermediate: float = 0.0
    L_total: float = 0.0

    @model_validator(mode="after")
    def _fill_composites(self) -> "LossReport":
        self.L_categorical = self.L_d + self.L_p + self.L_e
        self.L_intermediate = self.L_adv + self.L_d_tilde + self.L_p_tilde + self.L_e_tilde
        self.L_total = self.L_categorical + self.L_intermediate
        return self

    @property
    def L_adv(self) -> float:
        return self.L_adv_p + self.L_adv_d + self.L_adv_e

    def first_non_finite(self) -> Optional[str]:
        for name, value in self.model_dump().items():
            if isinstance(value, float) and not math.isfinite(value):
                return name
        return None

    def row(self, include_adversarial: bool = True) -> Dict[str, float]:
        row = self.model_dump()
        if not include_adversarial:
            for name in ADVERSARIAL_COLUMNS:
                row.pop(name)
        return row
