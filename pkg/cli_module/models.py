# cli_module/models.py

import os
from enum import IntEnum
from typing import Optional

from pydantic import BaseModel, Field

from adaptor_module.models import AdaptorConfig, NormalizationStats
from mixer_module.enums import EmotionLabel, LambdaDistribution
from signal_features_module.models import AnalysisConfig


class ExitCode(IntEnum):
    OK = 0
    CONFIG = 2
    PARTIAL = 3
    DIVERGED = 4
    FAILED = 5


class ConfigError(Exception):
    """Raised for unusable configuration or missing inputs; maps to exit code 2."""
    pass


class ManifestError(Exception):
    def __init__(self, message: str, line_number: Optional[int] = None) -> None:
        self.line_number = line_number
        prefix = f"manifest line {line_number}: " if line_number is not None else ""
        super().__init__(f"{prefix}{message}")


class MixerSettings(BaseModel):
    distribution: LambdaDistribution = Field(LambdaDistribution.BETA, description="Interpolation-weight distribution")
    count: int = Field(1000, ge=1, description="Pseudo-labels to generate")


class AdaptorSettings(BaseModel):
    """Adaptor knobs a user sets; vocabulary and speaker counts come from the corpus."""
    embedding_dim: int = Field(8, ge=1)
    hidden_dim: int = Field(16, ge=1)
    generator_lr: float = Field(0.1, ge=0)
    discriminator_lr: float = Field(0.05, ge=0)
    batch_size: int = Field(16, ge=1)
    disc_hidden_dim: int = Field(8, ge=1)
    disc_window: int = Field(3, ge=1)
    use_discriminator: bool = True
    steps: int = Field(2000, ge=0, description="Training steps")
    log_every: int = Field(100, ge=0, description="Steps between progress lines")

    def to_adaptor_config(
        self, vocab_size: int, n_speakers: int, seed: int, normalization: NormalizationStats
    ) -> AdaptorConfig:
        return AdaptorConfig(
            vocab_size=vocab_size,
            n_speakers=n_speakers,
            seed=seed,
            normalization=normalization,
            **self.model_dump(exclude={"steps", "log_every"}),
        )


class PredictSettings(BaseModel):
    emotion: EmotionLabel = Field(EmotionLabel.HAPPY, description="Emotion whose intensity is swept")
    intensities: str = Field("0,0.25,0.5,0.75,1", description="Comma-separated intensity grid")
    sample_rate: int = Field(22050, ge=1, description="Sample rate for frame contours")

    def intensity_grid(self) -> list:
        try:
            grid = sorted({float(v) for v in self.intensities.split(",") if v.strip()})
        except ValueError as e:
            raise ConfigError(f"bad intensity grid {self.intensities!r}: {e}") from e
        if not grid or any(not 0.0 <= t <= 1.0 for t in grid):
            raise ConfigError(f"intensities must lie in [0, 1], got {self.intensities!r}")
        return grid


def _default_jobs() -> int:
    try:
        return max(1, int(os.getenv("PROSODY_JOBS", "1")))
    except ValueError:
        return 1


class ToolConfig(BaseModel):
    """Every setting a command can read, grouped by section."""
    analysis: AnalysisConfig = Field(default_factory=AnalysisConfig)
    mixer: MixerSettings = Field(default_factory=MixerSettings)
    adaptor: AdaptorSettings = Field(default_factory=AdaptorSettings)
    predict: PredictSettings = Field(default_factory=PredictSettings)
    seed: int = Field(0, ge=0)
    jobs: int = Field(default_factory=_default_jobs, ge=1)
    output_dir: str = Field("out", min_length=1)


CONFIG_SECTIONS = {
    "analysis": AnalysisConfig,
    "mixer": MixerSettings,
    "adaptor": AdaptorSettings,
    "predict": PredictSettings,
}
