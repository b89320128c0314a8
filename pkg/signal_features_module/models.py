# signal_features_module/models.py

from dataclasses import dataclass

import numpy as np
from pydantic import BaseModel, Field, model_validator

SUPPORTED_SAMPLE_RATES = (16000, 22050, 44100, 48000)


class FeatureExtractionError(Exception):
    """Base error for waveform decoding and frame-level feature extraction."""
    pass


class WaveformFormatError(FeatureExtractionError):
    """Raised when a file cannot be decoded into a valid Waveform."""

    def __init__(self, path: str, reason: str) -> None:
        self.path = path
        self.reason = reason
        super().__init__(f"{path}: {reason}")


class FrameLengthError(FeatureExtractionError):
    """Raised when a waveform is shorter than one analysis frame."""

    def __init__(self, n_samples: int, frame_length: int) -> None:
        self.n_samples = n_samples
        self.frame_length = frame_length
        super().__init__(f"waveform has {n_samples} samples, need at least {frame_length}")


class SampleRateMismatchError(FeatureExtractionError):
    """Raised when tracks or waveforms that must be compared use different rates."""

    def __init__(self, expected: int, actual: int) -> None:
        self.expected = expected
        self.actual = actual
        super().__init__(f"sample rate {actual} does not match {expected}")


class TrackFormatError(FeatureExtractionError):
    """Raised when a serialized track is malformed."""
    pass


class AnalysisConfig(BaseModel):
    """
    Frame analysis settings shared by every extractor.

    Defaults follow the FastSpeech2 convention at 22050 Hz.
    """
    frame_length: int = Field(1024, ge=1, description="Frame length in samples (also the FFT size)")
    hop_length: int = Field(256, ge=1, description="Hop between frame starts in samples")
    f0_min: float = Field(70.0, gt=0, description="Lowest accepted F0 in Hz")
    f0_max: float = Field(600.0, gt=0, description="Highest accepted F0 in Hz")
    yin_threshold: float = Field(0.15, gt=0, lt=1, description="Absolute threshold on the normalized difference")
    n_mels: int = Field(80, ge=1, description="Number of triangular mel filters")
    n_cepstra: int = Field(13, ge=1, description="Number of mel-cepstral coefficients kept")

    @model_validator(mode="after")
    def _check_ranges(self) -> "AnalysisConfig":
        if self.hop_length > self.frame_length:
            raise ValueError("hop_length must not exceed frame_length")
        if self.f0_min >= self.f0_max:
            raise ValueError("f0_min must be below f0_max")
        if self.n_cepstra > self.n_mels:
            raise ValueError("n_cepstra must not exceed n_mels")
        return self

    def check_sample_rate(self, sample_rate: int) -> None:
        """The F0 band must sit below Nyquist for the waveform being analysed."""
        if self.f0_max >= sample_rate / 2:
            raise FeatureExtractionError(
                f"f0_max {self.f0_max} Hz is not below Nyquist for {sample_rate} Hz"
            )


@dataclass
class Waveform:
    """Mono audio in [-1, 1]."""
    samples: np.ndarray
    sample_rate: int

    def __post_init__(self) -> None:
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.samples.ndim != 1 or self.samples.size == 0:
            raise FeatureExtractionError("waveform must be a non-empty 1-D sequence")
        if not np.all(np.isfinite(self.samples)):
            raise FeatureExtractionError("waveform contains non-finite samples")
        if np.max(np.abs(self.samples)) > 1.0:
            raise FeatureExtractionError("waveform samples must lie in [-1, 1]")
        if self.sample_rate not in SUPPORTED_SAMPLE_RATES:
            raise FeatureExtractionError(
                f"unsupported sample rate {self.sample_rate}; expected one of {SUPPORTED_SAMPLE_RATES}"
            )

    @property
    def duration_seconds(self) -> float:
        return self.samples.size / self.sample_rate


@dataclass
class F0Track:
    """Frame-level F0 in Hz; 0 marks an unvoiced frame."""
    values: np.ndarray
    voiced: np.ndarray
    hop_length: int
    sample_rate: int

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=np.float64)
        self.voiced = np.asarray(self.voiced, dtype=bool)
        if self.values.shape != self.voiced.shape or self.values.ndim != 1:
            raise FeatureExtractionError("F0 values and voicing flags must be parallel 1-D sequences")
        if not np.all(np.isfinite(self.values)) or np.any(self.values < 0):
            raise FeatureExtractionError("F0 values must be finite and non-negative")
        if np.any(self.voiced != (self.values > 0)):
            raise FeatureExtractionError("voicing flags must be set exactly where F0 is non-zero")

    def __len__(self) -> int:
        return int(self.values.size)

    def times(self) -> np.ndarray:
        """Frame start times in seconds."""
        return np.arange(len(self), dtype=np.float64) * self.hop_length / self.sample_rate


@dataclass
class EnergyTrack:
    """Frame-level L2 norm of the windowed magnitude spectrum."""
    values: np.ndarray
    hop_length: int
    sample_rate: int

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 1:
            raise FeatureExtractionError("energy track must be 1-D")
        if not np.all(np.isfinite(self.values)) or np.any(self.values < 0):
            raise FeatureExtractionError("energy values must be finite and non-negative")

    def __len__(self) -> int:
        return int(self.values.size)


@dataclass
class MelCepstraTrack:
    """Frame-level mel cepstra; column 0 is the log-energy term."""
    frames: np.ndarray
    hop_length: int
    sample_rate: int

    def __post_init__(self) -> None:
        self.frames = np.asarray(self.frames, dtype=np.float64)
        if self.frames.ndim != 2:
            raise FeatureExtractionError("mel cepstra must be a (frames, n_cepstra) matrix")
        if not np.all(np.isfinite(self.frames)):
            raise FeatureExtractionError("mel cepstra contain non-finite coefficients")

    def __len__(self) -> int:
        return int(self.frames.shape[0])

    @property
    def n_cepstra(self) -> int:
        return int(self.frames.shape[1])
