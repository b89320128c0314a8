# signal_features_module/__init__.py

from .models import (
    AnalysisConfig,
    Waveform,
    F0Track,
    EnergyTrack,
    MelCepstraTrack,
    FeatureExtractionError,
    WaveformFormatError,
    FrameLengthError,
    SampleRateMismatchError,
    TrackFormatError,
)
from .extractor import (
    load_waveform,
    frame_count,
    estimate_f0,
    compute_energy,
    compute_mel_cepstra,
    log_mel_to_cepstra,
    compute_log_mel,
)
from .codec import (
    write_track_binary,
    read_track_binary,
    write_prosody_text,
    read_prosody_text,
    atomic_write_bytes,
    atomic_write_text,
)

__all__ = [
    "AnalysisConfig",
    "Waveform",
    "F0Track",
    "EnergyTrack",
    "MelCepstraTrack",
    "FeatureExtractionError",
    "WaveformFormatError",
    "FrameLengthError",
    "SampleRateMismatchError",
    "TrackFormatError",
    "load_waveform",
    "frame_count",
    "estimate_f0",
    "compute_energy",
    "compute_mel_cepstra",
    "log_mel_to_cepstra",
    "compute_log_mel",
    "write_track_binary",
    "read_track_binary",
    "write_prosody_text",
    "read_prosody_text",
    "atomic_write_bytes",
    "atomic_write_text",
]
