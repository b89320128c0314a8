# signal_features_module/extractor.py

import logging
from functools import lru_cache
from pathlib import Path
from typing import Union

import librosa
import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.fft import dct, next_fast_len
from scipy.io import wavfile
from scipy.signal import get_window

from .models import (
    AnalysisConfig,
    EnergyTrack,
    F0Track,
    FeatureExtractionError,
    FrameLengthError,
    MelCepstraTrack,
    SUPPORTED_SAMPLE_RATES,
    Waveform,
    WaveformFormatError,
)

logger = logging.getLogger(__name__)

LOG_FLOOR = 1e-10


def load_waveform(path: Union[str, Path]) -> Waveform:
    """
    Decode a RIFF/WAVE file into a mono Waveform.

    Integer PCM is scaled by the magnitude of its most negative value
    (128, 32768 or 2**31; scipy left-justifies 24-bit data into int32).
    Multi-channel audio is averaged per sample.
    """
    path = str(path)
    try:
        sample_rate, data = wavfile.read(path)
    except FileNotFoundError:
        logger.error(f"Waveform file not found: {path}")
        raise WaveformFormatError(path, "file not found")
    except (ValueError, OSError) as e:
        logger.error(f"Could not decode {path}: {e}")
        raise WaveformFormatError(path, f"unreadable or unsupported codec ({e})") from e

    if sample_rate not in SUPPORTED_SAMPLE_RATES:
        raise WaveformFormatError(path, f"unsupported sample rate {sample_rate}")

    if data.dtype == np.uint8:
        samples = (data.astype(np.float64) - 128.0) / 128.0
    elif data.dtype == np.int16:
        samples = data.astype(np.float64) / 32768.0
    elif data.dtype == np.int32:
        samples = data.astype(np.float64) / 2147483648.0
    elif data.dtype in (np.float32, np.float64):
        samples = data.astype(np.float64)
        if not np.all(np.isfinite(samples)):
            raise WaveformFormatError(path, "float samples contain NaN or infinity")
        if np.max(np.abs(samples), initial=0.0) > 1.0:
            logger.warning(f"{path}: float samples exceed [-1, 1], clipping")
            samples = np.clip(samples, -1.0, 1.0)
    else:
        raise WaveformFormatError(path, f"unsupported sample type {data.dtype}")

    if samples.ndim == 2:
        samples = samples.mean(axis=1)
    if samples.size == 0:
        raise WaveformFormatError(path, "no samples")

    waveform = Waveform(samples=samples, sample_rate=int(sample_rate))
    logger.debug(f"Loaded {path}: {waveform.duration_seconds:.3f} s at {sample_rate} Hz")
    return waveform


def frame_count(n_samples: int, cfg: AnalysisConfig) -> int:
    """Number of full frames; identical for every extractor."""
    if n_samples < cfg.frame_length:
        raise FrameLengthError(n_samples, cfg.frame_length)
    return (n_samples - cfg.frame_length) // cfg.hop_length + 1


def _frames(w: Waveform, cfg: AnalysisConfig) -> np.ndarray:
    n = frame_count(w.samples.size, cfg)
    view = sliding_window_view(w.samples, cfg.frame_length)[::cfg.hop_length]
    return np.ascontiguousarray(view[:n])


def _magnitude_spectrum(frames: np.ndarray) -> np.ndarray:
    window = get_window("hann", frames.shape[1])
    return np.abs(np.fft.rfft(frames * window, axis=1))


def _cumulative_mean_normalized_difference(frames: np.ndarray, tau_max: int) -> np.ndarray:
    """
    YIN difference function normalized by its running mean, per frame.

    The difference d(tau) integrates over the first W - tau_max samples so
    every lag stays inside the frame. Cross terms come from one FFT
    correlation per frame.
    """
    n_frames, width = frames.shape
    window = width - tau_max
    taus = np.arange(tau_max + 1)

    energy = np.concatenate(
        (np.zeros((n_frames, 1)), np.cumsum(frames * frames, axis=1)), axis=1
    )
    head_energy = energy[:, window][:, None]
    lag_energy = energy[:, taus + window] - energy[:, taus]

    size = next_fast_len(width + window, real=True)
    head = np.fft.rfft(frames[:, :window], size, axis=1)
    full = np.fft.rfft(frames, size, axis=1)
    correlation = np.fft.irfft(np.conj(head) * full, size, axis=1)[:, :tau_max + 1]

    diff = np.maximum(head_energy + lag_energy - 2.0 * correlation, 0.0)
    diff[:, 0] = 0.0

    running = np.cumsum(diff[:, 1:], axis=1)
    cmnd = np.ones_like(diff)
    with np.errstate(divide="ignore", invalid="ignore"):
        normalized = diff[:, 1:] * taus[1:] / running
    cmnd[:, 1:] = np.where(running > 0, normalized, 1.0)
    return cmnd


def _pick_period(cmnd: np.ndarray, tau_min: int, tau_max: int, threshold: float) -> float:
    """First dip under the threshold, refined to its local minimum; 0 if none."""
    below = np.nonzero(cmnd[tau_min:tau_max + 1] < threshold)[0]
    if below.size == 0:
        return 0.0
    tau = tau_min + int(below[0])
    while tau < tau_max and cmnd[tau + 1] < cmnd[tau]:
        tau += 1

    shift = 0.0
    if 1 <= tau < tau_max:
        left, centre, right = cmnd[tau - 1], cmnd[tau], cmnd[tau + 1]
        curvature = left - 2.0 * centre + right
        if curvature > 0:
            shift = 0.5 * (left - right) / curvature
    return tau + shift


def estimate_f0(w: Waveform, cfg: AnalysisConfig) -> F0Track:
    """YIN F0 track, one value per hop-aligned frame (0 where unvoiced)."""
    cfg.check_sample_rate(w.sample_rate)
    frames = _frames(w, cfg)

    tau_min = max(1, int(np.floor(w.sample_rate / cfg.f0_max)))
    tau_max = min(int(np.ceil(w.sample_rate / cfg.f0_min)), cfg.frame_length // 2)
    if tau_max <= tau_min:
        raise FeatureExtractionError(
            f"frame_length {cfg.frame_length} too short for f0_min {cfg.f0_min} Hz"
        )

    cmnd = _cumulative_mean_normalized_difference(frames, tau_max)
    values = np.zeros(frames.shape[0])
    for i in range(frames.shape[0]):
        period = _pick_period(cmnd[i], tau_min, tau_max, cfg.yin_threshold)
        if period <= 0:
            continue
        f0 = w.sample_rate / period
        if cfg.f0_min <= f0 <= cfg.f0_max:
            values[i] = f0

    voiced = values > 0
    logger.debug(f"F0: {voiced.sum()}/{values.size} voiced frames")
    return F0Track(values=values, voiced=voiced, hop_length=cfg.hop_length, sample_rate=w.sample_rate)


def compute_energy(w: Waveform, cfg: AnalysisConfig) -> EnergyTrack:
    """Per-frame L2 norm of the Hann-windowed magnitude spectrum."""
    spectrum = _magnitude_spectrum(_frames(w, cfg))
    return EnergyTrack(
        values=np.linalg.norm(spectrum, axis=1),
        hop_length=cfg.hop_length,
        sample_rate=w.sample_rate,
    )


@lru_cache(maxsize=16)
def _mel_filterbank(sample_rate: int, n_fft: int, n_mels: int) -> np.ndarray:
    # unnormalized triangles on the HTK mel scale
    bank = librosa.filters.mel(
        sr=sample_rate, n_fft=n_fft, n_mels=n_mels,
        fmin=0.0, fmax=sample_rate / 2.0, htk=True, norm=None,
    ).astype(np.float64)
    bank.setflags(write=False)
    return bank


def log_mel_to_cepstra(mel_energies: np.ndarray, n_cepstra: int) -> np.ndarray:
    """Floored natural log, orthonormal DCT-II, truncated to n_cepstra."""
    log_mel = np.log(np.maximum(np.asarray(mel_energies, dtype=np.float64), LOG_FLOOR))
    return dct(log_mel, type=2, norm="ortho", axis=-1)[..., :n_cepstra]


def compute_mel_cepstra(w: Waveform, cfg: AnalysisConfig) -> MelCepstraTrack:
    spectrum = _magnitude_spectrum(_frames(w, cfg))
    bank = _mel_filterbank(w.sample_rate, cfg.frame_length, cfg.n_mels)
    cepstra = log_mel_to_cepstra(spectrum @ bank.T, cfg.n_cepstra)
    return MelCepstraTrack(frames=cepstra, hop_length=cfg.hop_length, sample_rate=w.sample_rate)


def compute_log_mel(w: Waveform, cfg: AnalysisConfig) -> np.ndarray:
    """(frames, n_mels) floored natural-log mel energies."""
    spectrum = _magnitude_spectrum(_frames(w, cfg))
    bank = _mel_filterbank(w.sample_rate, cfg.frame_length, cfg.n_mels)
    return np.log(np.maximum(spectrum @ bank.T, LOG_FLOOR))
