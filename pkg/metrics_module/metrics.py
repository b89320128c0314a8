# metrics_module/metrics.py

import logging
from typing import Mapping, Optional

import librosa
import numpy as np

from signal_features_module.models import F0Track, MelCepstraTrack

from .models import DtwPath, MetricError, MetricReport

logger = logging.getLogger(__name__)

MCD_SCALE = 10.0 / np.log(10.0) * np.sqrt(2.0)


def _check_pair(ref: MelCepstraTrack, cand: MelCepstraTrack) -> None:
    if len(ref) == 0 or len(cand) == 0:
        raise MetricError("cannot align an empty mel-cepstra track")
    if ref.n_cepstra != cand.n_cepstra:
        raise MetricError(f"coefficient count mismatch: {ref.n_cepstra} vs {cand.n_cepstra}")
    if ref.n_cepstra < 2:
        raise MetricError("at least two cepstral coefficients are needed; c0 is excluded")


def frame_distances(ref: MelCepstraTrack, cand: MelCepstraTrack) -> np.ndarray:
    """Euclidean distance between every frame pair over coefficients 1..n-1."""
    a, b = ref.frames[:, 1:], cand.frames[:, 1:]
    diff = a[:, None, :] - b[None, :, :]
    return np.sqrt(np.sum(diff ** 2, axis=-1))


def dtw_align(ref: MelCepstraTrack, cand: MelCepstraTrack) -> DtwPath:
    """Minimum summed-distance path with steps (1,1), (0,1), (1,0); the diagonal wins ties."""
    _check_pair(ref, cand)
    _, warping = librosa.sequence.dtw(C=frame_distances(ref, cand), backtrack=True)
    return DtwPath(pairs=[(int(i), int(j)) for i, j in warping[::-1]])


def path_cost(ref: MelCepstraTrack, cand: MelCepstraTrack, path: DtwPath) -> float:
    return float(frame_distances(ref, cand)[path.ref_index, path.cand_index].sum())


def mcd_along_path(ref: MelCepstraTrack, cand: MelCepstraTrack, path: DtwPath) -> float:
    _check_pair(ref, cand)
    if path.end != (len(ref) - 1, len(cand) - 1):
        raise MetricError(f"path ends at {path.end}, tracks end at ({len(ref) - 1}, {len(cand) - 1})")
    diff = ref.frames[path.ref_index, 1:] - cand.frames[path.cand_index, 1:]
    return float(MCD_SCALE * np.mean(np.sqrt(np.sum(diff ** 2, axis=1))))


def mcd(ref: MelCepstraTrack, cand: MelCepstraTrack, path: Optional[DtwPath] = None) -> float:
    """Mel cepstral distortion in dB over the DTW path, c0 excluded."""
    if path is None:
        path = dtw_align(ref, cand)
    return mcd_along_path(ref, cand, path)


def mutually_voiced(ref: F0Track, cand: F0Track, path: DtwPath) -> np.ndarray:
    ref_end, cand_end = path.end
    if ref_end != len(ref) - 1 or cand_end != len(cand) - 1:
        raise MetricError(
            f"F0 tracks ({len(ref)}, {len(cand)} frames) are not frame-parallel with the path ending at {path.end}"
        )
    return ref.voiced[path.ref_index] & cand.voiced[path.cand_index]


def f0_rmse(ref: F0Track, cand: F0Track, path: DtwPath) -> float:
    """RMSE in Hz over path steps where both frames are voiced; 0.0 when there are none."""
    mask = mutually_voiced(ref, cand, path)
    if not mask.any():
        logger.debug("No mutually voiced frames on the DTW path")
        return 0.0
    diff = ref.values[path.ref_index[mask]] - cand.values[path.cand_index[mask]]
    return float(np.sqrt(np.mean(diff ** 2)))


def mel_mae(ref: np.ndarray, cand: np.ndarray) -> float:
    ref, cand = np.asarray(ref, dtype=np.float64), np.asarray(cand, dtype=np.float64)
    if ref.shape != cand.shape:
        raise MetricError(f"shape mismatch: {ref.shape} vs {cand.shape}")
    if ref.size == 0:
        raise MetricError("cannot compare empty mel sequences")
    return float(np.mean(np.abs(ref - cand)))


def compare_utterances(
    ref_cepstra: MelCepstraTrack,
    cand_cepstra: MelCepstraTrack,
    ref_f0: F0Track,
    cand_f0: F0Track,
    ref_mel: np.ndarray,
    cand_mel: np.ndarray,
) -> MetricReport:
    """All objective metrics for one pair, sharing one DTW path."""
    path = dtw_align(ref_cepstra, cand_cepstra)
    if ref_mel.shape[0] != len(ref_cepstra) or cand_mel.shape[0] != len(cand_cepstra):
        raise MetricError("log-mel frames are not parallel with the mel cepstra")
    return MetricReport(
        mcd_db=mcd_along_path(ref_cepstra, cand_cepstra, path),
        f0_rmse_hz=f0_rmse(ref_f0, cand_f0, path),
        mel_mae=mel_mae(ref_mel[path.ref_index], cand_mel[path.cand_index]),
        frames_compared=len(path),
        voiced_frames_compared=int(mutually_voiced(ref_f0, cand_f0, path).sum()),
    )


def intensity_ordering(mean_pitch: Mapping[float, float]) -> float:
    """
    Fraction of adjacent intensity pairs, in increasing intensity order,
    whose mean pitch strictly increases.
    """
    if len(mean_pitch) < 2:
        raise MetricError("intensity ordering needs at least two intensities")
    levels = sorted(mean_pitch)
    increasing = sum(mean_pitch[b] > mean_pitch[a] for a, b in zip(levels, levels[1:]))
    return increasing / (len(levels) - 1)
