# metrics_module/reports.py

import logging
from pathlib import Path
from typing import Dict, List, Mapping, NamedTuple, Sequence, Union

import numpy as np
import pandas as pd

from alignment_module.models import PhonemeFeatures
from signal_features_module.codec import atomic_write_text
from signal_features_module.models import F0Track

from .models import MetricError, MetricRow

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

CONTOUR_COLUMNS = ["label", "time_seconds", "f0_hz", "voiced"]
SUMMARY_COLUMNS = ["utterance_id", "emotion", "lambda", "status", "mcd_db", "f0_rmse_hz", "mel_mae"]
METRIC_COLUMNS = ["mcd_db", "f0_rmse_hz", "mel_mae"]


class PitchContour(NamedTuple):
    times: np.ndarray
    f0: np.ndarray
    voiced: np.ndarray


def export_pitch_contour(tracks: Mapping[str, F0Track], out: PathLike) -> None:
    """Long-format CSV (label, time_seconds, f0_hz, voiced), one row per frame."""
    if not tracks:
        raise MetricError("no pitch tracks to export")
    frames = [
        pd.DataFrame({
            "label": label,
            "time_seconds": track.times(),
            "f0_hz": track.values,
            "voiced": track.voiced.astype(int),
        })
        for label, track in tracks.items()
    ]
    table = pd.concat(frames, ignore_index=True)[CONTOUR_COLUMNS]
    try:
        atomic_write_text(out, table.to_csv(index=False, float_format="%.17g"))
    except OSError as e:
        logger.error(f"Could not write pitch contours to {out}: {e}")
        raise MetricError(f"cannot write {out}: {e}") from e


def read_pitch_contour(path: PathLike) -> Dict[str, PitchContour]:
    table = pd.read_csv(path, dtype={"label": str})
    missing = set(CONTOUR_COLUMNS) - set(table.columns)
    if missing:
        raise MetricError(f"{path}: missing columns {sorted(missing)}")
    return {
        label: PitchContour(
            times=group["time_seconds"].to_numpy(dtype=np.float64),
            f0=group["f0_hz"].to_numpy(dtype=np.float64),
            voiced=group["voiced"].to_numpy(dtype=int).astype(bool),
        )
        for label, group in table.groupby("label", sort=False)
    }


def expand_to_frames(features: PhonemeFeatures, hop_length: int, sample_rate: int) -> F0Track:
    """Phoneme pitch held for its duration; zero pitch reads as unvoiced."""
    values = np.repeat(np.asarray(features.pitch, dtype=np.float64), np.asarray(features.duration))
    return F0Track(values=values, voiced=values > 0, hop_length=hop_length, sample_rate=sample_rate)


def rows_frame(rows: Sequence[MetricRow]) -> pd.DataFrame:
    return pd.DataFrame(
        [r.model_dump(mode="json", by_alias=True) for r in rows],
        columns=list(MetricRow.model_json_schema(by_alias=True)["properties"]),
    )


def write_metric_reports(rows: Sequence[MetricRow], jsonl_path: PathLike, csv_path: PathLike) -> None:
    """Per-utterance JSON lines plus the summary CSV."""
    atomic_write_text(jsonl_path, "".join(r.model_dump_json(by_alias=True) + "\n" for r in rows))
    table = rows_frame(rows)[SUMMARY_COLUMNS]
    atomic_write_text(csv_path, table.to_csv(index=False, float_format="%.17g"))


def aggregate_by_emotion(rows: Sequence[MetricRow]) -> pd.DataFrame:
    """Mean metrics per emotion over rows that were evaluated."""
    table = rows_frame(rows)
    table = table[table["status"] == "ok"]
    if table.empty:
        return pd.DataFrame(columns=["emotion", "n_utterances"] + METRIC_COLUMNS)
    table = table.astype({c: float for c in METRIC_COLUMNS})
    grouped = table.groupby("emotion", sort=True)
    summary = grouped[METRIC_COLUMNS].mean()
    summary.insert(0, "n_utterances", grouped.size())
    return summary.reset_index()


def write_emotion_summary(rows: Sequence[MetricRow], path: PathLike) -> pd.DataFrame:
    summary = aggregate_by_emotion(rows)
    atomic_write_text(path, summary.to_csv(index=False, float_format="%.17g"))
    return summary


def mean_pitch_by_intensity(contours: Mapping[float, List[PhonemeFeatures]]) -> Dict[float, float]:
    """Average phoneme pitch per intensity, pooled over utterances."""
    return {
        intensity: float(np.mean(np.concatenate([np.asarray(f.pitch) for f in features])))
        for intensity, features in contours.items()
    }
