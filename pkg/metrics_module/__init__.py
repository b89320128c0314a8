# metrics_module/__init__.py

from .models import DtwPath, MetricError, MetricReport, MetricRow
from .metrics import (
    compare_utterances,
    dtw_align,
    f0_rmse,
    intensity_ordering,
    mcd,
    mcd_along_path,
    mel_mae,
    path_cost,
)
from .reports import (
    PitchContour,
    aggregate_by_emotion,
    expand_to_frames,
    export_pitch_contour,
    mean_pitch_by_intensity,
    read_pitch_contour,
    write_emotion_summary,
    write_metric_reports,
)

__all__ = [
    "DtwPath",
    "MetricError",
    "MetricReport",
    "MetricRow",
    "compare_utterances",
    "dtw_align",
    "f0_rmse",
    "intensity_ordering",
    "mcd",
    "mcd_along_path",
    "mel_mae",
    "path_cost",
    "PitchContour",
    "aggregate_by_emotion",
    "expand_to_frames",
    "export_pitch_contour",
    "mean_pitch_by_intensity",
    "read_pitch_contour",
    "write_emotion_summary",
    "write_metric_reports",
]
