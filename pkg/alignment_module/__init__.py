# alignment_module/__init__.py

from .models import AlignmentError, PhonemeInterval, PhonemeAlignment, PhonemeFeatures
from .aligner import (
    parse_alignment,
    serialize_alignment,
    read_alignment,
    read_textgrid_tier,
    durations_in_frames,
    continuous_pitch,
    phoneme_average,
    write_phoneme_features,
    read_phoneme_features,
)

__all__ = [
    "AlignmentError",
    "PhonemeInterval",
    "PhonemeAlignment",
    "PhonemeFeatures",
    "parse_alignment",
    "serialize_alignment",
    "read_alignment",
    "read_textgrid_tier",
    "durations_in_frames",
    "continuous_pitch",
    "phoneme_average",
    "write_phoneme_features",
    "read_phoneme_features",
]
