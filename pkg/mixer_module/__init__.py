# mixer_module/__init__.py

from .enums import EmotionLabel, LambdaDistribution, NON_NEUTRAL_EMOTIONS, EMOTION_ORDER
from .models import (
    MixerError,
    NoEligiblePairError,
    PhonemeMismatchError,
    UtteranceRecord,
    CorpusIndex,
    MixedProsody,
    PseudoLabel,
    SkippedPair,
    SkipReport,
    PseudoDataset,
)
from .mixer import (
    sample_pair,
    sample_lambda,
    mix,
    generate_pseudo_dataset,
    intensity_condition,
    build_synthetic_corpus,
    write_pseudo_dataset,
    read_pseudo_dataset,
    write_skip_report,
)

__all__ = [
    "EmotionLabel",
    "LambdaDistribution",
    "NON_NEUTRAL_EMOTIONS",
    "EMOTION_ORDER",
    "MixerError",
    "NoEligiblePairError",
    "PhonemeMismatchError",
    "UtteranceRecord",
    "CorpusIndex",
    "MixedProsody",
    "PseudoLabel",
    "SkippedPair",
    "SkipReport",
    "PseudoDataset",
    "sample_pair",
    "sample_lambda",
    "mix",
    "generate_pseudo_dataset",
    "intensity_condition",
    "build_synthetic_corpus",
    "write_pseudo_dataset",
    "read_pseudo_dataset",
    "write_skip_report",
]
