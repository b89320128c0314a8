# adaptor_module/__init__.py

from .models import (
    ELEMENTS,
    AdaptorConfig,
    AdaptorError,
    CheckpointFormatError,
    EmotionCondition,
    LossReport,
    NormalizationStats,
    Prediction,
    TrainingDivergence,
    Vocabulary,
)
from .params import AdaptorParams, DiscriminatorParams, init_params
from .network import GeneratorBatch, Targets, forward, frame_durations, positional_encoding
from .discriminator import discriminator_score, fit_discriminator
from .trainer import (
    TrainingBatch,
    TrainingResult,
    build_vocabulary,
    draw_batch,
    fit_normalization,
    gradient_check,
    loss_adversarial,
    loss_regression,
    predict,
    prepare_categorical,
    prepare_intermediate,
    train,
    train_step,
    write_loss_csv,
)
from .checkpoint import Checkpoint, load_checkpoint, save_checkpoint

__all__ = [
    "ELEMENTS",
    "AdaptorConfig",
    "AdaptorError",
    "CheckpointFormatError",
    "EmotionCondition",
    "LossReport",
    "NormalizationStats",
    "Prediction",
    "TrainingDivergence",
    "Vocabulary",
    "AdaptorParams",
    "DiscriminatorParams",
    "init_params",
    "GeneratorBatch",
    "Targets",
    "forward",
    "frame_durations",
    "positional_encoding",
    "discriminator_score",
    "fit_discriminator",
    "TrainingBatch",
    "TrainingResult",
    "build_vocabulary",
    "draw_batch",
    "fit_normalization",
    "gradient_check",
    "loss_adversarial",
    "loss_regression",
    "predict",
    "prepare_categorical",
    "prepare_intermediate",
    "train",
    "train_step",
    "write_loss_csv",
    "Checkpoint",
    "load_checkpoint",
    "save_checkpoint",
]
