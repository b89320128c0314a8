# mixer_module/enums.py

from enum import Enum


class EmotionLabel(str, Enum):
    """The five categorical emotions of the parallel corpus."""
    NEUTRAL = "neutral"
    HAPPY = "happy"
    SAD = "sad"
    ANGRY = "angry"
    SURPRISE = "surprise"


NON_NEUTRAL_EMOTIONS = (
    EmotionLabel.HAPPY,
    EmotionLabel.SAD,
    EmotionLabel.ANGRY,
    EmotionLabel.SURPRISE,
)

# index order of the emotion look-up table
EMOTION_ORDER = (EmotionLabel.NEUTRAL,) + NON_NEUTRAL_EMOTIONS


class LambdaDistribution(str, Enum):
    """Interpolation-weight distributions compared in the ablation runs."""
    BETA = "beta"          # Beta(0.5, 0.5)
    UNIFORM = "uniform"    # U(0, 1)
    DISCRETE = "discrete"  # {0, 0.5, 1.0}, equiprobable
