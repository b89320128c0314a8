# tests/conftest.py

from pathlib import Path

import numpy as np
import pytest
from scipy.io import wavfile

from adaptor_module.models import AdaptorConfig
from adaptor_module.network import GeneratorBatch
from adaptor_module.trainer import (
    TrainingBatch,
    build_vocabulary,
    fit_normalization,
    prepare_categorical,
    prepare_intermediate,
)
from mixer_module.enums import LambdaDistribution
from mixer_module.mixer import build_synthetic_corpus, generate_pseudo_dataset
from signal_features_module.models import AnalysisConfig, Waveform

SAMPLE_RATE = 22050


def sine(freq: float, seconds: float = 1.0, sample_rate: int = SAMPLE_RATE, amplitude: float = 0.5) -> Waveform:
    t = np.arange(int(seconds * sample_rate)) / sample_rate
    return Waveform(samples=amplitude * np.sin(2 * np.pi * freq * t), sample_rate=sample_rate)


def write_wav(path: Path, samples: np.ndarray, sample_rate: int = SAMPLE_RATE) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    wavfile.write(path, sample_rate, samples)
    return path


@pytest.fixture
def analysis_cfg() -> AnalysisConfig:
    return AnalysisConfig()


@pytest.fixture
def toy_index():
    return build_synthetic_corpus(n_speakers=2, n_sentences=3, seed=0)


@pytest.fixture
def tiny_batch(toy_index):
    """Small categorical + intermediate batch and a config well under the gradient-check limit."""
    vocab = build_vocabulary(toy_index)
    stats = fit_normalization(toy_index)
    labels = generate_pseudo_dataset(toy_index, 6, LambdaDistribution.BETA, seed=3).labels
    cfg = AdaptorConfig(
        embedding_dim=3, hidden_dim=4, vocab_size=len(vocab.phonemes), n_speakers=len(vocab.speakers),
        disc_hidden_dim=3, disc_window=2, seed=7, normalization=stats,
    )
    categorical = prepare_categorical(toy_index, vocab, stats)[:4]
    intermediate = prepare_intermediate(labels, toy_index, vocab, stats)[:4]
    batch = TrainingBatch(
        categorical=GeneratorBatch.concat(categorical),
        intermediate=GeneratorBatch.concat(intermediate),
    )
    return cfg, batch
