# adaptor_module/network.py

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

import numpy as np

from mixer_module.enums import EMOTION_ORDER, EmotionLabel

from .models import ELEMENTS, AdaptorError, EmotionCondition, NormalizationStats, Prediction
from .params import AdaptorParams


def emotion_index(label: EmotionLabel) -> int:
    return EMOTION_ORDER.index(EmotionLabel(label))


def positional_encoding(positions: np.ndarray, dim: int) -> np.ndarray:
    """Sinusoidal encoding of phoneme positions, shape (len(positions), dim)."""
    i = np.arange(dim)
    rates = 1.0 / np.power(10000.0, (2 * (i // 2)) / dim)
    angles = positions[:, None].astype(np.float64) * rates[None, :]
    return np.where(i % 2 == 0, np.sin(angles), np.cos(angles))


@dataclass
class Targets:
    """Regression targets in the heads' domain: log(d+1) and z-scored pitch and energy."""
    duration: np.ndarray
    pitch: np.ndarray
    energy: np.ndarray

    def __getitem__(self, element: str) -> np.ndarray:
        return getattr(self, element)

    @classmethod
    def from_prosody(
        cls, pitch: np.ndarray, duration: np.ndarray, energy: np.ndarray, stats: NormalizationStats
    ) -> "Targets":
        return cls(
            duration=np.log1p(np.asarray(duration, dtype=np.float64)),
            pitch=(np.asarray(pitch, dtype=np.float64) - stats.pitch_mean) / stats.pitch_std,
            energy=(np.asarray(energy, dtype=np.float64) - stats.energy_mean) / stats.energy_std,
        )


@dataclass
class GeneratorBatch:
    """
    Utterances flattened to one row per phoneme. `offsets[k]:offsets[k+1]`
    selects utterance k.
    """
    phoneme_ids: np.ndarray
    positions: np.ndarray
    speaker_ids: np.ndarray
    emo_i: np.ndarray
    emo_j: np.ndarray
    lam: np.ndarray
    offsets: np.ndarray
    targets: Optional[Targets] = None

    @property
    def n_rows(self) -> int:
        return int(self.phoneme_ids.size)

    @property
    def n_sequences(self) -> int:
        return int(self.offsets.size - 1)

    def split(self, values: np.ndarray) -> List[np.ndarray]:
        return [values[self.offsets[k]:self.offsets[k + 1]] for k in range(self.n_sequences)]

    @classmethod
    def single(
        cls,
        phoneme_ids: Sequence[int],
        speaker_id: int,
        cond: EmotionCondition,
        targets: Optional[Targets] = None,
    ) -> "GeneratorBatch":
        n = len(phoneme_ids)
        if n == 0:
            raise AdaptorError("cannot encode an empty phoneme sequence")
        return cls(
            phoneme_ids=np.asarray(phoneme_ids, dtype=np.int64),
            positions=np.arange(n, dtype=np.int64),
            speaker_ids=np.full(n, speaker_id, dtype=np.int64),
            emo_i=np.full(n, emotion_index(cond.emo_i), dtype=np.int64),
            emo_j=np.full(n, emotion_index(cond.emo_j), dtype=np.int64),
            lam=np.full(n, cond.lambda_, dtype=np.float64),
            offsets=np.array([0, n], dtype=np.int64),
            targets=targets,
        )

    @classmethod
    def concat(cls, parts: Sequence["GeneratorBatch"]) -> "GeneratorBatch":
        if not parts:
            raise AdaptorError("cannot build an empty batch")
        sizes = np.array([p.n_rows for p in parts], dtype=np.int64)
        targets = None
        if all(p.targets is not None for p in parts):
            targets = Targets(
                **{e: np.concatenate([p.targets[e] for p in parts]) for e in ELEMENTS}
            )
        return cls(
            phoneme_ids=np.concatenate([p.phoneme_ids for p in parts]),
            positions=np.concatenate([p.positions for p in parts]),
            speaker_ids=np.concatenate([p.speaker_ids for p in parts]),
            emo_i=np.concatenate([p.emo_i for p in parts]),
            emo_j=np.concatenate([p.emo_j for p in parts]),
            lam=np.concatenate([p.lam for p in parts]),
            offsets=np.concatenate([[0], np.cumsum(sizes)]).astype(np.int64),
            targets=targets,
        )


@dataclass
class ForwardCache:
    inputs: np.ndarray
    hidden: Dict[str, np.ndarray]
    outputs: Dict[str, np.ndarray]


def _check_ids(params: AdaptorParams, batch: GeneratorBatch) -> None:
    vocab = params["phoneme_table"].shape[0]
    speakers = params["speaker_table"].shape[0]
    if batch.phoneme_ids.min() < 0 or batch.phoneme_ids.max() >= vocab:
        raise AdaptorError(f"phoneme id outside vocabulary of size {vocab}")
    if batch.speaker_ids.min() < 0 or batch.speaker_ids.max() >= speakers:
        raise AdaptorError(f"speaker id outside table of size {speakers}")


def forward_batch(params: AdaptorParams, batch: GeneratorBatch) -> ForwardCache:
    """Per-phoneme input [phoneme + position, speaker, mixed emotion] through each head."""
    _check_ids(params, batch)
    dim = params["phoneme_table"].shape[1]
    emotions = params["emotion_table"]
    lam = batch.lam[:, None]
    mixed_emotion = lam * emotions[batch.emo_i] + (1.0 - lam) * emotions[batch.emo_j]
    inputs = np.concatenate(
        [
            params["phoneme_table"][batch.phoneme_ids] + positional_encoding(batch.positions, dim),
            params["speaker_table"][batch.speaker_ids],
            mixed_emotion,
        ],
        axis=1,
    )
    hidden, outputs = {}, {}
    for head in ELEMENTS:
        hidden[head] = np.tanh(inputs @ params[f"{head}.w1"] + params[f"{head}.b1"])
        outputs[head] = hidden[head] @ params[f"{head}.w2"] + params[f"{head}.b2"][0]
    return ForwardCache(inputs=inputs, hidden=hidden, outputs=outputs)


def backward_batch(
    params: AdaptorParams,
    batch: GeneratorBatch,
    cache: ForwardCache,
    output_grads: Dict[str, np.ndarray],
) -> Dict[str, np.ndarray]:
    """Gradients of every tensor given dL/d(output) per head and row."""
    grads = params.zeros_like()
    dim = params["phoneme_table"].shape[1]
    d_inputs = np.zeros_like(cache.inputs)
    for head in ELEMENTS:
        g = output_grads.get(head)
        if g is None:
            continue
        hidden = cache.hidden[head]
        grads[f"{head}.w2"] = hidden.T @ g
        grads[f"{head}.b2"] = np.array([g.sum()])
        d_pre = np.outer(g, params[f"{head}.w2"]) * (1.0 - hidden ** 2)
        grads[f"{head}.w1"] = cache.inputs.T @ d_pre
        grads[f"{head}.b1"] = d_pre.sum(axis=0)
        d_inputs += d_pre @ params[f"{head}.w1"].T

    np.add.at(grads["phoneme_table"], batch.phoneme_ids, d_inputs[:, :dim])
    np.add.at(grads["speaker_table"], batch.speaker_ids, d_inputs[:, dim:2 * dim])
    d_emotion = d_inputs[:, 2 * dim:]
    np.add.at(grads["emotion_table"], batch.emo_i, batch.lam[:, None] * d_emotion)
    np.add.at(grads["emotion_table"], batch.emo_j, (1.0 - batch.lam)[:, None] * d_emotion)
    return grads


def to_prediction(outputs: Dict[str, np.ndarray], stats: NormalizationStats) -> Prediction:
    return Prediction(
        log_duration=outputs["duration"].copy(),
        pitch=stats.pitch_mean + stats.pitch_std * outputs["pitch"],
        energy=stats.energy_mean + stats.energy_std * outputs["energy"],
    )


def forward(
    params: AdaptorParams,
    phoneme_ids: Sequence[int],
    speaker_id: int,
    cond: EmotionCondition,
) -> Prediction:
    """Deterministic prediction for one utterance."""
    cache = forward_batch(params, GeneratorBatch.single(phoneme_ids, speaker_id, cond))
    return to_prediction(cache.outputs, params.normalization)


def frame_durations(prediction: Prediction) -> np.ndarray:
    """Integer frame counts from the log(d+1) head, rounded and kept non-negative."""
    return np.maximum(np.rint(np.expm1(prediction.log_duration)), 0).astype(np.int64)
