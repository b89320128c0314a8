# adaptor_module/params.py

from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Tuple

import numpy as np

from mixer_module.enums import EMOTION_ORDER

from .models import ELEMENTS, AdaptorConfig, AdaptorError, NormalizationStats


@dataclass
class ParameterSet:
    """Named float64 tensors in a fixed order."""
    tensors: Dict[str, np.ndarray] = field(default_factory=dict)

    def names(self) -> List[str]:
        return list(self.tensors)

    def items(self) -> Iterator[Tuple[str, np.ndarray]]:
        return iter(self.tensors.items())

    def __getitem__(self, name: str) -> np.ndarray:
        return self.tensors[name]

    def num_parameters(self) -> int:
        return int(sum(t.size for t in self.tensors.values()))

    def zeros_like(self) -> Dict[str, np.ndarray]:
        return {name: np.zeros_like(t) for name, t in self.tensors.items()}

    def _updated(self, grads: Dict[str, np.ndarray], lr: float) -> Dict[str, np.ndarray]:
        missing = set(self.tensors) - set(grads)
        if missing:
            raise AdaptorError(f"gradient missing for {sorted(missing)}")
        return {name: t - lr * grads[name] for name, t in self.tensors.items()}


@dataclass
class AdaptorParams(ParameterSet):
    """Embedding tables and the three predictor heads; `normalization` is not trained."""
    normalization: NormalizationStats = field(default_factory=NormalizationStats)

    def copy(self) -> "AdaptorParams":
        return AdaptorParams(
            tensors={k: v.copy() for k, v in self.tensors.items()},
            normalization=self.normalization.model_copy(),
        )

    def step(self, grads: Dict[str, np.ndarray], lr: float) -> "AdaptorParams":
        return AdaptorParams(tensors=self._updated(grads, lr), normalization=self.normalization)


@dataclass
class DiscriminatorParams(ParameterSet):
    """One windowed scorer per prosody element."""
    window: int = 3

    def copy(self) -> "DiscriminatorParams":
        return DiscriminatorParams(tensors={k: v.copy() for k, v in self.tensors.items()}, window=self.window)

    def step(self, grads: Dict[str, np.ndarray], lr: float) -> "DiscriminatorParams":
        return DiscriminatorParams(tensors=self._updated(grads, lr), window=self.window)


def _uniform(rng: np.random.Generator, fan_in: int, shape: Tuple[int, ...]) -> np.ndarray:
    bound = 1.0 / np.sqrt(fan_in)
    return rng.uniform(-bound, bound, size=shape)


def init_params(cfg: AdaptorConfig) -> Tuple[AdaptorParams, DiscriminatorParams]:
    """Seeded draw of every tensor; the draw order is fixed, so equal seeds give equal parameters."""
    rng = np.random.default_rng(cfg.seed)
    e, h = cfg.embedding_dim, cfg.hidden_dim
    tensors: Dict[str, np.ndarray] = {
        "phoneme_table": _uniform(rng, e, (cfg.vocab_size, e)),
        "speaker_table": _uniform(rng, e, (cfg.n_speakers, e)),
        "emotion_table": _uniform(rng, e, (len(EMOTION_ORDER), e)),
    }
    for head in ELEMENTS:
        tensors[f"{head}.w1"] = _uniform(rng, 3 * e, (3 * e, h))
        tensors[f"{head}.b1"] = _uniform(rng, 3 * e, (h,))
        tensors[f"{head}.w2"] = _uniform(rng, h, (h,))
        tensors[f"{head}.b2"] = _uniform(rng, h, (1,))

    w, hd = cfg.disc_window, cfg.disc_hidden_dim
    disc: Dict[str, np.ndarray] = {}
    for element in ELEMENTS:
        disc[f"{element}.w1"] = _uniform(rng, w, (w, hd))
        disc[f"{element}.b1"] = _uniform(rng, w, (hd,))
        disc[f"{element}.w2"] = _uniform(rng, hd, (hd,))
        disc[f"{element}.b2"] = _uniform(rng, hd, (1,))

    return (
        AdaptorParams(tensors=tensors, normalization=cfg.normalization),
        DiscriminatorParams(tensors=disc, window=w),
    )
