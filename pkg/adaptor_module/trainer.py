# adaptor_module/trainer.py

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from alignment_module.models import PhonemeFeatures
from mixer_module.enums import EmotionLabel
from mixer_module.mixer import intensity_condition
from mixer_module.models import CorpusIndex, PseudoLabel
from signal_features_module.codec import atomic_write_text

from .discriminator import discriminator_gradients, generator_sequence_gradients, least_squares_terms
from .models import (
    ELEMENTS,
    AdaptorConfig,
    AdaptorError,
    EmotionCondition,
    LossReport,
    NormalizationStats,
    Prediction,
    ADVERSARIAL_COLUMNS,
    TrainingDivergence,
    Vocabulary,
)
from .network import GeneratorBatch, Targets, backward_batch, forward, forward_batch, frame_durations
from .params import AdaptorParams, DiscriminatorParams

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

_SUFFIX = {"duration": "d", "pitch": "p", "energy": "e"}
MAX_CHECKED_PARAMETERS = 2000


@dataclass
class TrainingBatch:
    """One step's input: categorical utterances and intermediate pseudo-labels."""
    categorical: GeneratorBatch
    intermediate: GeneratorBatch

    def __post_init__(self) -> None:
        if self.categorical.targets is None or self.intermediate.targets is None:
            raise AdaptorError("training batches need targets on both phases")


GradientFn = Callable[
    [AdaptorParams, DiscriminatorParams, TrainingBatch, AdaptorConfig],
    Tuple[Dict[str, float], Dict[str, np.ndarray]],
]


def _mse(outputs: np.ndarray, targets: np.ndarray) -> Tuple[float, np.ndarray]:
    residual = outputs - targets
    return float(np.mean(residual ** 2)), 2.0 * residual / residual.size


def loss_regression(
    pred: Prediction,
    pitch: Sequence[float],
    duration: Sequence[int],
    energy: Sequence[float],
    stats: NormalizationStats,
) -> Tuple[float, float, float]:
    """(duration, pitch, energy) squared errors in the heads' log / z-scored domains."""
    if len(pred) != len(duration):
        raise AdaptorError(f"prediction has {len(pred)} phonemes, target has {len(duration)}")
    targets = Targets.from_prosody(np.asarray(pitch), np.asarray(duration), np.asarray(energy), stats)
    l_d, _ = _mse(pred.log_duration, targets.duration)
    l_p, _ = _mse((pred.pitch - stats.pitch_mean) / stats.pitch_std, targets.pitch)
    l_e, _ = _mse((pred.energy - stats.energy_mean) / stats.energy_std, targets.energy)
    return l_d, l_p, l_e


def loss_adversarial(
    disc: DiscriminatorParams,
    element: str,
    real: Sequence[np.ndarray],
    fake: Sequence[np.ndarray],
) -> Tuple[float, float]:
    """Least-squares (discriminator, generator) terms for one element."""
    return least_squares_terms(disc, element, real, fake)


def generator_gradients(
    params: AdaptorParams,
    disc: DiscriminatorParams,
    batch: TrainingBatch,
    cfg: AdaptorConfig,
) -> Tuple[Dict[str, float], Dict[str, np.ndarray]]:
    """Generator-side loss terms and the gradient of their sum; the discriminators stay fixed."""
    terms: Dict[str, float] = {}
    cat = forward_batch(params, batch.categorical)
    inter = forward_batch(params, batch.intermediate)
    cat_grads, inter_grads = {}, {}
    for element in ELEMENTS:
        suffix = _SUFFIX[element]
        terms[f"L_{suffix}"], cat_grads[element] = _mse(cat.outputs[element], batch.categorical.targets[element])
        terms[f"L_{suffix}_tilde"], inter_grads[element] = _mse(
            inter.outputs[element], batch.intermediate.targets[element]
        )
        if cfg.use_discriminator:
            fake = batch.intermediate.split(inter.outputs[element])
            terms[f"L_adv_{suffix}"], d_seqs = generator_sequence_gradients(disc, element, fake)
            inter_grads[element] = inter_grads[element] + np.concatenate(d_seqs)

    grads = backward_batch(params, batch.categorical, cat, cat_grads)
    for name, g in backward_batch(params, batch.intermediate, inter, inter_grads).items():
        grads[name] += g
    return terms, grads


def discriminator_losses(
    params: AdaptorParams, disc: DiscriminatorParams, batch: TrainingBatch
) -> Dict[str, float]:
    fake_outputs = forward_batch(params, batch.intermediate).outputs
    losses = {}
    for element in ELEMENTS:
        real = batch.categorical.split(batch.categorical.targets[element])
        fake = batch.intermediate.split(fake_outputs[element])
        losses[f"L_disc_{_SUFFIX[element]}"], _ = loss_adversarial(disc, element, real, fake)
    return losses


def discriminator_step_gradients(
    params: AdaptorParams, disc: DiscriminatorParams, batch: TrainingBatch
) -> Dict[str, np.ndarray]:
    fake_outputs = forward_batch(params, batch.intermediate).outputs
    grads = disc.zeros_like()
    for element in ELEMENTS:
        real = batch.categorical.split(batch.categorical.targets[element])
        fake = batch.intermediate.split(fake_outputs[element])
        discriminator_gradients(disc, element, real, fake, grads)
    return grads


def train_step(
    params: AdaptorParams,
    disc: DiscriminatorParams,
    batch: TrainingBatch,
    cfg: AdaptorConfig,
    step: int = 0,
) -> Tuple[AdaptorParams, DiscriminatorParams, LossReport]:
    """
    One discriminator update with the generator's outputs held fixed, then
    one generator update against the updated discriminators. The report
    holds the losses before either update.
    """
    terms, grads = generator_gradients(params, disc, batch, cfg)
    if cfg.use_discriminator:
        terms.update(discriminator_losses(params, disc, batch))
    report = LossReport(step=step, **terms)
    bad = report.first_non_finite()
    if bad is not None:
        raise TrainingDivergence(step, bad, getattr(report, bad))

    if cfg.use_discriminator:
        disc = disc.step(discriminator_step_gradients(params, disc, batch), cfg.discriminator_lr)
        _, grads = generator_gradients(params, disc, batch, cfg)
    return params.step(grads, cfg.generator_lr), disc, report


def total_generator_loss(
    params: AdaptorParams, disc: DiscriminatorParams, batch: TrainingBatch, cfg: AdaptorConfig
) -> float:
    terms, _ = generator_gradients(params, disc, batch, cfg)
    return float(sum(terms.values()))


def total_discriminator_loss(params: AdaptorParams, disc: DiscriminatorParams, batch: TrainingBatch) -> float:
    return float(sum(discriminator_losses(params, disc, batch).values()))


def _relative_error(analytic: float, numeric: float) -> float:
    if not (np.isfinite(analytic) and np.isfinite(numeric)):
        raise AdaptorError(f"non-finite gradient during check (analytic {analytic}, numeric {numeric})")
    return abs(analytic - numeric) / max(1e-8, abs(analytic) + abs(numeric))


def gradient_check(
    params: AdaptorParams,
    disc: DiscriminatorParams,
    batch: TrainingBatch,
    cfg: AdaptorConfig,
    epsilon: float = 1e-5,
    grad_fn: GradientFn = generator_gradients,
) -> float:
    """
    Largest relative error between handwritten and central-difference
    gradients over every scalar parameter. Generator tensors are checked
    against the generator objective with the discriminators fixed,
    discriminator tensors against the discriminator objective.
    """
    n_params = params.num_parameters() + (disc.num_parameters() if cfg.use_discriminator else 0)
    if n_params > MAX_CHECKED_PARAMETERS:
        raise AdaptorError(
            f"gradient check covers at most {MAX_CHECKED_PARAMETERS} parameters, configuration has {n_params}"
        )

    worst, worst_name = 0.0, None
    _, analytic = grad_fn(params, disc, batch, cfg)
    for name, tensor in params.items():
        flat = tensor.reshape(-1)
        for k in range(flat.size):
            original = flat[k]
            flat[k] = original + epsilon
            upper = total_generator_loss(params, disc, batch, cfg)
            flat[k] = original - epsilon
            lower = total_generator_loss(params, disc, batch, cfg)
            flat[k] = original
            error = _relative_error(float(analytic[name].reshape(-1)[k]), (upper - lower) / (2 * epsilon))
            if error > worst:
                worst, worst_name = error, f"{name}[{k}]"

    if cfg.use_discriminator:
        analytic_disc = discriminator_step_gradients(params, disc, batch)
        for name, tensor in disc.items():
            flat = tensor.reshape(-1)
            for k in range(flat.size):
                original = flat[k]
                flat[k] = original + epsilon
                upper = total_discriminator_loss(params, disc, batch)
                flat[k] = original - epsilon
                lower = total_discriminator_loss(params, disc, batch)
                flat[k] = original
                error = _relative_error(float(analytic_disc[name].reshape(-1)[k]), (upper - lower) / (2 * epsilon))
                if error > worst:
                    worst, worst_name = error, f"disc.{name}[{k}]"

    logger.info(f"Gradient check over {n_params} parameters: max relative error {worst:.3e} at {worst_name}")
    return worst


def build_vocabulary(index: CorpusIndex) -> Vocabulary:
    phonemes = sorted({p for record in index.records.values() for p in record.features.phonemes})
    return Vocabulary(phonemes=phonemes, speakers=index.speakers())


def fit_normalization(index: CorpusIndex) -> NormalizationStats:
    """Mean and standard deviation of phoneme pitch and energy over the categorical corpus."""
    pitch = np.concatenate([np.asarray(r.features.pitch) for r in index.records.values()])
    energy = np.concatenate([np.asarray(r.features.energy) for r in index.records.values()])
    pitch_std, energy_std = float(pitch.std()), float(energy.std())
    return NormalizationStats(
        pitch_mean=float(pitch.mean()),
        pitch_std=pitch_std if pitch_std > 0 else 1.0,
        energy_mean=float(energy.mean()),
        energy_std=energy_std if energy_std > 0 else 1.0,
    )


def prepare_categorical(index: CorpusIndex, vocab: Vocabulary, stats: NormalizationStats) -> List[GeneratorBatch]:
    """Categorical utterances conditioned on (emotion, neutral, 1.0)."""
    encoded = []
    for record in index.sorted_records():
        pitch, duration, energy = record.features.arrays()
        encoded.append(GeneratorBatch.single(
            vocab.phoneme_ids(record.features.phonemes),
            vocab.speaker_id(record.speaker),
            EmotionCondition.categorical(record.emotion),
            Targets.from_prosody(pitch, duration, energy, stats),
        ))
    return encoded


def prepare_intermediate(
    labels: Sequence[PseudoLabel], index: CorpusIndex, vocab: Vocabulary, stats: NormalizationStats
) -> List[GeneratorBatch]:
    encoded = []
    for label in labels:
        phonemes = index.get(label.speaker, label.sentence, EmotionLabel.NEUTRAL).features.phonemes
        pitch, duration, energy = label.arrays()
        encoded.append(GeneratorBatch.single(
            vocab.phoneme_ids(phonemes),
            vocab.speaker_id(label.speaker),
            EmotionCondition(emo_i=label.emo_i, emo_j=label.emo_j, lambda_=label.lambda_),
            Targets.from_prosody(pitch, duration, energy, stats),
        ))
    return encoded


def _draw(pool: Sequence[GeneratorBatch], size: int, rng: np.random.Generator) -> GeneratorBatch:
    if size >= len(pool):
        return GeneratorBatch.concat(pool)
    picked = np.sort(rng.choice(len(pool), size=size, replace=False))
    return GeneratorBatch.concat([pool[int(k)] for k in picked])


def draw_batch(
    categorical: Sequence[GeneratorBatch],
    intermediate: Sequence[GeneratorBatch],
    cfg: AdaptorConfig,
    step: int,
) -> TrainingBatch:
    """Batch for `step`; the draw depends only on (seed, step)."""
    rng = np.random.default_rng([cfg.seed, step])
    return TrainingBatch(
        categorical=_draw(categorical, cfg.batch_size, rng),
        intermediate=_draw(intermediate, cfg.batch_size, rng),
    )


@dataclass
class TrainingResult:
    params: AdaptorParams
    disc: DiscriminatorParams
    reports: List[LossReport] = field(default_factory=list)


def train(
    params: AdaptorParams,
    disc: DiscriminatorParams,
    categorical: Sequence[GeneratorBatch],
    intermediate: Sequence[GeneratorBatch],
    cfg: AdaptorConfig,
    steps: int,
    start_step: int = 0,
    log_every: int = 100,
    on_report: Optional[Callable[[LossReport], None]] = None,
) -> TrainingResult:
    if not categorical or not intermediate:
        raise AdaptorError("training needs categorical utterances and pseudo-labels")
    result = TrainingResult(params=params, disc=disc)
    for step in range(start_step, start_step + steps):
        batch = draw_batch(categorical, intermediate, cfg, step)
        result.params, result.disc, report = train_step(result.params, result.disc, batch, cfg, step)
        result.reports.append(report)
        logger.debug(json.dumps(report.row(cfg.use_discriminator)))
        if log_every and (step % log_every == 0 or step == start_step + steps - 1):
            logger.info(
                f"step {step}: L_total={report.L_total:.5f} "
                f"L_categorical={report.L_categorical:.5f} L_intermediate={report.L_intermediate:.5f}"
            )
        if on_report is not None:
            on_report(report)
    return result


def write_loss_csv(reports: Sequence[LossReport], path: PathLike, include_adversarial: bool = True) -> None:
    """One row per step; adversarial columns are dropped for the no-discriminator ablation."""
    columns = [c for c in LossReport.model_fields if include_adversarial or c not in ADVERSARIAL_COLUMNS]
    frame = pd.DataFrame([r.row(include_adversarial) for r in reports], columns=columns)
    atomic_write_text(path, frame.to_csv(index=False, float_format="%.17g"))


def predict(
    params: AdaptorParams,
    vocab: Vocabulary,
    phonemes: Sequence[str],
    speaker: str,
    emotion: EmotionLabel,
    intensity: float,
) -> PhonemeFeatures:
    """
    Prosody for `phonemes` spoken by `speaker` at `intensity` of `emotion`,
    with integer frame durations and de-normalized pitch and energy.
    """
    emo_i, emo_j, lam = intensity_condition(emotion, intensity)
    cond = EmotionCondition(emo_i=emo_i, emo_j=emo_j, lambda_=lam)
    prediction = forward(params, vocab.phoneme_ids(list(phonemes)), vocab.speaker_id(speaker), cond)
    return PhonemeFeatures(
        phonemes=list(phonemes),
        pitch=np.maximum(prediction.pitch, 0.0).tolist(),
        duration=frame_durations(prediction).tolist(),
        energy=np.maximum(prediction.energy, 0.0).tolist(),
    )
