# tests/test_adaptor.py

import inspect

import numpy as np
import pandas as pd
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from adaptor_module.checkpoint import (
    Checkpoint,
    decode_checkpoint,
    encode_checkpoint,
    load_checkpoint,
    save_checkpoint,
)
from adaptor_module.discriminator import (
    discriminator_score,
    fit_discriminator,
    least_squares_terms,
    window_indices,
)
from adaptor_module.models import (
    ADVERSARIAL_COLUMNS,
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
from adaptor_module.network import GeneratorBatch, Targets, forward, frame_durations
from adaptor_module.params import AdaptorParams, DiscriminatorParams, init_params
from adaptor_module.trainer import (
    TrainingBatch,
    build_vocabulary,
    draw_batch,
    fit_normalization,
    generator_gradients,
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
from mixer_module.enums import EmotionLabel, LambdaDistribution
from mixer_module.mixer import build_synthetic_corpus, generate_pseudo_dataset

HAPPY = EmotionLabel.HAPPY
NEUTRAL = EmotionLabel.NEUTRAL


def _small_config(**overrides) -> AdaptorConfig:
    values = dict(vocab_size=5, n_speakers=3, seed=1)
    values.update(overrides)
    return AdaptorConfig(**values)


def _zeroed(params: AdaptorParams) -> AdaptorParams:
    return AdaptorParams(tensors=params.zeros_like(), normalization=params.normalization)


def _constant_disc(value: float, window: int = 3) -> DiscriminatorParams:
    _, disc = init_params(_small_config(disc_window=window))
    tensors = disc.zeros_like()
    for element in ("duration", "pitch", "energy"):
        tensors[f"{element}.b2"] = np.array([value])
    return DiscriminatorParams(tensors=tensors, window=window)


class TestInitParams:
    def test_same_seed_same_parameters(self):
        first, first_disc = init_params(_small_config())
        second, second_disc = init_params(_small_config())
        for name, tensor in first.items():
            assert_array_equal(tensor, second[name])
        for name, tensor in first_disc.items():
            assert_array_equal(tensor, second_disc[name])

    def test_different_seed_differs(self):
        first, _ = init_params(_small_config(seed=1))
        second, _ = init_params(_small_config(seed=2))
        assert not np.array_equal(first["phoneme_table"], second["phoneme_table"])

    def test_shapes(self):
        params, disc = init_params(AdaptorConfig(vocab_size=40, n_speakers=10, embedding_dim=8, hidden_dim=16))
        assert params["phoneme_table"].shape == (40, 8)
        assert params["speaker_table"].shape == (10, 8)
        assert params["emotion_table"].shape == (5, 8)
        assert params["pitch.w1"].shape == (24, 16)
        assert disc["energy.w1"].shape == (3, 8)

    def test_initializer_support(self):
        cfg = AdaptorConfig(vocab_size=40, n_speakers=10)
        params, disc = init_params(cfg)
        e, h = cfg.embedding_dim, cfg.hidden_dim
        fan_in = {"phoneme_table": e, "speaker_table": e, "emotion_table": e}
        for head in ("duration", "pitch", "energy"):
            fan_in.update({f"{head}.w1": 3 * e, f"{head}.b1": 3 * e, f"{head}.w2": h, f"{head}.b2": h})
        for name, tensor in params.items():
            assert np.all(np.abs(tensor) <= 1.0 / np.sqrt(fan_in[name]))
        for name, tensor in disc.items():
            bound = cfg.disc_window if name.endswith(("w1", "b1")) else cfg.disc_hidden_dim
            assert np.all(np.abs(tensor) <= 1.0 / np.sqrt(bound))


class TestForward:
    def test_zero_weights_give_bias(self):
        params, _ = init_params(_small_config())
        zero = _zeroed(params)
        zero.tensors["duration.b2"] = np.array([0.7])
        zero.tensors["pitch.b2"] = np.array([-0.2])
        zero.tensors["energy.b2"] = np.array([1.5])
        prediction = forward(zero, [0, 1, 2, 3], 1, EmotionCondition.categorical(HAPPY))
        assert_array_equal(prediction.log_duration, np.full(4, 0.7))
        assert_array_equal(prediction.pitch, np.full(4, -0.2))
        assert_array_equal(prediction.energy, np.full(4, 1.5))

    def test_endpoint_condition_is_pure_emotion(self):
        params, _ = init_params(_small_config())
        phonemes = [4, 0, 2, 2, 1]
        mixed = forward(params, phonemes, 0, EmotionCondition(emo_i=HAPPY, emo_j=NEUTRAL, lambda_=1.0))
        pure = forward(params, phonemes, 0, EmotionCondition(emo_i=HAPPY, emo_j=HAPPY, lambda_=1.0))
        other = forward(params, phonemes, 0, EmotionCondition(emo_i=HAPPY, emo_j=EmotionLabel.SAD, lambda_=1.0))
        for field in ("log_duration", "pitch", "energy"):
            assert_array_equal(getattr(mixed, field), getattr(pure, field))
            assert_array_equal(getattr(mixed, field), getattr(other, field))

    def test_speaker_relabeling(self):
        params, _ = init_params(_small_config())
        perm = np.array([2, 0, 1])
        relabeled = params.copy()
        relabeled.tensors["speaker_table"] = params["speaker_table"][perm]
        new_id = np.argsort(perm)
        cond = EmotionCondition(emo_i=EmotionLabel.ANGRY, emo_j=NEUTRAL, lambda_=0.4)
        for speaker in range(3):
            original = forward(params, [1, 2, 3], speaker, cond)
            moved = forward(relabeled, [1, 2, 3], int(new_id[speaker]), cond)
            assert_array_equal(original.pitch, moved.pitch)
            assert_array_equal(original.log_duration, moved.log_duration)

    def test_unknown_phoneme_id(self):
        params, _ = init_params(_small_config())
        with pytest.raises(AdaptorError):
            forward(params, [0, 5], 0, EmotionCondition.categorical(HAPPY))

    def test_unknown_speaker_id(self):
        params, _ = init_params(_small_config())
        with pytest.raises(AdaptorError):
            forward(params, [0, 1], 3, EmotionCondition.categorical(HAPPY))

    def test_frame_durations(self):
        prediction = Prediction(
            log_duration=np.array([np.log1p(2.4), np.log1p(3.6), -5.0, 0.0]),
            pitch=np.zeros(4), energy=np.zeros(4),
        )
        assert frame_durations(prediction).tolist() == [2, 4, 0, 0]


class TestLossRegression:
    def test_exact_duration_fit(self):
        durations = [3, 0, 7]
        prediction = Prediction(log_duration=np.log1p(durations), pitch=np.zeros(3), energy=np.zeros(3))
        l_d, _, _ = loss_regression(prediction, [0.0] * 3, durations, [0.0] * 3, NormalizationStats())
        assert l_d == 0.0

    def test_pitch_hand_value(self):
        prediction = Prediction(log_duration=np.zeros(2), pitch=np.array([110.0, 190.0]), energy=np.zeros(2))
        _, l_p, _ = loss_regression(prediction, [100.0, 200.0], [0, 0], [0.0, 0.0], NormalizationStats())
        assert l_p == pytest.approx(100.0)

    def test_zero_case(self):
        prediction = Prediction(log_duration=np.zeros(2), pitch=np.zeros(2), energy=np.zeros(2))
        assert loss_regression(prediction, [0.0, 0.0], [0, 0], [0.0, 0.0], NormalizationStats()) == (0.0, 0.0, 0.0)

    def test_length_mismatch(self):
        prediction = Prediction(log_duration=np.zeros(2), pitch=np.zeros(2), energy=np.zeros(2))
        with pytest.raises(AdaptorError):
            loss_regression(prediction, [0.0], [0], [0.0], NormalizationStats())

    def test_normalized_domain(self):
        stats = NormalizationStats(pitch_mean=150.0, pitch_std=10.0)
        prediction = Prediction(log_duration=np.zeros(1), pitch=np.array([170.0]), energy=np.zeros(1))
        _, l_p, _ = loss_regression(prediction, [150.0], [0], [0.0], stats)
        assert l_p == pytest.approx(4.0)


class TestDiscriminator:
    def test_zero_weights_score_bias(self):
        disc = _constant_disc(0.3)
        rng = np.random.default_rng(0)
        for length in (1, 2, 7):
            assert discriminator_score(disc, "pitch", rng.normal(size=length)) == pytest.approx(0.3)

    def test_constant_sequence_equals_single_window(self):
        _, disc = init_params(_small_config())
        single = discriminator_score(disc, "energy", np.array([0.8]))
        assert discriminator_score(disc, "energy", np.full(5, 0.8)) == pytest.approx(single, rel=1e-12)

    def test_padding_a_constant_sequence(self):
        _, disc = init_params(_small_config())
        short = discriminator_score(disc, "duration", np.full(8, 1.7))
        long = discriminator_score(disc, "duration", np.full(80, 1.7))
        assert long == pytest.approx(short, rel=1e-12)

    def test_window_indices(self):
        assert window_indices(4, 3).tolist() == [[0, 1, 2], [1, 2, 3]]
        assert window_indices(3, 3).tolist() == [[0, 1, 2]]
        assert window_indices(2, 3).tolist() == [[0, 1, 1]]
        assert window_indices(80, 3).shape == (78, 3)

    def test_score_is_mean_over_full_windows(self):
        _, disc = init_params(_small_config())
        seq = np.array([0.0, 0.0, 0.0, 1.0])
        windows = np.array([[0.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
        hidden = np.tanh(windows @ disc["pitch.w1"] + disc["pitch.b1"])
        expected = np.mean(hidden @ disc["pitch.w2"] + disc["pitch.b2"][0])
        assert discriminator_score(disc, "pitch", seq) == pytest.approx(expected, rel=1e-12)

    def test_empty_sequence(self):
        _, disc = init_params(_small_config())
        with pytest.raises(AdaptorError):
            discriminator_score(disc, "pitch", np.array([]))

    def test_constant_half_output(self):
        disc = _constant_disc(0.5)
        disc_loss, gen_loss = loss_adversarial(disc, "pitch", [np.ones(4)], [np.zeros(5), np.ones(2)])
        assert disc_loss == pytest.approx(0.5)
        assert gen_loss == pytest.approx(0.25)

    def test_empty_sets(self):
        disc = _constant_disc(0.5)
        with pytest.raises(AdaptorError):
            least_squares_terms(disc, "pitch", [], [np.zeros(3)])

    def test_separates_ones_from_zeros(self):
        _, disc = init_params(_small_config(seed=0))
        real = [np.ones(6), np.ones(4)]
        fake = [np.zeros(6), np.zeros(4)]
        disc, disc_loss = fit_discriminator(disc, "pitch", real, fake, lr=0.05, steps=2000)
        assert disc_loss < 0.05
        assert abs(discriminator_score(disc, "pitch", np.ones(5)) - 1.0) < 0.05
        assert abs(discriminator_score(disc, "pitch", np.zeros(5))) < 0.05

    def test_indistinguishable_sets_settle_at_half(self):
        _, disc = init_params(_small_config(seed=0))
        same = [np.full(5, 0.3), np.full(5, 0.3)]
        disc, disc_loss = fit_discriminator(disc, "pitch", same, same, lr=0.05, steps=2000)
        assert abs(disc_loss - 0.5) < 0.05
        assert abs(discriminator_score(disc, "pitch", np.full(5, 0.3)) - 0.5) < 0.05

    def test_other_elements_untouched(self):
        _, disc = init_params(_small_config(seed=0))
        trained, _ = fit_discriminator(disc, "pitch", [np.ones(3)], [np.zeros(3)], lr=0.05, steps=5)
        assert_array_equal(trained["energy.w1"], disc["energy.w1"])
        assert not np.array_equal(trained["pitch.w1"], disc["pitch.w1"])


class TestLossReport:
    def test_composites(self):
        report = LossReport(L_d=1.0, L_p=2.0, L_e=3.0, L_d_tilde=0.5, L_p_tilde=0.25, L_e_tilde=0.125,
                            L_adv_p=0.1, L_adv_d=0.2, L_adv_e=0.3, L_disc_p=9.0)
        assert report.L_categorical == 6.0
        assert report.L_intermediate == pytest.approx(0.875 + 0.6)
        assert report.L_total == pytest.approx(report.L_categorical + report.L_intermediate, abs=1e-9)

    def test_first_non_finite(self):
        report = LossReport(L_d=1.0, L_p=float("nan"), L_e=0.0, L_d_tilde=0.0, L_p_tilde=0.0, L_e_tilde=0.0)
        assert report.first_non_finite() == "L_p"

    def test_row_without_adversarial_terms(self):
        report = LossReport(L_d=1.0, L_p=1.0, L_e=1.0, L_d_tilde=1.0, L_p_tilde=1.0, L_e_tilde=1.0)
        assert not set(ADVERSARIAL_COLUMNS) & set(report.row(include_adversarial=False))


class TestConfig:
    def test_pseudo_label_fakes_not_available(self):
        with pytest.raises(ValueError):
            _small_config(fake_source="pseudo_label")

    def test_condition_lambda_range(self):
        with pytest.raises(ValueError):
            EmotionCondition(emo_i=HAPPY, emo_j=NEUTRAL, lambda_=1.2)

    def test_categorical_condition(self):
        cond = EmotionCondition.categorical(EmotionLabel.SAD)
        assert (cond.emo_i, cond.emo_j, cond.lambda_) == (EmotionLabel.SAD, NEUTRAL, 1.0)

    def test_vocabulary_lookup(self):
        vocab = Vocabulary(phonemes=["AA", "B"], speakers=["spk01"])
        assert vocab.phoneme_ids(["B", "AA"]) == [1, 0]
        with pytest.raises(AdaptorError):
            vocab.phoneme_ids(["ZH"])
        with pytest.raises(AdaptorError):
            vocab.speaker_id("spk09")


class TestTrainStep:
    def test_zero_learning_rates(self, tiny_batch):
        cfg, batch = tiny_batch
        cfg = cfg.model_copy(update={"generator_lr": 0.0, "discriminator_lr": 0.0})
        params, disc = init_params(cfg)
        new_params, new_disc, report = train_step(params, disc, batch, cfg)
        for name, tensor in params.items():
            assert_array_equal(new_params[name], tensor)
        for name, tensor in disc.items():
            assert_array_equal(new_disc[name], tensor)
        assert report.L_total > 0

    def test_discriminator_update_leaves_generator_alone(self, tiny_batch):
        cfg, batch = tiny_batch
        cfg = cfg.model_copy(update={"generator_lr": 0.0})
        params, disc = init_params(cfg)
        new_params, new_disc, _ = train_step(params, disc, batch, cfg)
        for name, tensor in params.items():
            assert_array_equal(new_params[name], tensor)
        assert any(not np.array_equal(new_disc[name], t) for name, t in disc.items())

    def test_generator_update_leaves_discriminator_alone(self, tiny_batch):
        cfg, batch = tiny_batch
        cfg = cfg.model_copy(update={"discriminator_lr": 0.0})
        params, disc = init_params(cfg)
        new_params, new_disc, _ = train_step(params, disc, batch, cfg)
        for name, tensor in disc.items():
            assert_array_equal(new_disc[name], tensor)
        assert not np.array_equal(new_params["pitch.w1"], params["pitch.w1"])

    def test_deterministic(self, tiny_batch):
        cfg, batch = tiny_batch
        first = train_step(*init_params(cfg), batch, cfg)
        second = train_step(*init_params(cfg), batch, cfg)
        for name, tensor in first[0].items():
            assert_array_equal(tensor, second[0][name])
        assert first[2] == second[2]

    def test_no_discriminator_reports_no_adversarial_terms(self, tiny_batch):
        cfg, batch = tiny_batch
        cfg = cfg.model_copy(update={"use_discriminator": False})
        params, disc = init_params(cfg)
        _, new_disc, report = train_step(params, disc, batch, cfg)
        assert report.L_adv == 0.0
        assert report.L_disc_p == 0.0
        for name, tensor in disc.items():
            assert_array_equal(new_disc[name], tensor)

    def test_divergence_names_the_term(self, tiny_batch):
        cfg, batch = tiny_batch
        params, disc = init_params(cfg)
        params.tensors["pitch.b2"] = np.array([np.inf])
        with pytest.raises(TrainingDivergence) as exc_info:
            train_step(params, disc, batch, cfg, step=17)
        assert exc_info.value.step == 17
        assert exc_info.value.term == "L_p"
        assert exc_info.value.report()["status"] == "diverged"


class TestGradientCheck:
    @pytest.mark.parametrize("seed", range(10))
    def test_handwritten_gradients_match(self, tiny_batch, seed):
        cfg, batch = tiny_batch
        cfg = cfg.model_copy(update={"seed": seed})
        params, disc = init_params(cfg)
        assert gradient_check(params, disc, batch, cfg, epsilon=1e-5) < 1e-4

    def test_regression_path_only(self, tiny_batch):
        cfg, batch = tiny_batch
        cfg = cfg.model_copy(update={"use_discriminator": False, "seed": 3})
        params, disc = init_params(cfg)
        assert gradient_check(params, disc, batch, cfg, epsilon=1e-5) < 1e-4

    def test_default_step_size(self, tiny_batch):
        assert inspect.signature(gradient_check).parameters["epsilon"].default == 1e-5
        cfg, batch = tiny_batch
        params, disc = init_params(cfg)
        assert gradient_check(params, disc, batch, cfg) < 1e-4

    def test_corrupted_gradient_is_flagged(self, tiny_batch):
        cfg, batch = tiny_batch
        params, disc = init_params(cfg)
        _, reference = generator_gradients(params, disc, batch, cfg)
        k = int(np.argmax(np.abs(reference["pitch.w1"])))

        def doubled(p, d, b, c):
            terms, grads = generator_gradients(p, d, b, c)
            corrupted = grads["pitch.w1"].copy()
            corrupted.flat[k] *= 2.0
            grads["pitch.w1"] = corrupted
            return terms, grads

        assert gradient_check(params, disc, batch, cfg, epsilon=1e-5, grad_fn=doubled) == pytest.approx(1 / 3, abs=1e-3)

    def test_perfect_fit_has_zero_gradient(self):
        cfg = _small_config(use_discriminator=False)
        params, disc = init_params(cfg)
        params = _zeroed(params)
        params.tensors["duration.b2"] = np.array([np.log1p(3.0)])
        params.tensors["pitch.b2"] = np.array([0.5])
        params.tensors["energy.b2"] = np.array([-0.25])
        targets = Targets(duration=np.full(3, np.log1p(3.0)), pitch=np.full(3, 0.5), energy=np.full(3, -0.25))
        batch = TrainingBatch(
            categorical=GeneratorBatch.single([0, 1, 2], 0, EmotionCondition.categorical(HAPPY), targets),
            intermediate=GeneratorBatch.single(
                [2, 1, 0], 2, EmotionCondition(emo_i=NEUTRAL, emo_j=HAPPY, lambda_=0.3), targets
            ),
        )
        terms, grads = generator_gradients(params, disc, batch, cfg)
        assert all(value == 0.0 for value in terms.values())
        for name, g in grads.items():
            assert np.all(g == 0.0), name

    def test_too_many_parameters(self, tiny_batch):
        _, batch = tiny_batch
        cfg = AdaptorConfig(vocab_size=200, n_speakers=2)
        params, disc = init_params(cfg)
        with pytest.raises(AdaptorError):
            gradient_check(params, disc, batch, cfg)


class TestTraining:
    def test_batch_draw_depends_on_step(self, toy_index):
        vocab, stats = build_vocabulary(toy_index), fit_normalization(toy_index)
        labels = generate_pseudo_dataset(toy_index, 30, LambdaDistribution.BETA, seed=0).labels
        categorical = prepare_categorical(toy_index, vocab, stats)
        intermediate = prepare_intermediate(labels, toy_index, vocab, stats)
        cfg = AdaptorConfig(vocab_size=len(vocab.phonemes), n_speakers=2, batch_size=4, seed=5)
        first = draw_batch(categorical, intermediate, cfg, step=3)
        again = draw_batch(categorical, intermediate, cfg, step=3)
        assert_array_equal(first.categorical.phoneme_ids, again.categorical.phoneme_ids)
        assert_array_equal(first.intermediate.lam, again.intermediate.lam)
        assert first.categorical.n_sequences == 4

    def test_loss_csv_columns(self, tmp_path, tiny_batch, toy_index):
        cfg, _ = tiny_batch
        vocab = build_vocabulary(toy_index)
        labels = generate_pseudo_dataset(toy_index, 8, LambdaDistribution.UNIFORM, seed=1).labels
        categorical = prepare_categorical(toy_index, vocab, cfg.normalization)
        intermediate = prepare_intermediate(labels, toy_index, vocab, cfg.normalization)

        ablation = cfg.model_copy(update={"use_discriminator": False})
        result = train(*init_params(ablation), categorical, intermediate, ablation, steps=3, log_every=0)
        write_loss_csv(result.reports, tmp_path / "losses.csv", include_adversarial=False)
        frame = pd.read_csv(tmp_path / "losses.csv")
        assert list(frame["step"]) == [0, 1, 2]
        assert not set(ADVERSARIAL_COLUMNS) & set(frame.columns)
        assert_allclose(frame["L_total"], [r.L_total for r in result.reports], rtol=1e-12)

        full = train(*init_params(cfg), categorical, intermediate, cfg, steps=2, log_every=0)
        write_loss_csv(full.reports, tmp_path / "full.csv")
        assert set(ADVERSARIAL_COLUMNS) <= set(pd.read_csv(tmp_path / "full.csv").columns)

    def test_empty_loss_csv_has_header(self, tmp_path):
        write_loss_csv([], tmp_path / "losses.csv")
        assert (tmp_path / "losses.csv").read_text().startswith("step,L_d,L_p")

    def test_trajectory_is_reproducible(self, tiny_batch, toy_index):
        cfg, _ = tiny_batch
        vocab = build_vocabulary(toy_index)
        labels = generate_pseudo_dataset(toy_index, 8, LambdaDistribution.BETA, seed=1).labels
        categorical = prepare_categorical(toy_index, vocab, cfg.normalization)
        intermediate = prepare_intermediate(labels, toy_index, vocab, cfg.normalization)
        first = train(*init_params(cfg), categorical, intermediate, cfg, steps=4, log_every=0)
        second = train(*init_params(cfg), categorical, intermediate, cfg, steps=4, log_every=0)
        assert first.reports == second.reports

    def test_predict_returns_frame_durations(self, tiny_batch, toy_index):
        cfg, _ = tiny_batch
        vocab = build_vocabulary(toy_index)
        params, _ = init_params(cfg)
        phonemes = vocab.phonemes[:3]
        features = predict(params, vocab, phonemes, vocab.speakers[0], HAPPY, 0.5)
        assert features.phonemes == phonemes
        assert all(isinstance(d, int) and d >= 0 for d in features.duration)
        assert all(p >= 0 for p in features.pitch)


class TestCheckpoint:
    def _checkpoint(self, toy_index, step=0):
        vocab = build_vocabulary(toy_index)
        cfg = AdaptorConfig(vocab_size=len(vocab.phonemes), n_speakers=len(vocab.speakers), seed=4,
                            normalization=fit_normalization(toy_index))
        params, disc = init_params(cfg)
        return Checkpoint(config=cfg, vocabulary=vocab, params=params, disc=disc, step=step)

    def test_roundtrip(self, tmp_path, toy_index):
        checkpoint = self._checkpoint(toy_index, step=12)
        save_checkpoint(checkpoint, tmp_path / "adaptor.imxc")
        loaded = load_checkpoint(tmp_path / "adaptor.imxc")
        assert loaded.step == 12
        assert loaded.config == checkpoint.config
        assert loaded.vocabulary == checkpoint.vocabulary
        assert loaded.params.names() == checkpoint.params.names()
        for name, tensor in checkpoint.params.items():
            assert_array_equal(loaded.params[name], tensor)
        for name, tensor in checkpoint.disc.items():
            assert_array_equal(loaded.disc[name], tensor)

    def test_encoding_is_byte_stable(self, toy_index):
        payload = encode_checkpoint(self._checkpoint(toy_index))
        assert encode_checkpoint(self._checkpoint(toy_index)) == payload
        assert encode_checkpoint(decode_checkpoint(payload)) == payload

    def test_truncated(self, toy_index):
        payload = encode_checkpoint(self._checkpoint(toy_index))
        with pytest.raises(CheckpointFormatError):
            decode_checkpoint(payload[:-8])

    def test_bad_magic(self, toy_index):
        payload = encode_checkpoint(self._checkpoint(toy_index))
        with pytest.raises(CheckpointFormatError):
            decode_checkpoint(b"NOPE" + payload[4:])


@pytest.mark.slow
class TestSyntheticIntensityControl:
    INTENSITIES = (0.0, 0.25, 0.5, 0.75, 1.0)

    def _train(self, use_discriminator: bool):
        index = build_synthetic_corpus(n_speakers=2, n_sentences=4, pitch_offset=50.0, energy_scale=1.5, seed=0)
        vocab, stats = build_vocabulary(index), fit_normalization(index)
        labels = generate_pseudo_dataset(index, 400, LambdaDistribution.BETA, seed=0).labels
        cfg = AdaptorConfig(vocab_size=len(vocab.phonemes), n_speakers=len(vocab.speakers), seed=0,
                            normalization=stats, use_discriminator=use_discriminator)
        result = train(
            *init_params(cfg),
            prepare_categorical(index, vocab, stats),
            prepare_intermediate(labels, index, vocab, stats),
            cfg, steps=2000, log_every=0,
        )
        return index, vocab, result

    def _offsets_from_neutral(self, index, vocab, result):
        offsets = {t: [] for t in self.INTENSITIES}
        for speaker, sentence, _ in index.eligible_groups():
            neutral = index.get(speaker, sentence, NEUTRAL).features
            base = float(np.mean(neutral.pitch))
            for t in self.INTENSITIES:
                pitch = np.mean(predict(result.params, vocab, neutral.phonemes, speaker, HAPPY, t).pitch)
                offsets[t].append(pitch - base)
        return [float(np.mean(offsets[t])) for t in self.INTENSITIES]

    def test_pitch_offsets_follow_intensity(self):
        index, vocab, result = self._train(use_discriminator=True)
        late = np.mean([r.L_total for r in result.reports[-100:]])
        assert late <= 0.1 * result.reports[0].L_total
        assert any(r.L_disc_p > 0 for r in result.reports)

        mean_offsets = self._offsets_from_neutral(index, vocab, result)
        assert all(a < b for a, b in zip(mean_offsets, mean_offsets[1:]))
        assert mean_offsets[0] == pytest.approx(0.0, abs=5.0)
        assert mean_offsets[-1] == pytest.approx(50.0, abs=5.0)

    def test_regression_only_offsets_are_linear(self):
        index, vocab, result = self._train(use_discriminator=False)
        late = np.mean([r.L_total for r in result.reports[-100:]])
        assert late <= 0.1 * result.reports[0].L_total

        mean_offsets = self._offsets_from_neutral(index, vocab, result)
        assert all(a < b for a, b in zip(mean_offsets, mean_offsets[1:]))
        assert_allclose(mean_offsets, [50.0 * t for t in self.INTENSITIES], atol=5.0)

    @pytest.mark.parametrize("distribution", list(LambdaDistribution))
    def test_every_distribution_trains_to_completion(self, distribution):
        index = build_synthetic_corpus(n_speakers=2, n_sentences=3, seed=1)
        vocab, stats = build_vocabulary(index), fit_normalization(index)
        labels = generate_pseudo_dataset(index, 60, distribution, seed=1).labels
        cfg = AdaptorConfig(vocab_size=len(vocab.phonemes), n_speakers=2, seed=1, normalization=stats)
        result = train(
            *init_params(cfg),
            prepare_categorical(index, vocab, stats),
            prepare_intermediate(labels, index, vocab, stats),
            cfg, steps=200, log_every=0,
        )
        assert len(result.reports) == 200
        assert all(r.first_non_finite() is None for r in result.reports)
