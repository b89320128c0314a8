# tests/test_signal_features.py

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from signal_features_module.codec import (
    decode_track,
    encode_track,
    read_prosody_text,
    read_track_binary,
    write_prosody_text,
    write_track_binary,
)
from signal_features_module.extractor import (
    LOG_FLOOR,
    compute_energy,
    compute_log_mel,
    compute_mel_cepstra,
    estimate_f0,
    frame_count,
    load_waveform,
    log_mel_to_cepstra,
)
from signal_features_module.models import (
    AnalysisConfig,
    FeatureExtractionError,
    FrameLengthError,
    TrackFormatError,
    Waveform,
    WaveformFormatError,
)

from .conftest import SAMPLE_RATE, sine, write_wav


class TestLoadWaveform:
    def test_mono_int16_length_and_rate(self, tmp_path):
        data = (np.sin(np.linspace(0, 100, SAMPLE_RATE)) * 10000).astype(np.int16)
        w = load_waveform(write_wav(tmp_path / "a.wav", data))
        assert w.sample_rate == SAMPLE_RATE
        assert w.samples.size == SAMPLE_RATE
        assert_allclose(w.samples, data / 32768.0)

    def test_stereo_channels_cancel(self, tmp_path):
        left = np.full(1000, 16384, dtype=np.int16)
        data = np.column_stack((left, -left))
        w = load_waveform(write_wav(tmp_path / "stereo.wav", data))
        assert_array_equal(w.samples, np.zeros(1000))

    def test_most_negative_int16_maps_to_minus_one(self, tmp_path):
        data = np.array([-32768, 0, 16384, 32767], dtype=np.int16)
        w = load_waveform(write_wav(tmp_path / "four.wav", data))
        assert w.samples[0] == -1.0
        assert w.samples[1] == 0.0
        assert w.samples[2] == 0.5

    def test_missing_file(self, tmp_path):
        with pytest.raises(WaveformFormatError) as exc_info:
            load_waveform(tmp_path / "nope.wav")
        assert "not found" in exc_info.value.reason

    def test_garbage_file(self, tmp_path):
        path = tmp_path / "junk.wav"
        path.write_bytes(b"definitely not a riff header")
        with pytest.raises(WaveformFormatError):
            load_waveform(path)

    def test_unsupported_rate(self, tmp_path):
        path = write_wav(tmp_path / "odd.wav", np.zeros(2000, dtype=np.int16), sample_rate=11025)
        with pytest.raises(WaveformFormatError):
            load_waveform(path)


class TestWaveformModel:
    def test_rejects_out_of_range(self):
        with pytest.raises(FeatureExtractionError):
            Waveform(samples=np.array([0.0, 1.5]), sample_rate=SAMPLE_RATE)

    def test_rejects_empty(self):
        with pytest.raises(FeatureExtractionError):
            Waveform(samples=np.array([]), sample_rate=SAMPLE_RATE)


class TestFrameCount:
    def test_formula(self, analysis_cfg):
        assert frame_count(1024, analysis_cfg) == 1
        assert frame_count(1024 + 255, analysis_cfg) == 1
        assert frame_count(1024 + 256, analysis_cfg) == 2
        assert frame_count(SAMPLE_RATE, analysis_cfg) == (SAMPLE_RATE - 1024) // 256 + 1

    def test_too_short(self, analysis_cfg):
        with pytest.raises(FrameLengthError) as exc_info:
            frame_count(1000, analysis_cfg)
        assert exc_info.value.n_samples == 1000

    def test_extractors_agree_on_frames(self, analysis_cfg):
        w = sine(150.0, seconds=0.7)
        n = frame_count(w.samples.size, analysis_cfg)
        assert len(estimate_f0(w, analysis_cfg)) == n
        assert len(compute_energy(w, analysis_cfg)) == n
        assert len(compute_mel_cepstra(w, analysis_cfg)) == n
        assert compute_log_mel(w, analysis_cfg).shape == (n, analysis_cfg.n_mels)


class TestEstimateF0:
    def test_pure_tone(self, analysis_cfg):
        track = estimate_f0(sine(220.0), analysis_cfg)
        assert track.voiced.mean() >= 0.95
        assert abs(np.median(track.values[track.voiced]) - 220.0) <= 2.0

    def test_silence_is_unvoiced(self, analysis_cfg):
        track = estimate_f0(Waveform(samples=np.zeros(SAMPLE_RATE), sample_rate=SAMPLE_RATE), analysis_cfg)
        assert not track.voiced.any()
        assert_array_equal(track.values, 0.0)

    def test_white_noise_is_mostly_unvoiced(self, analysis_cfg):
        rng = np.random.default_rng(1234)
        noise = np.clip(rng.normal(0.0, 0.1, SAMPLE_RATE), -1.0, 1.0)
        track = estimate_f0(Waveform(samples=noise, sample_rate=SAMPLE_RATE), analysis_cfg)
        assert (~track.voiced).mean() >= 0.8

    def test_sweep_tracks_instantaneous_frequency(self, analysis_cfg):
        seconds, f_start, f_end = 2.0, 80.0, 400.0
        t = np.arange(int(seconds * SAMPLE_RATE)) / SAMPLE_RATE
        rate = (f_end - f_start) / seconds
        samples = 0.5 * np.sin(2 * np.pi * (f_start * t + 0.5 * rate * t * t))
        track = estimate_f0(Waveform(samples=samples, sample_rate=SAMPLE_RATE), analysis_cfg)

        centres = (np.arange(len(track)) * analysis_cfg.hop_length + analysis_cfg.frame_length / 2) / SAMPLE_RATE
        truth = f_start + rate * centres
        voiced = track.voiced
        assert voiced.mean() >= 0.9
        relative = np.abs(track.values[voiced] - truth[voiced]) / truth[voiced]
        assert np.median(relative) < 0.03

    @pytest.mark.parametrize("freq", np.arange(80, 401, 20).tolist())
    def test_steady_tone(self, analysis_cfg, freq):
        track = estimate_f0(sine(float(freq)), analysis_cfg)
        voiced = track.values[track.voiced]
        assert voiced.size >= len(track) // 2
        assert np.median(np.abs(voiced - freq) / freq) < 0.03

    def test_deterministic(self, analysis_cfg):
        rng = np.random.default_rng(8)
        w = Waveform(samples=0.4 * np.sin(np.linspace(0, 900, SAMPLE_RATE)) + rng.normal(0, 0.01, SAMPLE_RATE),
                     sample_rate=SAMPLE_RATE)
        first, second = estimate_f0(w, analysis_cfg), estimate_f0(w, analysis_cfg)
        assert_array_equal(first.values, second.values)
        assert_array_equal(first.voiced, second.voiced)

    def test_values_stay_in_band(self, analysis_cfg):
        track = estimate_f0(sine(440.0), analysis_cfg)
        voiced = track.values[track.voiced]
        assert np.all((voiced >= analysis_cfg.f0_min) & (voiced <= analysis_cfg.f0_max))

    def test_band_above_nyquist_is_rejected(self):
        cfg = AnalysisConfig(f0_max=9000.0)
        with pytest.raises(FeatureExtractionError):
            estimate_f0(sine(220.0, sample_rate=16000), cfg)

    def test_times(self, analysis_cfg):
        track = estimate_f0(sine(220.0), analysis_cfg)
        assert track.times()[1] == pytest.approx(256 / SAMPLE_RATE)


class TestComputeEnergy:
    def test_silence(self, analysis_cfg):
        energy = compute_energy(Waveform(samples=np.zeros(4096), sample_rate=SAMPLE_RATE), analysis_cfg)
        assert_array_equal(energy.values, 0.0)

    def test_deterministic(self, analysis_cfg):
        w = sine(260.0, seconds=0.5)
        assert_array_equal(compute_energy(w, analysis_cfg).values, compute_energy(w, analysis_cfg).values)

    def test_doubling_amplitude_doubles_energy(self, analysis_cfg):
        quiet = compute_energy(sine(300.0, amplitude=0.25), analysis_cfg)
        loud = compute_energy(sine(300.0, amplitude=0.5), analysis_cfg)
        assert_allclose(loud.values, 2.0 * quiet.values, rtol=1e-12)

    def test_centre_impulse_matches_direct_transform(self, analysis_cfg):
        n = analysis_cfg.frame_length
        samples = np.zeros(n)
        samples[n // 2] = 1.0
        energy = compute_energy(Waveform(samples=samples, sample_rate=SAMPLE_RATE), analysis_cfg)

        window = 0.5 - 0.5 * np.cos(2 * np.pi * np.arange(n) / n)
        k = np.arange(n // 2 + 1)[:, None]
        basis = np.exp(-2j * np.pi * k * np.arange(n)[None, :] / n)
        oracle = np.linalg.norm(np.abs(basis @ (samples * window)))
        assert energy.values[0] == pytest.approx(oracle, rel=1e-10)
        assert energy.values[0] == pytest.approx(np.sqrt(n // 2 + 1), rel=1e-10)


class TestMelCepstra:
    def test_silence_gives_floor_constant(self, analysis_cfg):
        track = compute_mel_cepstra(Waveform(samples=np.zeros(4096), sample_rate=SAMPLE_RATE), analysis_cfg)
        expected_c0 = np.sqrt(analysis_cfg.n_mels) * np.log(LOG_FLOOR)
        assert_allclose(track.frames[:, 0], expected_c0, rtol=1e-12)
        assert_allclose(track.frames[:, 1:], 0.0, atol=1e-9)

    def test_deterministic(self, analysis_cfg):
        w = sine(180.0, seconds=0.5)
        assert_array_equal(compute_mel_cepstra(w, analysis_cfg).frames, compute_mel_cepstra(w, analysis_cfg).frames)

    def test_four_point_dct(self):
        x = np.array([1.0, 2.0, 3.0, 4.0])
        n = x.size
        expected = np.array([
            (np.sqrt(1 / n) if k == 0 else np.sqrt(2 / n))
            * np.sum(x * np.cos(np.pi * k * (2 * np.arange(n) + 1) / (2 * n)))
            for k in range(n)
        ])
        assert_allclose(log_mel_to_cepstra(np.exp(x)[None, :], 4)[0], expected, atol=1e-12)
        assert expected[0] == pytest.approx(5.0)

    def test_shape(self, analysis_cfg):
        track = compute_mel_cepstra(sine(220.0, seconds=0.3), analysis_cfg)
        assert track.n_cepstra == analysis_cfg.n_cepstra


class TestAnalysisConfig:
    def test_hop_longer_than_frame(self):
        with pytest.raises(ValueError):
            AnalysisConfig(frame_length=256, hop_length=512)

    def test_inverted_band(self):
        with pytest.raises(ValueError):
            AnalysisConfig(f0_min=500.0, f0_max=100.0)


class TestTrackCodec:
    def test_binary_file_roundtrip(self, tmp_path, analysis_cfg):
        w = sine(200.0, seconds=0.4)
        f0 = estimate_f0(w, analysis_cfg)
        mcep = compute_mel_cepstra(w, analysis_cfg)
        write_track_binary(f0, tmp_path / "x.f0.imx")
        write_track_binary(mcep, tmp_path / "x.mcep.imx")

        f0_back = read_track_binary(tmp_path / "x.f0.imx")
        assert_array_equal(f0_back.values, f0.values)
        assert_array_equal(f0_back.voiced, f0.voiced)
        mcep_back = read_track_binary(tmp_path / "x.mcep.imx")
        assert_array_equal(mcep_back.frames, mcep.frames)
        assert mcep_back.sample_rate == SAMPLE_RATE

    def test_encoding_is_stable(self, analysis_cfg):
        energy = compute_energy(sine(200.0, seconds=0.2), analysis_cfg)
        assert encode_track(energy) == encode_track(energy)

    def test_truncated_payload(self, analysis_cfg):
        payload = encode_track(compute_energy(sine(200.0, seconds=0.2), analysis_cfg))
        with pytest.raises(TrackFormatError):
            decode_track(payload[:-3])

    def test_bad_magic(self, analysis_cfg):
        payload = encode_track(compute_energy(sine(200.0, seconds=0.2), analysis_cfg))
        with pytest.raises(TrackFormatError):
            decode_track(b"XXXX" + payload[4:])

    def test_prosody_text_roundtrip(self, tmp_path, analysis_cfg):
        w = sine(250.0, seconds=0.3)
        f0, energy = estimate_f0(w, analysis_cfg), compute_energy(w, analysis_cfg)
        write_prosody_text(f0, energy, tmp_path / "p.txt")
        f0_back, energy_back = read_prosody_text(tmp_path / "p.txt")
        assert_array_equal(f0_back.values, f0.values)
        assert_array_equal(energy_back.values, energy.values)
        assert f0_back.hop_length == analysis_cfg.hop_length
