# prosody_mcp_server.py

import logging
import os
from typing import List

import numpy as np
from fastmcp import FastMCP
from pydantic import Field

from alignment_module.aligner import phoneme_average, read_alignment, read_textgrid_tier
from alignment_module.models import AlignmentError, PhonemeFeatures
from metrics_module.metrics import compare_utterances
from metrics_module.models import MetricError, MetricReport
from mixer_module.enums import LambdaDistribution
from mixer_module.mixer import mix, sample_lambda
from mixer_module.models import MixerError
from signal_features_module.extractor import (
    compute_energy,
    compute_log_mel,
    compute_mel_cepstra,
    estimate_f0,
    load_waveform,
)
from signal_features_module.models import AnalysisConfig, FeatureExtractionError


class ToolError(Exception):
    """Tool execution error"""
    pass


# --- Logging Configuration Start ---
root_logger = logging.getLogger()
root_logger.setLevel(os.getenv("PROSODY_LOG_LEVEL", "INFO").upper())

console_handler = logging.StreamHandler()
log_formatter = logging.Formatter('%(asctime)s - %(name)s - %(levelname)s - %(message)s')
console_handler.setFormatter(log_formatter)
root_logger.addHandler(console_handler)

logger = logging.getLogger(__name__)
# --- Logging Configuration End ---

MAX_SAMPLED_LAMBDAS = 10000

app = FastMCP(
    name="Prosody Mixer Server",
    version="0.1.0"
)


def _analysis(frame_length: int, hop_length: int) -> AnalysisConfig:
    try:
        return AnalysisConfig(frame_length=frame_length, hop_length=hop_length)
    except ValueError as e:
        raise ToolError(f"invalid analysis settings: {e}") from e


@app.tool(
    description="Use this when you need phoneme-level pitch, duration (frames) and energy for a WAV file and its phoneme alignment (TSV or TextGrid).",
    annotations={
        "readOnlyHint": True,
        "idempotentHint": True
    }
)
async def extract_prosody(
    wav_path: str = Field(..., description="Path to a PCM WAV file"),
    alignment_path: str = Field(..., description="phoneme<TAB>start<TAB>end file or a TextGrid with a 'phones' tier"),
    frame_length: int = Field(1024, ge=1, description="Analysis frame length in samples"),
    hop_length: int = Field(256, ge=1, description="Hop between frames in samples"),
) -> PhonemeFeatures:
    logger.info(f"Tool 'extract_prosody' called for {wav_path}")
    cfg = _analysis(frame_length, hop_length)
    try:
        waveform = load_waveform(wav_path)
        cfg.check_sample_rate(waveform.sample_rate)
        if alignment_path.lower().endswith(".textgrid"):
            alignment = read_textgrid_tier(alignment_path)
        else:
            alignment = read_alignment(alignment_path)
        return phoneme_average(estimate_f0(waveform, cfg), compute_energy(waveform, cfg), alignment, cfg)
    except (FeatureExtractionError, AlignmentError) as e:
        logger.error(f"Error in tool 'extract_prosody': {e}")
        raise ToolError(str(e)) from e


@app.tool(
    description="Use this when you need an intermediate-intensity pseudo-label: lambda * first + (1 - lambda) * second over two parallel phoneme feature sets.",
    annotations={
        "readOnlyHint": True,
        "idempotentHint": True
    }
)
async def mix_features(
    first: PhonemeFeatures = Field(..., description="Features weighted by lambda"),
    second: PhonemeFeatures = Field(..., description="Features weighted by 1 - lambda"),
    lambda_value: float = Field(..., ge=0.0, le=1.0, description="Weight on the first feature set"),
) -> PhonemeFeatures:
    logger.info(f"Tool 'mix_features' called with lambda={lambda_value}")
    try:
        mixed = mix(first, second, lambda_value)
    except MixerError as e:
        raise ToolError(str(e)) from e
    return PhonemeFeatures(
        phonemes=first.phonemes,
        pitch=mixed.pitch.tolist(),
        duration=mixed.duration.tolist(),
        energy=mixed.energy.tolist(),
    )


@app.tool(
    description="Use this when comparing a synthesized WAV against a reference WAV: DTW mel cepstral distortion, F0 RMSE and mel MAE.",
    annotations={
        "readOnlyHint": True,
        "idempotentHint": True
    }
)
async def evaluate_pair(
    reference_wav: str = Field(..., description="Reference recording"),
    candidate_wav: str = Field(..., description="Synthesized or converted recording"),
) -> MetricReport:
    logger.info(f"Tool 'evaluate_pair' called: {reference_wav} vs {candidate_wav}")
    cfg = AnalysisConfig()
    try:
        ref, cand = load_waveform(reference_wav), load_waveform(candidate_wav)
        for w in (ref, cand):
            cfg.check_sample_rate(w.sample_rate)
        return compare_utterances(
            compute_mel_cepstra(ref, cfg), compute_mel_cepstra(cand, cfg),
            estimate_f0(ref, cfg), estimate_f0(cand, cfg),
            compute_log_mel(ref, cfg), compute_log_mel(cand, cfg),
        )
    except (FeatureExtractionError, MetricError) as e:
        logger.error(f"Error in tool 'evaluate_pair': {e}")
        raise ToolError(str(e)) from e


@app.tool(
    description="Use this when you need interpolation weights from the beta(0.5, 0.5), uniform or discrete {0, 0.5, 1} distribution.",
    annotations={
        "readOnlyHint": True,
        "idempotentHint": True
    }
)
async def sample_lambdas(
    distribution: LambdaDistribution = Field(LambdaDistribution.BETA, description="beta, uniform or discrete"),
    n: int = Field(10, ge=1, le=MAX_SAMPLED_LAMBDAS, description="How many values"),
    seed: int = Field(0, ge=0, description="Random seed"),
) -> List[float]:
    rng = np.random.default_rng(seed)
    return [sample_lambda(distribution, rng) for _ in range(n)]


def main():
    logger.info(f"Starting {app.name} server via main() function...")
    try:
        app.run()
    except KeyboardInterrupt:
        logger.info("Server shut down by user (KeyboardInterrupt).")
    except Exception:
        logger.exception("Server failed to start or crashed.")
    finally:
        logger.info(f"{app.name} server has shut down.")


if __name__ == "__main__":
    main()
