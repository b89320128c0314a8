# tests/test_mcp_server.py

import asyncio
import json

import pytest
from fastmcp import Client
from fastmcp.exceptions import ToolError

from prosody_mcp_server import app

from .conftest import sine, write_wav


def call(tool: str, arguments: dict):
    async def _call():
        async with Client(app) as client:
            result = await client.call_tool(tool, arguments)
            return json.loads(result.content[0].text)
    return asyncio.run(_call())


def test_tools_are_registered():
    async def _names():
        async with Client(app) as client:
            return {tool.name for tool in await client.list_tools()}
    assert asyncio.run(_names()) == {"extract_prosody", "mix_features", "evaluate_pair", "sample_lambdas"}


def test_sample_lambdas_is_seeded():
    first = call("sample_lambdas", {"distribution": "discrete", "n": 20, "seed": 4})
    assert first == call("sample_lambdas", {"distribution": "discrete", "n": 20, "seed": 4})
    assert set(first) <= {0.0, 0.5, 1.0}


def test_mix_features():
    first = {"phonemes": ["AH", "T"], "pitch": [200.0, 220.0], "duration": [3, 8], "energy": [4.0, 2.0]}
    second = {"phonemes": ["AH", "T"], "pitch": [100.0, 120.0], "duration": [6, 2], "energy": [2.0, 2.0]}
    mixed = call("mix_features", {"first": first, "second": second, "lambda_value": 0.5})
    assert mixed["phonemes"] == ["AH", "T"]
    assert mixed["pitch"] == pytest.approx([150.0, 170.0])
    assert mixed["duration"] == [4, 5]
    assert mixed["energy"] == pytest.approx([3.0, 2.0])


def test_mix_features_rejects_mismatched_phonemes():
    first = {"phonemes": ["AH"], "pitch": [200.0], "duration": [3], "energy": [4.0]}
    second = {"phonemes": ["IY"], "pitch": [100.0], "duration": [6], "energy": [2.0]}
    with pytest.raises(ToolError, match="position 0"):
        call("mix_features", {"first": first, "second": second, "lambda_value": 0.5})


def test_extract_prosody(tmp_path):
    wav = write_wav(tmp_path / "utt.wav", sine(200.0, seconds=0.5).samples)
    alignment = tmp_path / "utt.tsv"
    alignment.write_text("AH\t0.0\t0.2\nT\t0.2\t0.4\n", encoding="utf-8")
    features = call("extract_prosody", {"wav_path": str(wav), "alignment_path": str(alignment)})
    assert features["phonemes"] == ["AH", "T"]
    assert features["duration"] == [17, 17]
    assert features["pitch"] == pytest.approx([200.0, 200.0], rel=0.02)


def test_extract_prosody_missing_file(tmp_path):
    with pytest.raises(ToolError):
        call("extract_prosody", {"wav_path": str(tmp_path / "none.wav"), "alignment_path": str(tmp_path / "x.tsv")})


def test_evaluate_pair_self_comparison(tmp_path):
    wav = write_wav(tmp_path / "utt.wav", sine(200.0, seconds=0.5).samples)
    report = call("evaluate_pair", {"reference_wav": str(wav), "candidate_wav": str(wav)})
    assert report["mcd_db"] == 0.0
    assert report["f0_rmse_hz"] == 0.0
    assert report["frames_compared"] > 0
