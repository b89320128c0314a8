# signal_features_module/codec.py

import logging
import os
import struct
import tempfile
from pathlib import Path
from typing import Tuple, Union

import numpy as np

from .models import (
    EnergyTrack,
    F0Track,
    MelCepstraTrack,
    SampleRateMismatchError,
    TrackFormatError,
)

logger = logging.getLogger(__name__)

MAGIC = b"IMX1"
VERSION = 1
# magic | version u8 | track type u8 | width u16 | frames u32 | hop u16 | rate u16
HEADER = struct.Struct("<4sBBHIHH")

TRACK_F0 = 1
TRACK_ENERGY = 2
TRACK_MEL_CEPSTRA = 3

Track = Union[F0Track, EnergyTrack, MelCepstraTrack]
PathLike = Union[str, Path]


def atomic_write_bytes(path: PathLike, payload: bytes) -> None:
    """Write through a sibling temp file and rename, so readers never see a partial file."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(payload)
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise


def atomic_write_text(path: PathLike, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


def _as_matrix(track: Track) -> Tuple[int, np.ndarray]:
    if isinstance(track, F0Track):
        return TRACK_F0, np.column_stack((track.values, track.voiced.astype(np.float64)))
    if isinstance(track, EnergyTrack):
        return TRACK_ENERGY, track.values[:, None]
    if isinstance(track, MelCepstraTrack):
        return TRACK_MEL_CEPSTRA, track.frames
    raise TypeError(f"not a feature track: {type(track).__name__}")


def encode_track(track: Track) -> bytes:
    track_type, matrix = _as_matrix(track)
    frames, width = matrix.shape
    header = HEADER.pack(MAGIC, VERSION, track_type, width, frames, track.hop_length, track.sample_rate)
    return header + np.ascontiguousarray(matrix, dtype="<f8").tobytes()


def decode_track(payload: bytes) -> Track:
    if len(payload) < HEADER.size:
        raise TrackFormatError("truncated header")
    magic, version, track_type, width, frames, hop_length, sample_rate = HEADER.unpack_from(payload)
    if magic != MAGIC:
        raise TrackFormatError(f"bad magic {magic!r}")
    if version != VERSION:
        raise TrackFormatError(f"unsupported container version {version}")
    expected = HEADER.size + frames * width * 8
    if len(payload) != expected:
        raise TrackFormatError(f"payload is {len(payload)} bytes, header announces {expected}")

    matrix = np.frombuffer(payload, dtype="<f8", offset=HEADER.size).reshape(frames, width).astype(np.float64)
    if track_type == TRACK_F0:
        return F0Track(values=matrix[:, 0], voiced=matrix[:, 1] > 0.5,
                       hop_length=hop_length, sample_rate=sample_rate)
    if track_type == TRACK_ENERGY:
        return EnergyTrack(values=matrix[:, 0], hop_length=hop_length, sample_rate=sample_rate)
    if track_type == TRACK_MEL_CEPSTRA:
        return MelCepstraTrack(frames=matrix, hop_length=hop_length, sample_rate=sample_rate)
    raise TrackFormatError(f"unknown track type {track_type}")


def write_track_binary(track: Track, path: PathLike) -> None:
    atomic_write_bytes(path, encode_track(track))


def read_track_binary(path: PathLike) -> Track:
    try:
        payload = Path(path).read_bytes()
    except OSError as e:
        raise TrackFormatError(f"cannot read {path}: {e}") from e
    return decode_track(payload)


def write_prosody_text(f0: F0Track, energy: EnergyTrack, path: PathLike) -> None:
    """Columnar text: index, f0, voiced flag, energy; one frame per line."""
    if len(f0) != len(energy) or f0.hop_length != energy.hop_length:
        raise TrackFormatError("F0 and energy tracks are not frame-parallel")
    if f0.sample_rate != energy.sample_rate:
        raise SampleRateMismatchError(f0.sample_rate, energy.sample_rate)
    lines = [f"# hop_length={f0.hop_length} sample_rate={f0.sample_rate}"]
    for i in range(len(f0)):
        lines.append(f"{i}\t{f0.values[i]!r}\t{int(f0.voiced[i])}\t{energy.values[i]!r}")
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_prosody_text(path: PathLike) -> Tuple[F0Track, EnergyTrack]:
    hop_length = sample_rate = None
    values, voiced, energies = [], [], []
    for line_number, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        if line.startswith("#"):
            for token in line[1:].split():
                key, _, value = token.partition("=")
                if key == "hop_length":
                    hop_length = int(value)
                elif key == "sample_rate":
                    sample_rate = int(value)
            continue
        parts = line.split("\t")
        if len(parts) != 4 or int(parts[0]) != len(values):
            raise TrackFormatError(f"{path}:{line_number}: malformed frame line")
        values.append(float(parts[1]))
        voiced.append(parts[2] == "1")
        energies.append(float(parts[3]))
    if hop_length is None or sample_rate is None:
        raise TrackFormatError(f"{path}: missing hop_length/sample_rate header")
    return (
        F0Track(values=np.array(values), voiced=np.array(voiced, dtype=bool),
                hop_length=hop_length, sample_rate=sample_rate),
        EnergyTrack(values=np.array(energies), hop_length=hop_length, sample_rate=sample_rate),
    )
