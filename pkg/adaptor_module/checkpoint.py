# adaptor_module/checkpoint.py

import json
import logging
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Union

import numpy as np

from signal_features_module.codec import atomic_write_bytes

from .models import AdaptorConfig, CheckpointFormatError, Vocabulary
from .params import AdaptorParams, DiscriminatorParams

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

CHECKPOINT_MAGIC = b"IMXC"
CHECKPOINT_VERSION = 1
_HEADER = struct.Struct("<4sHHI")  # magic, version, reserved, metadata length


@dataclass
class Checkpoint:
    config: AdaptorConfig
    vocabulary: Vocabulary
    params: AdaptorParams
    disc: DiscriminatorParams
    step: int = 0


def encode_checkpoint(checkpoint: Checkpoint) -> bytes:
    """
    Header, JSON metadata (sorted keys, tensor manifest), then every tensor
    as little-endian float64 in manifest order. No timestamps, so equal
    states encode to equal bytes.
    """
    manifest: List[Dict] = []
    blobs: List[bytes] = []
    for group, tensors in (("adaptor", checkpoint.params), ("discriminator", checkpoint.disc)):
        for name, tensor in tensors.items():
            manifest.append({"group": group, "name": name, "shape": list(tensor.shape)})
            blobs.append(np.ascontiguousarray(tensor, dtype="<f8").tobytes())

    metadata = {
        "config": checkpoint.config.model_dump(mode="json"),
        "vocabulary": checkpoint.vocabulary.model_dump(mode="json"),
        "step": checkpoint.step,
        "tensors": manifest,
    }
    meta_bytes = json.dumps(metadata, sort_keys=True, separators=(",", ":")).encode("utf-8")
    return _HEADER.pack(CHECKPOINT_MAGIC, CHECKPOINT_VERSION, 0, len(meta_bytes)) + meta_bytes + b"".join(blobs)


def decode_checkpoint(data: bytes) -> Checkpoint:
    if len(data) < _HEADER.size:
        raise CheckpointFormatError("checkpoint shorter than its header")
    magic, version, _, meta_len = _HEADER.unpack_from(data)
    if magic != CHECKPOINT_MAGIC:
        raise CheckpointFormatError(f"bad magic {magic!r}")
    if version != CHECKPOINT_VERSION:
        raise CheckpointFormatError(f"unsupported checkpoint version {version}")

    offset = _HEADER.size
    try:
        metadata = json.loads(data[offset:offset + meta_len].decode("utf-8"))
        config = AdaptorConfig.model_validate(metadata["config"])
        vocabulary = Vocabulary.model_validate(metadata["vocabulary"])
        step = int(metadata["step"])
        manifest = metadata["tensors"]
    except (ValueError, KeyError, TypeError) as e:
        raise CheckpointFormatError(f"unreadable checkpoint metadata: {e}") from e
    offset += meta_len

    groups: Dict[str, Dict[str, np.ndarray]] = {"adaptor": {}, "discriminator": {}}
    for entry in manifest:
        shape = tuple(entry["shape"])
        n_bytes = int(np.prod(shape, dtype=np.int64)) * 8
        if offset + n_bytes > len(data):
            raise CheckpointFormatError(f"truncated tensor {entry['name']}")
        tensor = np.frombuffer(data, dtype="<f8", count=n_bytes // 8, offset=offset).reshape(shape)
        groups[entry["group"]][entry["name"]] = tensor.astype(np.float64)
        offset += n_bytes
    if offset != len(data):
        raise CheckpointFormatError(f"{len(data) - offset} trailing bytes after last tensor")

    return Checkpoint(
        config=config,
        vocabulary=vocabulary,
        params=AdaptorParams(tensors=groups["adaptor"], normalization=config.normalization),
        disc=DiscriminatorParams(tensors=groups["discriminator"], window=config.disc_window),
        step=step,
    )


def save_checkpoint(checkpoint: Checkpoint, path: PathLike) -> None:
    atomic_write_bytes(path, encode_checkpoint(checkpoint))
    logger.info(f"Saved checkpoint at step {checkpoint.step} to {path}")


def load_checkpoint(path: PathLike) -> Checkpoint:
    try:
        data = Path(path).read_bytes()
    except OSError as e:
        raise CheckpointFormatError(f"cannot read {path}: {e}") from e
    return decode_checkpoint(data)
