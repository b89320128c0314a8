# cli_module/manifest.py

import logging
import os
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Union

from pydantic import BaseModel, Field, ValidationError

from mixer_module.enums import EmotionLabel
from signal_features_module.codec import atomic_write_text

from .models import ManifestError

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

MANIFEST_HEADER = "# speaker\tsentence\temotion\taudio\talignment\tfeatures"
NO_FEATURES = "-"


class ManifestRow(BaseModel):
    """
    One utterance. Paths are stored relative to the manifest's directory;
    `features` is the stem shared by an utterance's feature files.
    """
    speaker: str = Field(..., min_length=1)
    sentence: str = Field(..., min_length=1)
    emotion: EmotionLabel
    audio: str = Field(..., min_length=1)
    alignment: str = Field(..., min_length=1)
    features: Optional[str] = None

    @property
    def utterance_id(self) -> str:
        return f"{self.speaker}/{self.sentence}/{self.emotion.value}"


@dataclass
class Manifest:
    rows: List[ManifestRow]
    base_dir: Path

    def resolve(self, relative: str) -> Path:
        path = Path(relative)
        return path if path.is_absolute() else self.base_dir / path

    def by_id(self) -> dict:
        return {row.utterance_id: row for row in self.rows}


def parse_manifest(text: str, base_dir: PathLike) -> Manifest:
    rows: List[ManifestRow] = []
    seen = set()
    for line_number, raw in enumerate(text.splitlines(), start=1):
        if not raw.strip() or raw.lstrip().startswith("#"):
            continue
        parts = raw.split("\t")
        if len(parts) not in (5, 6):
            raise ManifestError(f"expected 5 or 6 tab-separated fields, got {len(parts)}", line_number)
        features = parts[5].strip() if len(parts) == 6 else NO_FEATURES
        try:
            row = ManifestRow(
                speaker=parts[0].strip(),
                sentence=parts[1].strip(),
                emotion=parts[2].strip().lower(),
                audio=parts[3].strip(),
                alignment=parts[4].strip(),
                features=None if features == NO_FEATURES else features,
            )
        except ValidationError as e:
            raise ManifestError(e.errors()[0]["msg"], line_number) from e
        if row.utterance_id in seen:
            raise ManifestError(f"duplicate utterance {row.utterance_id}", line_number)
        seen.add(row.utterance_id)
        rows.append(row)
    return Manifest(rows=rows, base_dir=Path(base_dir))


def read_manifest(path: PathLike) -> Manifest:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ManifestError(f"cannot read {path}: {e}") from e
    manifest = parse_manifest(text, path.parent)
    if not manifest.rows:
        raise ManifestError(f"{path} has no utterances")
    return manifest


def relative_to(path: PathLike, base_dir: PathLike) -> str:
    return Path(os.path.relpath(Path(path).resolve(), Path(base_dir).resolve())).as_posix()


def write_manifest(rows: List[ManifestRow], path: PathLike) -> None:
    """Rows must already hold paths relative to `path`'s directory."""
    lines = [MANIFEST_HEADER]
    for row in rows:
        lines.append("\t".join([
            row.speaker, row.sentence, row.emotion.value, row.audio, row.alignment,
            row.features or NO_FEATURES,
        ]))
    atomic_write_text(path, "\n".join(lines) + "\n")


def rebase(row: ManifestRow, source: Manifest, target_dir: PathLike) -> ManifestRow:
    """Copy of `row` with its paths re-expressed relative to `target_dir`."""
    update = {
        "audio": relative_to(source.resolve(row.audio), target_dir),
        "alignment": relative_to(source.resolve(row.alignment), target_dir),
    }
    if row.features:
        update["features"] = relative_to(source.resolve(row.features), target_dir)
    return row.model_copy(update=update)


def _emotion_from_folder(name: str) -> Optional[EmotionLabel]:
    try:
        return EmotionLabel(name.strip().lower())
    except ValueError:
        return None


def scan_corpus_tree(root: PathLike, manifest_dir: PathLike) -> List[ManifestRow]:
    """
    Rows for `<root>/<speaker>/<Emotion>/<sentence>.wav` files that have a
    sibling `.tsv` or `.TextGrid` alignment.
    """
    root = Path(root)
    if not root.is_dir():
        raise ManifestError(f"corpus root {root} is not a directory")
    rows: List[ManifestRow] = []
    for wav in sorted(root.glob("*/*/*.wav")):
        emotion = _emotion_from_folder(wav.parent.name)
        if emotion is None:
            logger.warning(f"Skipping {wav}: folder '{wav.parent.name}' is not an emotion")
            continue
        alignment = next(
            (c for c in (wav.with_suffix(".tsv"), wav.with_suffix(".TextGrid")) if c.exists()), None
        )
        if alignment is None:
            logger.warning(f"Skipping {wav}: no alignment next to it")
            continue
        rows.append(ManifestRow(
            speaker=wav.parent.parent.name,
            sentence=wav.stem,
            emotion=emotion,
            audio=relative_to(wav, manifest_dir),
            alignment=relative_to(alignment, manifest_dir),
        ))
    return rows
