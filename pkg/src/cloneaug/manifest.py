"""CSV manifests in the transcriber's expected format.

Header is exactly ``wav_filename,wav_filesize,transcript``; fields are quoted
RFC-4180 style when needed, paths are relative to the manifest's directory,
and transcripts are normalized at emission.
"""

from __future__ import annotations

import csv
import os
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .textnorm import normalize_text

HEADER = ["wav_filename", "wav_filesize", "transcript"]


@dataclass(frozen=True)
class ManifestRow:
    wav_filename: str
    wav_filesize: int
    transcript: str


def _row_for(wav_path: Path, transcript: str, manifest_dir: Path) -> ManifestRow:
    if not wav_path.is_file():
        raise FileNotFoundError(f"manifest references a missing WAV: {wav_path}")
    return ManifestRow(
        wav_filename=Path(os.path.relpath(wav_path, manifest_dir)).as_posix(),
        wav_filesize=wav_path.stat().st_size,
        transcript=normalize_text(transcript),
    )


def write_manifest(rows: Sequence[ManifestRow], path: Path) -> None:
    """RFC-4180-style emission, LF line endings.

    Transcript fields must not contain control characters (CR/LF/NUL);
    normalization strips them, so anything built through build_train_dev or
    build_eval_csv is safe.
    """
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(HEADER)
        for row in rows:
            writer.writerow([row.wav_filename, row.wav_filesize, row.transcript])


def read_manifest(path: Path) -> list[ManifestRow]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != HEADER:
            raise ValueError(f"unexpected manifest header in {path}: {header}")
        return [
            ManifestRow(
                wav_filename=wav, wav_filesize=int(size), transcript=transcript
            )
            for wav, size, transcript in reader
        ]


def build_train_dev(
    kept: Sequence[tuple[Path, str]],
    val_count: int,
    seed: int,
    train_path: Path,
    dev_path: Path,
) -> tuple[list[ManifestRow], list[ManifestRow]]:
    """Split (wav, transcript) pairs into train/dev manifests.

    ``val_count`` rows are sampled without repetition for the dev set; the
    rest keep their input order in the train set. Deterministic under seed.
    """
    if not 0 <= val_count < len(kept):
        raise ValueError(
            f"val_count must satisfy 0 <= val_count < {len(kept)}, got {val_count}"
        )
    rng = random.Random(seed)
    dev_indices = rng.sample(range(len(kept)), val_count)
    dev_set = set(dev_indices)
    train_rows = [
        _row_for(wav, text, train_path.parent)
        for i, (wav, text) in enumerate(kept)
        if i not in dev_set
    ]
    dev_rows = [
        _row_for(kept[i][0], kept[i][1], dev_path.parent) for i in dev_indices
    ]
    write_manifest(train_rows, train_path)
    write_manifest(dev_rows, dev_path)
    return train_rows, dev_rows


def build_eval_csv(entries: Sequence, out_path: Path) -> list[ManifestRow]:
    """One row per corpus entry, corpus order preserved."""
    if not entries:
        raise ValueError("cannot build an evaluation manifest from zero entries")
    rows = [
        _row_for(entry.clip.path, entry.raw_text, out_path.parent)
        for entry in entries
    ]
    write_manifest(rows, out_path)
    return rows
