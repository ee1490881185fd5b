"""Corpus ingestion, conditioning, empty-transcript removal, and subset splits.

Input layout is LibriSpeech-style: ``<root>/**/<stem>.wav`` with a sibling
``<stem>.txt`` whose first line is the transcript, plus an optional
``<stem>.json`` metadata file that is passed through opaquely.
"""

from __future__ import annotations

import json
import logging
import random
import shutil
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence, Union

from . import audio

logger = logging.getLogger(__name__)

ID_WIDTH = 6
REMAINDER = "remainder"

SubsetSize = Union[int, str]


@dataclass(frozen=True)
class AudioClip:
    id: str
    path: Path
    sample_rate: int
    num_samples: int
    size_bytes: int

    def __post_init__(self) -> None:
        if self.sample_rate <= 0:
            raise ValueError(f"clip {self.id}: sample_rate must be > 0")
        if self.num_samples <= 0:
            raise ValueError(f"clip {self.id}: clip is empty")
        if self.size_bytes <= 0:
            raise ValueError(f"clip {self.id}: size_bytes must be > 0")

    @property
    def duration(self) -> float:
        return self.num_samples / self.sample_rate


@dataclass(frozen=True)
class TranscriptRecord:
    id: str
    raw_text: str
    normalized_text: str | None = None


@dataclass(frozen=True)
class CorpusEntry:
    clip: AudioClip
    transcript: TranscriptRecord
    metadata_path: Path | None = None

    def __post_init__(self) -> None:
        if self.clip.id != self.transcript.id:
            raise ValueError(
                f"clip/transcript id mismatch: {self.clip.id} != {self.transcript.id}"
            )

    @property
    def id(self) -> str:
        return self.clip.id

    @property
    def raw_text(self) -> str:
        return self.transcript.raw_text


@dataclass(frozen=True)
class ConditioningConfig:
    target_sample_rate: int = 16000
    highpass_cutoff: float = 80.0
    target_level_db: float = -23.0

    def __post_init__(self) -> None:
        if self.target_sample_rate <= 0:
            raise ValueError("target_sample_rate must be > 0")
        if self.highpass_cutoff >= self.target_sample_rate / 2:
            raise ValueError("highpass_cutoff must be below Nyquist")


@dataclass(frozen=True)
class SubsetSpec:
    sizes: tuple[SubsetSize, ...]
    seed: int

    def __post_init__(self) -> None:
        if not self.sizes:
            raise ValueError("at least one subset size is required")
        for i, size in enumerate(self.sizes):
            if isinstance(size, str):
                if size != REMAINDER:
                    raise ValueError(f"unknown subset size {size!r}")
                if i != len(self.sizes) - 1:
                    raise ValueError("'remainder' is only allowed as the last size")
            elif size < 1:
                raise ValueError(f"subset sizes must be >= 1, got {size}")

    @property
    def explicit_total(self) -> int:
        return sum(s for s in self.sizes if isinstance(s, int))

    @property
    def has_remainder(self) -> bool:
        return bool(self.sizes) and self.sizes[-1] == REMAINDER

    def validate_against(self, corpus_size: int) -> None:
        if self.explicit_total > corpus_size:
            raise ValueError(
                f"subset sizes sum to {self.explicit_total} "
                f"but the corpus has only {corpus_size} entries"
            )
        if not self.has_remainder and self.explicit_total != corpus_size:
            raise ValueError(
                "explicit sizes must cover the whole corpus; "
                "use 'remainder' as the last size to absorb leftovers"
            )


@dataclass
class IngestReport:
    """Files that could not become corpus entries, and why."""

    unpaired: list[Path] = field(default_factory=list)
    malformed: list[tuple[Path, str]] = field(default_factory=list)
    num_entries: int = 0

    def render(self) -> str:
        lines = [f"INGESTED: {self.num_entries}"]
        for path in self.unpaired:
            lines.append(f"unpaired\t{path}")
        for path, reason in self.malformed:
            lines.append(f"malformed\t{path}\t{reason}")
        lines.append(f"TOTAL REMOVED: {len(self.unpaired) + len(self.malformed)}")
        return "\n".join(lines) + "\n"


@dataclass
class RemovalReport:
    removed_ids: list[str] = field(default_factory=list)

    def render(self) -> str:
        lines = [f"empty transcript\t{rid}" for rid in self.removed_ids]
        lines.append(f"TOTAL REMOVED: {len(self.removed_ids)}")
        return "\n".join(lines) + "\n"


@dataclass
class IngestResult:
    entries: list[CorpusEntry]
    report: IngestReport


def ingest_corpus(root: Path) -> IngestResult:
    """Scan a LibriSpeech-style tree and assign sequential ids.

    Ids are zero-padded positions in the sorted order of relative WAV paths,
    so re-ingesting the same directory yields identical ids. Clips without a
    transcript or with an undecodable header are excluded and reported.
    Duplicate stems reject the whole ingest because pairing is ambiguous.
    """
    root = Path(root)
    if not root.is_dir():
        raise FileNotFoundError(f"corpus root is not a readable directory: {root}")
    wavs = sorted(root.rglob("*.wav"), key=lambda p: p.relative_to(root).as_posix())
    stems: dict[str, Path] = {}
    for wav in wavs:
        if wav.stem in stems:
            raise ValueError(
                f"duplicate stem '{wav.stem}' ({stems[wav.stem]} vs {wav}); "
                "transcript pairing would be ambiguous"
            )
        stems[wav.stem] = wav

    report = IngestReport()
    entries: list[CorpusEntry] = []
    next_id = 1
    for wav in wavs:
        txt = wav.with_suffix(".txt")
        if not txt.is_file():
            report.unpaired.append(wav)
            continue
        try:
            num_samples, sample_rate = audio.read_wav_info(wav)
            clip = AudioClip(
                id=format(next_id, f"0{ID_WIDTH}d"),
                path=wav,
                sample_rate=sample_rate,
                num_samples=num_samples,
                size_bytes=wav.stat().st_size,
            )
        except (audio.AudioFormatError, ValueError) as exc:
            report.malformed.append((wav, str(exc)))
            continue
        raw_lines = txt.read_text(encoding="utf-8").splitlines()
        raw_text = raw_lines[0] if raw_lines else ""
        meta = wav.with_suffix(".json")
        entries.append(
            CorpusEntry(
                clip=clip,
                transcript=TranscriptRecord(id=clip.id, raw_text=raw_text),
                metadata_path=meta if meta.is_file() else None,
            )
        )
        next_id += 1
    report.num_entries = len(entries)
    if report.unpaired:
        logger.warning("%d clip(s) had no transcript file", len(report.unpaired))
    return IngestResult(entries=entries, report=report)


def condition_audio(
    entry: CorpusEntry, cfg: ConditioningConfig, out_path: Path
) -> CorpusEntry:
    """Mixdown to mono, resample, high-pass, and RMS-normalize one clip.

    The conditioned waveform is written to ``out_path`` as 16-bit PCM and a
    new entry pointing at it is returned.
    """
    samples, rate = audio.read_wav(entry.clip.path)
    samples = audio.to_mono(samples)
    if len(samples) == 0:
        raise ValueError(f"clip {entry.id} has zero-length audio")
    samples = audio.resample_linear(samples, rate, cfg.target_sample_rate)
    samples = audio.highpass(samples, cfg.target_sample_rate, cfg.highpass_cutoff)
    samples = audio.normalize_rms(samples, cfg.target_level_db)
    audio.write_wav(out_path, samples, cfg.target_sample_rate)
    clip = AudioClip(
        id=entry.id,
        path=out_path,
        sample_rate=cfg.target_sample_rate,
        num_samples=len(samples),
        size_bytes=out_path.stat().st_size,
    )
    return replace(entry, clip=clip)


def condition_corpus(
    entries: Sequence[CorpusEntry], cfg: ConditioningConfig, out_dir: Path
) -> list[CorpusEntry]:
    """Condition every entry into ``out_dir`` as ``<id>.wav`` + ``<id>.txt``."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    conditioned: list[CorpusEntry] = []
    for entry in entries:
        new_entry = condition_audio(entry, cfg, out_dir / f"{entry.id}.wav")
        (out_dir / f"{entry.id}.txt").write_text(
            entry.raw_text + "\n", encoding="utf-8"
        )
        if entry.metadata_path is not None:
            shutil.copyfile(entry.metadata_path, out_dir / f"{entry.id}.json")
            new_entry = replace(
                new_entry, metadata_path=out_dir / f"{entry.id}.json"
            )
        conditioned.append(new_entry)
    return conditioned


def drop_empty_transcripts(
    entries: Sequence[CorpusEntry],
) -> tuple[list[CorpusEntry], RemovalReport]:
    """Remove entries whose transcript is empty after Unicode whitespace trim."""
    kept: list[CorpusEntry] = []
    report = RemovalReport()
    for entry in entries:
        if entry.raw_text.strip():
            kept.append(entry)
        else:
            report.removed_ids.append(entry.id)
    return kept, report


def split_subsets(
    entries: Sequence[CorpusEntry], spec: SubsetSpec
) -> list[list[CorpusEntry]]:
    """Partition entries into random subsets of the requested sizes.

    Disjoint, union-complete, and order-stable for a fixed seed; a trailing
    'remainder' subset absorbs whatever the explicit sizes leave over.
    """
    spec.validate_against(len(entries))
    pool = list(entries)
    rng = random.Random(spec.seed)
    rng.shuffle(pool)
    subsets: list[list[CorpusEntry]] = []
    offset = 0
    for size in spec.sizes:
        if size == REMAINDER:
            subsets.append(pool[offset:])
            offset = len(pool)
        else:
            subsets.append(pool[offset : offset + size])
            offset += size
    return subsets


def write_subset_id_files(
    subsets: Sequence[Sequence[CorpusEntry]], out_dir: Path
) -> list[Path]:
    """One ``subset_<k>.txt`` per subset, one id per line, LF-terminated."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths: list[Path] = []
    for k, subset in enumerate(subsets, start=1):
        path = out_dir / f"subset_{k}.txt"
        path.write_text("".join(f"{e.id}\n" for e in subset), encoding="utf-8")
        paths.append(path)
    return paths


def read_id_file(path: Path) -> list[str]:
    return [
        line.strip()
        for line in path.read_text(encoding="utf-8").splitlines()
        if line.strip()
    ]


def export_cloner_training_layout(
    entries: Sequence[CorpusEntry], id_file: Path, out_root: Path
) -> Path:
    """Copy the selected clips into one single-clip pseudo-speaker dir each.

    The corpus carries no speaker labels, so each clip becomes its own
    ``speaker_<id>/`` directory with the WAV and a per-clip transcript file.
    A CSV manifest of the mapping is written to ``out_root``.
    """
    by_id = {entry.id: entry for entry in entries}
    ids = read_id_file(Path(id_file))
    for clip_id in ids:
        if clip_id not in by_id:
            raise KeyError(f"id file names unknown corpus id: {clip_id}")
    out_root = Path(out_root)
    out_root.mkdir(parents=True, exist_ok=True)
    manifest_lines = ["id,speaker_dir,wav,transcript"]
    for clip_id in ids:
        entry = by_id[clip_id]
        speaker_dir = out_root / f"speaker_{clip_id}"
        if speaker_dir.exists():
            raise FileExistsError(f"collision in output tree: {speaker_dir}")
        speaker_dir.mkdir(parents=True)
        wav_dest = speaker_dir / f"{clip_id}.wav"
        txt_dest = speaker_dir / f"{clip_id}.txt"
        shutil.copyfile(entry.clip.path, wav_dest)
        txt_dest.write_text(entry.raw_text + "\n", encoding="utf-8")
        manifest_lines.append(
            f"{clip_id},{speaker_dir.name},{wav_dest.name},{txt_dest.name}"
        )
    manifest_path = out_root / "layout_manifest.csv"
    manifest_path.write_text("\n".join(manifest_lines) + "\n", encoding="utf-8")
    return out_root


def save_corpus_index(entries: Sequence[CorpusEntry], corpus_dir: Path) -> Path:
    """Persist entries next to their conditioned files for later commands."""
    corpus_dir = Path(corpus_dir)
    payload = [
        {
            "id": e.id,
            "wav": e.clip.path.name,
            "sample_rate": e.clip.sample_rate,
            "num_samples": e.clip.num_samples,
            "size_bytes": e.clip.size_bytes,
            "raw_text": e.raw_text,
        }
        for e in entries
    ]
    path = corpus_dir / "corpus_index.json"
    path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    return path


def load_corpus_index(corpus_dir: Path) -> list[CorpusEntry]:
    corpus_dir = Path(corpus_dir)
    path = corpus_dir / "corpus_index.json"
    if not path.is_file():
        raise FileNotFoundError(
            f"no corpus_index.json in {corpus_dir}; run the ingest step first"
        )
    payload = json.loads(path.read_text(encoding="utf-8"))
    entries = []
    for item in payload:
        clip = AudioClip(
            id=item["id"],
            path=corpus_dir / item["wav"],
            sample_rate=item["sample_rate"],
            num_samples=item["num_samples"],
            size_bytes=item["size_bytes"],
        )
        entries.append(
            CorpusEntry(
                clip=clip,
                transcript=TranscriptRecord(id=item["id"], raw_text=item["raw_text"]),
            )
        )
    return entries


def select_by_ids(
    entries: Sequence[CorpusEntry], ids: Sequence[str]
) -> list[CorpusEntry]:
    by_id = {entry.id: entry for entry in entries}
    missing = [clip_id for clip_id in ids if clip_id not in by_id]
    if missing:
        raise KeyError(f"unknown corpus ids: {', '.join(missing)}")
    return [by_id[clip_id] for clip_id in ids]
