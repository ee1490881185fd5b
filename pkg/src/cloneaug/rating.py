"""Human rating of generated audio: sessions, records, combination scores.

Raters classify sampled audios as poor/reasonable/good (1/2/3 points); each
cloner-model combination is scored by the sum of points it received. Records
are persisted to an append-only JSON-lines log per session so a restarted
service recomputes identical scores.
"""

from __future__ import annotations

import enum
import hashlib
import json
import random
import statistics
import threading
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Sequence

from . import audio


class RatingCategory(str, enum.Enum):
    POOR = "poor"
    REASONABLE = "reasonable"
    GOOD = "good"

    @property
    def points(self) -> int:
        return {"poor": 1, "reasonable": 2, "good": 3}[self.value]


class DurationClass(str, enum.Enum):
    STANDARD = "standard"
    LONG = "long"


class AudioKind(str, enum.Enum):
    REFERENCE = "reference"
    GENERATED = "generated"


class DuplicateRatingError(ValueError):
    pass


class UnknownTaskError(KeyError):
    pass


@dataclass(frozen=True)
class RatingTask:
    task_id: str
    combination_name: str
    audio_id: str
    audio_kind: AudioKind
    duration_class: DurationClass
    wav_path: Path
    duration: float

    def as_dict(self) -> dict:
        return {
            "task_id": self.task_id,
            "combination_name": self.combination_name,
            "audio_id": self.audio_id,
            "audio_kind": self.audio_kind.value,
            "duration_class": self.duration_class.value,
            "wav_path": str(self.wav_path),
            "duration": self.duration,
        }

    @classmethod
    def from_dict(cls, item: dict) -> "RatingTask":
        return cls(
            task_id=item["task_id"],
            combination_name=item["combination_name"],
            audio_id=item["audio_id"],
            audio_kind=AudioKind(item["audio_kind"]),
            duration_class=DurationClass(item["duration_class"]),
            wav_path=Path(item["wav_path"]),
            duration=item["duration"],
        )


@dataclass(frozen=True)
class RatingRecord:
    task_id: str
    rater_id: str
    category: RatingCategory
    timestamp: str

    def as_dict(self) -> dict:
        return {
            "task_id": self.task_id,
            "rater_id": self.rater_id,
            "category": self.category.value,
            "timestamp": self.timestamp,
        }

    @classmethod
    def from_dict(cls, item: dict) -> "RatingRecord":
        return cls(
            task_id=item["task_id"],
            rater_id=item["rater_id"],
            category=RatingCategory(item["category"]),
            timestamp=item["timestamp"],
        )


@dataclass
class CombinationScore:
    combination_name: str
    num_rated: int
    score: int
    by_duration_class: dict[str, dict[str, int]]

    def as_dict(self) -> dict:
        return {
            "combination_name": self.combination_name,
            "num_rated": self.num_rated,
            "score": self.score,
            "by_duration_class": self.by_duration_class,
        }


@dataclass(frozen=True)
class SessionDefinition:
    """What a rating session samples: combination dirs, size, seed, threshold."""

    combinations: tuple[tuple[str, Path], ...]
    sample_size: int
    seed: int
    long_threshold_ratio: float = 1.5
    session_id: str | None = None

    @classmethod
    def from_json(cls, path: Path) -> "SessionDefinition":
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(
            combinations=tuple(
                (c["name"], Path(c["directory"])) for c in payload["combinations"]
            ),
            sample_size=payload["sample_size"],
            seed=payload["seed"],
            long_threshold_ratio=payload.get("long_threshold_ratio", 1.5),
            session_id=payload.get("session_id"),
        )


@dataclass
class RatingSession:
    session_id: str
    tasks: list[RatingTask]
    sample_size: int
    seed: int
    long_threshold_ratio: float
    combination_names: list[str] = field(default_factory=list)

    def task_by_id(self, task_id: str) -> RatingTask:
        for task in self.tasks:
            if task.task_id == task_id:
                return task
        raise UnknownTaskError(task_id)

    def as_dict(self) -> dict:
        return {
            "session_id": self.session_id,
            "sample_size": self.sample_size,
            "seed": self.seed,
            "long_threshold_ratio": self.long_threshold_ratio,
            "combination_names": self.combination_names,
            "tasks": [task.as_dict() for task in self.tasks],
        }

    @classmethod
    def from_dict(cls, item: dict) -> "RatingSession":
        return cls(
            session_id=item["session_id"],
            tasks=[RatingTask.from_dict(t) for t in item["tasks"]],
            sample_size=item["sample_size"],
            seed=item["seed"],
            long_threshold_ratio=item["long_threshold_ratio"],
            combination_names=item["combination_names"],
        )


def _combination_rng(seed: int, name: str) -> random.Random:
    digest = hashlib.sha256(f"{seed}:{name}".encode("utf-8")).digest()
    return random.Random(int.from_bytes(digest[:8], "big"))


def create_session(definition: SessionDefinition) -> RatingSession:
    """Sample audios per combination and assign duration classes.

    An audio is classed "long" when its duration is at least
    ``long_threshold_ratio`` times the median duration of its combination's
    sample; the threshold is recorded in the session. Files whose stem
    contains the generation marker ``__from__`` count as generated audio,
    anything else as reference.
    """
    session_id = definition.session_id or (
        "session-"
        + hashlib.sha256(
            json.dumps(
                [[n, str(d)] for n, d in definition.combinations]
                + [definition.sample_size, definition.seed]
            ).encode("utf-8")
        ).hexdigest()[:10]
    )
    tasks: list[RatingTask] = []
    counter = 0
    for name, directory in definition.combinations:
        wavs = sorted(Path(directory).glob("*.wav"))
        if len(wavs) < definition.sample_size:
            raise ValueError(
                f"combination '{name}' has {len(wavs)} audios, "
                f"need {definition.sample_size}"
            )
        rng = _combination_rng(definition.seed, name)
        sample = rng.sample(wavs, definition.sample_size)
        durations = [audio.wav_duration(p) for p in sample]
        median = statistics.median(durations) if durations else 0.0
        cutoff = definition.long_threshold_ratio * median
        for wav, duration in zip(sample, durations):
            counter += 1
            kind = (
                AudioKind.GENERATED if "__from__" in wav.stem else AudioKind.REFERENCE
            )
            tasks.append(
                RatingTask(
                    task_id=f"{session_id}-t{counter:04d}",
                    combination_name=name,
                    audio_id=f"{session_id}-a{counter:04d}",
                    audio_kind=kind,
                    duration_class=(
                        DurationClass.LONG
                        if durations and duration >= cutoff and cutoff > 0
                        else DurationClass.STANDARD
                    ),
                    wav_path=wav,
                    duration=duration,
                )
            )
    return RatingSession(
        session_id=session_id,
        tasks=tasks,
        sample_size=definition.sample_size,
        seed=definition.seed,
        long_threshold_ratio=definition.long_threshold_ratio,
        combination_names=[name for name, _ in definition.combinations],
    )


def compute_scores(
    records: Iterable[RatingRecord], tasks: Sequence[RatingTask]
) -> list[CombinationScore]:
    """Sum category points per combination; histogram by duration class.

    Combinations keep their task order; every combination present in the
    tasks appears even with zero ratings.
    """
    by_task = {task.task_id: task for task in tasks}
    names: list[str] = []
    for task in tasks:
        if task.combination_name not in names:
            names.append(task.combination_name)
    scores = {
        name: CombinationScore(
            combination_name=name,
            num_rated=0,
            score=0,
            by_duration_class={
                dc.value: {cat.value: 0 for cat in RatingCategory}
                for dc in DurationClass
            },
        )
        for name in names
    }
    for record in records:
        task = by_task.get(record.task_id)
        if task is None:
            continue
        entry = scores[task.combination_name]
        entry.num_rated += 1
        entry.score += record.category.points
        entry.by_duration_class[task.duration_class.value][
            record.category.value
        ] += 1
    return [scores[name] for name in names]


class RatingStore:
    """Sessions on disk: ``<root>/<session_id>/session.json`` + ``ratings.jsonl``.

    Submissions are serialized through one lock so the append-only log stays
    consistent under concurrent raters.
    """

    def __init__(self, root: Path) -> None:
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()

    def _session_dir(self, session_id: str) -> Path:
        return self.root / session_id

    def create(self, session: RatingSession) -> None:
        session_dir = self._session_dir(session.session_id)
        session_dir.mkdir(parents=True, exist_ok=True)
        (session_dir / "session.json").write_text(
            json.dumps(session.as_dict(), indent=2) + "\n", encoding="utf-8"
        )

    def list_sessions(self) -> list[str]:
        return sorted(
            p.name for p in self.root.iterdir() if (p / "session.json").is_file()
        )

    def load(self, session_id: str) -> RatingSession:
        path = self._session_dir(session_id) / "session.json"
        if not path.is_file():
            raise KeyError(f"unknown session: {session_id}")
        return RatingSession.from_dict(json.loads(path.read_text(encoding="utf-8")))

    def records(self, session_id: str) -> list[RatingRecord]:
        log = self._session_dir(session_id) / "ratings.jsonl"
        if not log.is_file():
            return []
        return [
            RatingRecord.from_dict(json.loads(line))
            for line in log.read_text(encoding="utf-8").splitlines()
            if line.strip()
        ]

    def submit(
        self,
        session_id: str,
        task_id: str,
        rater_id: str,
        category: RatingCategory,
    ) -> RatingRecord:
        """Append one rating; duplicates per (task, rater) are rejected."""
        with self._lock:
            session = self.load(session_id)
            session.task_by_id(task_id)  # raises UnknownTaskError
            for existing in self.records(session_id):
                if existing.task_id == task_id and existing.rater_id == rater_id:
                    raise DuplicateRatingError(
                        f"task {task_id} already rated by {rater_id}"
                    )
            record = RatingRecord(
                task_id=task_id,
                rater_id=rater_id,
                category=category,
                timestamp=datetime.now(timezone.utc).isoformat(),
            )
            log = self._session_dir(session_id) / "ratings.jsonl"
            with open(log, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(record.as_dict()) + "\n")
            return record

    def scores(self, session_id: str) -> list[CombinationScore]:
        session = self.load(session_id)
        return compute_scores(self.records(session_id), session.tasks)
